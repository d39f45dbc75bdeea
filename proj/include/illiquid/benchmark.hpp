#pragma once

#include "illiquid/market.hpp"
#include "illiquid/utility.hpp"

#include <stdexcept>

namespace illiquid {

/// Raised when a closed form is requested for a model it does not cover.
class UnsupportedModel : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Market price of risk theta = b / c of the Gaussian dual density
/// Y_{t,T} = exp(-int theta dW - 1/2 int theta^2 du).
class DualDensityParams {
 public:
  static DualDensityParams from_model(const MarketModel& model);

  const PiecewiseConstant& theta() const { return theta_; }
  double horizon() const { return theta_.horizon(); }
  /// int_t^T theta(u)^2 du.
  double integrated_theta_sq(double t) const;

 private:
  explicit DualDensityParams(PiecewiseConstant theta) : theta_(std::move(theta)) {}

  PiecewiseConstant theta_;
};

/// f(t,x) = inf_{y>0} { E[U~(y Y_{t,T})] + x y }, in closed form for CRRA.
double supersolution(const UtilitySpec& utility, const DualDensityParams& params, double t, double x);

struct MertonSolution {
  double value = 0.0;
  PiecewiseConstant policy;  ///< optimal proportion pi*(s) in [0,1]
};

/// Continuous-trading value under the no-short-sale constraint pi in [0,1].
MertonSolution merton_value(const UtilitySpec& utility, const MarketModel& model, double t, double x);

/// Combine two piecewise-constant functions on the union of their meshes.
template <typename Op>
PiecewiseConstant combine(const PiecewiseConstant& a, const PiecewiseConstant& b, Op op) {
  std::vector<double> breaks;
  std::vector<double> values;
  a.for_each_piece(0.0, a.horizon(), [&](double lo, double hi, double av) {
    b.for_each_piece(lo, hi, [&](double lo2, double, double bv) {
      if (lo2 > 0.0) breaks.push_back(lo2);
      values.push_back(op(av, bv));
    });
  });
  return PiecewiseConstant(a.horizon(), std::move(breaks), std::move(values));
}

}  // namespace illiquid
