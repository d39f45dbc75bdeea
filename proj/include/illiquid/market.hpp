#pragma once

#include "illiquid/utility.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace illiquid {

/// A piecewise-constant function on [0, T] defined by interior breakpoints.
class PiecewiseConstant {
 public:
  PiecewiseConstant() = default;
  /// breaks: strictly increasing interior breakpoints in (0, horizon);
  /// values: one per piece (breaks.size() + 1).
  PiecewiseConstant(double horizon, std::vector<double> breaks, std::vector<double> values);
  static PiecewiseConstant constant(double horizon, double value);

  double horizon() const { return horizon_; }
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(double t) const;
  /// int_a^b f(u) du.
  double integral(double a, double b) const;
  /// int_a^b f(u)^2 du.
  double integral_of_square(double a, double b) const;
  /// int_a^b |f(u)| du.
  double integral_of_abs(double a, double b) const;

  /// Apply op(lo, hi, value) to each piece overlapping [a, b].
  template <typename Op>
  void for_each_piece(double a, double b, Op op) const {
    double lo = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double hi = i < breaks_.size() ? breaks_[i] : horizon_;
      const double x0 = std::max(lo, a);
      const double x1 = std::min(hi, b);
      if (x1 > x0) op(x0, x1, values_[i]);
      lo = hi;
    }
  }

 private:
  double horizon_ = 0.0;
  std::vector<double> breaks_;
  std::vector<double> values_;
};

/// ln(1 + Y) ~ Normal(log_mean, log_stdev^2).
struct LogNormalJumps {
  double log_mean = 0.0;
  double log_stdev = 0.0;
};

/// 1 + Y = exp(-E) with E ~ Exponential(rate): downward jumps with mass
/// arbitrarily close to -1.
struct LogExponentialJumps {
  double rate = 1.0;
};

using JumpSizeLaw = std::variant<LogNormalJumps, LogExponentialJumps>;

/// E[Y] for the jump size law.
double jump_mean(const JumpSizeLaw& law);

/// Compound-Poisson jump component.
struct JumpSpec {
  PiecewiseConstant rate;
  JumpSizeLaw size_law;
  double q = 2.0;            ///< moment order for the upward integrability check
  std::optional<double> r;   ///< moment order (< 0) for the downward check
};

class MarketModel {
 public:
  MarketModel(PiecewiseConstant drift, PiecewiseConstant volatility,
              std::optional<JumpSpec> jumps = std::nullopt);
  static MarketModel constant(double horizon, double drift, double volatility);

  double horizon() const { return drift_.horizon(); }
  const PiecewiseConstant& drift() const { return drift_; }
  const PiecewiseConstant& volatility() const { return volatility_; }
  const std::optional<JumpSpec>& jumps() const { return jumps_; }
  bool has_jumps() const { return jumps_.has_value(); }

 private:
  PiecewiseConstant drift_;
  PiecewiseConstant volatility_;
  std::optional<JumpSpec> jumps_;
};

/// One atom of a discretized return law: P(Z = z) = prob.
struct ReturnNode {
  double prob;
  double z;
};

/// Law of the return Z_{t,s} = S_s / S_t - 1.
struct ReturnLaw {
  double t = 0.0;
  double s = 0.0;
  double log_mean = 0.0;    ///< int_t^s (b - c^2/2) du
  double log_var = 0.0;     ///< int_t^s c^2 du
  double jump_mass = 0.0;   ///< expected jump count int_t^s rate du
  std::optional<JumpSizeLaw> jump_law;

  bool degenerate() const { return s == t; }

  /// Atoms approximating the law: Gauss-Hermite over the Gaussian factor,
  /// mixed over the jump count truncated at Poisson tail mass < 1e-12.
  std::vector<ReturnNode> discretize(int hermite_order = 40) const;

  template <typename Rng>
  double sample(Rng& rng) const;
};

ReturnLaw return_law(const MarketModel& model, double t, double s);

/// E[(1 + pi Z)^gamma]. Returns +infinity when the integral diverges (gamma < 0).
double expected_power_return(const ReturnLaw& law, double pi, double gamma, int hermite_order = 40);
double expected_power_return(const std::vector<ReturnNode>& atoms, double pi, double gamma);

/// E[ln(1 + pi Z)]; -infinity when the integral diverges.
double expected_log_return(const ReturnLaw& law, double pi, int hermite_order = 40);
double expected_log_return(const std::vector<ReturnNode>& atoms, double pi);

/// Largest jump count kept for a Poisson(mass) mixture.
int jump_count_cutoff(double mass);

struct AssumptionCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;  ///< the computed integral or bound
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;

  bool all_passed() const;
  const AssumptionCheck* first_failure() const;
  const AssumptionCheck* find(const std::string& name) const;
};

AssumptionReport validate_assumptions(const MarketModel& model, const UtilitySpec& utility);

// ---------------------------------------------------------------------------

template <typename Rng>
double ReturnLaw::sample(Rng& rng) const {
  if (degenerate()) return 0.0;
  double log_return = log_mean;
  if (log_var > 0.0) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(log_var));
    log_return += gauss(rng);
  }
  if (jump_law && jump_mass > 0.0) {
    log_return -= jump_mass * jump_mean(*jump_law);
    std::poisson_distribution<long> count(jump_mass);
    const long n = count(rng);
    for (long i = 0; i < n; ++i) {
      if (const auto* ln = std::get_if<LogNormalJumps>(&*jump_law)) {
        std::normal_distribution<double> jump(ln->log_mean, ln->log_stdev);
        log_return += ln->log_stdev > 0.0 ? jump(rng) : ln->log_mean;
      } else {
        const auto& le = std::get<LogExponentialJumps>(*jump_law);
        std::exponential_distribution<double> jump(le.rate);
        log_return -= jump(rng);
      }
    }
  }
  return std::expm1(log_return);
}

}  // namespace illiquid
