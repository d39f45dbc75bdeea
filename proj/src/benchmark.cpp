#include "illiquid/benchmark.hpp"

#include <algorithm>
#include <cmath>

namespace illiquid {

DualDensityParams DualDensityParams::from_model(const MarketModel& model) {
  if (model.has_jumps()) {
    throw UnsupportedModel("dual density: closed form covers the diffusion case only");
  }
  for (double c : model.volatility().values()) {
    if (c == 0.0) throw std::domain_error("dual density: volatility vanishes, theta = b/c undefined");
  }
  return DualDensityParams(
      combine(model.drift(), model.volatility(), [](double b, double c) { return b / c; }));
}

double DualDensityParams::integrated_theta_sq(double t) const {
  if (!(t >= 0.0) || !(t <= horizon())) throw std::domain_error("dual density: t outside [0, T]");
  return theta_.integral_of_square(t, horizon());
}

double supersolution(const UtilitySpec& utility, const DualDensityParams& params, double t, double x) {
  const double theta_sq = params.integrated_theta_sq(t);
  if (utility.is_log()) return utility.evaluate(x) + 0.5 * theta_sq;
  const double g = utility.gamma();
  return utility.evaluate(x) * std::exp(g / (2.0 * (1.0 - g)) * theta_sq);
}

MertonSolution merton_value(const UtilitySpec& utility, const MarketModel& model, double t, double x) {
  if (model.has_jumps()) {
    throw UnsupportedModel("merton: closed form covers the diffusion case only");
  }
  if (!(t >= 0.0) || !(t <= model.horizon())) throw std::domain_error("merton: t outside [0, T]");
  const double risk_aversion = 1.0 - utility.gamma();  // 1 for log
  auto policy_of = [risk_aversion](double b, double c) {
    if (c == 0.0) return b > 0.0 ? 1.0 : 0.0;
    return std::clamp(b / (risk_aversion * c * c), 0.0, 1.0);
  };
  MertonSolution sol;
  sol.policy = combine(model.drift(), model.volatility(), policy_of);

  // Integrate the maximized Hamiltonian pi b - (1-gamma)/2 pi^2 c^2 piecewise.
  double growth = 0.0;
  const auto merged = combine(model.drift(), model.volatility(), [](double b, double) { return b; });
  const auto vol = combine(model.drift(), model.volatility(), [](double, double c) { return c; });
  sol.policy.for_each_piece(t, model.horizon(), [&](double lo, double hi, double pi) {
    const double mid = 0.5 * (lo + hi);
    const double b = merged(mid);
    const double c = vol(mid);
    growth += (pi * b - 0.5 * risk_aversion * pi * pi * c * c) * (hi - lo);
  });
  if (utility.is_log()) {
    sol.value = utility.evaluate(x) + growth;
  } else {
    sol.value = utility.evaluate(x) * std::exp(utility.gamma() * growth);
  }
  return sol;
}

}  // namespace illiquid
