#include "illiquid/arrivals.hpp"

#include "illiquid/quadrature.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace illiquid {

IntensityProfile IntensityProfile::power_blowup(double horizon, double kappa, double beta) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("intensity: horizon must be positive");
  }
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("intensity: kappa must be positive");
  }
  if (!(beta >= 1.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("intensity: beta must be >= 1 for an exploding cumulative intensity");
  }
  return IntensityProfile(horizon, kappa, beta, 1.0);
}

IntensityProfile IntensityProfile::scaled(double k) const {
  if (!(k >= 1.0) || !std::isfinite(k)) {
    throw std::invalid_argument("intensity: scale must be >= 1");
  }
  return IntensityProfile(horizon_, kappa_, beta_, scale_ * k);
}

void IntensityProfile::check_time(double t) const {
  if (!(t >= 0.0) || !(t < horizon_)) {
    throw std::domain_error("intensity: time must lie in [0, T)");
  }
}

double IntensityProfile::intensity(double t) const {
  check_time(t);
  return rate() / std::pow(horizon_ - t, beta_);
}

double IntensityProfile::cumulative(double t) const {
  check_time(t);
  return cumulative_between(0.0, t);
}

double IntensityProfile::cumulative_between(double t, double s) const {
  if (!(t >= 0.0) || !(s >= t) || !(s < horizon_)) {
    throw std::domain_error("intensity: need 0 <= t <= s < T");
  }
  if (beta_ == 1.0) {
    // ln((T-t)/(T-s)) = log1p((s-t)/(T-s))
    return rate() * std::log1p((s - t) / (horizon_ - s));
  }
  const double e = 1.0 - beta_;
  return rate() / (beta_ - 1.0) *
         (std::pow(horizon_ - s, e) - std::pow(horizon_ - t, e));
}

double IntensityProfile::inverse_cumulative(double level) const {
  if (!(level >= 0.0)) throw std::domain_error("intensity: level must be >= 0");
  double t;
  if (beta_ == 1.0) {
    t = -horizon_ * std::expm1(-level / rate());
  } else {
    const double e = 1.0 - beta_;
    const double base = level * (beta_ - 1.0) / rate() + std::pow(horizon_, e);
    t = horizon_ - std::pow(base, 1.0 / e);
  }
  if (t >= horizon_) t = std::nextafter(horizon_, 0.0);
  return std::max(t, 0.0);
}

double IntensityProfile::warp(double t) const { return -std::expm1(-cumulative(t)); }

double IntensityProfile::unwarp(double w) const {
  if (!(w >= 0.0) || !(w < 1.0)) throw std::domain_error("intensity: warped time must lie in [0,1)");
  return inverse_cumulative(-std::log1p(-w));
}

double cumulative_intensity(const IntensityProfile& prof, double t) { return prof.cumulative(t); }

double inverse_cumulative(const IntensityProfile& prof, double level) {
  return prof.inverse_cumulative(level);
}

double next_arrival_from_exponential(const IntensityProfile& prof, double t,
                                     double exponential_draw) {
  const double s = prof.inverse_cumulative(prof.cumulative(t) + exponential_draw);
  // Keep s strictly inside (t, T).
  if (s <= t) return std::nextafter(t, prof.horizon());
  return s;
}

double arrival_density(const IntensityProfile& prof, double t, double s) {
  return prof.intensity(s) * std::exp(-prof.cumulative_between(t, s));
}

std::vector<TimeNode> time_quadrature(const IntensityProfile& prof, double t, int n_nodes) {
  const auto& rule = quad::gauss_legendre_unit(n_nodes);
  const double base = prof.cumulative(t);
  std::vector<TimeNode> nodes;
  nodes.reserve(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double u = rule.nodes[i];
    const double s = prof.inverse_cumulative(base - std::log1p(-u));
    nodes.push_back({std::max(s, t), u, rule.weights[i]});
  }
  return nodes;
}

double scaled_family_series(const IntensityProfile& base, double t, double s) {
  const double mass = base.cumulative_between(t, s);
  if (!(mass > 0.0)) return std::numeric_limits<double>::infinity();
  return 1.0 / std::expm1(mass);
}

}  // namespace illiquid
