#pragma once

#include <random>
#include <vector>

namespace illiquid {

/// Arrival intensity lambda(t) = scale * kappa / (T - t)^beta on [0, T),
/// beta >= 1 so that the cumulative intensity explodes at the horizon.
class IntensityProfile {
 public:
  static IntensityProfile power_blowup(double horizon, double kappa, double beta);

  /// The profile k * lambda(t); k >= 1 multiplies any existing scale.
  IntensityProfile scaled(double k) const;

  double horizon() const { return horizon_; }
  double kappa() const { return kappa_; }
  double beta() const { return beta_; }
  double scale() const { return scale_; }

  double intensity(double t) const;
  /// Lambda(t) = int_0^t lambda(u) du.
  double cumulative(double t) const;
  /// Lambda(s) - Lambda(t), computed without cancellation near the horizon.
  double cumulative_between(double t, double s) const;
  /// The time t with Lambda(t) = level; tends to T as level grows.
  double inverse_cumulative(double level) const;

  /// Warped time w = 1 - exp(-Lambda(t)) in [0, 1).
  double warp(double t) const;
  double unwarp(double w) const;

 private:
  IntensityProfile(double horizon, double kappa, double beta, double scale)
      : horizon_(horizon), kappa_(kappa), beta_(beta), scale_(scale) {}

  double rate() const { return scale_ * kappa_; }
  void check_time(double t) const;

  double horizon_;
  double kappa_;
  double beta_;
  double scale_;
};

double cumulative_intensity(const IntensityProfile& prof, double t);
double inverse_cumulative(const IntensityProfile& prof, double level);

/// Next arrival after t given a unit-exponential draw.
double next_arrival_from_exponential(const IntensityProfile& prof, double t,
                                     double exponential_draw);

template <typename Rng>
double sample_next_arrival(const IntensityProfile& prof, double t, Rng& rng) {
  std::exponential_distribution<double> unit(1.0);
  return next_arrival_from_exponential(prof, t, unit(rng));
}

/// Density of the next arrival at s given an arrival at t.
double arrival_density(const IntensityProfile& prof, double t, double s);

struct TimeNode {
  double s;       ///< arrival time
  double u;       ///< 1 - exp(-(Lambda(s) - Lambda(t))), the quadrature variable
  double weight;  ///< probability weight
};

/// Nodes and weights for E[g(tau_next) | tau = t] via u = 1 - exp(-(Lambda(s)-Lambda(t))).
std::vector<TimeNode> time_quadrature(const IntensityProfile& prof, double t, int n_nodes);

/// sum_{k>=1} exp(-k (Lambda(s) - Lambda(t))) for the family k * lambda; finite
/// whenever t < s.
double scaled_family_series(const IntensityProfile& base, double t, double s);

}  // namespace illiquid
