#pragma once

#include "illiquid/arrivals.hpp"
#include "illiquid/market.hpp"
#include "illiquid/utility.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace illiquid {

enum class Representation { separable, grid };

std::string to_string(Representation r);

struct SolverConfig {
  Representation representation = Representation::separable;
  int time_nodes = 100;            ///< warped-time nodes w_j = j / time_nodes
  int wealth_nodes = 121;          ///< grid mode only
  double wealth_min = 0.01;
  double wealth_max = 100.0;
  int time_quadrature_nodes = 64;
  int return_quadrature_nodes = 40;
  double tolerance = 1e-6;         ///< relative sup-norm residual
  int max_iterations = 500;
  double pi_tolerance = 1e-6;      ///< golden-section bracket width
  int threads = 1;                 ///< worker threads for operator application; 0 = hardware

  void validate() const;
};

/// Nodes shared by value and policy surfaces: a uniform grid in warped time
/// w = 1 - exp(-Lambda(t)) with the horizon pinned at w = 1, and in grid
/// mode a log-spaced wealth grid.
struct Support {
  Support(IntensityProfile prof, IntensityProfile warp_prof)
      : profile(prof), warp_profile(warp_prof) {}

  Representation representation = Representation::separable;
  IntensityProfile profile;       ///< arrival intensity used by the operator
  IntensityProfile warp_profile;  ///< same shape at unit scale; defines w
  std::vector<double> warped;   ///< w_j, j < N
  std::vector<double> times;    ///< t_j
  std::vector<double> wealth;   ///< x_i (grid mode); empty when separable
  double log_wealth_min = 0.0;
  double log_wealth_step = 0.0;

  std::size_t time_count() const { return warped.size(); }
  std::size_t wealth_count() const { return wealth.empty() ? 1 : wealth.size(); }
  std::size_t size() const { return time_count() * wealth_count(); }
  double log_wealth(std::size_t i) const { return log_wealth_min + static_cast<double>(i) * log_wealth_step; }

  double warp(double t) const { return warp_profile.warp(t); }
  /// Warped time of the next arrival when the quadrature variable is u and
  /// the current warped time is w. For a profile scaled by k,
  /// 1 - w' = (1 - w)(1 - u)^(1/k).
  double next_warped(double w, double u) const;
  /// Cell index a and weight f with w = (a + f) / N, a <= N - 1.
  void locate(double w, std::size_t& cell, double& frac) const;

  static std::shared_ptr<const Support> make(const IntensityProfile& profile, const SolverConfig& cfg);
};

/// v(t, x) on a Support. Separable: phi_j with v = phi U (power) or U + phi
/// (log). Grid: v_{j,i} row-major over (warped time, wealth).
class ValueSurface {
 public:
  ValueSurface(std::shared_ptr<const Support> support, UtilitySpec utility, std::vector<double> values);

  /// v_0 = U.
  static ValueSurface terminal(std::shared_ptr<const Support> support, const UtilitySpec& utility);

  Representation representation() const { return support_->representation; }
  const Support& support() const { return *support_; }
  const std::shared_ptr<const Support>& support_ptr() const { return support_; }
  const UtilitySpec& utility() const { return utility_; }
  std::span<const double> values() const { return values_; }

  /// phi at the pinned horizon: 1 for power, 0 for log.
  double boundary_phi() const { return utility_.is_log() ? 0.0 : 1.0; }

  /// Value at time node j and wealth x (grid mode: x interpolated).
  double at_node(std::size_t j, double x) const;
  double at_warped(double w, double x) const;
  double operator()(double t, double x) const;

  /// Separable only: phi interpolated linearly in warped time.
  double phi_at_warped(double w) const;

  /// Proportions that attained each node's maximum when this surface was
  /// produced by the operator; empty for the terminal surface.
  std::span<const double> argmax_hint() const { return hint_; }

 private:
  friend class DpSolver;

  double slice_value(std::span<const double> slice, double log_x) const;

  std::shared_ptr<const Support> support_;
  UtilitySpec utility_;
  std::vector<double> values_;
  std::vector<double> hint_;
};

/// Feedback proportion pi(t, x) in [0,1] on a Support.
class PolicySurface {
 public:
  PolicySurface(std::shared_ptr<const Support> support, std::vector<double> values);

  const Support& support() const { return *support_; }
  std::span<const double> values() const { return values_; }

  /// Separable: linear in warped time. Grid: nearest time slice, linear in ln x.
  double lookup(double t, double x) const;

 private:
  std::shared_ptr<const Support> support_;
  std::vector<double> values_;
};

double policy_lookup(const PolicySurface& policy, double t, double x);

struct PiChoice {
  double pi = 0.0;        ///< smallest maximizer (up to rounding ties)
  double value = 0.0;     ///< the maximum
  double attained = 0.0;  ///< the evaluated point where `value` was found
};

struct OperatorResult {
  ValueSurface value;
  PolicySurface policy;
};

struct IterationResult {
  ValueSurface value;
  PolicySurface policy;  ///< argmax of L applied to `value` when converged
  int iterations = 0;    ///< operator applications performed
  /// ||Lv - v|| / (1 + ||Lv||) for the returned v when converged; otherwise
  /// the last step size.
  double residual = 0.0;
  bool converged = false;
};

/// Called after every operator application with (m, v_m, policy, residual).
using IterationObserver =
    std::function<void(int, const ValueSurface&, const PolicySurface&, double)>;

/// The one-step operator (Lw)(t,x) = sup_pi E[w(tau', x(1 + pi Z))] and its
/// fixed-point iteration, for a fixed market, intensity and utility.
class DpSolver {
 public:
  DpSolver(MarketModel model, IntensityProfile profile, UtilitySpec utility, SolverConfig cfg);
  ~DpSolver();
  DpSolver(DpSolver&&) noexcept;
  DpSolver& operator=(DpSolver&&) noexcept;

  const Support& support() const { return *support_; }
  const std::shared_ptr<const Support>& support_ptr() const { return support_; }
  const MarketModel& model() const { return model_; }
  const IntensityProfile& profile() const { return profile_; }
  const UtilitySpec& utility() const { return utility_; }
  const SolverConfig& config() const { return cfg_; }

  ValueSurface terminal_value() const;

  /// E over the next arrival and return of w(s, x(1 + pi z)), at any t < T.
  double inner_objective(const ValueSurface& w, double t, double x, double pi) const;
  PiChoice maximize_over_pi(const ValueSurface& w, double t, double x) const;

  OperatorResult apply_operator(const ValueSurface& w) const;
  IterationResult value_iterate(const IterationObserver& observer = {}) const;
  /// v_m: exactly m operator applications to U.
  ValueSurface finite_horizon_value(int m) const;

 private:
  struct Stencil;

  MarketModel model_;
  IntensityProfile profile_;
  UtilitySpec utility_;
  SolverConfig cfg_;
  std::shared_ptr<const Support> support_;
  std::unique_ptr<Stencil> stencil_;
};

/// Golden-section maximization of a concave function on [0,1] with
/// endpoint checks and optional extra candidates; ties go to the smallest pi.
PiChoice maximize_concave_unit(const std::function<double(double)>& f, double tolerance,
                               std::span<const double> extra_candidates = {});

// Free-function forms of the DpSolver calls.
IterationResult value_iterate(const UtilitySpec& u, const MarketModel& model,
                              const IntensityProfile& prof, const SolverConfig& cfg);
ValueSurface finite_horizon_value(int m, const UtilitySpec& u, const MarketModel& model,
                                  const IntensityProfile& prof, const SolverConfig& cfg);

/// CSV layout: header "w,t,phi" (separable) or "w,t,<x_0>,...,<x_M>" (grid),
/// one row per warped-time node. Lines in `preamble` are written first as
/// '#' comments.
void write_surface_csv(std::ostream& os, const ValueSurface& v, const std::vector<std::string>& preamble = {});
void write_policy_csv(std::ostream& os, const PolicySurface& p, const std::vector<std::string>& preamble = {});
/// key=value sidecar describing the warp, utility and solver settings.
void write_surface_metadata(std::ostream& os, const ValueSurface& v, const SolverConfig& cfg);

}  // namespace illiquid
