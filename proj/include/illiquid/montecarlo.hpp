#pragma once

#include "illiquid/arrivals.hpp"
#include "illiquid/dp.hpp"
#include "illiquid/market.hpp"
#include "illiquid/utility.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace illiquid {

/// pi(t, x) in [0,1].
using FeedbackPolicy = std::function<double(double, double)>;

FeedbackPolicy feedback(const PolicySurface& policy);
FeedbackPolicy constant_policy(double pi);

struct SimConfig {
  long n_paths = 10000;
  std::uint64_t seed = 1;
  double initial_wealth = 1.0;
  double time_cutoff = 1e-9;     ///< stop once T - tau_n falls below this
  long max_arrivals = 1000000;
  int threads = 1;               ///< 0 = hardware

  void validate() const;
};

struct PathOutcome {
  double terminal_wealth = 0.0;
  long n_arrivals = 0;
  double min_wealth = 0.0;  ///< smallest X_{tau_n} along the path
};

struct SimResult {
  long n_paths = 0;
  double mean_utility = 0.0;
  double std_error = 0.0;
  double mean_wealth = 0.0;
  double wealth_std_error = 0.0;
  double mean_arrivals = 0.0;
  long max_arrivals = 0;
  long clamped_paths = 0;          ///< paths whose X_T was below 1e-300
  double min_wealth = 0.0;         ///< smallest X_{tau_n} seen on any path
  std::vector<double> quantile_levels;
  std::vector<double> wealth_quantiles;
};

/// Generator for path `index`: a substream fully determined by (seed, index).
std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t index);

/// Wealth recursion X_{n+1} = X_n (1 + pi(tau_n, X_n) Z_{n+1}) until the
/// truncation rule fires; wealth is frozen from then on.
PathOutcome simulate_path(const FeedbackPolicy& policy, const MarketModel& model, const IntensityProfile& prof,
                          const SimConfig& cfg, std::mt19937_64& rng);

SimResult estimate_expected_utility(const FeedbackPolicy& policy, const UtilitySpec& u, const MarketModel& model,
                                    const IntensityProfile& prof, const SimConfig& cfg);

/// Sum with a fixed binary reduction tree over the index range.
double pairwise_sum(const double* data, std::size_t n);

struct SweepRow {
  double k = 1.0;
  double v_lambda = 0.0;
  double v_merton = 0.0;
  double abs_gap = 0.0;  ///< |V_merton - V_lambda|
  double rel_gap = 0.0;  ///< abs_gap / |V_merton|
  int dp_iterations = 0;
  double dp_residual = 0.0;
  bool converged = false;
  bool summable = false;  ///< the k-scaled family has a finite arrival series
  double wall_seconds = 0.0;
};

/// V^{lambda_k}(0, x0) from the solver against the Merton value, per k.
std::vector<SweepRow> convergence_sweep(const UtilitySpec& u, const MarketModel& model,
                                        const IntensityProfile& base_prof, const std::vector<double>& k_list,
                                        double x0, const SolverConfig& solver_cfg);

/// Columns: k, V_lambda, V_merton, abs_gap, rel_gap, dp_iterations,
/// dp_residual, wall_seconds. Without timing the last column is "nan" so the
/// file depends only on its inputs.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, bool with_timing,
                     const std::vector<std::string>& preamble = {});

}  // namespace illiquid
