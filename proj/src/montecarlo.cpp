#include "illiquid/montecarlo.hpp"

#include "illiquid/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace illiquid {

namespace {

constexpr double kWealthFloor = 1e-300;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
  std::size_t workers = threads <= 0 ? std::max(1u, std::thread::hardware_concurrency())
                                     : static_cast<std::size_t>(threads);
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

FeedbackPolicy feedback(const PolicySurface& policy) {
  return [policy](double t, double x) { return policy.lookup(t, x); };
}

FeedbackPolicy constant_policy(double pi) {
  if (!(pi >= 0.0 && pi <= 1.0)) throw std::invalid_argument("constant_policy: pi must lie in [0, 1]");
  return [pi](double, double) { return pi; };
}

void SimConfig::validate() const {
  if (n_paths < 1) throw std::invalid_argument("simulation: n_paths must be at least 1");
  if (!(initial_wealth > 0.0)) throw std::invalid_argument("simulation: initial_wealth must be positive");
  if (!(time_cutoff > 0.0)) throw std::invalid_argument("simulation: time_cutoff must be positive");
  if (max_arrivals < 1) throw std::invalid_argument("simulation: max_arrivals must be at least 1");
  if (threads < 0) throw std::invalid_argument("simulation: threads must be nonnegative");
}

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

PathOutcome simulate_path(const FeedbackPolicy& policy, const MarketModel& model, const IntensityProfile& prof,
                          const SimConfig& cfg, std::mt19937_64& rng) {
  const double horizon = prof.horizon();
  double tau = 0.0;
  double x = cfg.initial_wealth;
  PathOutcome out{x, 0, x};
  while (horizon - tau >= cfg.time_cutoff && out.n_arrivals < cfg.max_arrivals) {
    const double pi = std::clamp(policy(tau, x), 0.0, 1.0);
    const double next = sample_next_arrival(prof, tau, rng);
    const double z = return_law(model, tau, next).sample(rng);
    x *= 1.0 + pi * z;
    tau = next;
    ++out.n_arrivals;
    out.min_wealth = std::min(out.min_wealth, x);
  }
  out.terminal_wealth = x;
  return out;
}

double pairwise_sum(const double* data, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

SimResult estimate_expected_utility(const FeedbackPolicy& policy, const UtilitySpec& u, const MarketModel& model,
                                    const IntensityProfile& prof, const SimConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.n_paths);
  std::vector<double> utility(n), wealth(n), arrivals(n), lowest(n);
  std::vector<char> clamped(n, 0);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    auto rng = path_rng(cfg.seed, i);
    const PathOutcome p = simulate_path(policy, model, prof, cfg, rng);
    double xt = p.terminal_wealth;
    if (xt < kWealthFloor) {
      xt = kWealthFloor;
      clamped[i] = 1;
    }
    utility[i] = u.evaluate(xt);
    wealth[i] = p.terminal_wealth;
    arrivals[i] = static_cast<double>(p.n_arrivals);
    lowest[i] = p.min_wealth;
  });

  auto mean_and_se = [n](std::vector<double>& v, double& mean, double& se) {
    mean = pairwise_sum(v.data(), n) / static_cast<double>(n);
    if (n < 2) {
      se = 0.0;
      return;
    }
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    const double var = pairwise_sum(sq.data(), n) / static_cast<double>(n - 1);
    se = std::sqrt(var / static_cast<double>(n));
  };

  SimResult r;
  r.n_paths = cfg.n_paths;
  mean_and_se(utility, r.mean_utility, r.std_error);
  mean_and_se(wealth, r.mean_wealth, r.wealth_std_error);
  r.mean_arrivals = pairwise_sum(arrivals.data(), n) / static_cast<double>(n);
  r.max_arrivals = static_cast<long>(*std::max_element(arrivals.begin(), arrivals.end()));
  r.clamped_paths = std::count(clamped.begin(), clamped.end(), 1);
  r.min_wealth = *std::min_element(lowest.begin(), lowest.end());

  r.quantile_levels = {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99};
  std::sort(wealth.begin(), wealth.end());
  for (double q : r.quantile_levels) {
    // Linear interpolation between order statistics.
    const double pos = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double f = pos - static_cast<double>(lo);
    r.wealth_quantiles.push_back((1.0 - f) * wealth[lo] + f * wealth[hi]);
  }
  return r;
}

std::vector<SweepRow> convergence_sweep(const UtilitySpec& u, const MarketModel& model,
                                        const IntensityProfile& base_prof, const std::vector<double>& k_list,
                                        double x0, const SolverConfig& solver_cfg) {
  if (k_list.empty()) throw std::invalid_argument("convergence_sweep: empty k list");
  for (std::size_t i = 1; i < k_list.size(); ++i)
    if (!(k_list[i] > k_list[i - 1])) throw std::invalid_argument("convergence_sweep: k list must increase");
  const double merton = merton_value(u, model, 0.0, x0).value;
  std::vector<SweepRow> rows;
  for (double k : k_list) {
    const auto start = std::chrono::steady_clock::now();
    const IntensityProfile prof = base_prof.scaled(k);
    DpSolver solver(model, prof, u, solver_cfg);
    const IterationResult r = solver.value_iterate();
    SweepRow row;
    row.k = k;
    row.v_lambda = r.value.at_node(0, x0);
    row.v_merton = merton;
    row.abs_gap = std::abs(merton - row.v_lambda);
    row.rel_gap = row.abs_gap / std::abs(merton);
    row.dp_iterations = r.iterations;
    row.dp_residual = r.residual;
    row.converged = r.converged;
    row.summable = std::isfinite(scaled_family_series(prof, 0.0, 0.5 * prof.horizon()));
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, bool with_timing,
                     const std::vector<std::string>& preamble) {
  for (const auto& line : preamble) os << "# " << line << '\n';
  os << "k,V_lambda,V_merton,abs_gap,rel_gap,dp_iterations,dp_residual,wall_seconds\n";
  for (const auto& r : rows) {
    os << fmt(r.k) << ',' << fmt(r.v_lambda) << ',' << fmt(r.v_merton) << ',' << fmt(r.abs_gap) << ','
       << fmt(r.rel_gap) << ',' << r.dp_iterations << ',' << fmt(r.dp_residual) << ','
       << (with_timing ? fmt(r.wall_seconds) : std::string("nan")) << '\n';
  }
}

}  // namespace illiquid
