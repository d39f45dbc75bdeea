#include "illiquid/experiment.hpp"

#include "illiquid/benchmark.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#ifndef ILLIQUID_VERSION
#define ILLIQUID_VERSION "0.0.0"
#endif

namespace illiquid {

namespace fs = std::filesystem;

namespace {

std::ostream& log_of(const RunOptions& o) { return o.log ? *o.log : std::cerr; }

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

fs::path output_dir(const ExperimentConfig& cfg) {
  fs::path dir(cfg.output_directory);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

// Key/value summary, written as a two-column CSV.
class Summary {
 public:
  void add(const std::string& key, const std::string& value) { rows_.emplace_back(key, value); }
  void add(const std::string& key, double value) { add(key, fmt(value)); }
  void add(const std::string& key, long value) { add(key, std::to_string(value)); }
  void add(const std::string& key, int value) { add(key, std::to_string(value)); }

  void write(const fs::path& p, const std::string& header) const {
    auto out = open_out(p);
    out << "# " << header << '\n' << "key,value\n";
    for (const auto& [k, v] : rows_) out << k << ',' << v << '\n';
  }

 private:
  std::vector<std::pair<std::string, std::string>> rows_;
};

bool check_assumptions(const ExperimentConfig& cfg, const RunOptions& opts) {
  const AssumptionReport report = validate_assumptions(cfg.market(), cfg.utility());
  if (report.all_passed()) return true;
  auto& log = log_of(opts);
  log << "assumption check failed:\n";
  for (const auto& c : report.checks)
    if (!c.passed) log << "  " << c.name << " (value " << fmt(c.value) << "): " << c.detail << '\n';
  return false;
}

double optional_bound(const std::function<double()>& f) {
  try {
    return f();
  } catch (const UnsupportedModel&) {
    return std::nan("");
  }
}

template <typename Body>
int guarded(const RunOptions& opts, Body body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log_of(opts) << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    log_of(opts) << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

const char* version() { return ILLIQUID_VERSION; }

ExperimentConfig apply_overrides(ExperimentConfig cfg, const RunOptions& opts) {
  if (opts.output_directory) cfg.output_directory = *opts.output_directory;
  if (opts.seed) cfg.simulation.seed = *opts.seed;
  if (opts.k_list) {
    if (opts.k_list->empty()) throw ConfigError("--k-list", "must not be empty");
    for (std::size_t i = 0; i < opts.k_list->size(); ++i) {
      const double k = (*opts.k_list)[i];
      if (!(k >= 1.0)) throw ConfigError("--k-list", "entries must be >= 1");
      if (i && !(k > (*opts.k_list)[i - 1])) throw ConfigError("--k-list", "must be increasing");
    }
    cfg.k_list = *opts.k_list;
  }
  if (opts.paths) {
    if (*opts.paths < 1) throw ConfigError("--paths", "must be at least 1");
    cfg.simulation.n_paths = *opts.paths;
  }
  if (opts.m_max) {
    if (*opts.m_max < 0) throw ConfigError("--m-max", "must be nonnegative");
    cfg.m_max = *opts.m_max;
  }
  return cfg;
}

std::string provenance_line(const ExperimentConfig& cfg) {
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.canonical())));
  return std::string("illiquid ") + version() + " config_hash=" + hex;
}

int run_solve(const ExperimentConfig& base, const RunOptions& opts) {
  return guarded(opts, [&] {
    const ExperimentConfig cfg = apply_overrides(base, opts);
    if (!check_assumptions(cfg, opts)) return int(kExitAssumptionViolation);
    const auto model = cfg.market();
    const auto u = cfg.utility();
    const SolverConfig scfg = cfg.solver_config();
    DpSolver solver(model, cfg.intensity(), u, scfg);
    const IterationResult r = solver.value_iterate();
    const double x0 = cfg.simulation.initial_wealth;

    const std::string header = provenance_line(cfg);
    const auto dir = output_dir(cfg);
    {
      auto out = open_out(dir / "value_surface.csv");
      write_surface_csv(out, r.value, {header});
    }
    {
      auto out = open_out(dir / "value_surface.meta");
      out << "# " << header << '\n';
      write_surface_metadata(out, r.value, scfg);
    }
    {
      auto out = open_out(dir / "policy_surface.csv");
      write_policy_csv(out, r.policy, {header});
    }
    const double v_star = r.value.at_node(0, x0);
    const double f = optional_bound(
        [&] { return supersolution(u, DualDensityParams::from_model(model), 0.0, x0); });
    const double merton = optional_bound([&] { return merton_value(u, model, 0.0, x0).value; });
    Summary s;
    s.add("initial_wealth", x0);
    s.add("v_star", v_star);
    s.add("utility_x0", u.evaluate(x0));
    s.add("supersolution", f);
    s.add("merton_value", merton);
    s.add("pi_at_start", r.policy.lookup(0.0, x0));
    s.add("iterations", r.iterations);
    s.add("residual", r.residual);
    s.add("converged", std::string(r.converged ? "true" : "false"));
    s.write(dir / "solve_summary.csv", header);

    log_of(opts) << "v*(0," << fmt(x0) << ") = " << fmt(v_star) << " after " << r.iterations
                 << " iterations, residual " << fmt(r.residual) << '\n';
    if (!r.converged) {
      log_of(opts) << "not converged within " << scfg.max_iterations << " iterations\n";
      return int(kExitNotConverged);
    }
    return int(kExitOk);
  });
}

int run_simulate(const ExperimentConfig& base, const RunOptions& opts) {
  return guarded(opts, [&] {
    const ExperimentConfig cfg = apply_overrides(base, opts);
    if (!check_assumptions(cfg, opts)) return int(kExitAssumptionViolation);
    const auto model = cfg.market();
    const auto prof = cfg.intensity();
    const auto u = cfg.utility();
    const double x0 = cfg.simulation.initial_wealth;

    FeedbackPolicy policy;
    double reference;
    std::string reference_kind;
    bool converged = true;
    if (opts.zero_policy) {
      policy = constant_policy(0.0);
      reference = u.evaluate(x0);
      reference_kind = "utility_x0";
    } else {
      DpSolver solver(model, prof, u, cfg.solver_config());
      IterationResult r = solver.value_iterate();
      converged = r.converged;
      reference = r.value.at_node(0, x0);
      reference_kind = "v_star";
      policy = feedback(r.policy);
    }
    SimConfig sim = cfg.simulation;
    sim.seed = derive_seed(cfg.simulation.seed, "montecarlo");
    const SimResult res = estimate_expected_utility(policy, u, model, prof, sim);
    const double dev = std::abs(res.mean_utility - reference);
    const bool pass = dev <= 3.0 * res.std_error;

    Summary s;
    s.add("paths", res.n_paths);
    s.add("policy", std::string(opts.zero_policy ? "zero" : "solved"));
    s.add("mean_utility", res.mean_utility);
    s.add("std_error", res.std_error);
    s.add("mean_wealth", res.mean_wealth);
    s.add("wealth_std_error", res.wealth_std_error);
    s.add("mean_arrivals", res.mean_arrivals);
    s.add("max_arrivals", res.max_arrivals);
    s.add("clamped_paths", res.clamped_paths);
    s.add("min_wealth", res.min_wealth);
    for (std::size_t i = 0; i < res.quantile_levels.size(); ++i) {
      std::ostringstream key;
      key << "wealth_q" << std::setw(2) << std::setfill('0') << std::lround(res.quantile_levels[i] * 100);
      s.add(key.str(), res.wealth_quantiles[i]);
    }
    s.add("reference_kind", reference_kind);
    s.add("reference", reference);
    s.add("abs_deviation", dev);
    s.add("verdict", std::string(pass ? "PASS" : "FAIL"));
    const std::string header = provenance_line(cfg);
    s.write(output_dir(cfg) / "simulation.csv", header);

    log_of(opts) << "E[U(X_T)] = " << fmt(res.mean_utility) << " +- " << fmt(res.std_error) << ", "
                 << reference_kind << " = " << fmt(reference) << ": " << (pass ? "PASS" : "FAIL") << '\n';
    return converged ? int(kExitOk) : int(kExitNotConverged);
  });
}

int run_converge(const ExperimentConfig& base, const RunOptions& opts) {
  return guarded(opts, [&] {
    const ExperimentConfig cfg = apply_overrides(base, opts);
    if (!check_assumptions(cfg, opts)) return int(kExitAssumptionViolation);
    if (cfg.market().has_jumps())
      throw ConfigError("jumps.enabled", "the convergence sweep needs the continuous-trading value, which is "
                                         "only available without jumps");
    const auto base_prof = IntensityProfile::power_blowup(cfg.horizon_years, cfg.kappa, cfg.beta);
    const auto rows = convergence_sweep(cfg.utility(), cfg.market(), base_prof, cfg.k_list,
                                        cfg.simulation.initial_wealth, cfg.solver_config());
    {
      auto out = open_out(output_dir(cfg) / "convergence.csv");
      write_sweep_csv(out, rows, opts.timing, {provenance_line(cfg)});
    }
    bool all = true;
    for (const auto& r : rows) {
      log_of(opts) << "k=" << fmt(r.k) << " V=" << fmt(r.v_lambda) << " gap=" << fmt(r.abs_gap)
                   << " iterations=" << r.dp_iterations << '\n';
      all = all && r.converged;
    }
    return all ? int(kExitOk) : int(kExitNotConverged);
  });
}

int run_iterate_trace(const ExperimentConfig& base, const RunOptions& opts) {
  return guarded(opts, [&] {
    const ExperimentConfig cfg = apply_overrides(base, opts);
    if (!check_assumptions(cfg, opts)) return int(kExitAssumptionViolation);
    const auto model = cfg.market();
    const auto u = cfg.utility();
    const double x0 = cfg.simulation.initial_wealth;
    DpSolver solver(model, cfg.intensity(), u, cfg.solver_config());
    const double f = optional_bound(
        [&] { return supersolution(u, DualDensityParams::from_model(model), 0.0, x0); });

    auto out = open_out(output_dir(cfg) / "trace.csv");
    out << "# " << provenance_line(cfg) << '\n' << "m,v_m,supersolution\n";
    ValueSurface v = solver.terminal_value();
    for (int m = 0; m <= cfg.m_max; ++m) {
      if (m > 0) v = solver.apply_operator(v).value;
      out << m << ',' << fmt(v.at_node(0, x0)) << ',' << fmt(f) << '\n';
    }
    return int(kExitOk);
  });
}

}  // namespace illiquid
