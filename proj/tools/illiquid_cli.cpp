// Command-line driver: solve, simulate, converge, trace.
#include "illiquid/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

std::vector<double> parse_k_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw illiquid::ConfigError("--k-list", "expected comma-separated numbers, got '" + text + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal investment with trading restricted to random arrival times"};
  app.set_version_flag("--version", std::string("illiquid ") + illiquid::version());
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  long paths = 0;
  int m_max = 0;
  std::string k_list;
  bool zero_policy = false;
  bool timing = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI experiment file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides [output] directory)");
    sub->add_option("--seed", seed, "master seed (overrides [simulation] seed)");
  };

  auto* solve = app.add_subcommand("solve", "value iteration; writes value/policy surfaces and a summary");
  add_common(solve);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo under the solved policy");
  add_common(simulate);
  simulate->add_option("--paths", paths, "number of simulated paths");
  simulate->add_flag("--zero-policy", zero_policy, "hold no stock instead of the solved policy");
  auto* converge = app.add_subcommand("converge", "sweep k in lambda_k = k lambda against the Merton value");
  add_common(converge);
  converge->add_option("--k-list", k_list, "comma-separated increasing scales, e.g. 1,2,4");
  converge->add_flag("--timing", timing, "write wall-clock seconds (output no longer reproducible)");
  auto* trace = app.add_subcommand("trace", "v_m(0, X0) for m = 0..m_max");
  add_common(trace);
  trace->add_option("--m-max", m_max, "largest number of trades");

  CLI11_PARSE(app, argc, argv);

  illiquid::RunOptions opts;
  try {
    const auto cfg = illiquid::load_config(config_path);
    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--out")) opts.output_directory = out_dir;
    if (sub->count("--seed")) opts.seed = seed;
    if (simulate->parsed() && simulate->count("--paths")) opts.paths = paths;
    if (converge->parsed() && converge->count("--k-list")) opts.k_list = parse_k_list(k_list);
    if (trace->parsed() && trace->count("--m-max")) opts.m_max = m_max;
    opts.zero_policy = zero_policy;
    opts.timing = timing;

    if (solve->parsed()) return illiquid::run_solve(cfg, opts);
    if (simulate->parsed()) return illiquid::run_simulate(cfg, opts);
    if (converge->parsed()) return illiquid::run_converge(cfg, opts);
    return illiquid::run_iterate_trace(cfg, opts);
  } catch (const illiquid::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return illiquid::kExitConfigError;
  }
}
