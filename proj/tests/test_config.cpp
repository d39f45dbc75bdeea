#include "illiquid/experiment.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace illiquid;
namespace fs = std::filesystem;

namespace {

const char* kStandard = R"(; test market
[model]
horizon_years = 1
drift_per_year = 0.05
volatility_per_sqrt_year = 0.2

[intensity]
kind = power_blowup
kappa = 1
beta = 1

[utility]
kind = power
gamma = 0.5

[simulation]
paths = 2000
seed = 7
initial_wealth = 1
)";

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.ini");
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

fs::path dir_of(const std::string& name) { return fs::temp_directory_path() / ("illiquid_test_" + name); }

fs::path scratch(const std::string& name) {
  fs::remove_all(dir_of(name));
  return dir_of(name);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// key,value rows of a summary file.
std::map<std::string, std::string> summary(const fs::path& p) {
  std::map<std::string, std::string> out;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line == "key,value") continue;
    const auto comma = line.find(',');
    out[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return out;
}

std::vector<std::vector<std::string>> rows(const fs::path& p) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

RunOptions quiet(const fs::path& dir, std::ostream& log) {
  RunOptions o;
  o.output_directory = dir.string();
  o.log = &log;
  return o;
}

}  // namespace

TEST_CASE("parsing and defaults") {
  const auto c = parse(kStandard);
  CHECK(c.horizon_years == 1.0);
  CHECK(c.drift_per_year == std::vector<double>{0.05});
  CHECK(c.gamma == 0.5);
  CHECK(c.simulation.n_paths == 2000);
  CHECK(c.simulation.seed == 7);
  CHECK(c.k_list == std::vector<double>{1, 2, 4, 8, 16, 32, 64});
  CHECK(c.solver.time_nodes == 100);
  const auto s = c.solver_config();
  CHECK(s.wealth_min == doctest::Approx(0.01));
  CHECK(s.wealth_max == doctest::Approx(100.0));
  CHECK(c.utility().gamma() == 0.5);
  CHECK(c.intensity().kappa() == 1.0);

  const auto pw = parse(replace(kStandard, "drift_per_year = 0.05", "drift_per_year = 0.05,0.02\ndrift_breaks_years = 0.5"));
  CHECK(pw.market().drift()(0.75) == 0.02);
  CHECK(pw.canonical() != c.canonical());
  CHECK(fnv1a64(pw.canonical()) != fnv1a64(c.canonical()));
  CHECK(parse(kStandard).canonical() == c.canonical());
}

TEST_CASE("hashing and seed derivation") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(derive_seed(7, "montecarlo") == derive_seed(7, "montecarlo"));
  CHECK(derive_seed(7, "montecarlo") != derive_seed(8, "montecarlo"));
  CHECK(derive_seed(7, "montecarlo") != derive_seed(7, "other"));
  const auto c = parse(kStandard);
  const auto line = provenance_line(c);
  CHECK(line.rfind(std::string("illiquid ") + version() + " config_hash=", 0) == 0);
  CHECK(line.size() == std::string("illiquid ").size() + std::string(version()).size() + 13 + 16);
}

TEST_CASE("errors name the offending field") {
  auto field_of = [](const std::string& text) -> std::pair<std::string, long> {
    try {
      parse(text);
    } catch (const ConfigError& e) {
      return {e.field(), e.line()};
    }
    return {"", -1};
  };
  auto [f1, l1] = field_of(replace(kStandard, "volatility_per_sqrt_year = 0.2", "volatility_per_sqrt_year = -0.2"));
  CHECK(f1 == "model.volatility_per_sqrt_year");
  CHECK(l1 == 5);
  CHECK(field_of(replace(kStandard, "gamma = 0.5", "gamma = 1.5")).first == "utility.gamma");
  CHECK(field_of(replace(kStandard, "kappa = 1", "kappa = abc")).first == "intensity.kappa");
  CHECK(field_of(replace(kStandard, "kappa = 1", "kappa = 1\nkapa = 2")).first == "intensity.kapa");
  CHECK(field_of(std::string(kStandard) + "[nonsense]\nx = 1\n").first == "nonsense");
  CHECK(field_of(replace(kStandard, "paths = 2000", "paths = 0")).first == "simulation.paths");
  CHECK(field_of(std::string(kStandard) + "[jumps]\nenabled = true\nrate_per_year = 1\nlog_stdev = -1\n")
            .first == "jumps.log_stdev");
  CHECK(field_of(std::string(kStandard) + "[converge]\nk_list = 1,4,2\n").first == "converge.k_list");
  // Syntax errors carry the line.
  try {
    parse(std::string(kStandard) + "[broken\n");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 20);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/file.ini"), ConfigError);
}

TEST_CASE("shipped configs parse") {
  for (const char* name : {"standard", "martingale", "interior", "log_grid", "jumps"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(std::string(ILLIQUID_SOURCE_DIR) + "/configs/" + name + ".ini"));
  }
}

TEST_CASE("solve: martingale market") {
  const auto dir = scratch("solve0");
  std::ostringstream log;
  const auto c = parse(replace(kStandard, "drift_per_year = 0.05", "drift_per_year = 0"));
  CHECK(run_solve(c, quiet(dir, log)) == kExitOk);
  const auto s = summary(dir / "solve_summary.csv");
  CHECK(std::stod(s.at("v_star")) == 2.0);
  CHECK(s.at("iterations") == "2");
  CHECK(s.at("converged") == "true");
  CHECK(std::stod(s.at("pi_at_start")) == 0.0);
  for (const char* f : {"value_surface.csv", "policy_surface.csv", "solve_summary.csv", "value_surface.meta"})
    CHECK(slurp(dir / f).rfind("# " + provenance_line(c) + "\n", 0) == 0);
}

TEST_CASE("solve: standard market, exit codes") {
  const auto dir = scratch("solve1");
  std::ostringstream log;
  const auto c = parse(kStandard);
  CHECK(run_solve(c, quiet(dir, log)) == kExitOk);
  const auto s = summary(dir / "solve_summary.csv");
  const double v = std::stod(s.at("v_star"));
  CHECK(v > 2.0);
  CHECK(v <= 2.0 * std::exp(0.03125));
  CHECK(std::stod(s.at("supersolution")) == doctest::Approx(2.0 * std::exp(0.03125)));
  CHECK(std::stod(s.at("merton_value")) == doctest::Approx(2.0 * std::exp(0.02)));

  std::ostringstream log2;
  const auto na = parse(replace(kStandard, "volatility_per_sqrt_year = 0.2", "volatility_per_sqrt_year = 0"));
  CHECK(run_solve(na, quiet(scratch("solve2"), log2)) == kExitAssumptionViolation);
  CHECK(log2.str().find("NA") != std::string::npos);
  CHECK_FALSE(fs::exists(dir_of("solve2") / "solve_summary.csv"));

  std::ostringstream log3;
  const auto capped = parse(std::string(kStandard) + "[solver]\nmax_iterations = 2\n");
  CHECK(run_solve(capped, quiet(scratch("solve3"), log3)) == kExitNotConverged);

  std::ostringstream log4;
  RunOptions bad = quiet(scratch("solve4"), log4);
  bad.paths = 0;
  CHECK(run_simulate(c, bad) == kExitConfigError);
}

TEST_CASE("simulate") {
  const auto c = parse(kStandard);
  std::ostringstream log;
  auto opts = quiet(scratch("sim0"), log);
  opts.zero_policy = true;
  CHECK(run_simulate(c, opts) == kExitOk);
  const auto s = summary(dir_of("sim0") / "simulation.csv");
  CHECK(std::stod(s.at("mean_utility")) == 2.0);
  CHECK(std::stod(s.at("std_error")) == 0.0);
  CHECK(s.at("verdict") == "PASS");

  const auto a = scratch("sim1"), b = scratch("sim2");
  CHECK(run_simulate(c, quiet(a, log)) == kExitOk);
  CHECK(run_simulate(c, quiet(b, log)) == kExitOk);
  CHECK(slurp(a / "simulation.csv") == slurp(b / "simulation.csv"));
  CHECK(summary(a / "simulation.csv").at("verdict") == "PASS");
  auto other = quiet(scratch("sim3"), log);
  other.seed = 8;
  CHECK(run_simulate(c, other) == kExitOk);
  CHECK(slurp(a / "simulation.csv") != slurp(dir_of("sim3") / "simulation.csv"));
}

TEST_CASE("converge") {
  std::ostringstream log;
  const auto flat = parse(replace(kStandard, "drift_per_year = 0.05", "drift_per_year = 0"));
  auto opts = quiet(scratch("conv0"), log);
  opts.k_list = std::vector<double>{1, 8, 64};
  CHECK(run_converge(flat, opts) == kExitOk);
  const auto r = rows(dir_of("conv0") / "convergence.csv");
  REQUIRE(r.size() == 4);
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(std::stod(r[i][3]) == 0.0);

  auto one = quiet(scratch("conv1"), log);
  one.k_list = std::vector<double>{4};
  CHECK(run_converge(parse(kStandard), one) == kExitOk);
  const auto r1 = rows(dir_of("conv1") / "convergence.csv");
  REQUIRE(r1.size() == 2);
  CHECK(std::stod(r1[1][4]) < 1e-2);

  auto bad = quiet(scratch("conv2"), log);
  bad.k_list = std::vector<double>{4, 2};
  CHECK(run_converge(parse(kStandard), bad) == kExitConfigError);

  const auto jumps = parse(std::string(kStandard) +
                           "[jumps]\nenabled = true\nrate_per_year = 1\nlog_mean = -0.1\nlog_stdev = 0.1\n");
  CHECK(run_converge(jumps, quiet(scratch("conv3"), log)) == kExitConfigError);
}

TEST_CASE("trace") {
  std::ostringstream log;
  auto opts = quiet(scratch("trace0"), log);
  opts.m_max = 0;
  const auto c = parse(kStandard);
  CHECK(run_iterate_trace(c, opts) == kExitOk);
  auto r = rows(dir_of("trace0") / "trace.csv");
  REQUIRE(r.size() == 2);
  CHECK(r[0] == std::vector<std::string>{"m", "v_m", "supersolution"});
  CHECK(std::stod(r[1][1]) == 2.0);

  const auto flat = parse(replace(kStandard, "drift_per_year = 0.05", "drift_per_year = 0"));
  CHECK(run_iterate_trace(flat, quiet(scratch("trace1"), log)) == kExitOk);
  r = rows(dir_of("trace1") / "trace.csv");
  REQUIRE(r.size() == 12);
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(std::stod(r[i][1]) == 2.0);

  CHECK(run_iterate_trace(c, quiet(scratch("trace2"), log)) == kExitOk);
  r = rows(dir_of("trace2") / "trace.csv");
  REQUIRE(r.size() == 12);
  const double f = std::stod(r[1][2]);
  for (std::size_t i = 2; i < r.size(); ++i) {
    CHECK(std::stod(r[i][1]) >= std::stod(r[i - 1][1]));
    CHECK(std::stod(r[i][1]) <= f);
  }
  for (std::size_t i = 2; i < 6; ++i) CHECK(std::stod(r[i][1]) > std::stod(r[i - 1][1]));
}
