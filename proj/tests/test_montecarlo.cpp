#include "illiquid/benchmark.hpp"
#include "illiquid/montecarlo.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace illiquid;

namespace {

const IntensityProfile kUnit = IntensityProfile::power_blowup(1.0, 1.0, 1.0);

SimConfig paths(long n, std::uint64_t seed = 3) {
  SimConfig cfg;
  cfg.n_paths = n;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("zero exposure leaves wealth untouched") {
  const auto model = MarketModel::constant(1.0, 0.05, 0.2);
  auto cfg = paths(2000);
  cfg.initial_wealth = 3.5;
  for (long i = 0; i < 50; ++i) {
    auto rng = path_rng(cfg.seed, i);
    const auto p = simulate_path(constant_policy(0.0), model, kUnit, cfg, rng);
    CHECK(p.terminal_wealth == 3.5);
    CHECK(p.n_arrivals > 0);
  }
  const auto u = UtilitySpec::power(0.5);
  const auto r = estimate_expected_utility(constant_policy(0.0), u, model, kUnit, cfg);
  CHECK(r.mean_utility == u.evaluate(3.5));
  CHECK(r.std_error == 0.0);
  CHECK(r.clamped_paths == 0);
}

TEST_CASE("full exposure telescopes to a lognormal") {
  const double b = 0.05, c = 0.2;
  const auto model = MarketModel::constant(1.0, b, c);
  const auto cfg = paths(10000, 11);
  std::vector<double> logs;
  for (long i = 0; i < cfg.n_paths; ++i) {
    auto rng = path_rng(cfg.seed, i);
    logs.push_back(std::log(simulate_path(constant_policy(1.0), model, kUnit, cfg, rng).terminal_wealth));
  }
  const double d = oracle::ks_statistic(logs, [&](double y) { return oracle::normal_cdf((y - (b - 0.5 * c * c)) / c); });
  CHECK(d < oracle::ks_critical_1pct(logs.size()));
}

TEST_CASE("martingale market preserves expected wealth") {
  const auto model = MarketModel::constant(1.0, 0.0, 0.25);
  const auto u = UtilitySpec::power(0.5);
  const auto cfg = paths(100000, 21);
  for (const FeedbackPolicy& policy :
       {constant_policy(0.7), FeedbackPolicy([](double t, double x) { return std::min(1.0, 0.3 + t * x); })}) {
    const auto r = estimate_expected_utility(policy, u, model, kUnit, cfg);
    CHECK(std::abs(r.mean_wealth - 1.0) < 3.0 * r.wealth_std_error);
    CHECK(r.mean_wealth <= 1.0 + 3.0 * r.wealth_std_error);
    CHECK(r.min_wealth > 0.0);
    CHECK(r.clamped_paths == 0);
  }
}

TEST_CASE("results are reproducible and independent of thread count") {
  const auto model = MarketModel::constant(1.0, 0.05, 0.2);
  const auto u = UtilitySpec::power(0.5);
  auto cfg = paths(5000, 99);
  const auto a = estimate_expected_utility(constant_policy(0.6), u, model, kUnit, cfg);
  const auto b = estimate_expected_utility(constant_policy(0.6), u, model, kUnit, cfg);
  cfg.threads = 4;
  const auto c = estimate_expected_utility(constant_policy(0.6), u, model, kUnit, cfg);
  for (const auto* r : {&b, &c}) {
    CHECK(r->mean_utility == a.mean_utility);
    CHECK(r->std_error == a.std_error);
    CHECK(r->mean_wealth == a.mean_wealth);
    CHECK(r->mean_arrivals == a.mean_arrivals);
    CHECK(r->max_arrivals == a.max_arrivals);
    CHECK(r->wealth_quantiles == a.wealth_quantiles);
  }
  cfg.seed = 100;
  const auto d = estimate_expected_utility(constant_policy(0.6), u, model, kUnit, cfg);
  CHECK(d.mean_utility != a.mean_utility);
  CHECK(a.quantile_levels.size() == a.wealth_quantiles.size());
  for (std::size_t i = 1; i < a.wealth_quantiles.size(); ++i)
    CHECK(a.wealth_quantiles[i] >= a.wealth_quantiles[i - 1]);
}

TEST_CASE("path substreams differ and repeat") {
  auto a = path_rng(1, 0), b = path_rng(1, 0), c = path_rng(1, 1), d = path_rng(2, 0);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}

TEST_CASE("pairwise summation") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * static_cast<double>(i);
  CHECK(pairwise_sum(v.data(), v.size()) == 0.5 * 999.0 * 1000.0 / 2.0);
  CHECK(pairwise_sum(v.data(), 0) == 0.0);
  std::vector<double> tiny(1 << 20, 0.1);
  CHECK(pairwise_sum(tiny.data(), tiny.size()) == doctest::Approx(0.1 * (1 << 20)).epsilon(1e-14));
}

TEST_CASE("solved policy: verification, truncation, optimality") {
  const auto model = MarketModel::constant(1.0, 0.01, 0.2);
  const auto u = UtilitySpec::power(0.5);
  SolverConfig scfg;
  const auto solved = value_iterate(u, model, kUnit, scfg);
  REQUIRE(solved.converged);
  const double v_star = solved.value.at_node(0, 1.0);
  const auto policy = feedback(solved.policy);

  auto cfg = paths(40000, 5);
  const auto r = estimate_expected_utility(policy, u, model, kUnit, cfg);
  CHECK(std::abs(r.mean_utility - v_star) <= 3.0 * r.std_error);
  CHECK(r.mean_arrivals > 10.0);

  auto doubled = cfg;
  doubled.time_cutoff = 2.0 * cfg.time_cutoff;
  const auto r2 = estimate_expected_utility(policy, u, model, kUnit, doubled);
  CHECK(std::abs(r2.mean_utility - r.mean_utility) < r.std_error);

  const auto all_in = estimate_expected_utility(constant_policy(1.0), u, model, kUnit, cfg);
  const double combined = std::sqrt(r.std_error * r.std_error + all_in.std_error * all_in.std_error);
  CHECK(r.mean_utility >= all_in.mean_utility - 3.0 * combined);
}

TEST_CASE("arrival cap freezes wealth") {
  const auto model = MarketModel::constant(1.0, 0.05, 0.2);
  auto cfg = paths(10);
  cfg.max_arrivals = 3;
  auto rng = path_rng(1, 0);
  const auto p = simulate_path(constant_policy(1.0), model, kUnit, cfg, rng);
  CHECK(p.n_arrivals == 3);
  cfg.max_arrivals = 0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("convergence sweep") {
  const auto u = UtilitySpec::power(0.5);
  SolverConfig scfg;
  scfg.time_nodes = 40;
  SUBCASE("no drift: every gap is zero") {
    const auto rows = convergence_sweep(u, MarketModel::constant(1.0, 0.0, 0.2), kUnit, {1, 4, 16}, 1.0, scfg);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
      CHECK(r.abs_gap == 0.0);
      CHECK(r.v_lambda == 2.0);
      CHECK(r.converged);
      CHECK(r.summable);
    }
  }
  SUBCASE("single row and CSV layout") {
    const auto rows = convergence_sweep(u, MarketModel::constant(1.0, 0.05, 0.2), kUnit, {2}, 1.0, scfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].k == 2.0);
    CHECK(rows[0].v_merton == doctest::Approx(2.0 * std::exp(0.02)).epsilon(1e-14));
    CHECK(rows[0].abs_gap == std::abs(rows[0].v_merton - rows[0].v_lambda));
    CHECK(rows[0].rel_gap < 1e-2);
    std::ostringstream os;
    write_sweep_csv(os, rows, false, {"x"});
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "# x");
    std::getline(in, line);
    CHECK(line == "k,V_lambda,V_merton,abs_gap,rel_gap,dp_iterations,dp_residual,wall_seconds");
    std::getline(in, line);
    CHECK(line.substr(0, 2) == "2,");
    CHECK(line.substr(line.size() - 4) == ",nan");
    CHECK_FALSE(std::getline(in, line));
  }
  SUBCASE("bad k lists") {
    CHECK_THROWS(convergence_sweep(u, MarketModel::constant(1.0, 0.0, 0.2), kUnit, {2, 1}, 1.0, scfg));
    CHECK_THROWS(convergence_sweep(u, MarketModel::constant(1.0, 0.0, 0.2), kUnit, {0.5}, 1.0, scfg));
  }
}
