#include "illiquid/benchmark.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace illiquid;

namespace {

// U~(y) = sup_x U(x) - x y, written out by hand.
double conjugate_oracle(double gamma, bool log_utility, double y) {
  if (log_utility) return -std::log(y) - 1.0;
  return (1.0 - gamma) / gamma * std::pow(y, gamma / (gamma - 1.0));
}

// inf_y E[U~(y Y)] + x y with ln Y ~ N(-Theta/2, Theta), golden section in ln y.
double dual_infimum(double gamma, bool log_utility, double theta_sq, double x) {
  auto objective = [&](double ly) {
    const double y = std::exp(ly);
    double e;
    if (theta_sq == 0.0) {
      e = conjugate_oracle(gamma, log_utility, y);
    } else {
      const double s = std::sqrt(theta_sq);
      e = oracle::normal_expectation(
          [&](double z) { return conjugate_oracle(gamma, log_utility, y * std::exp(-0.5 * theta_sq + s * z)); },
          1e-15);
    }
    return e + x * y;
  };
  double a = -30.0, b = 30.0;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = objective(c), fd = objective(d);
  while (b - a > 1e-9) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - g * (b - a), fc = objective(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + g * (b - a), fd = objective(d);
    }
  }
  return std::min(fc, fd);
}

double utility_oracle(double gamma, bool log_utility, double x) {
  return log_utility ? std::log(x) : std::pow(x, gamma) / gamma;
}

// Merton value by maximizing the Hamiltonian on a dense grid per piece.
double merton_oracle(double gamma, bool log_utility, const std::vector<double>& breaks, const std::vector<double>& b,
                     const std::vector<double>& c, double T, double t, double x) {
  const double g = log_utility ? 0.0 : gamma;
  double total = 0.0;
  double lo = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double hi = i < breaks.size() ? breaks[i] : T;
    const double len = std::max(0.0, hi - std::max(lo, t));
    if (len > 0.0) {
      const auto best =
          oracle::grid_max([&](double pi) { return pi * b[i] - 0.5 * (1.0 - g) * pi * pi * c[i] * c[i]; }, 2000, 2000);
      total += len * best.second;
    }
    lo = hi;
  }
  if (log_utility) return std::log(x) + total;
  return utility_oracle(gamma, false, x) * std::exp(gamma * total);
}

}  // namespace

TEST_CASE("supersolution closed form") {
  const auto flat = DualDensityParams::from_model(MarketModel::constant(1.0, 0.0, 0.2));
  CHECK(supersolution(UtilitySpec::power(0.5), flat, 0.0, 3.0) == doctest::Approx(2.0 * std::sqrt(3.0)));
  CHECK(supersolution(UtilitySpec::log(), flat, 0.3, 3.0) == doctest::Approx(std::log(3.0)));

  const auto p = DualDensityParams::from_model(MarketModel::constant(1.0, 0.05, 0.2));
  CHECK(p.integrated_theta_sq(0.0) == doctest::Approx(0.0625));
  CHECK(supersolution(UtilitySpec::power(0.5), p, 0.0, 1.0) == doctest::Approx(2.0 * std::exp(0.03125)).epsilon(1e-14));
  CHECK(supersolution(UtilitySpec::log(), p, 0.0, 2.0) == doctest::Approx(std::log(2.0) + 0.03125).epsilon(1e-14));
  // The numerical dual infimum reproduces both.
  CHECK(dual_infimum(0.5, false, 0.0625, 1.0) == doctest::Approx(2.0 * std::exp(0.03125)).epsilon(1e-8));
  CHECK(dual_infimum(0.0, true, 0.0625, 2.0) == doctest::Approx(std::log(2.0) + 0.03125).epsilon(1e-8));
}

TEST_CASE("supersolution matches the numerical dual infimum") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ub(-0.1, 0.15), uc(0.1, 0.4), ug(-2.0, 0.9), ut(0.0, 0.9), ux(0.2, 5.0);
  for (int i = 0; i < 10; ++i) {
    const std::vector<double> breaks{0.4};
    const std::vector<double> b{ub(rng), ub(rng)}, c{uc(rng), uc(rng)};
    double gamma = ug(rng);
    if (std::abs(gamma) < 0.05) gamma = -0.5;
    const bool log_utility = i % 4 == 3;
    const double t = ut(rng), x = ux(rng);
    const MarketModel model(PiecewiseConstant(1.0, breaks, b), PiecewiseConstant(1.0, breaks, c));
    const auto params = DualDensityParams::from_model(model);
    double theta_sq = 0.0;
    if (t < 0.4) theta_sq += (0.4 - t) * (b[0] / c[0]) * (b[0] / c[0]);
    theta_sq += (1.0 - std::max(t, 0.4)) * (b[1] / c[1]) * (b[1] / c[1]);
    CHECK(params.integrated_theta_sq(t) == doctest::Approx(theta_sq).epsilon(1e-13));
    const auto u = log_utility ? UtilitySpec::log() : UtilitySpec::power(gamma);
    const double closed = supersolution(u, params, t, x);
    const double numeric = dual_infimum(gamma, log_utility, theta_sq, x);
    CHECK(closed == doctest::Approx(numeric).epsilon(1e-8));
  }
}

TEST_CASE("Merton value") {
  SUBCASE("no drift") {
    const auto m = merton_value(UtilitySpec::power(0.5), MarketModel::constant(1.0, 0.0, 0.2), 0.0, 4.0);
    CHECK(m.value == doctest::Approx(4.0));
    CHECK(m.policy(0.5) == 0.0);
  }
  SUBCASE("standard market clamps at one") {
    const auto m = merton_value(UtilitySpec::power(0.5), MarketModel::constant(1.0, 0.05, 0.2), 0.0, 1.0);
    CHECK(m.policy(0.0) == 1.0);
    CHECK(m.value == doctest::Approx(2.0 * std::exp(0.02)).epsilon(1e-14));
    CHECK(m.value == doctest::Approx(merton_oracle(0.5, false, {}, {0.05}, {0.2}, 1.0, 0.0, 1.0)).epsilon(1e-12));
  }
  SUBCASE("log utility interior") {
    const auto m = merton_value(UtilitySpec::log(), MarketModel::constant(1.0, 0.02, 0.2), 0.0, 1.0);
    CHECK(m.policy(0.3) == doctest::Approx(0.5));
    CHECK(m.value == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(m.value == doctest::Approx(merton_oracle(0, true, {}, {0.02}, {0.2}, 1.0, 0.0, 1.0)).epsilon(1e-9));
  }
  SUBCASE("piecewise market against the dense grid") {
    const std::vector<double> breaks{0.3, 0.7};
    const std::vector<double> b{0.05, -0.02, 0.01}, c{0.2, 0.3, 0.25};
    const MarketModel model(PiecewiseConstant(1.0, breaks, b), PiecewiseConstant(1.0, breaks, c));
    for (double gamma : {0.5, -1.0, 0.2}) {
      const auto m = merton_value(UtilitySpec::power(gamma), model, 0.1, 2.0);
      CHECK(m.value == doctest::Approx(merton_oracle(gamma, false, breaks, b, c, 1.0, 0.1, 2.0)).epsilon(1e-10));
      CHECK(m.policy(0.5) == 0.0);
    }
  }
}

TEST_CASE("Merton stays below the supersolution and both reach U at the horizon") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ut(0.0, 1.0), ux(0.05, 20.0);
  const auto model = MarketModel::constant(1.0, 0.05, 0.2);
  const auto params = DualDensityParams::from_model(model);
  for (const auto& u : {UtilitySpec::power(0.5), UtilitySpec::power(-2.0), UtilitySpec::log()}) {
    for (int i = 0; i < 20; ++i) {
      const double t = ut(rng), x = ux(rng);
      const double m = merton_value(u, model, t, x).value;
      const double f = supersolution(u, params, t, x);
      CHECK(m <= f + 1e-10 * std::max(1.0, std::abs(f)));
    }
    CHECK(merton_value(u, model, 1.0, 3.0).value == doctest::Approx(u.evaluate(3.0)).epsilon(1e-15));
    CHECK(supersolution(u, params, 1.0, 3.0) == doctest::Approx(u.evaluate(3.0)).epsilon(1e-15));
    CHECK(supersolution(u, params, 1.0 - 1e-12, 3.0) == doctest::Approx(u.evaluate(3.0)).epsilon(1e-10));
  }
}

TEST_CASE("closed forms refuse jump models") {
  JumpSpec j{PiecewiseConstant::constant(1.0, 1.0), LogNormalJumps{-0.1, 0.1}};
  const MarketModel model(PiecewiseConstant::constant(1.0, 0.05), PiecewiseConstant::constant(1.0, 0.2), j);
  CHECK_THROWS_AS(merton_value(UtilitySpec::power(0.5), model, 0.0, 1.0), UnsupportedModel);
  CHECK_THROWS_AS(DualDensityParams::from_model(model), UnsupportedModel);
}
