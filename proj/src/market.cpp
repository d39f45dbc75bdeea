#include "illiquid/market.hpp"

#include "illiquid/quadrature.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace illiquid {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPoissonTail = 1e-12;
constexpr int kLaguerreOrder = 24;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// E[exp(a X) 1{X > 0}] and E[exp(a X) 1{X <= 0}] for X = ln(1 + Y).
double upper_moment(const JumpSizeLaw& law, double a) {
  if (const auto* ln = std::get_if<LogNormalJumps>(&law)) {
    const double m = ln->log_mean;
    const double s = ln->log_stdev;
    if (s == 0.0) return m > 0.0 ? std::exp(a * m) : 0.0;
    return std::exp(a * m + 0.5 * a * a * s * s) * normal_cdf((m + a * s * s) / s);
  }
  return 0.0;  // log-exponential jumps are never upward
}

double lower_moment(const JumpSizeLaw& law, double a) {
  if (const auto* ln = std::get_if<LogNormalJumps>(&law)) {
    const double m = ln->log_mean;
    const double s = ln->log_stdev;
    if (s == 0.0) return m <= 0.0 ? std::exp(a * m) : 0.0;
    return std::exp(a * m + 0.5 * a * a * s * s) * normal_cdf(-(m + a * s * s) / s);
  }
  const double rate = std::get<LogExponentialJumps>(law).rate;
  return rate + a > 0.0 ? rate / (rate + a) : kInf;
}

// int_t^s f / g over the common refinement of both meshes; infinite where g == 0.
double integral_of_ratio_square(const PiecewiseConstant& f, const PiecewiseConstant& g,
                                double a, double b) {
  double total = 0.0;
  f.for_each_piece(a, b, [&](double lo, double hi, double fv) {
    g.for_each_piece(lo, hi, [&](double lo2, double hi2, double gv) {
      if (gv == 0.0) {
        total = kInf;
      } else {
        const double ratio = fv / gv;
        total += ratio * ratio * (hi2 - lo2);
      }
    });
  });
  return total;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string("market: ") + what + " must be finite");
}

}  // namespace

PiecewiseConstant::PiecewiseConstant(double horizon, std::vector<double> breaks,
                                     std::vector<double> values)
    : horizon_(horizon), breaks_(std::move(breaks)), values_(std::move(values)) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
    throw std::invalid_argument("piecewise: horizon must be positive");
  }
  if (values_.size() != breaks_.size() + 1) {
    throw std::invalid_argument("piecewise: need one value per piece (breaks + 1)");
  }
  double prev = 0.0;
  for (double b : breaks_) {
    if (!(b > prev) || !(b < horizon_)) {
      throw std::invalid_argument("piecewise: breaks must be strictly increasing inside (0, T)");
    }
    prev = b;
  }
  for (double v : values_) require_finite(v, "piece value");
}

PiecewiseConstant PiecewiseConstant::constant(double horizon, double value) {
  return PiecewiseConstant(horizon, {}, {value});
}

double PiecewiseConstant::operator()(double t) const {
  std::size_t i = 0;
  while (i < breaks_.size() && t >= breaks_[i]) ++i;
  return values_[i];
}

double PiecewiseConstant::integral(double a, double b) const {
  double total = 0.0;
  for_each_piece(a, b, [&](double lo, double hi, double v) { total += v * (hi - lo); });
  return total;
}

double PiecewiseConstant::integral_of_square(double a, double b) const {
  double total = 0.0;
  for_each_piece(a, b, [&](double lo, double hi, double v) { total += v * v * (hi - lo); });
  return total;
}

double PiecewiseConstant::integral_of_abs(double a, double b) const {
  double total = 0.0;
  for_each_piece(a, b, [&](double lo, double hi, double v) { total += std::abs(v) * (hi - lo); });
  return total;
}

double jump_mean(const JumpSizeLaw& law) {
  if (const auto* ln = std::get_if<LogNormalJumps>(&law)) {
    return std::expm1(ln->log_mean + 0.5 * ln->log_stdev * ln->log_stdev);
  }
  const double rate = std::get<LogExponentialJumps>(law).rate;
  return -1.0 / (rate + 1.0);
}

MarketModel::MarketModel(PiecewiseConstant drift, PiecewiseConstant volatility,
                         std::optional<JumpSpec> jumps)
    : drift_(std::move(drift)), volatility_(std::move(volatility)), jumps_(std::move(jumps)) {
  if (drift_.horizon() != volatility_.horizon()) {
    throw std::invalid_argument("market: drift and volatility horizons differ");
  }
  for (double c : volatility_.values()) {
    if (c < 0.0) throw std::invalid_argument("market: volatility must be nonnegative");
  }
  if (jumps_) {
    if (jumps_->rate.horizon() != drift_.horizon()) {
      throw std::invalid_argument("market: jump rate horizon differs from the model horizon");
    }
    for (double r : jumps_->rate.values()) {
      if (r < 0.0) throw std::invalid_argument("market: jump rate must be nonnegative");
    }
    if (const auto* ln = std::get_if<LogNormalJumps>(&jumps_->size_law)) {
      if (ln->log_stdev < 0.0) throw std::invalid_argument("market: jump log_stdev must be nonnegative");
      require_finite(ln->log_mean, "jump log_mean");
    } else {
      const double rate = std::get<LogExponentialJumps>(jumps_->size_law).rate;
      if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw std::invalid_argument("market: jump size rate must be positive");
      }
    }
    if (!(jumps_->q > 1.0)) throw std::invalid_argument("market: jump moment order q must exceed 1");
    if (jumps_->r && !(*jumps_->r < 0.0)) {
      throw std::invalid_argument("market: jump moment order r must be negative");
    }
  }
}

MarketModel MarketModel::constant(double horizon, double drift, double volatility) {
  return MarketModel(PiecewiseConstant::constant(horizon, drift),
                     PiecewiseConstant::constant(horizon, volatility));
}

ReturnLaw return_law(const MarketModel& model, double t, double s) {
  if (!(t >= 0.0) || !(t <= s) || !(s < model.horizon())) {
    throw std::domain_error("return_law: need 0 <= t <= s < T");
  }
  ReturnLaw law;
  law.t = t;
  law.s = s;
  const double var = model.volatility().integral_of_square(t, s);
  law.log_mean = model.drift().integral(t, s) - 0.5 * var;
  law.log_var = var;
  if (model.jumps()) {
    law.jump_mass = model.jumps()->rate.integral(t, s);
    law.jump_law = model.jumps()->size_law;
  }
  return law;
}

int jump_count_cutoff(double mass) {
  if (!(mass > 0.0)) return 0;
  const double log_mass = std::log(mass);
  double cdf = 0.0;
  const int cap = static_cast<int>(mass + 40.0 * std::sqrt(mass) + 40.0);
  for (int n = 0; n <= cap; ++n) {
    cdf += std::exp(-mass + n * log_mass - std::lgamma(n + 1.0));
    if (1.0 - cdf < kPoissonTail) return n;
  }
  return cap;
}

std::vector<ReturnNode> ReturnLaw::discretize(int hermite_order) const {
  if (degenerate()) return {{1.0, 0.0}};
  const auto& gh = quad::gauss_hermite_normal(hermite_order);
  const bool jumping = jump_law.has_value() && jump_mass > 0.0;
  const int cutoff = jumping ? jump_count_cutoff(jump_mass) : 0;

  std::vector<double> pmf(static_cast<std::size_t>(cutoff) + 1, 1.0);
  if (jumping) {
    double total = 0.0;
    const double log_mass = std::log(jump_mass);
    for (int n = 0; n <= cutoff; ++n) {
      pmf[static_cast<std::size_t>(n)] = std::exp(-jump_mass + n * log_mass - std::lgamma(n + 1.0));
      total += pmf[static_cast<std::size_t>(n)];
    }
    for (double& p : pmf) p /= total;
  }
  const double base_mean = jumping ? log_mean - jump_mass * jump_mean(*jump_law) : log_mean;

  std::vector<ReturnNode> atoms;
  atoms.reserve(gh.size() * pmf.size());
  for (int n = 0; n <= cutoff; ++n) {
    const double pn = pmf[static_cast<std::size_t>(n)];
    if (pn == 0.0) continue;
    const auto* lognormal = jumping ? std::get_if<LogNormalJumps>(&*jump_law) : nullptr;
    if (n == 0 || lognormal != nullptr) {
      double mean = base_mean;
      double var = log_var;
      if (n > 0) {
        mean += n * lognormal->log_mean;
        var += n * lognormal->log_stdev * lognormal->log_stdev;
      }
      const double sd = std::sqrt(var);
      for (std::size_t h = 0; h < gh.size(); ++h) {
        atoms.push_back({pn * gh.weights[h], std::expm1(mean + sd * gh.nodes[h])});
      }
    } else {
      // Sum of n exponential log-jumps is Gamma(n, rate).
      const double rate = std::get<LogExponentialJumps>(*jump_law).rate;
      const auto& lag = quad::gauss_laguerre_gamma(kLaguerreOrder, n);
      const double sd = std::sqrt(log_var);
      for (std::size_t h = 0; h < gh.size(); ++h) {
        for (std::size_t g = 0; g < lag.size(); ++g) {
          const double lr = base_mean + sd * gh.nodes[h] - lag.nodes[g] / rate;
          atoms.push_back({pn * gh.weights[h] * lag.weights[g], std::expm1(lr)});
        }
      }
    }
  }
  return atoms;
}

double expected_power_return(const std::vector<ReturnNode>& atoms, double pi, double gamma) {
  double total = 0.0;
  for (const auto& a : atoms) {
    const double growth = 1.0 + pi * a.z;
    if (growth <= 0.0) {
      if (gamma < 0.0) return kInf;
      continue;
    }
    total += a.prob * std::exp(gamma * std::log1p(pi * a.z));
  }
  return total;
}

double expected_power_return(const ReturnLaw& law, double pi, double gamma, int hermite_order) {
  // Full exposure to log-exponential jumps: E[(1+Y)^gamma] diverges once gamma <= -rate.
  if (gamma < 0.0 && pi == 1.0 && law.jump_law && law.jump_mass > 0.0) {
    if (const auto* le = std::get_if<LogExponentialJumps>(&*law.jump_law)) {
      if (gamma <= -le->rate) return kInf;
    }
  }
  return expected_power_return(law.discretize(hermite_order), pi, gamma);
}

double expected_log_return(const std::vector<ReturnNode>& atoms, double pi) {
  double total = 0.0;
  for (const auto& a : atoms) {
    if (1.0 + pi * a.z <= 0.0) return -kInf;
    total += a.prob * std::log1p(pi * a.z);
  }
  return total;
}

double expected_log_return(const ReturnLaw& law, double pi, int hermite_order) {
  return expected_log_return(law.discretize(hermite_order), pi);
}

bool AssumptionReport::all_passed() const { return first_failure() == nullptr; }

const AssumptionCheck* AssumptionReport::first_failure() const {
  for (const auto& c : checks) {
    if (!c.passed) return &c;
  }
  return nullptr;
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

AssumptionReport validate_assumptions(const MarketModel& model, const UtilitySpec& utility) {
  AssumptionReport report;
  const double T = model.horizon();
  auto add = [&](std::string name, bool passed, double value, std::string detail) {
    report.checks.push_back({std::move(name), passed, value, std::move(detail)});
  };

  const double drift_l1 = model.drift().integral_of_abs(0.0, T);
  add("HL.drift", std::isfinite(drift_l1), drift_l1, "int_0^T |b(u)| du");
  const double vol_l2 = model.volatility().integral_of_square(0.0, T);
  add("HL.volatility", std::isfinite(vol_l2), vol_l2, "int_0^T c(u)^2 du");
  if (model.jumps()) {
    const auto& j = *model.jumps();
    const double abs_mean = (upper_moment(j.size_law, 1.0) - upper_moment(j.size_law, 0.0)) +
                            (lower_moment(j.size_law, 0.0) - lower_moment(j.size_law, 1.0));
    const double mass = j.rate.integral(0.0, T);
    add("HL.jumps", std::isfinite(mass * abs_mean), mass * abs_mean,
        "jump sizes > -1 and int int |y| nu(dt,dy) finite");
  }

  const double na = integral_of_ratio_square(model.drift(), model.volatility(), 0.0, T);
  add("NA", std::isfinite(na), na,
      std::isfinite(na) ? "int_0^T (b/c)^2 du" : "volatility vanishes on a piece: (b/c)^2 undefined");

  const auto growth = utility.growth();
  {
    std::ostringstream os;
    os << "U+(x) <= C(1+x^p) with p=" << growth.upper_p;
    add("HU.i", growth.upper_p > 0.0 && growth.upper_p < 1.0, growth.upper_c, os.str());
  }
  if (utility.unbounded_below()) {
    std::ostringstream os;
    os << "U-(x) <= C'(1+x^p') with p'=" << *growth.lower_p;
    add("HU.ii", *growth.lower_p < 0.0, *growth.lower_c, os.str());
  }

  if (model.jumps()) {
    const auto& j = *model.jumps();
    const double mass = j.rate.integral(0.0, T);
    const double q = j.q;
    const double p_up = upper_moment(j.size_law, 0.0);
    const double hi = upper_moment(j.size_law, q) - p_up - q * (upper_moment(j.size_law, 1.0) - p_up);
    const double hi_total = mass > 0.0 ? mass * hi : 0.0;
    std::ostringstream os;
    os << "int int ((1+y)^q - 1 - q y) nu(dt,dy) over y>0, q=" << q;
    add("HI.i", std::isfinite(hi_total), hi_total, os.str());

    if (utility.unbounded_below()) {
      // log utility admits any p' < 0; power utility needs r < gamma.
      const double p_prime = utility.is_log() ? 0.0 : utility.gamma();
      if (!j.r) {
        add("HI.ii", false, kInf, "jump moment order r is required when U(0) = -infinity");
      } else {
        const double r = *j.r;
        const double p_lo = lower_moment(j.size_law, 0.0);
        const double lo = lower_moment(j.size_law, r) - p_lo - r * (lower_moment(j.size_law, 1.0) - p_lo);
        const double lo_total = mass > 0.0 ? mass * lo : 0.0;
        std::ostringstream ds;
        ds << "int int ((1+y)^r - 1 - r y) nu(dt,dy) over -1<y<0, r=" << r << ", need r < " << p_prime;
        add("HI.ii", r < p_prime && std::isfinite(lo_total), lo_total, ds.str());
      }
    }
    add("HI.iii", true, 0.0, "compound-Poisson rate has no atoms in time");
  }
  return report;
}

}  // namespace illiquid
