#include "illiquid/dp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <cstring>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace illiquid {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPosInf = std::numeric_limits<double>::infinity();
// Atoms lighter than this fraction of the heaviest are dropped.
constexpr double kAtomCutoff = 1e-17;
constexpr double kTieTolerance = 1e-13;

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
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

double sup_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Weight of the right node when interpolating linearly in U(x) within a
// wealth cell of log-width dy, at log-offset d from the left node.
double utility_weight(bool is_log, double gamma, double d, double dy) {
  if (is_log) return d / dy;
  return std::expm1(gamma * d) / std::expm1(gamma * dy);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string to_string(Representation r) {
  return r == Representation::separable ? "separable" : "grid";
}

void SolverConfig::validate() const {
  auto fail = [](const std::string& field) {
    throw std::invalid_argument("solver: " + field + " must be positive");
  };
  if (time_nodes < 1) fail("time_nodes");
  if (representation == Representation::grid) {
    if (wealth_nodes < 2) throw std::invalid_argument("solver: wealth_nodes must be at least 2");
    if (!(wealth_min > 0.0)) fail("wealth_min");
    if (!(wealth_max > wealth_min)) throw std::invalid_argument("solver: wealth_max must exceed wealth_min");
  }
  if (time_quadrature_nodes < 1) fail("time_quadrature_nodes");
  if (return_quadrature_nodes < 1) fail("return_quadrature_nodes");
  if (!(tolerance > 0.0)) fail("tolerance");
  if (max_iterations < 1) fail("max_iterations");
  if (!(pi_tolerance > 0.0)) fail("pi_tolerance");
  if (threads < 0) throw std::invalid_argument("solver: threads must be nonnegative");
}

// ---------------------------------------------------------------- Support

std::shared_ptr<const Support> Support::make(const IntensityProfile& profile, const SolverConfig& cfg) {
  cfg.validate();
  auto base = IntensityProfile::power_blowup(profile.horizon(), profile.kappa(), profile.beta());
  auto s = std::make_shared<Support>(profile, base);
  s->representation = cfg.representation;
  const auto n = static_cast<std::size_t>(cfg.time_nodes);
  s->warped.resize(n);
  s->times.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    s->warped[j] = static_cast<double>(j) / static_cast<double>(n);
    s->times[j] = base.unwarp(s->warped[j]);
  }
  if (cfg.representation == Representation::grid) {
    const auto m = static_cast<std::size_t>(cfg.wealth_nodes);
    s->log_wealth_min = std::log(cfg.wealth_min);
    s->log_wealth_step = (std::log(cfg.wealth_max) - s->log_wealth_min) / static_cast<double>(m - 1);
    s->wealth.resize(m);
    for (std::size_t i = 0; i < m; ++i) s->wealth[i] = std::exp(s->log_wealth(i));
    s->wealth.front() = cfg.wealth_min;
    s->wealth.back() = cfg.wealth_max;
  }
  return s;
}

double Support::next_warped(double w, double u) const {
  const double k = profile.scale() / warp_profile.scale();
  const double step = k == 1.0 ? u : -std::expm1(std::log1p(-u) / k);
  return w + (1.0 - w) * step;
}

void Support::locate(double w, std::size_t& cell, double& frac) const {
  const auto n = time_count();
  const double pos = std::clamp(w, 0.0, 1.0) * static_cast<double>(n);
  const double fl = std::floor(pos);
  cell = std::min(static_cast<std::size_t>(fl), n - 1);
  frac = pos - static_cast<double>(cell);
}

// ----------------------------------------------------------- ValueSurface

ValueSurface::ValueSurface(std::shared_ptr<const Support> support, UtilitySpec utility, std::vector<double> values)
    : support_(std::move(support)), utility_(utility), values_(std::move(values)) {
  if (!support_) throw std::invalid_argument("value surface: null support");
  if (values_.size() != support_->size())
    throw std::invalid_argument("value surface: value count does not match support");
}

ValueSurface ValueSurface::terminal(std::shared_ptr<const Support> support, const UtilitySpec& utility) {
  std::vector<double> v;
  if (support->representation == Representation::separable) {
    v.assign(support->time_count(), utility.is_log() ? 0.0 : 1.0);
  } else {
    v.reserve(support->size());
    for (std::size_t j = 0; j < support->time_count(); ++j)
      for (double x : support->wealth) v.push_back(utility.evaluate(x));
  }
  return ValueSurface(std::move(support), utility, std::move(v));
}

double ValueSurface::slice_value(std::span<const double> slice, double log_x) const {
  const Support& s = *support_;
  const std::size_t m = slice.size();
  const double pos = (log_x - s.log_wealth_min) / s.log_wealth_step;
  std::size_t edge;
  if (pos < 0.0) {
    edge = 0;
  } else if (pos >= static_cast<double>(m - 1)) {
    edge = m - 1;
  } else {
    const auto a = static_cast<std::size_t>(pos);
    const double f = utility_weight(utility_.is_log(), utility_.is_log() ? 0.0 : utility_.gamma(),
                                    log_x - s.log_wealth(a), s.log_wealth_step);
    return (1.0 - f) * slice[a] + f * slice[a + 1];
  }
  // Homothetic extension off the grid.
  const double dy = log_x - s.log_wealth(edge);
  if (utility_.is_log()) return slice[edge] + dy;
  return slice[edge] * std::exp(utility_.gamma() * dy);
}

double ValueSurface::phi_at_warped(double w) const {
  if (representation() != Representation::separable)
    throw std::logic_error("value surface: phi is defined for separable surfaces only");
  if (w >= 1.0) return boundary_phi();
  std::size_t a;
  double f;
  support_->locate(w, a, f);
  const double hi = a + 1 < values_.size() ? values_[a + 1] : boundary_phi();
  return (1.0 - f) * values_[a] + f * hi;
}

double ValueSurface::at_node(std::size_t j, double x) const {
  if (representation() == Representation::separable) {
    const double u = utility_.evaluate(x);
    return utility_.is_log() ? u + values_[j] : values_[j] * u;
  }
  const std::size_t m = support_->wealth_count();
  return slice_value(std::span<const double>(values_).subspan(j * m, m), std::log(x));
}

double ValueSurface::at_warped(double w, double x) const {
  if (representation() == Representation::separable) {
    const double u = utility_.evaluate(x);
    const double phi = phi_at_warped(w);
    return utility_.is_log() ? u + phi : phi * u;
  }
  if (w >= 1.0) return utility_.evaluate(x);
  std::size_t a;
  double f;
  support_->locate(w, a, f);
  const double lo = at_node(a, x);
  const double hi = a + 1 < support_->time_count() ? at_node(a + 1, x) : utility_.evaluate(x);
  return (1.0 - f) * lo + f * hi;
}

double ValueSurface::operator()(double t, double x) const {
  return at_warped(support_->warp(t), x);
}

// ---------------------------------------------------------- PolicySurface

PolicySurface::PolicySurface(std::shared_ptr<const Support> support, std::vector<double> values)
    : support_(std::move(support)), values_(std::move(values)) {
  if (!support_) throw std::invalid_argument("policy surface: null support");
  if (values_.size() != support_->size())
    throw std::invalid_argument("policy surface: value count does not match support");
}

double PolicySurface::lookup(double t, double x) const {
  const Support& s = *support_;
  const double w = s.warp(t);
  const std::size_t n = s.time_count();
  double pi;
  if (s.representation == Representation::separable) {
    std::size_t a;
    double f;
    s.locate(w, a, f);
    pi = a + 1 < n ? (1.0 - f) * values_[a] + f * values_[a + 1] : values_[n - 1];
  } else {
    const double pos = std::clamp(w, 0.0, 1.0) * static_cast<double>(n);
    const std::size_t j = std::min(static_cast<std::size_t>(std::lround(pos)), n - 1);
    const std::size_t m = s.wealth_count();
    const double* row = values_.data() + j * m;
    const double p = std::clamp((std::log(x) - s.log_wealth_min) / s.log_wealth_step, 0.0,
                                static_cast<double>(m - 1));
    const std::size_t a = std::min(static_cast<std::size_t>(p), m - 2);
    const double f = p - static_cast<double>(a);
    pi = (1.0 - f) * row[a] + f * row[a + 1];
  }
  return std::clamp(pi, 0.0, 1.0);
}

double policy_lookup(const PolicySurface& policy, double t, double x) { return policy.lookup(t, x); }

// ------------------------------------------------------------ pi search

PiChoice maximize_concave_unit(const std::function<double(double)>& f, double tolerance,
                               std::span<const double> extra_candidates) {
  struct Eval {
    double pi, v;
  };
  std::vector<Eval> evals;
  evals.reserve(48);
  auto probe = [&](double pi) {
    const double v = f(pi);
    evals.push_back({pi, std::isnan(v) ? kNegInf : v});
    return evals.back().v;
  };

  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0, b = 1.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = probe(c);
  double fd = probe(d);
  while (b - a > tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = probe(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = probe(d);
    }
  }
  probe(0.5 * (a + b));
  probe(0.0);
  probe(1.0);
  for (double pi : extra_candidates)
    if (pi >= 0.0 && pi <= 1.0) probe(pi);

  Eval best = evals.front();
  for (const auto& e : evals)
    if (e.v > best.v || (e.v == best.v && e.pi < best.pi)) best = e;
  PiChoice out{best.pi, best.v, best.pi};
  if (std::isfinite(best.v)) {
    const double floor = best.v - kTieTolerance * std::max(1.0, std::abs(best.v));
    for (const auto& e : evals)
      if (e.v >= floor && e.pi < out.pi) out.pi = e.pi;
  }
  return out;
}

// -------------------------------------------------------------- DpSolver

struct DpSolver::Stencil {
  struct Entry {
    double weight;
    double w;  // warped time of the next arrival
    std::size_t cell;
    double frac;
    std::size_t atom_begin, atom_end;
  };
  std::vector<std::vector<Entry>> nodes;
  std::vector<double> prob;
  std::vector<double> z;

  // Separable mode: the return expectations per entry depend only on
  // (node, pi), and the pi probes repeat once the policy settles.
  struct Shifts {
    std::vector<long> cells;
    std::vector<double> weight;
    std::vector<double> log_shift;
    std::vector<char> dead;
    bool minus_infinity = false;
  };
  struct Memo {
    std::mutex lock;
    std::unordered_map<std::uint64_t, std::vector<double>> by_pi;
    std::unordered_map<std::uint64_t, Shifts> shifts_by_pi;
  };
  std::vector<Memo> memo;
};

namespace {

// Expected value atoms of the return law, with negligible atoms trimmed and
// the rest renormalized.
void append_atoms(const ReturnLaw& law, int order, std::vector<double>& prob, std::vector<double>& z) {
  auto atoms = law.discretize(order);
  double pmax = 0.0;
  for (const auto& a : atoms) pmax = std::max(pmax, a.prob);
  double kept = 0.0;
  const std::size_t start = prob.size();
  for (const auto& a : atoms) {
    if (a.prob < kAtomCutoff * pmax) continue;
    prob.push_back(a.prob);
    z.push_back(a.z);
    kept += a.prob;
  }
  for (std::size_t i = start; i < prob.size(); ++i) prob[i] /= kept;
}

}  // namespace

DpSolver::DpSolver(MarketModel model, IntensityProfile profile, UtilitySpec utility, SolverConfig cfg)
    : model_(std::move(model)), profile_(profile), utility_(utility), cfg_(cfg) {
  cfg_.validate();
  if (std::abs(model_.horizon() - profile_.horizon()) > 1e-12 * std::max(1.0, model_.horizon()))
    throw std::invalid_argument("solver: market and intensity horizons differ");
  support_ = Support::make(profile_, cfg_);
  stencil_ = std::make_unique<Stencil>();
  const Support& s = *support_;
  stencil_->nodes.resize(s.time_count());
  stencil_->memo = std::vector<Stencil::Memo>(s.time_count());
  for (std::size_t j = 0; j < s.time_count(); ++j) {
    const double t = s.times[j];
    for (const auto& node : time_quadrature(profile_, t, cfg_.time_quadrature_nodes)) {
      Stencil::Entry e{};
      e.weight = node.weight;
      e.w = s.next_warped(s.warped[j], node.u);
      s.locate(e.w, e.cell, e.frac);
      e.atom_begin = stencil_->prob.size();
      append_atoms(return_law(model_, t, node.s), cfg_.return_quadrature_nodes, stencil_->prob, stencil_->z);
      e.atom_end = stencil_->prob.size();
      stencil_->nodes[j].push_back(e);
    }
  }
}

DpSolver::~DpSolver() = default;
DpSolver::DpSolver(DpSolver&&) noexcept = default;
DpSolver& DpSolver::operator=(DpSolver&&) noexcept = default;

ValueSurface DpSolver::terminal_value() const { return ValueSurface::terminal(support_, utility_); }

double DpSolver::inner_objective(const ValueSurface& w, double t, double x, double pi) const {
  if (!(t >= 0.0 && t < profile_.horizon())) throw std::domain_error("inner_objective: t outside [0, T)");
  if (!(x > 0.0)) throw std::domain_error("inner_objective: wealth must be positive");
  const Support& s = w.support();
  const double wt = s.warp(t);
  std::vector<double> prob, z;
  double total = 0.0;
  for (const auto& node : time_quadrature(profile_, t, cfg_.time_quadrature_nodes)) {
    prob.clear();
    z.clear();
    append_atoms(return_law(model_, t, node.s), cfg_.return_quadrature_nodes, prob, z);
    const double ws = s.next_warped(wt, node.u);
    double inner = 0.0;
    for (std::size_t h = 0; h < prob.size(); ++h) {
      const double g = 1.0 + pi * z[h];
      if (!(g > 0.0)) {
        if (utility_.is_log() || utility_.gamma() < 0.0) return kNegInf;
        continue;  // U(0) = 0 for gamma in (0,1)
      }
      inner += prob[h] * w.at_warped(ws, x * g);
    }
    total += node.weight * inner;
  }
  return total;
}

PiChoice DpSolver::maximize_over_pi(const ValueSurface& w, double t, double x) const {
  return maximize_concave_unit([&](double pi) { return inner_objective(w, t, x, pi); }, cfg_.pi_tolerance);
}

OperatorResult DpSolver::apply_operator(const ValueSurface& w) const {
  if (w.support_ptr() != support_)
    throw std::invalid_argument("apply_operator: surface was built on a different support");
  const Support& s = *support_;
  const std::size_t n = s.time_count();
  const std::size_t m = s.wealth_count();
  const auto vals = w.values();
  const auto hint = w.argmax_hint();
  const bool use_hint = hint.size() == vals.size();
  auto& st = *stencil_;
  const double* P = st.prob.data();
  const double* Z = st.z.data();
  const bool is_log = utility_.is_log();
  const double gamma = is_log ? 0.0 : utility_.gamma();

  std::vector<double> next(vals.size()), policy(vals.size()), attained(vals.size());

  if (s.representation == Representation::separable) {
    const double boundary = w.boundary_phi();
    const double sign = gamma < 0.0 ? -1.0 : 1.0;
    parallel_for(n, cfg_.threads, [&](std::size_t j) {
      const auto& entries = st.nodes[j];
      std::vector<double> phi(entries.size());
      for (std::size_t e = 0; e < entries.size(); ++e) {
        const auto& en = entries[e];
        const double hi = en.cell + 1 < n ? vals[en.cell + 1] : boundary;
        phi[e] = (1.0 - en.frac) * vals[en.cell] + en.frac * hi;
      }
      std::lock_guard<std::mutex> guard(st.memo[j].lock);
      auto& memo = st.memo[j].by_pi;
      if (memo.size() > 4096) memo.clear();
      // Per-entry E[(1+pi Z)^gamma] - 1 (power) or E[ln(1+pi Z)] (log). Kept
      // as deviations so pi = 0 gives exactly 0.
      auto expectations = [&](double pi) -> const std::vector<double>& {
        std::uint64_t bits;
        std::memcpy(&bits, &pi, sizeof bits);
        auto [it, fresh] = memo.try_emplace(bits);
        if (!fresh) return it->second;
        auto& out = it->second;
        out.resize(entries.size());
        for (std::size_t e = 0; e < entries.size(); ++e) {
          const auto& en = entries[e];
          double inner = 0.0;
          for (std::size_t h = en.atom_begin; h < en.atom_end; ++h) {
            const double g = pi * Z[h];
            if (!(g > -1.0)) {
              if (is_log || gamma < 0.0) {
                inner = kNegInf;
                break;
              }
              inner -= P[h];
              continue;
            }
            inner += P[h] * (is_log ? std::log1p(g) : std::expm1(gamma * std::log1p(g)));
          }
          out[e] = inner;
        }
        return out;
      };
      // Objective per unit of U(x): sign(gamma) * K(pi) for power, K(pi) for log.
      auto key = [&](double pi) {
        const auto& ex = expectations(pi);
        double total = 0.0;
        for (std::size_t e = 0; e < entries.size(); ++e) {
          if (ex[e] == kNegInf) return kNegInf;
          total += entries[e].weight * (is_log ? phi[e] + ex[e] : (phi[e] - 1.0) + phi[e] * ex[e]);
        }
        return is_log ? total : sign * (1.0 + total);
      };
      const double extra[1] = {use_hint ? hint[j] : -1.0};
      const PiChoice c = maximize_concave_unit(key, cfg_.pi_tolerance, std::span<const double>(extra, 1));
      // U itself is always available (pi = 0 forever).
      const double floor_key = is_log ? 0.0 : sign;
      double phi_new = is_log ? c.value : sign * c.value;
      if (!(c.value >= floor_key)) phi_new = is_log ? 0.0 : 1.0;
      next[j] = phi_new;
      policy[j] = c.pi;
      attained[j] = c.attained;
    });
  } else {
    const double dy = s.log_wealth_step;
    const double cell_span = is_log ? dy : std::expm1(gamma * dy);
    const auto mm = static_cast<long>(m);
    parallel_for(n, cfg_.threads, [&](std::size_t j) {
      const auto& entries = st.nodes[j];
      // Time-interpolated wealth slices, one per time-quadrature node.
      std::vector<double> slices(entries.size() * m);
      for (std::size_t e = 0; e < entries.size(); ++e) {
        const auto& en = entries[e];
        const double* lo = vals.data() + en.cell * m;
        const double* hi = en.cell + 1 < n ? vals.data() + (en.cell + 1) * m : nullptr;
        for (std::size_t i = 0; i < m; ++i) {
          const double top = hi ? hi[i] : utility_.evaluate(s.wealth[i]);
          slices[e * m + i] = (1.0 - en.frac) * lo[i] + en.frac * top;
        }
      }
      const std::size_t base = entries.front().atom_begin;
      const std::size_t count = entries.back().atom_end - base;
      std::lock_guard<std::mutex> guard(st.memo[j].lock);
      auto& memo = st.memo[j].shifts_by_pi;
      if (memo.size() > 4096) memo.clear();
      // ln(1 + pi z) moves every wealth node by the same whole number of
      // cells plus the same offset, so the interpolation weights depend on
      // (atom, pi) only.
      auto shifts = [&](double pi) -> const Stencil::Shifts& {
        std::uint64_t bits;
        std::memcpy(&bits, &pi, sizeof bits);
        auto [it, fresh] = memo.try_emplace(bits);
        if (!fresh) return it->second;
        auto& sh = it->second;
        sh.cells.resize(count);
        sh.weight.resize(count);
        sh.log_shift.resize(count);
        sh.dead.assign(count, 0);
        for (std::size_t k = 0; k < count; ++k) {
          const double g = pi * Z[base + k];
          if (!(g > -1.0)) {
            if (is_log || gamma < 0.0) sh.minus_infinity = true;
            sh.dead[k] = 1;
            continue;
          }
          const double d = std::log1p(g);
          const double c = std::floor(d / dy);
          const double r = d - c * dy;
          const double f = is_log ? r / dy : std::expm1(gamma * r) / cell_span;
          sh.cells[k] = static_cast<long>(c);
          sh.weight[k] = std::clamp(f, 0.0, 1.0);
          sh.log_shift[k] = d;
        }
        return sh;
      };
      for (std::size_t i = 0; i < m; ++i) {
        const auto ii = static_cast<long>(i);
        const double y = s.log_wealth(i);
        auto key = [&](double pi) {
          const auto& sh = shifts(pi);
          if (sh.minus_infinity) return kNegInf;
          double total = 0.0;
          for (std::size_t e = 0; e < entries.size(); ++e) {
            const auto& en = entries[e];
            const double* sl = slices.data() + e * m;
            double inner = 0.0;
            for (std::size_t h = en.atom_begin; h < en.atom_end; ++h) {
              const std::size_t k = h - base;
              if (sh.dead[k]) continue;  // U(0) = 0 for gamma in (0,1)
              const long a = ii + sh.cells[k];
              double v;
              if (a >= 0 && a < mm - 1) {
                const double f = sh.weight[k];
                v = (1.0 - f) * sl[a] + f * sl[a + 1];
              } else {
                // Homothetic extension off the grid.
                const std::size_t edge = a < 0 ? 0 : m - 1;
                const double d = y + sh.log_shift[k] - s.log_wealth(edge);
                v = is_log ? sl[edge] + d : sl[edge] * std::exp(gamma * d);
              }
              inner += P[h] * v;
            }
            total += en.weight * inner;
          }
          return total;
        };
        const std::size_t idx = j * m + i;
        const double extra[1] = {use_hint ? hint[idx] : -1.0};
        const PiChoice c = maximize_concave_unit(key, cfg_.pi_tolerance, std::span<const double>(extra, 1));
        const double u = utility_.evaluate(s.wealth[i]);
        next[idx] = c.value >= u ? c.value : u;
        policy[idx] = c.pi;
        attained[idx] = c.attained;
      }
    });
  }

  ValueSurface out(support_, utility_, std::move(next));
  out.hint_ = std::move(attained);
  return OperatorResult{std::move(out), PolicySurface(support_, std::move(policy))};
}

IterationResult DpSolver::value_iterate(const IterationObserver& observer) const {
  // v* is the first v_m, m >= 1, whose own residual ||Lv_m - v_m|| is below
  // tolerance, so the reported residual and policy belong to v* itself.
  ValueSurface v = terminal_value();
  PolicySurface policy(support_, std::vector<double>(support_->size(), 0.0));
  double residual = kPosInf;
  int m = 0;
  while (m < cfg_.max_iterations) {
    auto r = apply_operator(v);
    ++m;
    const auto a = r.value.values();
    const auto b = v.values();
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
    const double res = diff / (1.0 + sup_norm(a));
    if (observer) observer(m, r.value, r.policy, res);
    if (m > 1 && res < cfg_.tolerance)
      return IterationResult{std::move(v), std::move(r.policy), m, res, true};
    residual = res;
    v = std::move(r.value);
    policy = std::move(r.policy);
  }
  return IterationResult{std::move(v), std::move(policy), m, residual, false};
}

ValueSurface DpSolver::finite_horizon_value(int m) const {
  if (m < 0) throw std::invalid_argument("finite_horizon_value: m must be nonnegative");
  ValueSurface v = terminal_value();
  for (int i = 0; i < m; ++i) v = apply_operator(v).value;
  return v;
}

IterationResult value_iterate(const UtilitySpec& u, const MarketModel& model, const IntensityProfile& prof,
                              const SolverConfig& cfg) {
  return DpSolver(model, prof, u, cfg).value_iterate();
}

ValueSurface finite_horizon_value(int m, const UtilitySpec& u, const MarketModel& model,
                                  const IntensityProfile& prof, const SolverConfig& cfg) {
  return DpSolver(model, prof, u, cfg).finite_horizon_value(m);
}

// ---------------------------------------------------------------- output

namespace {

void write_rows(std::ostream& os, const Support& s, std::span<const double> values,
                const std::vector<std::string>& preamble, const char* separable_name) {
  for (const auto& line : preamble) os << "# " << line << '\n';
  os << "w,t";
  if (s.representation == Representation::separable) {
    os << ',' << separable_name;
  } else {
    for (double x : s.wealth) os << ',' << fmt(x);
  }
  os << '\n';
  const std::size_t m = s.wealth_count();
  for (std::size_t j = 0; j < s.time_count(); ++j) {
    os << fmt(s.warped[j]) << ',' << fmt(s.times[j]);
    for (std::size_t i = 0; i < m; ++i) os << ',' << fmt(values[j * m + i]);
    os << '\n';
  }
}

}  // namespace

void write_surface_csv(std::ostream& os, const ValueSurface& v, const std::vector<std::string>& preamble) {
  write_rows(os, v.support(), v.values(), preamble, "phi");
}

void write_policy_csv(std::ostream& os, const PolicySurface& p, const std::vector<std::string>& preamble) {
  write_rows(os, p.support(), p.values(), preamble, "pi");
}

void write_surface_metadata(std::ostream& os, const ValueSurface& v, const SolverConfig& cfg) {
  const Support& s = v.support();
  os << "representation=" << to_string(s.representation) << '\n'
     << "utility=" << v.utility().describe() << '\n'
     << "gamma=" << fmt(v.utility().is_log() ? 0.0 : v.utility().gamma()) << '\n'
     << "horizon=" << fmt(s.profile.horizon()) << '\n'
     << "intensity_kappa=" << fmt(s.profile.kappa()) << '\n'
     << "intensity_beta=" << fmt(s.profile.beta()) << '\n'
     << "intensity_scale=" << fmt(s.profile.scale()) << '\n'
     << "warp=1-exp(-Lambda_unit(t))\n"
     << "time_nodes=" << cfg.time_nodes << '\n'
     << "wealth_nodes=" << (s.representation == Representation::grid ? cfg.wealth_nodes : 0) << '\n'
     << "wealth_min=" << fmt(cfg.wealth_min) << '\n'
     << "wealth_max=" << fmt(cfg.wealth_max) << '\n'
     << "time_quadrature_nodes=" << cfg.time_quadrature_nodes << '\n'
     << "return_quadrature_nodes=" << cfg.return_quadrature_nodes << '\n'
     << "tolerance=" << fmt(cfg.tolerance) << '\n'
     << "max_iterations=" << cfg.max_iterations << '\n'
     << "pi_tolerance=" << fmt(cfg.pi_tolerance) << '\n';
}

}  // namespace illiquid
