#include "illiquid/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <iterator>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace illiquid {

namespace pt = boost::property_tree;

ConfigError::ConfigError(std::string field, const std::string& message, long line)
    : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)), line_(line) {}

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model",
       {"horizon_years", "drift_per_year", "drift_breaks_years", "volatility_per_sqrt_year",
        "volatility_breaks_years"}},
      {"jumps",
       {"enabled", "rate_per_year", "rate_breaks_years", "size_law", "log_mean", "log_stdev", "decay_rate",
        "moment_q", "moment_r"}},
      {"intensity", {"kind", "kappa", "beta", "scale"}},
      {"utility", {"kind", "gamma"}},
      {"solver",
       {"representation", "time_nodes", "wealth_nodes", "wealth_min", "wealth_max", "time_quadrature_nodes",
        "return_quadrature_nodes", "tolerance", "max_iterations", "pi_tolerance", "threads"}},
      {"simulation", {"paths", "seed", "initial_wealth", "time_cutoff_years", "max_arrivals", "threads"}},
      {"converge", {"k_list"}},
      {"trace", {"m_max"}},
      {"output", {"directory"}},
  };
  return keys;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return *v;
  }

  void number(const std::string& section, const std::string& key, double& out) const {
    if (auto s = raw(section, key)) out = to_double(section + "." + key, *s);
  }

  void integer(const std::string& section, const std::string& key, long& out) const {
    if (auto s = raw(section, key)) out = to_long(section + "." + key, *s);
  }

  void integer(const std::string& section, const std::string& key, int& out) const {
    long v = out;
    integer(section, key, v);
    out = static_cast<int>(v);
  }

  void list(const std::string& section, const std::string& key, std::vector<double>& out) const {
    auto s = raw(section, key);
    if (!s) return;
    out.clear();
    std::stringstream ss(*s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.find_first_not_of(" \t") == std::string::npos) continue;
      out.push_back(to_double(section + "." + key, item));
    }
  }

  void text(const std::string& section, const std::string& key, std::string& out) const {
    if (auto s = raw(section, key)) out = *s;
  }

  static double to_double(const std::string& field, const std::string& s) {
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ConfigError(field, "expected a number, got '" + s + "'");
    }
    if (s.find_first_not_of(" \t", used) != std::string::npos)
      throw ConfigError(field, "expected a number, got '" + s + "'");
    if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
    return v;
  }

  static long to_long(const std::string& field, const std::string& s) {
    std::size_t used = 0;
    long long v;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      throw ConfigError(field, "expected an integer, got '" + s + "'");
    }
    if (s.find_first_not_of(" \t", used) != std::string::npos)
      throw ConfigError(field, "expected an integer, got '" + s + "'");
    return static_cast<long>(v);
  }

 private:
  const pt::ptree& tree_;
};

bool to_bool(const std::string& field, const std::string& s) {
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  throw ConfigError(field, "expected true or false, got '" + s + "'");
}

void check_pieces(const std::string& field, double horizon, const std::vector<double>& breaks,
                  std::size_t n_values) {
  if (n_values != breaks.size() + 1)
    throw ConfigError(field, "need one value per piece (" + std::to_string(breaks.size() + 1) + ")");
  double prev = 0.0;
  for (double b : breaks) {
    if (!(b > prev && b < horizon))
      throw ConfigError(field, "breakpoints must increase strictly inside (0, horizon_years)");
    prev = b;
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

// Line of `section.key` (or of `[section]`) in the ini text; 0 if absent.
long line_of(const std::string& text, const std::string& field) {
  const auto dot = field.find('.');
  const std::string section = field.substr(0, dot);
  const std::string key = dot == std::string::npos ? "" : field.substr(dot + 1);
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
  };
  std::istringstream in(text);
  std::string line, current;
  for (long n = 1; std::getline(in, line); ++n) {
    line = trim(line);
    if (line.empty() || line[0] == ';' || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      current = trim(line.substr(1, line.size() - 2));
      if (key.empty() && current == section) return n;
      continue;
    }
    const auto eq = line.find('=');
    if (!key.empty() && current == section && eq != std::string::npos && trim(line.substr(0, eq)) == key) return n;
  }
  return 0;
}

ExperimentConfig parse_tree(const pt::ptree& tree);

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::istringstream is(text);
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", source + ":" + std::to_string(e.line()) + ": " + e.message(), static_cast<long>(e.line()));
  }
  try {
    return parse_tree(tree);
  } catch (const ConfigError& e) {
    if (e.line() != 0 || e.field().empty()) throw;
    const long n = line_of(text, e.field());
    if (n == 0) throw;
    throw ConfigError(e.field(), std::string(e.what()).substr(e.field().size() + 2) + " (" + source + ":" +
                                     std::to_string(n) + ")",
                      n);
  }
}

namespace {

ExperimentConfig parse_tree(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      if (!body.data().empty()) throw ConfigError(section, "key outside any section");
      throw ConfigError(section, "unknown section");
    }
    for (const auto& [key, value] : body)
      if (!it->second.count(key)) throw ConfigError(section + "." + key, "unknown key");
  }

  Reader r(tree);
  ExperimentConfig c;

  r.number("model", "horizon_years", c.horizon_years);
  if (!(c.horizon_years > 0.0)) throw ConfigError("model.horizon_years", "must be positive");
  r.list("model", "drift_per_year", c.drift_per_year);
  r.list("model", "drift_breaks_years", c.drift_breaks_years);
  r.list("model", "volatility_per_sqrt_year", c.volatility_per_sqrt_year);
  r.list("model", "volatility_breaks_years", c.volatility_breaks_years);
  check_pieces("model.drift_per_year", c.horizon_years, c.drift_breaks_years, c.drift_per_year.size());
  check_pieces("model.volatility_per_sqrt_year", c.horizon_years, c.volatility_breaks_years,
               c.volatility_per_sqrt_year.size());
  for (double v : c.volatility_per_sqrt_year)
    if (v < 0.0) throw ConfigError("model.volatility_per_sqrt_year", "must be nonnegative");

  bool jumps_on = false;
  if (auto s = r.raw("jumps", "enabled")) jumps_on = to_bool("jumps.enabled", *s);
  if (jumps_on) {
    JumpConfig j;
    r.list("jumps", "rate_per_year", j.rate_per_year);
    r.list("jumps", "rate_breaks_years", j.rate_breaks_years);
    if (j.rate_per_year.empty()) throw ConfigError("jumps.rate_per_year", "required when jumps are enabled");
    check_pieces("jumps.rate_per_year", c.horizon_years, j.rate_breaks_years, j.rate_per_year.size());
    for (double v : j.rate_per_year)
      if (v < 0.0) throw ConfigError("jumps.rate_per_year", "must be nonnegative");
    r.text("jumps", "size_law", j.size_law);
    if (j.size_law != "lognormal" && j.size_law != "logexponential")
      throw ConfigError("jumps.size_law", "must be lognormal or logexponential");
    r.number("jumps", "log_mean", j.log_mean);
    r.number("jumps", "log_stdev", j.log_stdev);
    if (j.log_stdev < 0.0) throw ConfigError("jumps.log_stdev", "must be nonnegative");
    r.number("jumps", "decay_rate", j.decay_rate);
    if (!(j.decay_rate > 0.0)) throw ConfigError("jumps.decay_rate", "must be positive");
    r.number("jumps", "moment_q", j.moment_q);
    if (!(j.moment_q > 1.0)) throw ConfigError("jumps.moment_q", "must exceed 1");
    if (r.raw("jumps", "moment_r")) {
      double v = 0.0;
      r.number("jumps", "moment_r", v);
      if (!(v < 0.0)) throw ConfigError("jumps.moment_r", "must be negative");
      j.moment_r = v;
    }
    c.jumps = j;
  }

  r.text("intensity", "kind", c.intensity_kind);
  if (c.intensity_kind != "power_blowup") throw ConfigError("intensity.kind", "only power_blowup is supported");
  r.number("intensity", "kappa", c.kappa);
  if (!(c.kappa > 0.0)) throw ConfigError("intensity.kappa", "must be positive");
  r.number("intensity", "beta", c.beta);
  if (!(c.beta >= 1.0)) throw ConfigError("intensity.beta", "must be >= 1");
  r.number("intensity", "scale", c.intensity_scale);
  if (!(c.intensity_scale >= 1.0)) throw ConfigError("intensity.scale", "must be >= 1");

  r.text("utility", "kind", c.utility_kind);
  if (c.utility_kind != "power" && c.utility_kind != "log")
    throw ConfigError("utility.kind", "must be power or log");
  r.number("utility", "gamma", c.gamma);
  if (c.utility_kind == "power" && !(c.gamma < 1.0 && c.gamma != 0.0))
    throw ConfigError("utility.gamma", "must satisfy gamma < 1 and gamma != 0");

  if (c.jumps && !c.jumps->moment_r && (c.utility_kind == "log" || c.gamma < 0.0))
    throw ConfigError("jumps.moment_r", "required when jumps are enabled and utility is unbounded below");

  auto& s = c.solver;
  std::string rep = "separable";
  r.text("solver", "representation", rep);
  if (rep == "separable") {
    s.representation = Representation::separable;
  } else if (rep == "grid") {
    s.representation = Representation::grid;
  } else {
    throw ConfigError("solver.representation", "must be separable or grid");
  }
  r.integer("solver", "time_nodes", s.time_nodes);
  r.integer("solver", "wealth_nodes", s.wealth_nodes);
  const bool has_min = r.raw("solver", "wealth_min").has_value();
  const bool has_max = r.raw("solver", "wealth_max").has_value();
  if (has_min != has_max) throw ConfigError(has_min ? "solver.wealth_max" : "solver.wealth_min", "set both bounds or neither");
  c.wealth_bounds_set = has_min;
  r.number("solver", "wealth_min", s.wealth_min);
  r.number("solver", "wealth_max", s.wealth_max);
  r.integer("solver", "time_quadrature_nodes", s.time_quadrature_nodes);
  r.integer("solver", "return_quadrature_nodes", s.return_quadrature_nodes);
  r.number("solver", "tolerance", s.tolerance);
  r.integer("solver", "max_iterations", s.max_iterations);
  r.number("solver", "pi_tolerance", s.pi_tolerance);
  r.integer("solver", "threads", s.threads);
  if (s.time_nodes < 1) throw ConfigError("solver.time_nodes", "must be positive");
  if (s.wealth_nodes < 2) throw ConfigError("solver.wealth_nodes", "must be at least 2");
  if (c.wealth_bounds_set && !(s.wealth_min > 0.0)) throw ConfigError("solver.wealth_min", "must be positive");
  if (c.wealth_bounds_set && !(s.wealth_max > s.wealth_min))
    throw ConfigError("solver.wealth_max", "must exceed solver.wealth_min");
  if (s.time_quadrature_nodes < 1) throw ConfigError("solver.time_quadrature_nodes", "must be positive");
  if (s.return_quadrature_nodes < 1) throw ConfigError("solver.return_quadrature_nodes", "must be positive");
  if (!(s.tolerance > 0.0)) throw ConfigError("solver.tolerance", "must be positive");
  if (s.max_iterations < 1) throw ConfigError("solver.max_iterations", "must be positive");
  if (!(s.pi_tolerance > 0.0)) throw ConfigError("solver.pi_tolerance", "must be positive");
  if (s.threads < 0) throw ConfigError("solver.threads", "must be nonnegative");

  auto& sim = c.simulation;
  r.integer("simulation", "paths", sim.n_paths);
  if (sim.n_paths < 1) throw ConfigError("simulation.paths", "must be at least 1");
  if (auto v = r.raw("simulation", "seed")) {
    try {
      std::size_t used = 0;
      sim.seed = std::stoull(*v, &used);
      if (used != v->size() || v->front() == '-') throw std::invalid_argument("seed");
    } catch (const std::exception&) {
      throw ConfigError("simulation.seed", "expected a nonnegative integer, got '" + *v + "'");
    }
  }
  r.number("simulation", "initial_wealth", sim.initial_wealth);
  if (!(sim.initial_wealth > 0.0)) throw ConfigError("simulation.initial_wealth", "must be positive");
  r.number("simulation", "time_cutoff_years", sim.time_cutoff);
  if (!(sim.time_cutoff > 0.0)) throw ConfigError("simulation.time_cutoff_years", "must be positive");
  r.integer("simulation", "max_arrivals", sim.max_arrivals);
  if (sim.max_arrivals < 1) throw ConfigError("simulation.max_arrivals", "must be at least 1");
  r.integer("simulation", "threads", sim.threads);
  if (sim.threads < 0) throw ConfigError("simulation.threads", "must be nonnegative");

  r.list("converge", "k_list", c.k_list);
  if (c.k_list.empty()) throw ConfigError("converge.k_list", "must not be empty");
  for (std::size_t i = 0; i < c.k_list.size(); ++i) {
    if (!(c.k_list[i] >= 1.0)) throw ConfigError("converge.k_list", "entries must be >= 1");
    if (i && !(c.k_list[i] > c.k_list[i - 1])) throw ConfigError("converge.k_list", "must be increasing");
  }
  r.integer("trace", "m_max", c.m_max);
  if (c.m_max < 0) throw ConfigError("trace.m_max", "must be nonnegative");
  r.text("output", "directory", c.output_directory);

  try {
    (void)c.market();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("model", e.what());
  }
  return c;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  return parse_config(in, path);
}

MarketModel ExperimentConfig::market() const {
  PiecewiseConstant drift(horizon_years, drift_breaks_years, drift_per_year);
  PiecewiseConstant vol(horizon_years, volatility_breaks_years, volatility_per_sqrt_year);
  std::optional<JumpSpec> spec;
  if (jumps) {
    JumpSpec js;
    js.rate = PiecewiseConstant(horizon_years, jumps->rate_breaks_years, jumps->rate_per_year);
    if (jumps->size_law == "lognormal") {
      js.size_law = LogNormalJumps{jumps->log_mean, jumps->log_stdev};
    } else {
      js.size_law = LogExponentialJumps{jumps->decay_rate};
    }
    js.q = jumps->moment_q;
    js.r = jumps->moment_r;
    spec = js;
  }
  return MarketModel(std::move(drift), std::move(vol), std::move(spec));
}

IntensityProfile ExperimentConfig::intensity() const {
  auto p = IntensityProfile::power_blowup(horizon_years, kappa, beta);
  return intensity_scale == 1.0 ? p : p.scaled(intensity_scale);
}

UtilitySpec ExperimentConfig::utility() const {
  return utility_kind == "log" ? UtilitySpec::log() : UtilitySpec::power(gamma);
}

SolverConfig ExperimentConfig::solver_config() const {
  SolverConfig s = solver;
  if (!wealth_bounds_set) {
    s.wealth_min = simulation.initial_wealth / 100.0;
    s.wealth_max = simulation.initial_wealth * 100.0;
  }
  return s;
}

std::string ExperimentConfig::canonical() const {
  const SolverConfig s = solver_config();
  std::ostringstream os;
  os << "model.horizon_years=" << fmt(horizon_years) << '\n'
     << "model.drift_per_year=" << join(drift_per_year) << '\n'
     << "model.drift_breaks_years=" << join(drift_breaks_years) << '\n'
     << "model.volatility_per_sqrt_year=" << join(volatility_per_sqrt_year) << '\n'
     << "model.volatility_breaks_years=" << join(volatility_breaks_years) << '\n'
     << "jumps.enabled=" << (jumps ? "true" : "false") << '\n';
  if (jumps) {
    os << "jumps.rate_per_year=" << join(jumps->rate_per_year) << '\n'
       << "jumps.rate_breaks_years=" << join(jumps->rate_breaks_years) << '\n'
       << "jumps.size_law=" << jumps->size_law << '\n'
       << "jumps.log_mean=" << fmt(jumps->log_mean) << '\n'
       << "jumps.log_stdev=" << fmt(jumps->log_stdev) << '\n'
       << "jumps.decay_rate=" << fmt(jumps->decay_rate) << '\n'
       << "jumps.moment_q=" << fmt(jumps->moment_q) << '\n'
       << "jumps.moment_r=" << (jumps->moment_r ? fmt(*jumps->moment_r) : "none") << '\n';
  }
  os << "intensity.kind=" << intensity_kind << '\n'
     << "intensity.kappa=" << fmt(kappa) << '\n'
     << "intensity.beta=" << fmt(beta) << '\n'
     << "intensity.scale=" << fmt(intensity_scale) << '\n'
     << "utility.kind=" << utility_kind << '\n'
     << "utility.gamma=" << fmt(utility_kind == "log" ? 0.0 : gamma) << '\n'
     << "solver.representation=" << to_string(s.representation) << '\n'
     << "solver.time_nodes=" << s.time_nodes << '\n'
     << "solver.wealth_nodes=" << s.wealth_nodes << '\n'
     << "solver.wealth_min=" << fmt(s.wealth_min) << '\n'
     << "solver.wealth_max=" << fmt(s.wealth_max) << '\n'
     << "solver.time_quadrature_nodes=" << s.time_quadrature_nodes << '\n'
     << "solver.return_quadrature_nodes=" << s.return_quadrature_nodes << '\n'
     << "solver.tolerance=" << fmt(s.tolerance) << '\n'
     << "solver.max_iterations=" << s.max_iterations << '\n'
     << "solver.pi_tolerance=" << fmt(s.pi_tolerance) << '\n'
     << "simulation.paths=" << simulation.n_paths << '\n'
     << "simulation.seed=" << simulation.seed << '\n'
     << "simulation.initial_wealth=" << fmt(simulation.initial_wealth) << '\n'
     << "simulation.time_cutoff_years=" << fmt(simulation.time_cutoff) << '\n'
     << "simulation.max_arrivals=" << simulation.max_arrivals << '\n'
     << "converge.k_list=" << join(k_list) << '\n'
     << "trace.m_max=" << m_max << '\n';
  return os.str();
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t seed, const std::string& subsystem) {
  std::string key(8, '\0');
  for (int i = 0; i < 8; ++i) key[i] = static_cast<char>((seed >> (8 * i)) & 0xff);
  return fnv1a64(key + ":" + subsystem);
}

}  // namespace illiquid
