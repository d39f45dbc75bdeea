#pragma once

#include "illiquid/arrivals.hpp"
#include "illiquid/dp.hpp"
#include "illiquid/market.hpp"
#include "illiquid/montecarlo.hpp"
#include "illiquid/utility.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace illiquid {

/// Bad or inconsistent configuration; `field` is "section.key" when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message, long line = 0);
  const std::string& field() const { return field_; }
  long line() const { return line_; }

 private:
  std::string field_;
  long line_;
};

struct JumpConfig {
  std::vector<double> rate_breaks_years;
  std::vector<double> rate_per_year;
  std::string size_law = "lognormal";  ///< lognormal | logexponential
  double log_mean = 0.0;
  double log_stdev = 0.0;
  double decay_rate = 1.0;             ///< logexponential only
  double moment_q = 2.0;
  std::optional<double> moment_r;
};

struct ExperimentConfig {
  double horizon_years = 1.0;
  std::vector<double> drift_breaks_years;
  std::vector<double> drift_per_year{0.05};
  std::vector<double> volatility_breaks_years;
  std::vector<double> volatility_per_sqrt_year{0.2};
  std::optional<JumpConfig> jumps;

  std::string intensity_kind = "power_blowup";
  double kappa = 1.0;
  double beta = 1.0;
  double intensity_scale = 1.0;

  std::string utility_kind = "power";  ///< power | log
  double gamma = 0.5;

  SolverConfig solver;
  bool wealth_bounds_set = false;  ///< otherwise [X0/100, 100 X0]
  SimConfig simulation;

  std::vector<double> k_list{1, 2, 4, 8, 16, 32, 64};
  int m_max = 10;
  std::string output_directory = "out";

  MarketModel market() const;
  IntensityProfile intensity() const;
  UtilitySpec utility() const;
  /// Solver settings with wealth bounds resolved against X0.
  SolverConfig solver_config() const;

  /// Stable key=value rendering of every setting; the basis of the config hash.
  std::string canonical() const;
};

ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& data);
/// Seed for a named subsystem derived from the master seed.
std::uint64_t derive_seed(std::uint64_t seed, const std::string& subsystem);

}  // namespace illiquid
