#pragma once

#include "illiquid/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace illiquid {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitAssumptionViolation = 3,
  kExitNotConverged = 4,
};

struct RunOptions {
  std::optional<std::string> output_directory;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<double>> k_list;
  std::optional<long> paths;
  std::optional<int> m_max;
  bool zero_policy = false;  ///< simulate with pi = 0 instead of the solved policy
  bool timing = false;       ///< record wall-clock seconds in the sweep CSV
  std::ostream* log = nullptr;  ///< diagnostics; std::cerr when null
};

/// Config with command-line overrides applied.
ExperimentConfig apply_overrides(ExperimentConfig cfg, const RunOptions& opts);

/// "illiquid <version> config_hash=<hex>" for the effective config.
std::string provenance_line(const ExperimentConfig& cfg);

// Each writes its CSV outputs under the output directory and returns an ExitCode.
int run_solve(const ExperimentConfig& cfg, const RunOptions& opts = {});
int run_simulate(const ExperimentConfig& cfg, const RunOptions& opts = {});
int run_converge(const ExperimentConfig& cfg, const RunOptions& opts = {});
int run_iterate_trace(const ExperimentConfig& cfg, const RunOptions& opts = {});

const char* version();

}  // namespace illiquid
