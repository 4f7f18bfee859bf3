#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatctl/config.hpp"

namespace heatctl {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,        // solver error or I/O failure
  kExitInvalidConfig = 2,  // parse or validation error, usage error
  kExitH2Violation = 3,    // y0 inside the closed target ball
};

const std::vector<std::string>& subcommands();

struct RunRequest {
  std::string subcommand;
  std::filesystem::path config;
  std::filesystem::path out_dir;
  std::vector<std::string> overrides;
  std::optional<double> value;  // positional T for minnorm, M for mintime
};

/**
 * Executes one experiment and writes summary.json plus CSV series into
 * out_dir. summary.json holds config_hash, experiment, outputs, diagnostics
 * and wall_time_seconds; everything but the wall time is deterministic.
 */
int run(const RunRequest& req, std::ostream& log);

/// Same, from an already-parsed configuration; returns the summary record.
nlohmann::json run_experiment(const std::string& subcommand, const ExperimentConfig& cfg,
                              const std::filesystem::path& out_dir);

}  // namespace heatctl
