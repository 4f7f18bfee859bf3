#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatctl/core.hpp"
#include "heatctl/solvers.hpp"

namespace heatctl {

/// Invalid configuration; carries one "field: problem" line per defect.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

struct BruteForceConfig {
  std::size_t k_modes = 1;
  std::size_t m_intervals = 1;
  Vector amp_grid;
  std::size_t steps = 400;
};

struct SimulateConfig {
  double horizon = 0.0;  // 0 selects 1.5 * ln(||y0|| / r) / lambda_1
  std::size_t steps = 2000;
  double tol = 1e-3;
};

struct GradcheckConfig {
  std::size_t pairs = 20;
  std::uint64_t seed = 1;
  double eps = 0.0;  // 0: default_fd_step(f)
  double horizon = 0.1;
  double bound = 5.0;
};

struct ExperimentConfig {
  double ell = 1.0;
  std::size_t n = 127;
  double omega_a = 0.0;
  double omega_b = 1.0;
  NonlinearityKind kind = NonlinearityKind::zero;
  double lipschitz = 0.0;
  std::map<std::size_t, double> y0_modes;
  std::optional<Vector> y0_values;  // from the vector file escape hatch
  double r = 0.5;
  SolverOptions solver;

  std::optional<double> horizon;  // experiment.T
  std::optional<double> bound;    // experiment.M
  Vector T_grid;
  Vector M_grid;
  SimulateConfig simulate;
  GradcheckConfig gradcheck;
  std::optional<BruteForceConfig> bruteforce;

  nlohmann::json document;  // effective document after overrides

  SpatialGrid grid() const;
  NonlinearitySpec nonlinearity() const;
  Vector initial_state() const;
  Problem problem() const;
};

/// Parses and validates; relative vector-file paths resolve against base_dir.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Applies "dotted.key=value"; value is read as JSON, falling back to a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// FNV-1a 64-bit hash of the canonical dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

/// Reads n whitespace-separated values.
Vector read_vector_file(const std::filesystem::path& path);

/// Decimal with 17 significant digits.
std::string format_double(double x);

inline constexpr const char* kCurveHeader = "param,value,bracket_lo,bracket_hi,oracle_value,iterations";

void export_curve(const ValueCurve& curve, const std::filesystem::path& path);
ValueCurve parse_curve(const std::filesystem::path& path);

}  // namespace heatctl
