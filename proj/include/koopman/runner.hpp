#pragma once

// Experiment configs: parsing, overrides and execution.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "koopman/io.hpp"

namespace koopman {

inline const std::vector<std::string>& experiment_methods() {
  static const std::vector<std::string> m = {"companion_dmd", "pinv_dmd", "edmd",  "gla",     "partition",
                                             "static",        "mz",       "sindy", "repr_check"};
  return m;
}

struct Sampling {
  double dt = 0.0;
  std::size_t n = 0;
  std::optional<StateVector> initial;
  std::optional<Grid2D> grid;
  std::uint64_t seed = 0;
  /// Leading samples discarded after integration.
  std::size_t transient = 0;
};

struct ExperimentConfig {
  SystemSpec system = SystemSpec::create(SystemKind::circle_rotation);
  std::string method;
  /// Empty when the config has no "dictionary".
  Json dictionary;
  Sampling sampling;
  std::string output_dir;
  std::vector<std::string> formats = {"csv", "json"};
  Json tolerances = Json::object();
  Json options = Json::object();
  /// Directory of the config file; relative paths in options resolve here.
  std::filesystem::path base_dir;
};

/// Validates the common schema. Throws SchemaError with the field path.
ExperimentConfig parse_config(const Json& j, const std::filesystem::path& base_dir = {});

/// Applies "a.b.c=value"; value is parsed as JSON when possible and kept as a
/// string otherwise. Missing intermediate objects are created.
void apply_override(Json& config, const std::string& assignment);

struct RunResult {
  Json summary;
  /// Wall-clock seconds per phase; kept out of summary.json so that re-runs
  /// reproduce it byte for byte.
  Json timing;
  std::vector<std::string> artifacts;
  /// Human-readable lines for the terminal.
  std::string report;
};

/// Runs the experiment and writes its artifacts, summary.json and timing.json
/// into out_dir.
RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Uniform double in [0, 1) from the top 53 bits of std::mt19937_64. The
/// engine's output is fixed by the standard; std::uniform_real_distribution is
/// not, so it is avoided.
class SeededUniform {
 public:
  explicit SeededUniform(std::uint64_t seed) : gen_(seed) {}
  double next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace koopman
