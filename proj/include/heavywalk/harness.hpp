#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "heavywalk/lyapunov.hpp"
#include "heavywalk/strip.hpp"
#include "heavywalk/walk.hpp"

namespace heavywalk {

// Worker count override; unset means the OpenMP default. Results never
// depend on it: every replica and sub-task draws from its own derived
// stream.
inline constexpr const char* kThreadsEnvVar = "HEAVYWALK_THREADS";

enum class ModelKind { walk, strip, lamperti_returns, drift, analytic };

struct LampertiScenario {
  std::string label;
  double gamma = 0.5;
  double sigma2 = 1.0;
  long long excursions = 1000;
  long long cap = 1000000;
};

struct DriftScenario {
  std::string label;
  IncrementLaw law;
  LyapunovSpec lyapunov;
  DriftTarget target;
  std::vector<double> grid;
  long long n = 1000;
};

struct CheckSpec {
  std::string name;
  nlohmann::json params;
};

// A full experiment: one model, R replicas, a list of named checks.
// Parsed from JSON; every check's parameters are validated against the
// target operation's preconditions before any simulation starts.
struct ExperimentConfig {
  std::string preset;  // label carried into the report, may be empty
  ModelKind model = ModelKind::walk;
  IncrementLaw law;                          // model == walk
  StripKernel kernel;                        // model == strip
  std::vector<LampertiScenario> lamperti;    // model == lamperti_returns
  std::vector<DriftScenario> drift;          // model == drift
  long long horizon = 2;
  long long replicas = 1;
  std::uint64_t master_seed = 0;
  std::vector<double> levels;
  std::vector<CheckSpec> checks;
  std::string output_dir;
};

// Carries every problem found during validation, not just the first.
struct ConfigError : std::runtime_error {
  explicit ConfigError(std::vector<std::string> problems);
  std::vector<std::string> issues;
};

ExperimentConfig parse_config(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);

struct CheckResult {
  std::string name;
  bool pass = false;
  nlohmann::json details;
};

struct RunReport {
  std::string preset;
  std::string config_hash;  // 16 hex digits over the canonical config dump
  std::uint64_t master_seed = 0;
  long long replicas_requested = 0;
  long long replicas_completed = 0;
  std::vector<long long> aborted_replicas;
  std::vector<CheckResult> checks;
  bool all_pass = true;
  double wall_clock_seconds = 0.0;

  nlohmann::json to_json() const;
  // Everything except the wall clock: re-running the same config must
  // reproduce this part byte for byte.
  nlohmann::json payload() const;
};

// Executes the replicas with derived seeds, writes checkpoint CSVs and the
// report JSON into output_dir (when nonempty), and evaluates all checks.
// A replica hitting a non-finite state is recorded and skipped by the
// checks; the run continues.
RunReport run(const ExperimentConfig& config);

std::vector<std::string> list_presets();

// Throws ConfigError for unknown names.
ExperimentConfig preset_config(const std::string& name);

}  // namespace heavywalk
