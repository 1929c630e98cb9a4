#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "diffnet/errors.hpp"
#include "diffnet/harness.hpp"
#include "diffnet/scenarios.hpp"

namespace diffnet {

enum class ScenarioKind {
  kIllustrative,
  kSpectrum,
  kLocalization,
  kUnmix,
  kNetwork
};

// Parsed experiment configuration. One JSON document drives a run:
//   {
//     "scenario":  {"type": "illustrative" | "spectrum" | "localization" |
//                   "unmix" | "network", ...params},
//     "algorithm": "atc" | "single_task" | "multitask" | "lms" | "unmix" |
//                  "compare",
//     "grid":      [{"mu": 0.01, "eta": 0.1}, ...],
//     "n_trials":  100, "n_iters": 2000, "seed": 42,
//     "theory":    true, "threads": 1,
//     "require_stable": false, "size_cap": 1000000,
//     "out_dir":   "out"
//   }
// Scenario "network" embeds the network document plus an "env" block with
// per-cluster optima, regressor covariances and noise variances.
struct RunConfig {
  ScenarioKind scenario = ScenarioKind::kIllustrative;
  SpectrumParams spectrum;
  LocalizationParams localization;
  UnmixParams unmix;
  std::shared_ptr<DiffusionProblem> custom;  // scenario == kNetwork

  ExperimentSpec experiment;
  bool compare = false;  // algorithm == "compare"
  bool require_stable = false;
  std::string out_dir = "out";
  std::uint64_t config_hash = 0;

  // Throw ConfigError naming the offending key on schema violations.
  static RunConfig from_json(const std::string& json_text);
  static RunConfig from_file(const std::string& path);
};

// Builds the scenario's problem. For kUnmix use make_unmix_clean instead.
DiffusionProblem make_problem(const RunConfig& cfg);

// Subcommand bodies. They throw (ConfigError, DivergenceError, SizeCapError,
// ...) rather than exit; the CLI maps exceptions to exit codes.
void cmd_run(const RunConfig& cfg);
void cmd_validate(const RunConfig& cfg);
void cmd_theory(const RunConfig& cfg);
void cmd_oracle(const RunConfig& cfg);

}  // namespace diffnet
