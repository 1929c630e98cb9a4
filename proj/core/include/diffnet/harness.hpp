#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "diffnet/adapt.hpp"
#include "diffnet/scenarios.hpp"
#include "diffnet/theory.hpp"

namespace diffnet {

enum class Algorithm { kAtc, kSingleTask, kMultitask, kLms, kUnmix };

struct GridPoint {
  double mu = 0.01;
  double eta = 0.0;
};

struct ExperimentSpec {
  Algorithm algorithm = Algorithm::kAtc;
  std::vector<GridPoint> grid;
  int n_trials = 100;
  long n_iters = 2000;
  std::uint64_t seed = 0;
  bool with_theory = true;
  int threads = 1;
  double divergence_threshold = 1e12;  // trial aborts when ||w_k|| exceeds it
  std::size_t size_cap = kDefaultTheorySizeCap;
};

// Trial-averaged network MSD (1/N) sum_k ||w_k(n) - w*_k||^2 per iteration.
struct LearningCurve {
  std::vector<double> msd;  // length n_iters, index 0 = initial state
  int n_trials = 0;
  std::string provenance;  // "empirical" | "theory"
};

struct GridResult {
  GridPoint point;
  LearningCurve empirical;
  // Tail mean over the final 25% of iterations, with its standard error over
  // trials (linear units).
  double steady_state_msd = std::numeric_limits<double>::quiet_NaN();
  double steady_state_stderr = std::numeric_limits<double>::quiet_NaN();
  std::optional<MsdCurve> theory;
  std::optional<double> theory_steady_state;
  int diverged_trials = 0;
  std::vector<long> divergence_iterations;  // first bad iteration per aborted trial
};

struct RunResult {
  std::vector<GridResult> grid;
};

// Runs the Monte Carlo ensemble. Trial t draws every sample from the stream
// keyed by (seed, t, iteration) only, so results are invariant to execution
// order and thread count; aggregation sums in trial order. Diverged trials
// are excluded from the averages and reported.
RunResult run(const DiffusionProblem& problem, const ExperimentSpec& spec);

// Runs non-cooperative LMS, the multitask variant, and the clustered
// multitask algorithm on the same environment and seeds (grid[0] supplies
// (mu, eta)). Rows are ordered [non-cooperative, multitask, clustered].
struct StrategyRow {
  std::string strategy;
  GridResult result;
};
struct StrategyReport {
  std::vector<StrategyRow> rows;
};
StrategyReport compare_strategies(const DiffusionProblem& problem,
                                  const ExperimentSpec& spec);

// Unmixing runs iterate the projected-subgradient update on a fixed scene;
// trials redraw the observation noise. Curves carry the network MSD over
// abundances; RMSE = sqrt(msd / R).
struct UnmixGridResult {
  GridPoint point;
  LearningCurve empirical;
  double final_rmse = std::numeric_limits<double>::quiet_NaN();
  double steady_state_msd = std::numeric_limits<double>::quiet_NaN();
  double steady_state_stderr = std::numeric_limits<double>::quiet_NaN();
};
struct UnmixRunResult {
  std::vector<UnmixGridResult> grid;
};
UnmixRunResult run_unmix(const UnmixClean& clean, double snr_db,
                         const ExperimentSpec& spec);

double to_db(double linear);

}  // namespace diffnet
