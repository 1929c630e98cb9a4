#include "diffnet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace diffnet {

double to_db(double linear) { return 10.0 * std::log10(linear); }

namespace {

struct TrialOutcome {
  std::vector<double> msd;  // per-iteration MSD, valid up to divergence
  long diverged_at = -1;    // first bad iteration, -1 if none
  double tail_mean = 0.0;
};

double network_msd(const AdaptState& s, const Eigen::VectorXd& w_star,
                   int dim) {
  double acc = 0.0;
  for (std::size_t k = 0; k < s.w.size(); ++k)
    acc += (s.w[k] - w_star.segment(k * dim, dim)).squaredNorm();
  return acc / static_cast<double>(s.w.size());
}

bool state_diverged(const AdaptState& s, double threshold) {
  const double limit = threshold * threshold;
  for (const auto& w : s.w) {
    const double sq = w.squaredNorm();
    if (!std::isfinite(sq) || sq > limit) return true;
  }
  return false;
}

TrialOutcome run_trial(const DiffusionProblem& problem,
                       const ExperimentSpec& spec, const GridPoint& gp,
                       std::uint64_t trial) {
  const int n = problem.source->n_nodes();
  const int dim = problem.source->dim();
  const AdaptConfig cfg{gp.mu, gp.eta};

  TrialOutcome out;
  out.msd.resize(spec.n_iters);
  AdaptState state = AdaptState::zeros(n, dim);
  Sample sample;

  for (long it = 0; it < spec.n_iters; ++it) {
    out.msd[it] = network_msd(state, problem.w_star, dim);
    problem.source->draw_into(spec.seed, trial, static_cast<std::uint64_t>(it),
                              sample);
    switch (spec.algorithm) {
      case Algorithm::kAtc:
        state = atc_step(std::move(state), sample, problem.network,
                         problem.combiners, cfg);
        break;
      case Algorithm::kSingleTask:
        state = single_task_step(std::move(state), sample, problem.network,
                                 problem.combiners, cfg);
        break;
      case Algorithm::kMultitask:
        state = multitask_step(std::move(state), sample, problem.network,
                               problem.combiners, cfg);
        break;
      case Algorithm::kLms:
        state = lms_step(std::move(state), sample, cfg);
        break;
      case Algorithm::kUnmix:
        throw std::invalid_argument("unmix runs use run_unmix()");
    }
    if (state_diverged(state, spec.divergence_threshold)) {
      out.diverged_at = it;
      return out;
    }
  }

  const long tail = std::max<long>(1, spec.n_iters / 4);
  double acc = 0.0;
  for (long it = spec.n_iters - tail; it < spec.n_iters; ++it)
    acc += out.msd[it];
  out.tail_mean = acc / static_cast<double>(tail);
  return out;
}

// Trials are embarrassingly parallel; outcomes are collected per trial and
// reduced afterwards in trial order so the result is independent of the
// thread count.
std::vector<TrialOutcome> run_all_trials(const DiffusionProblem& problem,
                                         const ExperimentSpec& spec,
                                         const GridPoint& gp) {
  std::vector<TrialOutcome> outcomes(spec.n_trials);
  const int workers =
      std::max(1, std::min<int>(spec.threads, spec.n_trials));
  if (workers == 1) {
    for (int t = 0; t < spec.n_trials; ++t)
      outcomes[t] = run_trial(problem, spec, gp, t);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int t = w; t < spec.n_trials; t += workers)
          outcomes[t] = run_trial(problem, spec, gp, t);
      });
    }
    for (auto& th : pool) th.join();
  }
  return outcomes;
}

GridResult summarize(const ExperimentSpec& spec, const GridPoint& gp,
                     const std::vector<TrialOutcome>& outcomes) {
  GridResult res;
  res.point = gp;
  res.empirical.provenance = "empirical";
  res.empirical.msd.assign(spec.n_iters, 0.0);

  int kept = 0;
  std::vector<double> tails;
  tails.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    if (o.diverged_at >= 0) {
      ++res.diverged_trials;
      res.divergence_iterations.push_back(o.diverged_at);
      continue;
    }
    ++kept;
    tails.push_back(o.tail_mean);
    for (long it = 0; it < spec.n_iters; ++it)
      res.empirical.msd[it] += o.msd[it];
  }
  res.empirical.n_trials = kept;
  if (kept > 0) {
    for (auto& v : res.empirical.msd) v /= kept;
    double mean = 0.0;
    for (double t : tails) mean += t;
    mean /= kept;
    double var = 0.0;
    for (double t : tails) var += (t - mean) * (t - mean);
    res.steady_state_msd = mean;
    res.steady_state_stderr =
        kept > 1 ? std::sqrt(var / (kept - 1) / kept) : 0.0;
  }
  return res;
}

void attach_theory(const DiffusionProblem& problem, const ExperimentSpec& spec,
                   GridResult& res) {
  if (!spec.with_theory || !problem.moments) return;
  const AdaptConfig cfg{res.point.mu, res.point.eta};
  TheoryModel model = assemble(problem.network, problem.combiners,
                               *problem.moments, cfg, spec.size_cap);
  const Eigen::VectorXd v0 = -model.w_star;  // w(0) = 0
  res.theory = transient_msd(model, v0, static_cast<int>(spec.n_iters) - 1);
  try {
    res.theory_steady_state = steady_state_msd(model);
  } catch (const StabilityError&) {
    // settings outside the stability region have no steady state
  }
}

}  // namespace

RunResult run(const DiffusionProblem& problem, const ExperimentSpec& spec) {
  if (spec.n_trials < 1 || spec.n_iters < 1)
    throw std::invalid_argument("n_trials and n_iters must be positive");
  for (const auto& gp : spec.grid)
    if (gp.mu <= 0.0 || gp.eta < 0.0)
      throw std::invalid_argument("grid entries need mu > 0 and eta >= 0");

  RunResult result;
  for (const auto& gp : spec.grid) {
    auto outcomes = run_all_trials(problem, spec, gp);
    GridResult res = summarize(spec, gp, outcomes);
    attach_theory(problem, spec, res);
    result.grid.push_back(std::move(res));
  }
  return result;
}

StrategyReport compare_strategies(const DiffusionProblem& problem,
                                  const ExperimentSpec& spec) {
  if (spec.grid.empty())
    throw std::invalid_argument("compare_strategies needs one grid point");
  const GridPoint gp = spec.grid.front();

  const DiffusionProblem singleton = as_singleton_multitask(problem);

  StrategyReport report;
  auto run_one = [&](const DiffusionProblem& p, Algorithm algo, GridPoint g,
                     const std::string& name) {
    ExperimentSpec s = spec;
    s.algorithm = algo;
    s.grid = {g};
    RunResult r = run(p, s);
    report.rows.push_back({name, std::move(r.grid.front())});
  };

  run_one(singleton, Algorithm::kLms, {gp.mu, 0.0}, "non-cooperative");
  run_one(singleton, Algorithm::kMultitask, gp, "multitask");
  run_one(problem, Algorithm::kAtc, gp, "clustered");
  return report;
}

UnmixRunResult run_unmix(const UnmixClean& clean, double snr_db,
                         const ExperimentSpec& spec) {
  if (spec.n_trials < 1 || spec.n_iters < 1)
    throw std::invalid_argument("n_trials and n_iters must be positive");
  const int n = clean.rows * clean.cols;
  const int r = static_cast<int>(clean.M.cols());

  std::vector<Eigen::VectorXd> w_true(n);
  for (int k = 0; k < n; ++k) w_true[k] = clean.W_true.col(k);

  UnmixRunResult result;
  for (const auto& gp : spec.grid) {
    const AdaptConfig cfg{gp.mu, gp.eta};
    UnmixGridResult res;
    res.point = gp;
    res.empirical.provenance = "empirical";
    res.empirical.msd.assign(spec.n_iters, 0.0);
    std::vector<double> tails;

    for (int t = 0; t < spec.n_trials; ++t) {
      UnmixScene scene = realize_unmix_noise(clean, snr_db, spec.seed, t);
      // w(0) = projection of the zero vector = uniform abundances
      std::vector<Eigen::VectorXd> w(
          n, Eigen::VectorXd::Constant(r, 1.0 / static_cast<double>(r)));
      std::vector<double> curve(spec.n_iters);
      for (long it = 0; it < spec.n_iters; ++it) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += (w[k] - w_true[k]).squaredNorm();
        curve[it] = acc / static_cast<double>(n);
        w = unmix_step(w, scene.clean.M, scene.Y, scene.clean.neighbors,
                       scene.rho, cfg);
      }
      const long tail = std::max<long>(1, spec.n_iters / 4);
      double tacc = 0.0;
      for (long it = spec.n_iters - tail; it < spec.n_iters; ++it)
        tacc += curve[it];
      tails.push_back(tacc / static_cast<double>(tail));
      for (long it = 0; it < spec.n_iters; ++it)
        res.empirical.msd[it] += curve[it];
    }

    for (auto& v : res.empirical.msd) v /= spec.n_trials;
    res.empirical.n_trials = spec.n_trials;
    double mean = 0.0;
    for (double t : tails) mean += t;
    mean /= tails.size();
    double var = 0.0;
    for (double t : tails) var += (t - mean) * (t - mean);
    res.steady_state_msd = mean;
    res.steady_state_stderr =
        tails.size() > 1
            ? std::sqrt(var / (tails.size() - 1) / tails.size())
            : 0.0;
    res.final_rmse = std::sqrt(mean / static_cast<double>(r));
    result.grid.push_back(std::move(res));
  }
  return result;
}

}  // namespace diffnet
