#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <diffnet/harness.hpp>
#include <diffnet/scenarios.hpp>

using namespace diffnet;

namespace {

ExperimentSpec small_spec() {
  ExperimentSpec s;
  s.algorithm = Algorithm::kAtc;
  s.grid = {{0.01, 0.1}};
  s.n_trials = 5;
  s.n_iters = 300;
  s.seed = 99;
  s.with_theory = false;
  return s;
}

}  // namespace

TEST_CASE("same seed gives bit-identical curves") {
  DiffusionProblem p = illustrative_env();
  ExperimentSpec s = small_spec();
  s.n_trials = 1;
  RunResult a = run(p, s);
  RunResult b = run(p, s);
  CHECK(a.grid[0].empirical.msd == b.grid[0].empirical.msd);
}

TEST_CASE("results are invariant to the worker thread count") {
  DiffusionProblem p = illustrative_env();
  ExperimentSpec s = small_spec();
  s.n_trials = 7;
  s.threads = 1;
  RunResult a = run(p, s);
  s.threads = 4;
  RunResult b = run(p, s);
  CHECK(a.grid[0].empirical.msd == b.grid[0].empirical.msd);
  CHECK(a.grid[0].steady_state_msd == b.grid[0].steady_state_msd);
}

TEST_CASE("noiseless single-node LMS converges below 1e-20") {
  ClusteredNetwork net(1, {}, {{0}});
  NodeEnvironment env({Eigen::Vector2d(0.4, -0.2)},
                      {Eigen::Matrix2d::Identity()}, {0.0});
  CombinerSet cs = uniform_combiners(net);
  DiffusionProblem p{net, cs, env.w_star_stacked(),
                     std::make_shared<GaussianSource>(env), env};
  ExperimentSpec s;
  s.algorithm = Algorithm::kLms;
  s.grid = {{0.2, 0.0}};  // well inside the bound 2/1
  s.n_trials = 1;
  s.n_iters = 10000;
  s.seed = 1;
  s.with_theory = false;
  RunResult r = run(p, s);
  CHECK(r.grid[0].empirical.msd.back() < 1e-20);
  CHECK(r.grid[0].diverged_trials == 0);
}

TEST_CASE("the illustrative grid produces empirical and theory curve pairs") {
  DiffusionProblem p = illustrative_env();
  ExperimentSpec s;
  s.algorithm = Algorithm::kAtc;
  s.grid = {{0.01, 0.1}, {0.05, 0.1}, {0.01, 1.0}};
  s.n_trials = 10;
  s.n_iters = 400;
  s.seed = 5;
  s.with_theory = true;
  s.threads = 2;
  RunResult r = run(p, s);
  REQUIRE(r.grid.size() == 3);
  for (const auto& g : r.grid) {
    CHECK(g.empirical.msd.size() == 400);
    CHECK(g.empirical.provenance == "empirical");
    REQUIRE(g.theory.has_value());
    CHECK(g.theory->zeta.size() == 400);
    CHECK(g.theory_steady_state.has_value());
    // both start from the same deterministic initial deviation
    CHECK(g.empirical.msd[0] == doctest::Approx(g.theory->zeta[0]));
    for (double z : g.empirical.msd) CHECK(z >= 0.0);
  }
}

TEST_CASE("divergence detector fires beyond the stability bound") {
  DiffusionProblem p = illustrative_env();
  ExperimentSpec s = small_spec();
  s.grid = {{8.0, 0.1}};  // far above 2/(lambda_max + 2 eta)
  s.n_trials = 3;
  RunResult r = run(p, s);
  CHECK(r.grid[0].diverged_trials == 3);
  CHECK(r.grid[0].divergence_iterations.size() == 3);
}

TEST_CASE("strategy comparison keeps seeds aligned") {
  DiffusionProblem p = illustrative_env();
  ExperimentSpec s = small_spec();
  s.grid = {{0.01, 0.0}};  // eta = 0: multitask must equal non-cooperative
  s.n_trials = 3;
  StrategyReport rep = compare_strategies(p, s);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0].strategy == "non-cooperative");
  CHECK(rep.rows[1].strategy == "multitask");
  CHECK(rep.rows[2].strategy == "clustered");
  CHECK(rep.rows[0].result.empirical.msd == rep.rows[1].result.empirical.msd);
}

TEST_CASE("all strategies coincide on a single-node network") {
  ClusteredNetwork net(1, {}, {{0}});
  NodeEnvironment env({Eigen::Vector2d(0.4, -0.2)},
                      {Eigen::Matrix2d::Identity()}, {0.05});
  DiffusionProblem p{net, uniform_combiners(net), env.w_star_stacked(),
                     std::make_shared<GaussianSource>(env), env};
  ExperimentSpec s = small_spec();
  s.grid = {{0.05, 0.3}};
  s.n_trials = 2;
  StrategyReport rep = compare_strategies(p, s);
  CHECK(rep.rows[0].result.empirical.msd == rep.rows[1].result.empirical.msd);
  CHECK(rep.rows[1].result.empirical.msd == rep.rows[2].result.empirical.msd);
}

TEST_CASE("empirical MSD is non-increasing after the early transient") {
  DiffusionProblem p = illustrative_env();
  ExperimentSpec s;
  s.algorithm = Algorithm::kAtc;
  s.grid = {{0.01, 0.1}};
  s.n_trials = 100;
  s.n_iters = 1200;
  s.seed = 21;
  s.with_theory = false;
  s.threads = 2;
  RunResult r = run(p, s);
  const auto& msd = r.grid[0].empirical.msd;
  const int window = 50;
  std::vector<double> ma(msd.size() - window + 1);
  for (std::size_t i = 0; i + window <= msd.size(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < window; ++j) acc += msd[i + j];
    ma[i] = acc / window;
  }
  for (std::size_t i = 50; i + window < ma.size(); ++i)
    CHECK(ma[i + window] <= ma[i] * 1.05);
}

TEST_CASE("unmix runner reports rmse from the abundance MSD") {
  UnmixParams up;
  up.rows = 8;
  up.cols = 8;
  up.n_endmembers = 3;
  up.n_bands = 16;
  UnmixClean clean = unmix_clean(up);
  ExperimentSpec s;
  s.algorithm = Algorithm::kUnmix;
  s.grid = {{0.01, 0.0}};
  s.n_trials = 2;
  s.n_iters = 50;
  s.seed = 4;
  UnmixRunResult r = run_unmix(clean, 20.0, s);
  REQUIRE(r.grid.size() == 1);
  CHECK(r.grid[0].empirical.msd.size() == 50);
  CHECK(r.grid[0].final_rmse ==
        doctest::Approx(std::sqrt(r.grid[0].steady_state_msd / 3)));
  // descending over the run
  CHECK(r.grid[0].empirical.msd.back() < r.grid[0].empirical.msd.front());
}
