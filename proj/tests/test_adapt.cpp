#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <diffnet/adapt.hpp>
#include <diffnet/scenarios.hpp>
#include <diffnet/theory.hpp>

#include "test_support.hpp"

using namespace diffnet;

namespace {

bool bitwise_equal(const AdaptState& a, const AdaptState& b) {
  if (a.w.size() != b.w.size()) return false;
  for (std::size_t k = 0; k < a.w.size(); ++k) {
    if (a.w[k].size() != b.w[k].size()) return false;
    if (std::memcmp(a.w[k].data(), b.w[k].data(),
                    sizeof(double) * a.w[k].size()) != 0)
      return false;
  }
  return true;
}

CombinerSet identity_combiners(int n) {
  CombinerSet cs;
  cs.A = Eigen::MatrixXd::Identity(n, n);
  cs.C = Eigen::MatrixXd::Identity(n, n);
  cs.P = Eigen::MatrixXd::Zero(n, n);
  cs.p_zero_row.assign(n, 0);
  return cs;
}

// Brute-force KKT oracle: enumerate active sets of the simplex projection.
Eigen::VectorXd simplex_oracle(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  Eigen::VectorXd best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    double sum = 0.0;
    int m = 0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        sum += v[i];
        ++m;
      }
    const double tau = (sum - 1.0) / m;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    bool feasible = true;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        w[i] = v[i] - tau;
        if (w[i] < -1e-12) feasible = false;
      } else if (v[i] - tau > 1e-12) {
        feasible = false;  // KKT: inactive coordinates need v_i <= tau
      }
    }
    if (!feasible) continue;
    const double dist = (w - v).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = w;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("hand-evaluated scalar ATC step") {
  ClusteredNetwork net(1, {}, {{0}});
  CombinerSet cs = uniform_combiners(net);
  AdaptState s = AdaptState::zeros(1, 1);
  Sample sample;
  sample.x = {Eigen::VectorXd::Constant(1, 2.0)};
  sample.d = Eigen::VectorXd::Constant(1, 4.0);
  AdaptConfig cfg{0.1, 0.0};
  s = atc_step(std::move(s), sample, net, cs, cfg);
  CHECK(s.psi[0][0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(s.w[0][0] == doctest::Approx(0.8).epsilon(1e-15));

  AdaptState t = AdaptState::zeros(1, 1);
  t = single_task_step(std::move(t), sample, net, cs, cfg);
  CHECK(t.w[0][0] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("hand-evaluated multitask coupling step") {
  ClusteredNetwork net(2, {{0, 1}}, {{0}, {1}});
  CombinerSet cs = identity_combiners(2);
  cs.P(0, 1) = 1.0;
  cs.P(1, 0) = 1.0;
  AdaptState s = AdaptState::zeros(2, 1);
  s.w[0][0] = 1.0;
  s.w[1][0] = 0.0;
  Sample sample;
  sample.x = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
  sample.d = Eigen::VectorXd::Zero(2);
  s = multitask_step(std::move(s), sample, net, cs, AdaptConfig{1.0, 1.0});
  CHECK(s.w[0][0] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("reduction identities hold bit for bit") {
  RngStream rng(31337);
  int steps_single = 0, steps_multi = 0, steps_lms = 0;
  while (steps_single < 1000 || steps_multi < 1000 || steps_lms < 1000) {
    const int n = 1 + rng.uniform_int(6);
    const int dim = 1 + rng.uniform_int(3);
    auto edges = testsupport::random_connected_edges(rng, n);
    const AdaptConfig cfg{rng.uniform(0.001, 0.2), rng.uniform(0.0, 1.0)};

    // single all-node cluster: atc == single_task
    {
      std::vector<std::vector<int>> one(1);
      for (int k = 0; k < n; ++k) one[0].push_back(k);
      ClusteredNetwork net(n, edges, one);
      CombinerSet cs = uniform_combiners(net);
      AdaptState a = AdaptState::zeros(n, dim);
      AdaptState b = AdaptState::zeros(n, dim);
      for (int it = 0; it < 25; ++it) {
        Sample s = testsupport::random_sample(rng, n, dim);
        a = atc_step(std::move(a), s, net, cs, cfg);
        b = single_task_step(std::move(b), s, net, cs, cfg);
        ++steps_single;
      }
      CHECK(bitwise_equal(a, b));
    }

    // singleton clusters with A = C = I: atc == multitask
    {
      std::vector<std::vector<int>> singles(n);
      for (int k = 0; k < n; ++k) singles[k] = {k};
      ClusteredNetwork net(n, edges, singles);
      CombinerSet cs = identity_combiners(n);
      for (int k = 0; k < n; ++k) {
        const auto& others = net.strict_neighbors(k);
        if (others.empty()) {
          cs.p_zero_row[k] = 1;
          continue;
        }
        for (int l : others) cs.P(k, l) = 1.0 / others.size();
      }
      AdaptState a = AdaptState::zeros(n, dim);
      AdaptState b = AdaptState::zeros(n, dim);
      AdaptState c = AdaptState::zeros(n, dim);
      AdaptState d = AdaptState::zeros(n, dim);
      const AdaptConfig eta0{cfg.mu, 0.0};
      for (int it = 0; it < 25; ++it) {
        Sample s = testsupport::random_sample(rng, n, dim);
        a = atc_step(std::move(a), s, net, cs, cfg);
        b = multitask_step(std::move(b), s, net, cs, cfg);
        ++steps_multi;
        // eta = 0 collapses both onto non-cooperative LMS
        c = atc_step(std::move(c), s, net, cs, eta0);
        d = lms_step(std::move(d), s, eta0);
        ++steps_lms;
      }
      CHECK(bitwise_equal(a, b));
      CHECK(bitwise_equal(c, d));
    }
  }
}

TEST_CASE("eta enters the multitask coupling only through mu*eta*rho") {
  ClusteredNetwork net(3, {{0, 1}, {1, 2}}, {{0}, {1}, {2}});
  CombinerSet cs = identity_combiners(3);
  cs.P(0, 1) = 1.0;
  cs.P(1, 0) = 0.5;
  cs.P(1, 2) = 0.5;
  cs.P(2, 1) = 1.0;
  CombinerSet half = cs;
  half.P *= 0.5;

  RngStream rng(5150);
  AdaptState a = AdaptState::zeros(3, 2);
  AdaptState b = AdaptState::zeros(3, 2);
  for (int it = 0; it < 200; ++it) {
    Sample s = testsupport::random_sample(rng, 3, 2);
    a = multitask_step(std::move(a), s, net, cs, AdaptConfig{0.05, 0.3});
    b = multitask_step(std::move(b), s, net, half, AdaptConfig{0.05, 0.6});
    for (int k = 0; k < 3; ++k)
      CHECK((a.w[k] - b.w[k]).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("simplex projection examples") {
  Eigen::Vector3d feasible(0.2, 0.3, 0.5);
  CHECK((project_simplex(feasible) - feasible).cwiseAbs().maxCoeff() <= 1e-15);
  Eigen::Vector3d equal(0.5, 0.5, 0.5);
  const Eigen::VectorXd u = project_simplex(equal);
  for (int i = 0; i < 3; ++i)
    CHECK(u[i] == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK_THROWS_AS(project_simplex(Eigen::VectorXd()), std::invalid_argument);
}

TEST_CASE("simplex projection matches the KKT enumeration oracle") {
  RngStream rng(404);
  for (int rep = 0; rep < 2000; ++rep) {
    const int n = 1 + rng.uniform_int(8);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = 4.0 * rng.normal();
    const Eigen::VectorXd w = project_simplex(v);
    const Eigen::VectorXd o = simplex_oracle(v);
    CHECK((w - o).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(w.minCoeff() >= 0.0);
    CHECK(std::abs(w.sum() - 1.0) <= 1e-12);
    CHECK((project_simplex(w) - w).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("unmixing update fixed points and hand case") {
  SUBCASE("zero gradient and feasible point is stationary") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
    std::vector<Eigen::VectorXd> w{Eigen::Vector3d(0.2, 0.3, 0.5)};
    Eigen::MatrixXd y = m * w[0];
    auto out = unmix_step(w, m, y, {{}}, {{}}, AdaptConfig{0.1, 0.0});
    CHECK((out[0] - w[0]).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("identical neighbors exert no force through sgn(0) = 0") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
    std::vector<Eigen::VectorXd> w{Eigen::Vector2d(0.4, 0.6),
                                   Eigen::Vector2d(0.4, 0.6)};
    Eigen::MatrixXd y(2, 2);
    y.col(0) = m * w[0];
    y.col(1) = m * w[1];
    auto out = unmix_step(w, m, y, {{1}, {0}}, {{1.0}, {1.0}},
                          AdaptConfig{0.1, 5.0});
    CHECK((out[0] - w[0]).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((out[1] - w[1]).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("single pixel hand evaluation") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
    std::vector<Eigen::VectorXd> w{Eigen::Vector2d(0.5, 0.5)};
    Eigen::MatrixXd y(2, 1);
    y << 1.0, 0.0;
    auto out = unmix_step(w, m, y, {{}}, {{}}, AdaptConfig{0.1, 0.0});
    CHECK(out[0][0] == doctest::Approx(0.55).epsilon(1e-14));
    CHECK(out[0][1] == doctest::Approx(0.45).epsilon(1e-14));
  }
}

TEST_CASE("rmse definition") {
  std::vector<Eigen::VectorXd> a{Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4)};
  CHECK(rmse(a, a) == 0.0);
  std::vector<Eigen::VectorXd> b{Eigen::VectorXd::Constant(1, 0.0)};
  std::vector<Eigen::VectorXd> c{Eigen::VectorXd::Constant(1, 0.3)};
  CHECK(rmse(b, c) == doctest::Approx(0.3).epsilon(1e-15));
  std::vector<Eigen::VectorXd> d{Eigen::Vector2d(0.1, 0.1),
                                 Eigen::Vector2d(0.1, 0.1)};
  std::vector<Eigen::VectorXd> zero{Eigen::Vector2d(0, 0),
                                    Eigen::Vector2d(0, 0)};
  CHECK(rmse(d, zero) == doctest::Approx(0.1).epsilon(1e-14));
  std::vector<Eigen::VectorXd> wrong{Eigen::Vector3d(0, 0, 0)};
  CHECK_THROWS_AS(rmse(b, wrong), std::invalid_argument);
}

TEST_CASE("centralized descent reaches the unregularized optimum") {
  RngStream rng(808);
  SUBCASE("eta = 0 recovers w* on a random clustered network") {
    ClusteredNetwork net = testsupport::random_network(rng, 6);
    NodeEnvironment env = testsupport::random_environment(rng, net, 2);
    CombinerSet cs = uniform_combiners(net);
    DescentResult res =
        centralized_descent(net, cs, env, AdaptConfig{0.05, 0.0});
    for (int i = 0; i < net.n_clusters(); ++i) {
      const int rep = net.cluster(i).front();
      CHECK((res.w_o[i] - env.w_star(rep)).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
  SUBCASE("a single cluster is unaffected by eta") {
    ClusteredNetwork net(3, {{0, 1}, {1, 2}}, {{0, 1, 2}});
    NodeEnvironment env = testsupport::random_environment(rng, net, 2);
    CombinerSet cs = uniform_combiners(net);
    DescentResult res =
        centralized_descent(net, cs, env, AdaptConfig{0.05, 3.0});
    CHECK((res.w_o[0] - env.w_star(0)).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("iteration cap raises ConvergenceError with the gradient norm") {
    ClusteredNetwork net(2, {{0, 1}}, {{0}, {1}});
    NodeEnvironment env = testsupport::random_environment(rng, net, 2);
    CombinerSet cs = uniform_combiners(net);
    DescentOptions opts;
    opts.max_iters = 2;
    CHECK_THROWS_AS(
        centralized_descent(net, cs, env, AdaptConfig{0.01, 0.5}, opts),
        ConvergenceError);
  }
}

TEST_CASE("centralized equilibrium agrees with the diffusion mean bias") {
  DiffusionProblem p = illustrative_env();
  const AdaptConfig cfg{0.01, 0.1};
  TheoryModel model = assemble(p.network, p.combiners, *p.moments, cfg);
  const Eigen::VectorXd bias = asymptotic_bias(model);
  DescentResult res =
      centralized_descent(p.network, p.combiners, *p.moments, cfg);
  for (int k = 0; k < p.network.n_nodes(); ++k) {
    const int c = p.network.cluster_of(k);
    const Eigen::VectorXd v_o = res.w_o[c] - p.moments->w_star(k);
    CHECK((v_o - bias.segment(2 * k, 2)).cwiseAbs().maxCoeff() <= 1e-6);
  }
}
