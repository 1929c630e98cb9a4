#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <diffnet/env.hpp>
#include <diffnet/rng.hpp>
#include <diffnet/scenarios.hpp>

#include "test_support.hpp"

using namespace diffnet;

TEST_CASE("noiseless samples satisfy the data model exactly") {
  std::vector<Eigen::VectorXd> w{Eigen::Vector2d(0.3, -1.2)};
  std::vector<Eigen::MatrixXd> r{Eigen::Matrix2d::Identity()};
  NodeEnvironment env(w, r, {0.0});
  RngStream rng(5);
  for (int i = 0; i < 100; ++i) {
    Sample s = draw_sample(env, rng);
    CHECK(s.d[0] == s.x[0].dot(w[0]));
  }
}

TEST_CASE("unit covariance gives unit sample variance over 1e5 draws") {
  std::vector<Eigen::VectorXd> w{Eigen::Vector2d::Zero()};
  std::vector<Eigen::MatrixXd> r{Eigen::Matrix2d::Identity()};
  NodeEnvironment env(w, r, {0.0});
  RngStream rng(6);
  Eigen::Vector2d sq = Eigen::Vector2d::Zero();
  const int draws = 100000;
  Sample s;
  for (int i = 0; i < draws; ++i) {
    draw_sample_into(env, rng, s);
    sq += s.x[0].cwiseProduct(s.x[0]);
  }
  sq /= draws;
  CHECK(sq[0] > 0.97);
  CHECK(sq[0] < 1.03);
  CHECK(sq[1] > 0.97);
  CHECK(sq[1] < 1.03);
}

TEST_CASE("fixed seed reproduces the sample stream bit for bit") {
  RngStream gen(9);
  ClusteredNetwork net = testsupport::random_network(gen, 5);
  NodeEnvironment env = testsupport::random_environment(gen, net, 3);
  RngStream a(123), b(123);
  for (int i = 0; i < 50; ++i) {
    Sample sa = draw_sample(env, a);
    Sample sb = draw_sample(env, b);
    for (int k = 0; k < env.n_nodes(); ++k) {
      CHECK(sa.d[k] == sb.d[k]);
      CHECK(sa.x[k] == sb.x[k]);
    }
  }
}

TEST_CASE("empirical second moment matches the configured covariance") {
  Eigen::Matrix2d r_x;
  r_x << 2.0, 0.6, 0.6, 0.5;
  NodeEnvironment env({Eigen::Vector2d(1.0, 2.0)}, {r_x}, {0.3});
  RngStream rng(7);
  Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
  const int draws = 100000;
  Sample s;
  for (int i = 0; i < draws; ++i) {
    draw_sample_into(env, rng, s);
    acc += s.x[0] * s.x[0].transpose();
  }
  acc /= draws;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double scale = std::sqrt(r_x(i, i) * r_x(j, j));
      CHECK(std::abs(acc(i, j) - r_x(i, j)) <= 0.03 * scale);
    }
}

TEST_CASE("non-SPD covariance is rejected at construction") {
  Eigen::Matrix2d bad;
  bad << 1.0, 2.0, 2.0, 1.0;  // indefinite
  CHECK_THROWS_AS(
      NodeEnvironment({Eigen::Vector2d::Zero()}, {bad}, {0.1}),
      std::invalid_argument);
}

TEST_CASE("cluster consistency check rejects differing optima") {
  ClusteredNetwork net(2, {{0, 1}}, {{0, 1}});
  NodeEnvironment env({Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)},
                      {Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity()},
                      {0.1, 0.1});
  CHECK_THROWS_AS(check_cluster_consistency(net, env), std::invalid_argument);
}

TEST_CASE("illustrative environment matches its published layout") {
  DiffusionProblem p = illustrative_env();
  CHECK(p.network.n_nodes() == 10);
  CHECK(p.network.n_clusters() == 4);
  REQUIRE(p.moments.has_value());
  const NodeEnvironment& env = *p.moments;
  CHECK(env.dim() == 2);
  CHECK(env.w_star(0)[0] == doctest::Approx(0.5287).epsilon(1e-12));
  CHECK(env.w_star(0)[1] == doctest::Approx(-0.405).epsilon(1e-12));
  // nodes of one cluster share the same optimum exactly
  CHECK(env.w_star(0) == env.w_star(1));
  CHECK(env.w_star(0) == env.w_star(2));
  CHECK(env.w_star(6) == env.w_star(7));
  // the second call returns the identical environment
  DiffusionProblem q = illustrative_env();
  CHECK(q.w_star == p.w_star);
  for (int k = 0; k < 10; ++k) {
    CHECK(q.moments->r_x(k) == env.r_x(k));
    CHECK(q.moments->sigma2_z(k) == env.sigma2_z(k));
  }
  CHECK(validate(p.network, p.combiners).ok);
  // every node keeps at least one extra-cluster link, so no P row is zero
  for (int k = 0; k < 10; ++k)
    CHECK_FALSE(p.network.extra_cluster_neighbors(k).empty());
}

TEST_CASE("samples are a pure function of (seed, trial, iteration)") {
  DiffusionProblem p = illustrative_env();
  Sample a, b;
  p.source->draw_into(42, 3, 17, a);
  // interleave other draws, then repeat the same key
  p.source->draw_into(42, 0, 0, b);
  p.source->draw_into(42, 3, 17, b);
  for (int k = 0; k < 10; ++k) {
    CHECK(a.d[k] == b.d[k]);
    CHECK(a.x[k] == b.x[k]);
  }
}
