#pragma once

// Shared generators for randomized tests: connected clustered networks,
// SPD covariances, and environments, all driven by the project RNG so
// failures reproduce from the printed seed.

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "diffnet/env.hpp"
#include "diffnet/network.hpp"
#include "diffnet/rng.hpp"

namespace testsupport {

using diffnet::ClusteredNetwork;
using diffnet::NodeEnvironment;
using diffnet::RngStream;

// Connected graph on n nodes: a random spanning tree plus extra edges.
inline std::vector<std::pair<int, int>> random_connected_edges(RngStream& rng,
                                                               int n) {
  std::vector<std::pair<int, int>> edges;
  for (int k = 1; k < n; ++k) edges.emplace_back(rng.uniform_int(k), k);
  const int extra = rng.uniform_int(n + 1);
  for (int e = 0; e < extra; ++e) {
    const int a = rng.uniform_int(n);
    const int b = rng.uniform_int(n);
    if (a != b) edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  return edges;
}

// Random partition of {0..n-1} into 1..n clusters.
inline std::vector<std::vector<int>> random_partition(RngStream& rng, int n) {
  const int q = 1 + rng.uniform_int(n);
  std::vector<std::vector<int>> clusters(q);
  for (int k = 0; k < n; ++k) clusters[rng.uniform_int(q)].push_back(k);
  std::vector<std::vector<int>> nonempty;
  for (auto& c : clusters)
    if (!c.empty()) nonempty.push_back(std::move(c));
  return nonempty;
}

inline ClusteredNetwork random_network(RngStream& rng, int max_nodes) {
  const int n = 1 + rng.uniform_int(max_nodes);
  return ClusteredNetwork(n, random_connected_edges(rng, n),
                          random_partition(rng, n));
}

inline Eigen::MatrixXd random_spd(RngStream& rng, int dim) {
  Eigen::MatrixXd a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = rng.normal();
  return a * a.transpose() + 0.3 * Eigen::MatrixXd::Identity(dim, dim);
}

// Cluster-consistent environment on the given network.
inline NodeEnvironment random_environment(RngStream& rng,
                                          const ClusteredNetwork& net,
                                          int dim) {
  std::vector<Eigen::VectorXd> per_cluster(net.n_clusters());
  for (auto& w : per_cluster) {
    w.resize(dim);
    for (int i = 0; i < dim; ++i) w[i] = rng.normal();
  }
  std::vector<Eigen::VectorXd> w_star(net.n_nodes());
  std::vector<Eigen::MatrixXd> r_x(net.n_nodes());
  std::vector<double> sigma2_z(net.n_nodes());
  for (int k = 0; k < net.n_nodes(); ++k) {
    w_star[k] = per_cluster[net.cluster_of(k)];
    r_x[k] = random_spd(rng, dim);
    sigma2_z[k] = rng.uniform(0.001, 0.05);
  }
  return NodeEnvironment(std::move(w_star), std::move(r_x),
                         std::move(sigma2_z));
}

// Brute-force KKT oracle for the simplex projection: enumerate active sets,
// keep the feasible candidate of least distance.
inline Eigen::VectorXd simplex_oracle(const Eigen::VectorXd& v) {
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

inline diffnet::Sample random_sample(RngStream& rng, int n, int dim) {
  diffnet::Sample s;
  s.x.resize(n);
  s.d.resize(n);
  for (int k = 0; k < n; ++k) {
    s.x[k].resize(dim);
    for (int i = 0; i < dim; ++i) s.x[k][i] = rng.normal();
    s.d[k] = rng.normal();
  }
  return s;
}

}  // namespace testsupport
