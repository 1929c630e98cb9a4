#pragma once

#include <Eigen/Dense>
#include <vector>

#include "diffnet/network.hpp"
#include "diffnet/rng.hpp"

namespace diffnet {

// Per-node linear data model d_k(n) = x_k(n)^T w*_k + z_k(n) with regressor
// covariance R_{x,k} and noise variance sigma2_z[k]. Immutable; Cholesky
// factors are computed once at construction (non-SPD covariances throw).
class NodeEnvironment {
 public:
  NodeEnvironment(std::vector<Eigen::VectorXd> w_star,
                  std::vector<Eigen::MatrixXd> r_x,
                  std::vector<double> sigma2_z);

  int n_nodes() const { return static_cast<int>(w_star_.size()); }
  int dim() const { return dim_; }
  const Eigen::VectorXd& w_star(int k) const { return w_star_[k]; }
  const Eigen::MatrixXd& r_x(int k) const { return r_x_[k]; }
  const Eigen::MatrixXd& chol(int k) const { return chol_[k]; }
  double sigma2_z(int k) const { return sigma2_z_[k]; }

  Eigen::VectorXd w_star_stacked() const;

 private:
  int dim_ = 0;
  std::vector<Eigen::VectorXd> w_star_;
  std::vector<Eigen::MatrixXd> r_x_;
  std::vector<Eigen::MatrixXd> chol_;  // lower factors
  std::vector<double> sigma2_z_;
};

// w* must be identical (exact equality) across nodes of one cluster.
// Throws std::invalid_argument naming the offending nodes otherwise.
void check_cluster_consistency(const ClusteredNetwork& net,
                               const NodeEnvironment& env);

// One network-wide observation: regressors x_k and references d_k.
struct Sample {
  std::vector<Eigen::VectorXd> x;
  Eigen::VectorXd d;
};

// Draws x_k ~ N(0, R_{x,k}) and d_k = x_k^T w*_k + z_k, z_k ~ N(0, sigma2_z),
// independently across nodes, consuming the stream in node order.
Sample draw_sample(const NodeEnvironment& env, RngStream& rng);

// Allocation-free variant for hot loops; resizes `out` on first use.
void draw_sample_into(const NodeEnvironment& env, RngStream& rng, Sample& out);

}  // namespace diffnet
