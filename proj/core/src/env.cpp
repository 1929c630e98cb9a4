#include "diffnet/env.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace diffnet {

NodeEnvironment::NodeEnvironment(std::vector<Eigen::VectorXd> w_star,
                                 std::vector<Eigen::MatrixXd> r_x,
                                 std::vector<double> sigma2_z)
    : w_star_(std::move(w_star)),
      r_x_(std::move(r_x)),
      sigma2_z_(std::move(sigma2_z)) {
  const std::size_t n = w_star_.size();
  if (n == 0) throw std::invalid_argument("environment needs at least one node");
  if (r_x_.size() != n || sigma2_z_.size() != n)
    throw std::invalid_argument("w_star, r_x, sigma2_z must have equal length");
  dim_ = static_cast<int>(w_star_[0].size());
  chol_.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (w_star_[k].size() != dim_)
      throw std::invalid_argument("w_star dimensions differ across nodes");
    if (r_x_[k].rows() != dim_ || r_x_[k].cols() != dim_)
      throw std::invalid_argument("R_x for node " + std::to_string(k + 1) +
                                  " must be " + std::to_string(dim_) + "x" +
                                  std::to_string(dim_));
    if (!r_x_[k].isApprox(r_x_[k].transpose(), 1e-12))
      throw std::invalid_argument("R_x for node " + std::to_string(k + 1) +
                                  " is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(r_x_[k]);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("R_x for node " + std::to_string(k + 1) +
                                  " is not positive-definite");
    chol_.push_back(llt.matrixL());
    if (sigma2_z_[k] < 0.0)
      throw std::invalid_argument("sigma2_z for node " + std::to_string(k + 1) +
                                  " is negative");
  }
}

Eigen::VectorXd NodeEnvironment::w_star_stacked() const {
  Eigen::VectorXd s(static_cast<Eigen::Index>(n_nodes()) * dim_);
  for (int k = 0; k < n_nodes(); ++k) s.segment(k * dim_, dim_) = w_star_[k];
  return s;
}

void check_cluster_consistency(const ClusteredNetwork& net,
                               const NodeEnvironment& env) {
  if (net.n_nodes() != env.n_nodes())
    throw std::invalid_argument("network and environment node counts differ");
  for (int i = 0; i < net.n_clusters(); ++i) {
    const auto& members = net.cluster(i);
    for (int k : members) {
      if (env.w_star(k) != env.w_star(members.front()))
        throw std::invalid_argument(
            "w_star differs between nodes " + std::to_string(members.front() + 1) +
            " and " + std::to_string(k + 1) + " of cluster " +
            std::to_string(i + 1));
    }
  }
}

void draw_sample_into(const NodeEnvironment& env, RngStream& rng, Sample& out) {
  const int n = env.n_nodes();
  const int dim = env.dim();
  if (static_cast<int>(out.x.size()) != n) {
    out.x.assign(n, Eigen::VectorXd(dim));
    out.d.resize(n);
  }
  thread_local Eigen::VectorXd g;
  g.resize(dim);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < dim; ++i) g[i] = rng.normal();
    out.x[k].noalias() = env.chol(k).triangularView<Eigen::Lower>() * g;
    const double z = rng.normal();
    out.d[k] = out.x[k].dot(env.w_star(k)) + std::sqrt(env.sigma2_z(k)) * z;
  }
}

Sample draw_sample(const NodeEnvironment& env, RngStream& rng) {
  Sample s;
  draw_sample_into(env, rng, s);
  return s;
}

}  // namespace diffnet
