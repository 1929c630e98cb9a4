#pragma once

#include <Eigen/Dense>
#include <vector>

#include "diffnet/env.hpp"
#include "diffnet/errors.hpp"
#include "diffnet/network.hpp"

namespace diffnet {

struct AdaptConfig {
  double mu = 0.01;  // step size, > 0
  double eta = 0.0;  // inter-cluster regularization strength, >= 0
};

// Current estimates w_k(n) and intermediates psi_k(n) for the whole network.
struct AdaptState {
  std::vector<Eigen::VectorXd> w;
  std::vector<Eigen::VectorXd> psi;

  static AdaptState zeros(int n_nodes, int dim);
};

// One synchronous adapt-then-combine step of the clustered multitask
// diffusion LMS:
//   psi_k = w_k + mu * [ sum_{l in N_k∩C(k)} c(l,k) (d_l - x_l^T w_k) x_l
//                        + eta * sum_{l in N_k\C(k)} rho(k,l) (w_l - w_k) ]
//   w_k   = sum_{l in N_k∩C(k)} a(l,k) psi_l
// All adaptation reads pre-step w values. State is taken by value; pass with
// std::move to update in place.
AdaptState atc_step(AdaptState state, const Sample& sample,
                    const ClusteredNetwork& net, const CombinerSet& cs,
                    const AdaptConfig& cfg);

// The eta-free ATC update over full neighborhoods (single-task networks).
AdaptState single_task_step(AdaptState state, const Sample& sample,
                            const ClusteredNetwork& net, const CombinerSet& cs,
                            const AdaptConfig& cfg);

// Per-node update without a combination phase (multitask networks,
// singleton clusters):
//   w_k += mu (d_k - x_k^T w_k) x_k + mu eta sum_{l in N_k^-} rho(k,l)(w_l - w_k)
AdaptState multitask_step(AdaptState state, const Sample& sample,
                          const ClusteredNetwork& net, const CombinerSet& cs,
                          const AdaptConfig& cfg);

// Non-cooperative baseline: w_k += mu (d_k - x_k^T w_k) x_k.
AdaptState lms_step(AdaptState state, const Sample& sample,
                    const AdaptConfig& cfg);

// Centralized steepest descent on the per-cluster Nash costs using exact
// moments R_{x,k}, p_{xd,k} = R_{x,k} w*_k. All clusters update
// synchronously with constant step cfg.mu until the stacked gradient norm
// falls below `tol`. Serves as the reference for bias validation.
struct DescentOptions {
  double tol = 1e-10;
  long max_iters = 1000000;
};
struct DescentResult {
  std::vector<Eigen::VectorXd> w_o;  // per-cluster equilibrium
  long iterations = 0;
  double grad_norm = 0.0;
};
// Throws ConvergenceError (carrying the last gradient norm) on cap overrun.
DescentResult centralized_descent(const ClusteredNetwork& net,
                                  const CombinerSet& cs,
                                  const NodeEnvironment& env,
                                  const AdaptConfig& cfg,
                                  const DescentOptions& opts = {});

// Euclidean projection onto the probability simplex {w >= 0, 1^T w = 1},
// sort-and-threshold, O(R log R). Idempotent; rejects empty input.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v);

// One synchronous projected-subgradient unmixing pass over all pixels:
//   w_k <- P_simplex( w_k + mu M^T (y_k - M w_k)
//                     - mu eta sum_j rho(k,j) sgn(w_k - w_j) )
// with componentwise sgn and sgn(0) = 0. `neighbors[k]` and `rho[k]` are
// aligned; neighbor estimates are read pre-step.
std::vector<Eigen::VectorXd> unmix_step(
    const std::vector<Eigen::VectorXd>& w, const Eigen::MatrixXd& M,
    const Eigen::MatrixXd& Y, const std::vector<std::vector<int>>& neighbors,
    const std::vector<std::vector<double>>& rho, const AdaptConfig& cfg);

// sqrt( (1/(N R)) sum_k ||w_k - w*_k||^2 ). Shapes must match.
double rmse(const std::vector<Eigen::VectorXd>& w_est,
            const std::vector<Eigen::VectorXd>& w_true);

}  // namespace diffnet
