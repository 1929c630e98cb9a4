#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "diffnet/adapt.hpp"
#include "diffnet/env.hpp"
#include "diffnet/errors.hpp"
#include "diffnet/network.hpp"

namespace diffnet {

// Largest admissible (L*N)^2 before theory evaluation refuses to allocate.
inline constexpr std::size_t kDefaultTheorySizeCap = 1000000;

// Closed-form performance model of the clustered multitask diffusion LMS.
// All matrices are LN x LN with L = dim, N = n_nodes:
//   Q   = I_LN - P~ ⊗ I_L, where P~ is P with every flagged zero row replaced
//         by a self weight of 1 (row-stochastic completion; a node with no
//         extra-cluster neighbors feels no regularization force, and the
//         completion makes the Q block row vanish accordingly)
//   H_R = blockdiag{ R_k },  R_k = sum_l c(l,k) R_{x,l}
//   B   = A_I^T [ I - mu (H_R + eta Q) ],  A_I = A ⊗ I_L
//   G   = A_I^T C_I^T blockdiag{ sigma2_z[k] R_{x,k} } C_I A_I
//   r   = A_I^T Q w*
// The variance transition K ≈ B^T ⊗ B^T is kept implicit: products K.vec(S)
// are evaluated as vec(B^T S B).
struct TheoryModel {
  int n_nodes = 0;
  int dim = 0;
  double mu = 0.0;
  double eta = 0.0;
  Eigen::MatrixXd B, G, H_R, Q;
  Eigen::MatrixXd A_I, C_I;
  Eigen::VectorXd r;
  Eigen::VectorXd w_star;  // stacked truth

  int size() const { return n_nodes * dim; }
};

// Materializes the model. Throws SizeCapError when (L*N)^2 > size_cap,
// std::invalid_argument on invalid combiners or non-SPD H_R blocks.
TheoryModel assemble(const ClusteredNetwork& net, const CombinerSet& cs,
                     const NodeEnvironment& env, const AdaptConfig& cfg,
                     std::size_t size_cap = kDefaultTheorySizeCap);

// Right endpoint of the sufficient mean-stability interval,
// 2 / (max_k lambda_max(R_k) + 2 eta).
double step_size_bound(const TheoryModel& model);

// E{v(n+1)} = B E{v(n)} - mu eta r, returning [v(0), ..., v(T-1)].
std::vector<Eigen::VectorXd> mean_recursion(const TheoryModel& model,
                                            const Eigen::VectorXd& v0, int T);

// lim_n E{v(n)} = mu eta (B - I)^-1 r. Throws StabilityError if B is not
// stable (B - I singular).
Eigen::VectorXd asymptotic_bias(const TheoryModel& model);

// Network MSD learning curve zeta(n) = E{||v(n)||^2}/N with its auxiliary
// row-vector state Gamma(n) (stored transposed as an LN x LN matrix would
// be, i.e. as a vec) and the mean-error sequence.
struct MsdCurve {
  std::vector<double> zeta;              // zeta(0..T)
  std::vector<Eigen::VectorXd> mean_v;   // E{v(0..T)}
  Eigen::VectorXd gamma;                 // final Gamma(T), length (LN)^2
};

// Evaluates the transient recursion for zeta and Gamma with zeta(0) =
// ||v0||^2 / N, Gamma(0) = 0. K powers are never materialized; the running
// weighting vector K^n vec(I) is carried as an LN x LN matrix.
MsdCurve transient_msd(const TheoryModel& model, const Eigen::VectorXd& v0,
                       int T);

// Steady-state MSD
//   zeta* = mu^2 vec(G^T)^T sigma + f(sigma, E{v(inf)}),
//   (I - K) sigma = vec(I_LN)/N  solved by the fixed-point iteration
//   sigma <- b + K sigma (tolerance 1e-12), valid since rho(K) = rho(B)^2 < 1.
// Throws StabilityError when rho(B) >= 1.
double steady_state_msd(const TheoryModel& model);

// K sigma as a matrix map: B^T S B (and the transpose map B S B^T).
Eigen::MatrixXd apply_K(const TheoryModel& model, const Eigen::MatrixXd& S);
Eigen::MatrixXd apply_K_transpose(const TheoryModel& model,
                                  const Eigen::MatrixXd& S);
// Dense K = B^T ⊗ B^T, for small models only (tests, spectra).
Eigen::MatrixXd dense_K(const TheoryModel& model,
                        std::size_t size_cap = kDefaultTheorySizeCap);

// Standard helpers. vec stacks columns; unvec is its inverse.
Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
Eigen::VectorXd vec(const Eigen::MatrixXd& m);
Eigen::MatrixXd unvec(const Eigen::VectorXd& v, int rows, int cols);
double spectral_radius(const Eigen::MatrixXd& m);

}  // namespace diffnet
