#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "diffnet/env.hpp"
#include "diffnet/network.hpp"

namespace diffnet {

// Streaming per-iteration data. (seed, trial, iter) fully determine the
// sample, so trials can run in any order and in parallel.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual int n_nodes() const = 0;
  virtual int dim() const = 0;
  virtual void draw_into(std::uint64_t seed, std::uint64_t trial,
                         std::uint64_t iter, Sample& out) const = 0;
};

// Source backed by the Gaussian linear model of a NodeEnvironment.
class GaussianSource final : public SampleSource {
 public:
  explicit GaussianSource(NodeEnvironment env) : env_(std::move(env)) {}
  int n_nodes() const override { return env_.n_nodes(); }
  int dim() const override { return env_.dim(); }
  void draw_into(std::uint64_t seed, std::uint64_t trial, std::uint64_t iter,
                 Sample& out) const override;
  const NodeEnvironment& env() const { return env_; }

 private:
  NodeEnvironment env_;
};

// Everything the harness needs to run one diffusion experiment. `moments`
// carries exact second-order statistics when they are known in closed form
// (theory evaluation, centralized descent); scenarios whose disturbance is
// not an independent additive noise leave it empty.
struct DiffusionProblem {
  ClusteredNetwork network;
  CombinerSet combiners;
  Eigen::VectorXd w_star;  // stacked truth, length N*dim
  std::shared_ptr<const SampleSource> source;
  std::optional<NodeEnvironment> moments;
};

// Rebuilds the problem with singleton clusters on the same graph and data:
// A = C = I, rho uniform over N_k^-. Used for the multitask and
// non-cooperative strategy variants.
DiffusionProblem as_singleton_multitask(const DiffusionProblem& p);

// ---------------------------------------------------------------------------
// Illustrative network: 10 nodes, 4 clusters {1,2,3} {4,5,6} {7,8} {9,10},
// L = 2, w*_C = w_o + dw_C, R_{x,k} = sigma2_x[k] I with per-node variances
// drawn once from a fixed internal seed. Clusters are internally complete and
// joined in a ring, so every node has at least one extra-cluster neighbor.
DiffusionProblem illustrative_env();

// ---------------------------------------------------------------------------
// Cooperative spectrum sensing with multi-antenna devices. Each device is a
// fully-connected cluster of n_antennas nodes; devices are linked by
// proximity. The task is the stacked basis-weight vector alpha (length
// n_basis * n_primary); per-node regressors are rows of
// [p_hat(1), ..., p_hat(n_primary)] ⊗ Phi with thresholded path losses, one
// frequency bin drawn uniformly per iteration.
struct SpectrumParams {
  int n_primary = 2;
  int n_devices = 10;
  int n_antennas = 1;
  int n_freq = 80;
  int n_basis = 16;
  double basis_var = 0.0025;  // Gaussian basis variance sigma_b^2
  double noise_std = 0.01;    // sampling noise std
  double fading_std_factor = 0.2;  // antenna fading std, relative to mean loss
  double p0 = 0.1;            // synchronization threshold on the mean loss
  double ref_distance = 0.15; // free-space reference distance
  double link_radius = 0.55;  // device connectivity radius
  double ring_radius = 0.4;   // default device ring radius
  // Optional explicit geometry; devices default to a ring around (0.5, 0.5),
  // primary users to points offset 0.15 from the center.
  std::vector<std::array<double, 2>> device_positions;
  std::vector<std::array<double, 2>> primary_positions;
  std::vector<Eigen::VectorXd> alpha;  // per primary user; defaulted if empty
};
DiffusionProblem spectrum_env(const SpectrumParams& params);

// ---------------------------------------------------------------------------
// Non-point target localization. The target arc (radius `radius`, centered at
// the origin) is split into n_clusters sectors, each observed by a cluster of
// nodes placed at radial distance [3R, 4R] inside its sector. Regressors are
// unit direction vectors perturbed along and across the line of sight;
// C = I, A uniform, rho uniform with zero rows on the two boundary clusters.
struct LocalizationParams {
  int n_clusters = 10;
  int nodes_per_cluster = 10;
  double radius = 1.0;
  double arc_span = 1.0471975511965976;  // radians subtended by the arc
  double r_min_factor = 3.0;
  double r_max_factor = 4.0;
  double sigma2_v = 0.5;
  double sigma2_alpha = 0.1;
  double sigma2_beta = 0.01;
  bool uniform_placement = true;
  std::uint64_t placement_seed = 1;
};
DiffusionProblem localization_env(const LocalizationParams& params);

// ---------------------------------------------------------------------------
// Hyperspectral unmixing on a pixel lattice, Y = M W + V. Endmember spectra
// are synthetic (sums of Gaussian bumps over a positive baseline, normalized
// to [0, 1]); ground-truth abundances are piecewise constant on the simplex.
// One node per pixel, singleton clusters, 4-neighbor connectivity,
// regularization weights from normalized spectral similarity of the noisy
// observations.
struct UnmixParams {
  int rows = 100;
  int cols = 100;
  int n_endmembers = 9;
  int n_bands = 224;
  double snr_db = 20.0;
  std::uint64_t scene_seed = 1;  // endmembers + abundance regions
  std::uint64_t noise_seed = 2;  // default observation noise lane
};

// Noise-free part of the scene; reused across Monte Carlo trials.
struct UnmixClean {
  int rows = 0, cols = 0;
  Eigen::MatrixXd M;        // n_bands x R
  Eigen::MatrixXd W_true;   // R x N (columns on the simplex)
  Eigen::MatrixXd MW;       // cached clean image
  std::vector<std::vector<int>> neighbors;  // 4-lattice, excluding self
};

struct UnmixScene {
  UnmixClean clean;
  Eigen::MatrixXd Y;  // noisy observations
  std::vector<std::vector<double>> rho;  // aligned with clean.neighbors
  double measured_snr_db = 0.0;
};

UnmixClean unmix_clean(const UnmixParams& params);
UnmixScene realize_unmix_noise(const UnmixClean& clean, double snr_db,
                               std::uint64_t seed, std::uint64_t trial);
UnmixScene unmix_env(const UnmixParams& params);

// rho(k,j) = theta(y_k, y_j) / sum_{l in N_k^-} theta(y_k, y_l) with theta
// the cosine similarity.
std::vector<std::vector<double>> spectral_similarity_weights(
    const Eigen::MatrixXd& Y, const std::vector<std::vector<int>>& neighbors);

// 4-neighbor lattice adjacency for a rows x cols grid, row-major pixel ids.
std::vector<std::vector<int>> lattice_neighbors(int rows, int cols);

}  // namespace diffnet
