#include "diffnet/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace diffnet {

void GaussianSource::draw_into(std::uint64_t seed, std::uint64_t trial,
                               std::uint64_t iter, Sample& out) const {
  RngStream rng = keyed_stream(seed, {trial, iter});
  draw_sample_into(env_, rng, out);
}

DiffusionProblem as_singleton_multitask(const DiffusionProblem& p) {
  const int n = p.network.n_nodes();
  std::vector<std::vector<int>> singletons(n);
  for (int k = 0; k < n; ++k) singletons[k] = {k};
  ClusteredNetwork net(n, p.network.edges(), std::move(singletons));

  CombinerSet cs;
  cs.A = Eigen::MatrixXd::Identity(n, n);
  cs.C = Eigen::MatrixXd::Identity(n, n);
  cs.P = Eigen::MatrixXd::Zero(n, n);
  cs.p_zero_row.assign(n, 0);
  for (int k = 0; k < n; ++k) {
    const auto& others = net.extra_cluster_neighbors(k);
    if (others.empty()) {
      cs.p_zero_row[k] = 1;
      continue;
    }
    const double rho = 1.0 / static_cast<double>(others.size());
    for (int l : others) cs.P(k, l) = rho;
  }

  DiffusionProblem out{std::move(net), std::move(cs), p.w_star, p.source,
                       p.moments};
  return out;
}

// ---------------------------------------------------------------------------
// Illustrative environment

DiffusionProblem illustrative_env() {
  const int n = 10;
  // Clusters are internally complete; a ring of inter-cluster links plus one
  // chord keeps every node attached to at least one foreign cluster.
  const std::vector<std::pair<int, int>> edges = {
      {0, 1}, {0, 2}, {1, 2},          // cluster 1
      {3, 4}, {3, 5}, {4, 5},          // cluster 2
      {6, 7},                          // cluster 3
      {8, 9},                          // cluster 4
      {2, 3}, {5, 6}, {7, 8}, {9, 0},  // ring
      {1, 4},                          // chord
  };
  ClusteredNetwork net(n, edges, {{0, 1, 2}, {3, 4, 5}, {6, 7}, {8, 9}});

  Eigen::Vector2d w_o(0.5, -0.4);
  const std::array<Eigen::Vector2d, 4> dw = {
      Eigen::Vector2d(0.0287, -0.005), Eigen::Vector2d(0.0234, 0.005),
      Eigen::Vector2d(-0.0335, 0.0029), Eigen::Vector2d(0.0224, 0.00347)};

  // Per-node input and noise variances; the paper reports them only as a
  // plot, so they are drawn once from a fixed stream.
  RngStream var_rng = keyed_stream(0x9D2C5680F1A3C62EULL, {0});
  std::vector<Eigen::VectorXd> w_star(n);
  std::vector<Eigen::MatrixXd> r_x(n);
  std::vector<double> sigma2_z(n);
  for (int k = 0; k < n; ++k) {
    w_star[k] = w_o + dw[net.cluster_of(k)];
    const double sx2 = var_rng.uniform(0.8, 1.2);
    const double sz2 = var_rng.uniform(0.04, 0.09);
    r_x[k] = sx2 * Eigen::Matrix2d::Identity();
    sigma2_z[k] = sz2;
  }

  NodeEnvironment env(std::move(w_star), std::move(r_x), std::move(sigma2_z));
  CombinerSet cs = uniform_combiners(net);
  DiffusionProblem p{std::move(net), std::move(cs), env.w_star_stacked(),
                     std::make_shared<GaussianSource>(env), std::move(env)};
  return p;
}

// ---------------------------------------------------------------------------
// Spectrum sensing

namespace {

class SpectrumSource final : public SampleSource {
 public:
  SpectrumSource(int n_devices, int n_antennas, Eigen::MatrixXd phi,
                 Eigen::MatrixXd s_true, Eigen::MatrixXd p_bar,
                 Eigen::MatrixXd p_hat, double noise_std, double fading_factor)
      : n_devices_(n_devices),
        n_antennas_(n_antennas),
        phi_(std::move(phi)),
        s_true_(std::move(s_true)),
        p_bar_(std::move(p_bar)),
        p_hat_(std::move(p_hat)),
        noise_std_(noise_std),
        fading_factor_(fading_factor) {}

  int n_nodes() const override { return n_devices_ * n_antennas_; }
  int dim() const override {
    return static_cast<int>(phi_.cols() * p_bar_.cols());
  }

  void draw_into(std::uint64_t seed, std::uint64_t trial, std::uint64_t iter,
                 Sample& out) const override {
    RngStream rng = keyed_stream(seed, {trial, iter});
    const int n = n_nodes();
    const int nb = static_cast<int>(phi_.cols());
    const int np = static_cast<int>(p_bar_.cols());
    const int nf = static_cast<int>(phi_.rows());
    if (static_cast<int>(out.x.size()) != n) {
      out.x.assign(n, Eigen::VectorXd(dim()));
      out.d.resize(n);
    }
    for (int node = 0; node < n; ++node) {
      const int dev = node / n_antennas_;
      const int bin = rng.uniform_int(nf);
      double ref = 0.0;
      for (int q = 0; q < np; ++q) {
        const double fading =
            fading_factor_ * p_bar_(dev, q) * rng.normal();
        ref += (p_bar_(dev, q) + fading) * s_true_(bin, q);
        out.x[node].segment(q * nb, nb) = p_hat_(dev, q) * phi_.row(bin);
      }
      out.d[node] = ref + noise_std_ * rng.normal();
    }
  }

 private:
  int n_devices_, n_antennas_;
  Eigen::MatrixXd phi_;     // N_F x N_B
  Eigen::MatrixXd s_true_;  // N_F x N_P, true transmitted spectra
  Eigen::MatrixXd p_bar_;   // N_S x N_P mean path loss
  Eigen::MatrixXd p_hat_;   // N_S x N_P thresholded estimate
  double noise_std_, fading_factor_;
};

double dist2d(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

}  // namespace

DiffusionProblem spectrum_env(const SpectrumParams& params) {
  const int ns = params.n_devices;
  const int nr = params.n_antennas;
  const int np = params.n_primary;
  const int nb = params.n_basis;
  const int nf = params.n_freq;
  if (ns < 1 || nr < 1 || np < 1 || nb < 4 || nf < 2)
    throw std::invalid_argument("spectrum_env: degenerate parameters");

  // geometry: devices on a ring, primary users inside, unless given
  auto devices = params.device_positions;
  if (devices.empty()) {
    devices.resize(ns);
    for (int i = 0; i < ns; ++i) {
      const double a = 2.0 * M_PI * i / ns;
      devices[i] = {0.5 + params.ring_radius * std::cos(a),
                    0.5 + params.ring_radius * std::sin(a)};
    }
  } else if (static_cast<int>(devices.size()) != ns) {
    throw std::invalid_argument("device_positions size != n_devices");
  }
  auto primaries = params.primary_positions;
  if (primaries.empty()) {
    primaries.resize(np);
    for (int q = 0; q < np; ++q) {
      const double a = 2.0 * M_PI * q / np + 0.9;
      primaries[q] = {0.5 + 0.15 * std::cos(a), 0.5 + 0.15 * std::sin(a)};
    }
  } else if (static_cast<int>(primaries.size()) != np) {
    throw std::invalid_argument("primary_positions size != n_primary");
  }

  // basis matrix and true spectra
  Eigen::MatrixXd phi(nf, nb);
  for (int j = 0; j < nf; ++j) {
    const double f = static_cast<double>(j) / (nf - 1);
    for (int m = 0; m < nb; ++m) {
      const double c = static_cast<double>(m) / (nb - 1);
      phi(j, m) = std::exp(-(f - c) * (f - c) / (2.0 * params.basis_var));
    }
  }

  std::vector<Eigen::VectorXd> alpha = params.alpha;
  if (alpha.empty()) {
    // triple [0.4, 0.38, 0.4] per primary user, spread across the axis
    alpha.resize(np);
    for (int q = 0; q < np; ++q) {
      alpha[q] = Eigen::VectorXd::Zero(nb);
      const double frac = (np - q - 0.5) / np;
      const int start = std::clamp<int>(
          static_cast<int>(std::lround(frac * (nb - 3))), 0, nb - 3);
      alpha[q][start] = 0.4;
      alpha[q][start + 1] = 0.38;
      alpha[q][start + 2] = 0.4;
    }
  }
  if (static_cast<int>(alpha.size()) != np)
    throw std::invalid_argument("alpha size != n_primary");
  for (const auto& a : alpha)
    if (a.size() != nb) throw std::invalid_argument("alpha length != n_basis");

  Eigen::MatrixXd s_true(nf, np);
  for (int q = 0; q < np; ++q) s_true.col(q) = phi * alpha[q];

  // free-space mean path loss, thresholded estimates
  Eigen::MatrixXd p_bar(ns, np), p_hat(ns, np);
  for (int i = 0; i < ns; ++i)
    for (int q = 0; q < np; ++q) {
      const double d = std::max(dist2d(devices[i], primaries[q]), 1e-6);
      const double p = std::min(1.0, std::pow(params.ref_distance / d, 2.0));
      p_bar(i, q) = p;
      p_hat(i, q) = (p >= params.p0) ? p : 0.0;
    }

  // device graph: proximity links, bridged to connectivity if needed
  std::vector<std::pair<int, int>> dev_edges;
  std::vector<int> comp(ns);
  std::iota(comp.begin(), comp.end(), 0);
  std::function<int(int)> find = [&](int a) {
    return comp[a] == a ? a : comp[a] = find(comp[a]);
  };
  for (int i = 0; i < ns; ++i)
    for (int j = i + 1; j < ns; ++j)
      if (dist2d(devices[i], devices[j]) <= params.link_radius) {
        dev_edges.emplace_back(i, j);
        comp[find(i)] = find(j);
      }
  for (;;) {
    int a = -1, b = -1;
    double best = 1e300;
    for (int i = 0; i < ns; ++i)
      for (int j = i + 1; j < ns; ++j)
        if (find(i) != find(j) && dist2d(devices[i], devices[j]) < best) {
          best = dist2d(devices[i], devices[j]);
          a = i;
          b = j;
        }
    if (a < 0) break;
    dev_edges.emplace_back(a, b);
    comp[find(a)] = find(b);
  }

  // one node per antenna; devices are fully-connected clusters and linked
  // devices connect all antenna pairs
  const int n = ns * nr;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> clusters(ns);
  for (int i = 0; i < ns; ++i) {
    for (int a = 0; a < nr; ++a) {
      clusters[i].push_back(i * nr + a);
      for (int b = a + 1; b < nr; ++b)
        edges.emplace_back(i * nr + a, i * nr + b);
    }
  }
  for (auto [i, j] : dev_edges)
    for (int a = 0; a < nr; ++a)
      for (int b = 0; b < nr; ++b)
        edges.emplace_back(i * nr + a, j * nr + b);

  ClusteredNetwork net(n, edges, std::move(clusters));
  CombinerSet cs = uniform_combiners(net);

  Eigen::VectorXd alpha_stacked(np * nb);
  for (int q = 0; q < np; ++q) alpha_stacked.segment(q * nb, nb) = alpha[q];
  Eigen::VectorXd w_star(n * np * nb);
  for (int k = 0; k < n; ++k)
    w_star.segment(k * np * nb, np * nb) = alpha_stacked;

  DiffusionProblem p{std::move(net), std::move(cs), std::move(w_star),
                     std::make_shared<SpectrumSource>(
                         ns, nr, std::move(phi), std::move(s_true),
                         std::move(p_bar), std::move(p_hat), params.noise_std,
                         params.fading_std_factor),
                     {}};
  return p;
}

// ---------------------------------------------------------------------------
// Target localization

namespace {

class LocalizationSource final : public SampleSource {
 public:
  LocalizationSource(std::vector<Eigen::Vector2d> u,
                     std::vector<Eigen::Vector2d> u_perp,
                     std::vector<Eigen::Vector2d> target, double sigma2_v,
                     double sigma2_alpha, double sigma2_beta)
      : u_(std::move(u)),
        u_perp_(std::move(u_perp)),
        target_(std::move(target)),
        sd_v_(std::sqrt(sigma2_v)),
        sd_a_(std::sqrt(sigma2_alpha)),
        sd_b_(std::sqrt(sigma2_beta)) {}

  int n_nodes() const override { return static_cast<int>(u_.size()); }
  int dim() const override { return 2; }

  void draw_into(std::uint64_t seed, std::uint64_t trial, std::uint64_t iter,
                 Sample& out) const override {
    RngStream rng = keyed_stream(seed, {trial, iter});
    const int n = n_nodes();
    if (static_cast<int>(out.x.size()) != n) {
      out.x.assign(n, Eigen::VectorXd(2));
      out.d.resize(n);
    }
    for (int k = 0; k < n; ++k) {
      const double a = sd_a_ * rng.normal();
      const double b = sd_b_ * rng.normal();
      const double v = sd_v_ * rng.normal();
      const Eigen::Vector2d dir = u_[k] + a * u_perp_[k] + b * u_[k];
      out.x[k] = dir;
      out.d[k] = dir.dot(target_[k]) + v;
    }
  }

 private:
  std::vector<Eigen::Vector2d> u_, u_perp_, target_;
  double sd_v_, sd_a_, sd_b_;
};

}  // namespace

DiffusionProblem localization_env(const LocalizationParams& params) {
  const int q = params.n_clusters;
  const int npc = params.nodes_per_cluster;
  if (q < 1 || npc < 1)
    throw std::invalid_argument("localization_env: degenerate parameters");
  const int n = q * npc;
  const double r = params.radius;
  const double lo = M_PI / 2.0 - params.arc_span / 2.0;
  const double sector = params.arc_span / q;

  // arc points seen by each cluster
  std::vector<Eigen::Vector2d> w_arc(q);
  for (int i = 0; i < q; ++i) {
    const double th = lo + (i + 0.5) * sector;
    w_arc[i] = r * Eigen::Vector2d(std::cos(th), std::sin(th));
  }

  RngStream place = keyed_stream(params.placement_seed, {0xA6C});
  std::vector<Eigen::Vector2d> pos(n);
  std::vector<std::vector<int>> clusters(q);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < npc; ++j) {
      const int k = i * npc + j;
      clusters[i].push_back(k);
      double theta, rad;
      if (params.uniform_placement) {
        theta = lo + i * sector + (j + 0.5) * sector / npc;
        // stride the radius so it does not track the angle
        rad = params.r_min_factor * r +
              (params.r_max_factor - params.r_min_factor) * r *
                  (((j * 7) % npc) + 0.5) / npc;
      } else {
        theta = lo + i * sector + place.uniform() * sector;
        rad = r * (params.r_min_factor +
                   (params.r_max_factor - params.r_min_factor) *
                       place.uniform());
      }
      pos[k] = rad * Eigen::Vector2d(std::cos(theta), std::sin(theta));
    }
  }

  // intra-cluster complete; adjacent clusters fully linked
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < q; ++i)
    for (int a = 0; a < npc; ++a)
      for (int b = a + 1; b < npc; ++b)
        edges.emplace_back(i * npc + a, i * npc + b);
  for (int i = 0; i + 1 < q; ++i)
    for (int a = 0; a < npc; ++a)
      for (int b = 0; b < npc; ++b)
        edges.emplace_back(i * npc + a, (i + 1) * npc + b);

  ClusteredNetwork net(n, edges, std::move(clusters));

  std::vector<Eigen::Vector2d> u(n), u_perp(n), target(n);
  std::vector<Eigen::VectorXd> w_star(n);
  std::vector<Eigen::MatrixXd> r_x(n);
  std::vector<double> sigma2_z(n);
  for (int k = 0; k < n; ++k) {
    const int i = net.cluster_of(k);
    const Eigen::Vector2d delta = w_arc[i] - pos[k];
    const double dist = delta.norm();
    if (dist <= 1e-12)
      throw std::invalid_argument("node " + std::to_string(k + 1) +
                                  " coincides with its target point");
    u[k] = delta / dist;
    u_perp[k] = Eigen::Vector2d(-u[k][1], u[k][0]);
    target[k] = w_arc[i];
    w_star[k] = w_arc[i];
    r_x[k] = (1.0 + params.sigma2_beta) * u[k] * u[k].transpose() +
             params.sigma2_alpha * u_perp[k] * u_perp[k].transpose();
    sigma2_z[k] = params.sigma2_v;
  }

  CombinerSet cs = uniform_combiners(net);
  cs.C = identity_exchange(net);
  // boundary clusters are pinned: no inter-cluster pull on them
  for (int k : net.cluster(0)) {
    cs.P.row(k).setZero();
    cs.p_zero_row[k] = 1;
  }
  for (int k : net.cluster(q - 1)) {
    cs.P.row(k).setZero();
    cs.p_zero_row[k] = 1;
  }

  NodeEnvironment env(std::move(w_star), std::move(r_x), std::move(sigma2_z));
  DiffusionProblem p{std::move(net), std::move(cs), env.w_star_stacked(),
                     std::make_shared<LocalizationSource>(
                         std::move(u), std::move(u_perp), std::move(target),
                         params.sigma2_v, params.sigma2_alpha,
                         params.sigma2_beta),
                     std::move(env)};
  return p;
}

// ---------------------------------------------------------------------------
// Hyperspectral unmixing

std::vector<std::vector<int>> lattice_neighbors(int rows, int cols) {
  std::vector<std::vector<int>> nb(static_cast<std::size_t>(rows) * cols);
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      auto& list = nb[id(r, c)];
      if (r > 0) list.push_back(id(r - 1, c));
      if (c > 0) list.push_back(id(r, c - 1));
      if (c + 1 < cols) list.push_back(id(r, c + 1));
      if (r + 1 < rows) list.push_back(id(r + 1, c));
    }
  return nb;
}

std::vector<std::vector<double>> spectral_similarity_weights(
    const Eigen::MatrixXd& Y, const std::vector<std::vector<int>>& neighbors) {
  std::vector<std::vector<double>> rho(neighbors.size());
  Eigen::VectorXd norms(Y.cols());
  for (Eigen::Index k = 0; k < Y.cols(); ++k) norms[k] = Y.col(k).norm();
  for (std::size_t k = 0; k < neighbors.size(); ++k) {
    const auto& nk = neighbors[k];
    rho[k].resize(nk.size());
    double total = 0.0;
    for (std::size_t j = 0; j < nk.size(); ++j) {
      const double den = norms[k] * norms[nk[j]];
      const double theta = den > 0.0 ? Y.col(k).dot(Y.col(nk[j])) / den : 0.0;
      rho[k][j] = std::max(theta, 0.0);
      total += rho[k][j];
    }
    if (total > 0.0)
      for (double& w : rho[k]) w /= total;
    else if (!nk.empty())
      for (double& w : rho[k]) w = 1.0 / static_cast<double>(nk.size());
  }
  return rho;
}

UnmixClean unmix_clean(const UnmixParams& params) {
  const int rows = params.rows, cols = params.cols;
  const int r = params.n_endmembers, bands = params.n_bands;
  if (rows < 1 || cols < 1 || r < 1)
    throw std::invalid_argument("unmix_clean: degenerate grid");
  if (r > bands)
    throw std::invalid_argument("more endmembers than bands (R > L)");
  const int n = rows * cols;

  RngStream rng = keyed_stream(params.scene_seed, {0x5CE11E});

  // synthetic endmember spectra: positive baseline plus 2..4 Gaussian bumps,
  // normalized into (0, 1]
  UnmixClean clean;
  clean.rows = rows;
  clean.cols = cols;
  clean.M.resize(bands, r);
  for (int e = 0; e < r; ++e) {
    Eigen::VectorXd spec =
        Eigen::VectorXd::Constant(bands, rng.uniform(0.05, 0.25));
    const int bumps = 2 + rng.uniform_int(3);
    for (int b = 0; b < bumps; ++b) {
      const double center = rng.uniform() * (bands - 1);
      const double width = rng.uniform(bands / 40.0, bands / 8.0);
      const double amp = rng.uniform(0.3, 0.9);
      for (int l = 0; l < bands; ++l)
        spec[l] += amp * std::exp(-std::pow(l - center, 2) / (2 * width * width));
    }
    spec *= rng.uniform(0.7, 1.0) / spec.maxCoeff();
    clean.M.col(e) = spec;
  }

  // piecewise-constant abundance maps: nearest-seed regions, each with a
  // dominant endmember and a Dirichlet remainder
  const int n_regions = std::max(2 * r, 6);
  std::vector<std::array<int, 2>> seeds(n_regions);
  std::vector<Eigen::VectorXd> region_w(n_regions);
  for (int s = 0; s < n_regions; ++s) {
    seeds[s] = {rng.uniform_int(rows), rng.uniform_int(cols)};
    Eigen::VectorXd w = Eigen::VectorXd::Zero(r);
    const int dominant = s % r;
    const double head = rng.uniform(0.5, 0.85);
    double rest = 0.0;
    Eigen::VectorXd gamma(r);
    for (int e = 0; e < r; ++e) {
      gamma[e] = -std::log(1.0 - rng.uniform());
      rest += gamma[e];
    }
    for (int e = 0; e < r; ++e) w[e] = (1.0 - head) * gamma[e] / rest;
    w[dominant] += head;
    region_w[s] = w;
  }
  clean.W_true.resize(r, n);
  for (int row = 0; row < rows; ++row)
    for (int col = 0; col < cols; ++col) {
      int best = 0;
      long best_d = std::numeric_limits<long>::max();
      for (int s = 0; s < n_regions; ++s) {
        const long dr = row - seeds[s][0], dc = col - seeds[s][1];
        const long d = dr * dr + dc * dc;
        if (d < best_d) {
          best_d = d;
          best = s;
        }
      }
      clean.W_true.col(row * cols + col) = region_w[best];
    }

  clean.MW = clean.M * clean.W_true;
  clean.neighbors = lattice_neighbors(rows, cols);
  return clean;
}

UnmixScene realize_unmix_noise(const UnmixClean& clean, double snr_db,
                               std::uint64_t seed, std::uint64_t trial) {
  UnmixScene scene;
  scene.clean = clean;
  const double signal_power =
      clean.MW.squaredNorm() / static_cast<double>(clean.MW.size());
  const double sigma =
      std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0));
  RngStream rng = keyed_stream(seed, {trial, 0xB015E});
  Eigen::MatrixXd noise(clean.MW.rows(), clean.MW.cols());
  for (Eigen::Index j = 0; j < noise.cols(); ++j)
    for (Eigen::Index i = 0; i < noise.rows(); ++i)
      noise(i, j) = sigma * rng.normal();
  scene.Y = clean.MW + noise;
  scene.measured_snr_db =
      10.0 * std::log10(clean.MW.squaredNorm() / noise.squaredNorm());
  scene.rho = spectral_similarity_weights(scene.Y, clean.neighbors);
  return scene;
}

UnmixScene unmix_env(const UnmixParams& params) {
  return realize_unmix_noise(unmix_clean(params), params.snr_db,
                             params.noise_seed, 0);
}

}  // namespace diffnet
