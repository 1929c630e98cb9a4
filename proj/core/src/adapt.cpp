#include "diffnet/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace diffnet {

namespace {

// The three accumulation kernels below are shared by every step variant so
// that the algebraic reductions (single cluster, singleton clusters, eta = 0)
// hold bit-for-bit, not just to rounding.

// acc += sum_{l in members} c(l,k) (d_l - x_l^T w_k) x_l
// Zero weights are skipped; an exact-zero coefficient contributes nothing.
inline void add_data_term(Eigen::VectorXd& acc, const Eigen::MatrixXd& c_mat,
                          int k, const std::vector<int>& members,
                          const Sample& sample, const Eigen::VectorXd& w_k) {
  for (int l : members) {
    const double c = c_mat(l, k);
    if (c == 0.0) continue;
    const double err = sample.d[l] - sample.x[l].dot(w_k);
    acc += (c * err) * sample.x[l];
  }
}

// acc += eta * sum_{l in members} rho(k,l) (w_l - w_k)
inline void add_coupling_term(Eigen::VectorXd& acc, double eta,
                              const Eigen::MatrixXd& p_mat, int k,
                              const std::vector<int>& members,
                              const std::vector<Eigen::VectorXd>& w) {
  Eigen::VectorXd pull = Eigen::VectorXd::Zero(acc.size());
  for (int l : members) {
    const double rho = p_mat(k, l);
    if (rho == 0.0) continue;
    pull += rho * (w[l] - w[k]);
  }
  acc += eta * pull;
}

// w_k = sum_{l in members} a(l,k) psi_l
inline void combine(Eigen::VectorXd& w_k, const Eigen::MatrixXd& a_mat, int k,
                    const std::vector<int>& members,
                    const std::vector<Eigen::VectorXd>& psi) {
  w_k.setZero();
  for (int l : members) {
    const double a = a_mat(l, k);
    if (a == 0.0) continue;
    w_k += a * psi[l];
  }
}

void check_shapes(const AdaptState& s, const Sample& sample, int n) {
  if (static_cast<int>(s.w.size()) != n || static_cast<int>(sample.x.size()) != n)
    throw std::invalid_argument("state/sample size does not match the network");
}

}  // namespace

AdaptState AdaptState::zeros(int n_nodes, int dim) {
  AdaptState s;
  s.w.assign(n_nodes, Eigen::VectorXd::Zero(dim));
  s.psi.assign(n_nodes, Eigen::VectorXd::Zero(dim));
  return s;
}

AdaptState atc_step(AdaptState state, const Sample& sample,
                    const ClusteredNetwork& net, const CombinerSet& cs,
                    const AdaptConfig& cfg) {
  const int n = net.n_nodes();
  check_shapes(state, sample, n);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(state.w[k].size());
    add_data_term(grad, cs.C, k, net.in_cluster_neighbors(k), sample,
                  state.w[k]);
    const auto& extra = net.extra_cluster_neighbors(k);
    if (cfg.eta != 0.0 && !extra.empty())
      add_coupling_term(grad, cfg.eta, cs.P, k, extra, state.w);
    state.psi[k] = state.w[k] + cfg.mu * grad;
  }
  for (int k = 0; k < n; ++k)
    combine(state.w[k], cs.A, k, net.in_cluster_neighbors(k), state.psi);
  return state;
}

AdaptState single_task_step(AdaptState state, const Sample& sample,
                            const ClusteredNetwork& net, const CombinerSet& cs,
                            const AdaptConfig& cfg) {
  const int n = net.n_nodes();
  check_shapes(state, sample, n);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(state.w[k].size());
    add_data_term(grad, cs.C, k, net.neighbors(k), sample, state.w[k]);
    state.psi[k] = state.w[k] + cfg.mu * grad;
  }
  for (int k = 0; k < n; ++k)
    combine(state.w[k], cs.A, k, net.neighbors(k), state.psi);
  return state;
}

AdaptState multitask_step(AdaptState state, const Sample& sample,
                          const ClusteredNetwork& net, const CombinerSet& cs,
                          const AdaptConfig& cfg) {
  const int n = net.n_nodes();
  check_shapes(state, sample, n);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(state.w[k].size());
    // own data only; expression mirrors add_data_term with c(k,k) = 1
    const double err = sample.d[k] - sample.x[k].dot(state.w[k]);
    grad += (1.0 * err) * sample.x[k];
    const auto& others = net.strict_neighbors(k);
    if (cfg.eta != 0.0 && !others.empty())
      add_coupling_term(grad, cfg.eta, cs.P, k, others, state.w);
    state.psi[k] = state.w[k] + cfg.mu * grad;
    state.w[k] = state.psi[k];
  }
  return state;
}

AdaptState lms_step(AdaptState state, const Sample& sample,
                    const AdaptConfig& cfg) {
  const int n = static_cast<int>(state.w.size());
  if (static_cast<int>(sample.x.size()) != n)
    throw std::invalid_argument("state/sample size mismatch");
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(state.w[k].size());
    const double err = sample.d[k] - sample.x[k].dot(state.w[k]);
    grad += (1.0 * err) * sample.x[k];
    state.psi[k] = state.w[k] + cfg.mu * grad;
    state.w[k] = state.psi[k];
  }
  return state;
}

DescentResult centralized_descent(const ClusteredNetwork& net,
                                  const CombinerSet& cs,
                                  const NodeEnvironment& env,
                                  const AdaptConfig& cfg,
                                  const DescentOptions& opts) {
  check_cluster_consistency(net, env);
  const int q = net.n_clusters();
  const int dim = env.dim();
  std::vector<Eigen::VectorXd> w(q, Eigen::VectorXd::Zero(dim));
  std::vector<Eigen::VectorXd> grad(q, Eigen::VectorXd::Zero(dim));
  // exact cross-correlations p_{xd,k} = R_{x,k} w*_k
  std::vector<Eigen::VectorXd> p_xd(net.n_nodes());
  for (int k = 0; k < net.n_nodes(); ++k)
    p_xd[k] = env.r_x(k) * env.w_star(k);

  double gnorm = 0.0;
  for (long it = 0; it < opts.max_iters; ++it) {
    double sq = 0.0;
    for (int i = 0; i < q; ++i) {
      grad[i].setZero();
      for (int k : net.cluster(i)) {
        grad[i].noalias() += env.r_x(k) * w[i] - p_xd[k];
        for (int l : net.extra_cluster_neighbors(k))
          grad[i] += cfg.eta * cs.P(k, l) * (w[i] - w[net.cluster_of(l)]);
      }
      sq += grad[i].squaredNorm();
    }
    gnorm = std::sqrt(sq);
    if (gnorm <= opts.tol)
      return {std::move(w), it, gnorm};
    for (int i = 0; i < q; ++i) w[i] -= cfg.mu * grad[i];  // synchronous
  }
  throw ConvergenceError("centralized descent did not reach tolerance " +
                             std::to_string(opts.tol) + " within " +
                             std::to_string(opts.max_iters) + " iterations",
                         gnorm);
}

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  if (n == 0) throw std::invalid_argument("cannot project an empty vector");
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  int support = 0;
  for (int j = 0; j < n; ++j) {
    cum += u[j];
    const double candidate = (cum - 1.0) / (j + 1);
    if (u[j] - candidate > 0.0) {
      tau = candidate;
      support = j + 1;
    }
  }
  (void)support;
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = std::max(v[i] - tau, 0.0);
  return w;
}

std::vector<Eigen::VectorXd> unmix_step(
    const std::vector<Eigen::VectorXd>& w, const Eigen::MatrixXd& M,
    const Eigen::MatrixXd& Y, const std::vector<std::vector<int>>& neighbors,
    const std::vector<std::vector<double>>& rho, const AdaptConfig& cfg) {
  const int n = static_cast<int>(w.size());
  if (Y.cols() != n || neighbors.size() != w.size() || rho.size() != w.size())
    throw std::invalid_argument("unmix_step: inconsistent scene shapes");
  const int r = static_cast<int>(M.cols());
  std::vector<Eigen::VectorXd> out(n);
  Eigen::VectorXd step(r), sgn_pull(r);
  for (int k = 0; k < n; ++k) {
    step.noalias() = M.transpose() * (Y.col(k) - M * w[k]);
    if (cfg.eta != 0.0) {
      sgn_pull.setZero();
      const auto& nk = neighbors[k];
      for (std::size_t j = 0; j < nk.size(); ++j) {
        const Eigen::VectorXd diff = w[k] - w[nk[j]];
        for (int c = 0; c < r; ++c) {
          // sgn(0) = 0: identical neighbors exert no force
          const double s = (diff[c] > 0.0) - (diff[c] < 0.0);
          sgn_pull[c] += rho[k][j] * s;
        }
      }
      out[k] = project_simplex(w[k] + cfg.mu * step - cfg.mu * cfg.eta * sgn_pull);
    } else {
      out[k] = project_simplex(w[k] + cfg.mu * step);
    }
  }
  return out;
}

double rmse(const std::vector<Eigen::VectorXd>& w_est,
            const std::vector<Eigen::VectorXd>& w_true) {
  if (w_est.size() != w_true.size() || w_est.empty())
    throw std::invalid_argument("rmse: shape mismatch");
  double sq = 0.0;
  const int r = static_cast<int>(w_est.front().size());
  for (std::size_t k = 0; k < w_est.size(); ++k) {
    if (w_est[k].size() != r || w_true[k].size() != r)
      throw std::invalid_argument("rmse: shape mismatch");
    sq += (w_est[k] - w_true[k]).squaredNorm();
  }
  return std::sqrt(sq / (static_cast<double>(w_est.size()) * r));
}

}  // namespace diffnet
