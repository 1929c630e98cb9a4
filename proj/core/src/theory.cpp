#include "diffnet/theory.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace diffnet {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Eigen::VectorXd vec(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

Eigen::MatrixXd unvec(const Eigen::VectorXd& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols)
    throw std::invalid_argument("unvec: size mismatch");
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("spectral_radius: matrix must be square");
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

void require_size(std::size_t ln, std::size_t cap) {
  const std::size_t sq = ln * ln;
  if (sq > cap)
    throw SizeCapError("theory state needs (L*N)^2 = " + std::to_string(sq) +
                       " entries, above the cap of " + std::to_string(cap) +
                       "; raise size_cap to proceed");
}

bool row_is_zero(const CombinerSet& cs, int k) {
  if (!cs.p_zero_row.empty() && cs.p_zero_row[k]) return true;
  return cs.P.row(k).cwiseAbs().sum() == 0.0;
}

}  // namespace

TheoryModel assemble(const ClusteredNetwork& net, const CombinerSet& cs,
                     const NodeEnvironment& env, const AdaptConfig& cfg,
                     std::size_t size_cap) {
  const auto report = validate(net, cs);
  if (!report.ok)
    throw std::invalid_argument("invalid combiners: " + report.message);
  check_cluster_consistency(net, env);

  const int n = net.n_nodes();
  const int dim = env.dim();
  const std::size_t ln = static_cast<std::size_t>(n) * dim;
  require_size(ln, size_cap);

  TheoryModel m;
  m.n_nodes = n;
  m.dim = dim;
  m.mu = cfg.mu;
  m.eta = cfg.eta;

  const Eigen::MatrixXd eye_l = Eigen::MatrixXd::Identity(dim, dim);
  m.A_I = kron(cs.A, eye_l);
  m.C_I = kron(cs.C, eye_l);

  // Row-stochastic completion: a flagged zero row (node without
  // extra-cluster neighbors) becomes a self weight, which zeroes the
  // corresponding block row of Q exactly as the update equations do.
  Eigen::MatrixXd p_eff = cs.P;
  for (int k = 0; k < n; ++k)
    if (row_is_zero(cs, k)) p_eff(k, k) = 1.0;
  m.Q = Eigen::MatrixXd::Identity(ln, ln) - kron(p_eff, eye_l);

  m.H_R = Eigen::MatrixXd::Zero(ln, ln);
  for (int k = 0; k < n; ++k) {
    Eigen::MatrixXd r_k = Eigen::MatrixXd::Zero(dim, dim);
    for (int l : net.in_cluster_neighbors(k)) r_k += cs.C(l, k) * env.r_x(l);
    Eigen::LLT<Eigen::MatrixXd> llt(r_k);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("R_" + std::to_string(k + 1) +
                                  " is not positive-definite (check C)");
    m.H_R.block(k * dim, k * dim, dim, dim) = r_k;
  }

  m.B = m.A_I.transpose() *
        (Eigen::MatrixXd::Identity(ln, ln) - cfg.mu * (m.H_R + cfg.eta * m.Q));

  Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(ln, ln);
  for (int k = 0; k < n; ++k)
    noise.block(k * dim, k * dim, dim, dim) = env.sigma2_z(k) * env.r_x(k);
  m.G = m.A_I.transpose() * m.C_I.transpose() * noise * m.C_I * m.A_I;

  m.w_star = env.w_star_stacked();
  m.r = m.A_I.transpose() * (m.Q * m.w_star);
  return m;
}

double step_size_bound(const TheoryModel& model) {
  const int dim = model.dim;
  double lam = 0.0;
  for (int k = 0; k < model.n_nodes; ++k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        model.H_R.block(k * dim, k * dim, dim, dim));
    lam = std::max(lam, es.eigenvalues().maxCoeff());
  }
  return 2.0 / (lam + 2.0 * model.eta);
}

std::vector<Eigen::VectorXd> mean_recursion(const TheoryModel& model,
                                            const Eigen::VectorXd& v0, int T) {
  if (v0.size() != model.size())
    throw std::invalid_argument("mean_recursion: v0 has wrong length");
  std::vector<Eigen::VectorXd> seq;
  seq.reserve(T);
  Eigen::VectorXd v = v0;
  const Eigen::VectorXd forcing = model.mu * model.eta * model.r;
  for (int i = 0; i < T; ++i) {
    seq.push_back(v);
    v = model.B * v - forcing;
  }
  return seq;
}

Eigen::VectorXd asymptotic_bias(const TheoryModel& model) {
  const Eigen::Index ln = model.size();
  const Eigen::MatrixXd shifted =
      model.B - Eigen::MatrixXd::Identity(ln, ln);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(shifted);
  if (!lu.isInvertible())
    throw StabilityError("B - I is singular; the mean recursion is unstable");
  return lu.solve(model.mu * model.eta * model.r);
}

Eigen::MatrixXd apply_K(const TheoryModel& model, const Eigen::MatrixXd& S) {
  return model.B.transpose() * S * model.B;
}

Eigen::MatrixXd apply_K_transpose(const TheoryModel& model,
                                  const Eigen::MatrixXd& S) {
  return model.B * S * model.B.transpose();
}

Eigen::MatrixXd dense_K(const TheoryModel& model, std::size_t size_cap) {
  require_size(static_cast<std::size_t>(model.size()), size_cap);
  const Eigen::MatrixXd bt = model.B.transpose();
  return kron(bt, bt);
}

MsdCurve transient_msd(const TheoryModel& model, const Eigen::VectorXd& v0,
                       int T) {
  if (v0.size() != model.size())
    throw std::invalid_argument("transient_msd: v0 has wrong length");
  const Eigen::Index ln = model.size();
  const double n = static_cast<double>(model.n_nodes);
  const double mu = model.mu, eta = model.eta;

  MsdCurve curve;
  curve.zeta.reserve(T + 1);
  curve.mean_v.reserve(T + 1);

  // S(n) = unvec(K^n vec(I)), carried densely; Gmat is the matrix form of
  // Gamma(n)^T. Both update with LN x LN products only.
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(ln, ln);
  Eigen::MatrixXd gmat = Eigen::MatrixXd::Zero(ln, ln);
  Eigen::VectorXd ev = v0;

  double zeta = v0.squaredNorm() / n;
  curve.zeta.push_back(zeta);
  curve.mean_v.push_back(ev);

  for (int it = 0; it < T; ++it) {
    const Eigen::MatrixXd s_next = apply_K(model, s);
    const Eigen::VectorXd bev = model.B * ev;
    const double noise_term = mu * mu * (model.G * s).trace();
    const double init_term = v0.dot((s - s_next) * v0);
    const double reg_term = mu * mu * eta * eta * model.r.dot(s * model.r);
    const double gamma_term = gmat.trace() + model.r.dot(bev);
    zeta += (noise_term - init_term + reg_term - 2.0 * mu * eta * gamma_term) / n;
    curve.zeta.push_back(zeta);

    // Gamma(n+1) = Gamma(n) K + (B E{v(n)} ⊗ r)^T (K - I); in matrix form
    // with Rn = r (B E{v(n)})^T:  Gmat <- B Gmat B^T + B Rn B^T - Rn.
    const Eigen::MatrixXd rn = model.r * bev.transpose();
    gmat = apply_K_transpose(model, gmat) + apply_K_transpose(model, rn) - rn;

    ev = bev - mu * eta * model.r;
    curve.mean_v.push_back(ev);
    s = s_next;
  }
  curve.gamma = vec(gmat);
  return curve;
}

double steady_state_msd(const TheoryModel& model) {
  const double rho_b = spectral_radius(model.B);
  if (rho_b >= 1.0)
    throw StabilityError("rho(B) = " + std::to_string(rho_b) +
                         " >= 1; steady-state MSD undefined");

  const Eigen::Index ln = model.size();
  const double n = static_cast<double>(model.n_nodes);
  // (I - K) sigma = vec(I)/N via the Neumann iteration sigma <- b + K sigma,
  // accumulated term by term; converges geometrically at rho(K) = rho(B)^2.
  const Eigen::MatrixXd b = Eigen::MatrixXd::Identity(ln, ln) / n;
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(ln, ln);
  Eigen::MatrixXd term = b;
  const double tol = 1e-12;
  const long max_terms = 20000000;
  for (long i = 0; i < max_terms; ++i) {
    sigma += term;
    const double rel = term.cwiseAbs().maxCoeff() /
                       std::max(1.0, sigma.cwiseAbs().maxCoeff());
    if (rel <= tol) break;
    if (i + 1 == max_terms)
      throw StabilityError("steady-state weighting series did not converge");
    term = apply_K(model, term);
  }

  const double mu = model.mu, eta = model.eta;
  const Eigen::VectorXd v_inf = asymptotic_bias(model);
  const double noise_part = mu * mu * (model.G * sigma).trace();
  const double f_part = mu * mu * eta * eta * model.r.dot(sigma * model.r) -
                        2.0 * mu * eta * model.r.dot(sigma * (model.B * v_inf));
  return noise_part + f_part;
}

}  // namespace diffnet
