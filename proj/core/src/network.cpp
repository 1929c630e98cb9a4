#include "diffnet/network.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace diffnet {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

ClusteredNetwork::ClusteredNetwork(
    int n_nodes, const std::vector<std::pair<int, int>>& edges,
    std::vector<std::vector<int>> clusters)
    : n_nodes_(n_nodes) {
  if (n_nodes < 1) throw std::invalid_argument("network needs at least one node");
  adj_.assign(static_cast<std::size_t>(n_nodes) * n_nodes, 0);
  for (int k = 0; k < n_nodes; ++k) adj_[idx(k, k)] = 1;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n_nodes || b >= n_nodes)
      throw std::invalid_argument("edge endpoint out of range");
    if (a == b) throw std::invalid_argument("explicit self loops are not allowed");
    adj_[idx(a, b)] = adj_[idx(b, a)] = 1;
    auto e = std::minmax(a, b);
    edges_.emplace_back(e.first, e.second);
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  // partition check
  cluster_of_.assign(n_nodes, -1);
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (clusters[i].empty()) throw std::invalid_argument("empty cluster");
    for (int k : clusters[i]) {
      if (k < 0 || k >= n_nodes)
        throw std::invalid_argument("cluster member out of range");
      if (cluster_of_[k] != -1)
        throw std::invalid_argument("node " + std::to_string(k + 1) +
                                    " assigned to two clusters");
      cluster_of_[k] = static_cast<int>(i);
    }
    std::sort(clusters[i].begin(), clusters[i].end());
  }
  for (int k = 0; k < n_nodes; ++k)
    if (cluster_of_[k] == -1)
      throw std::invalid_argument("node " + std::to_string(k + 1) +
                                  " belongs to no cluster");
  clusters_ = std::move(clusters);

  // connectivity (undirected); disconnected inputs are rejected
  std::vector<char> seen(n_nodes, 0);
  std::deque<int> queue{0};
  seen[0] = 1;
  int reached = 1;
  while (!queue.empty()) {
    int k = queue.front();
    queue.pop_front();
    for (int l = 0; l < n_nodes; ++l) {
      if (l != k && adj_[idx(k, l)] && !seen[l]) {
        seen[l] = 1;
        ++reached;
        queue.push_back(l);
      }
    }
  }
  if (reached != n_nodes)
    throw std::invalid_argument("graph is not connected");

  neighbors_.resize(n_nodes);
  minus_.resize(n_nodes);
  in_cluster_.resize(n_nodes);
  extra_cluster_.resize(n_nodes);
  for (int k = 0; k < n_nodes; ++k) {
    for (int l = 0; l < n_nodes; ++l) {
      if (!adj_[idx(k, l)]) continue;
      neighbors_[k].push_back(l);
      if (l != k) minus_[k].push_back(l);
      if (cluster_of_[l] == cluster_of_[k])
        in_cluster_[k].push_back(l);
      else
        extra_cluster_[k].push_back(l);
    }
  }
}

ValidationReport validate(const ClusteredNetwork& net, const CombinerSet& cs) {
  const int n = net.n_nodes();
  auto square = [&](const Eigen::MatrixXd& m, const char* name) {
    if (m.rows() != n || m.cols() != n)
      throw std::invalid_argument(std::string(name) + " must be " +
                                  std::to_string(n) + "x" + std::to_string(n) +
                                  ", got " + std::to_string(m.rows()) + "x" +
                                  std::to_string(m.cols()));
  };
  square(cs.A, "A");
  square(cs.C, "C");
  square(cs.P, "P");
  if (!cs.p_zero_row.empty() && static_cast<int>(cs.p_zero_row.size()) != n)
    throw std::invalid_argument("p_zero_row must have one flag per node");

  auto fail = [](std::string msg) {
    return ValidationReport{false, std::move(msg)};
  };
  const double tol = 1e-9;

  auto in_set = [](const std::vector<int>& s, int v) {
    return std::binary_search(s.begin(), s.end(), v);
  };

  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      if (cs.A(l, k) < 0.0)
        return fail("A(" + std::to_string(l + 1) + "," + std::to_string(k + 1) +
                    ") is negative");
      if (cs.C(l, k) < 0.0)
        return fail("C(" + std::to_string(l + 1) + "," + std::to_string(k + 1) +
                    ") is negative");
      if (cs.P(k, l) < 0.0)
        return fail("P(" + std::to_string(k + 1) + "," + std::to_string(l + 1) +
                    ") is negative");
    }
  }

  // A left-stochastic, a(l,k) = 0 outside N_k ∩ C(k)
  for (int k = 0; k < n; ++k) {
    const double colsum = cs.A.col(k).sum();
    if (std::abs(colsum - 1.0) > tol)
      return fail("column " + std::to_string(k + 1) + " of A sums to " +
                  fmt(colsum));
    for (int l = 0; l < n; ++l)
      if (cs.A(l, k) != 0.0 && !in_set(net.in_cluster_neighbors(k), l))
        return fail("A(" + std::to_string(l + 1) + "," + std::to_string(k + 1) +
                    ") nonzero but node " + std::to_string(l + 1) +
                    " is outside N_" + std::to_string(k + 1) + " ∩ C(" +
                    std::to_string(k + 1) + ")");
  }

  // C right-stochastic, c(l,k) = 0 outside k ∈ N_l ∩ C(l)
  for (int l = 0; l < n; ++l) {
    const double rowsum = cs.C.row(l).sum();
    if (std::abs(rowsum - 1.0) > tol)
      return fail("row " + std::to_string(l + 1) + " of C sums to " +
                  fmt(rowsum));
    for (int k = 0; k < n; ++k)
      if (cs.C(l, k) != 0.0 && !in_set(net.in_cluster_neighbors(l), k))
        return fail("C(" + std::to_string(l + 1) + "," + std::to_string(k + 1) +
                    ") nonzero but node " + std::to_string(k + 1) +
                    " is outside N_" + std::to_string(l + 1) + " ∩ C(" +
                    std::to_string(l + 1) + ")");
  }

  // P rows sum to 1 on support N_k \ C(k); flagged rows must be all zero
  for (int k = 0; k < n; ++k) {
    const bool flagged = !cs.p_zero_row.empty() && cs.p_zero_row[k];
    const double rowsum = cs.P.row(k).sum();
    if (flagged) {
      if (rowsum != 0.0)
        return fail("row " + std::to_string(k + 1) +
                    " of P is flagged zero but sums to " + fmt(rowsum));
    } else if (std::abs(rowsum - 1.0) > tol) {
      return fail("row " + std::to_string(k + 1) + " of P sums to " +
                  fmt(rowsum));
    }
    for (int l = 0; l < n; ++l)
      if (cs.P(k, l) != 0.0 && !in_set(net.extra_cluster_neighbors(k), l))
        return fail("P(" + std::to_string(k + 1) + "," + std::to_string(l + 1) +
                    ") nonzero but node " + std::to_string(l + 1) +
                    " is outside N_" + std::to_string(k + 1) + " \\ C(" +
                    std::to_string(k + 1) + ")");
  }

  return {};
}

CombinerSet uniform_combiners(const ClusteredNetwork& net) {
  const int n = net.n_nodes();
  CombinerSet cs;
  cs.A = Eigen::MatrixXd::Zero(n, n);
  cs.C = Eigen::MatrixXd::Zero(n, n);
  cs.P = Eigen::MatrixXd::Zero(n, n);
  cs.p_zero_row.assign(n, 0);
  for (int k = 0; k < n; ++k) {
    const auto& in = net.in_cluster_neighbors(k);
    const double a = 1.0 / static_cast<double>(in.size());
    for (int l : in) {
      cs.A(l, k) = a;  // column k
      cs.C(k, l) = a;  // row k: c(k,l) = |N_k ∩ C(k)|^-1
    }
    const auto& extra = net.extra_cluster_neighbors(k);
    if (extra.empty()) {
      cs.p_zero_row[k] = 1;
    } else {
      const double rho = 1.0 / static_cast<double>(extra.size());
      for (int l : extra) cs.P(k, l) = rho;
    }
  }
  return cs;
}

Eigen::MatrixXd identity_exchange(const ClusteredNetwork& net) {
  return Eigen::MatrixXd::Identity(net.n_nodes(), net.n_nodes());
}

}  // namespace diffnet
