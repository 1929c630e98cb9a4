#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace diffnet {

// Undirected connected graph with a partition of the nodes into clusters.
// Node and cluster ids are dense and 0-based internally; validation messages
// and serialized documents use 1-based ids. Immutable after construction.
class ClusteredNetwork {
 public:
  // `edges` lists distinct undirected pairs (no self loops; every node is
  // implicitly its own neighbor). Throws std::invalid_argument on malformed
  // input, a non-partition, or a disconnected graph.
  ClusteredNetwork(int n_nodes, const std::vector<std::pair<int, int>>& edges,
                   std::vector<std::vector<int>> clusters);

  int n_nodes() const { return n_nodes_; }
  int n_clusters() const { return static_cast<int>(clusters_.size()); }
  int cluster_of(int k) const { return cluster_of_[k]; }
  bool adjacent(int k, int l) const { return adj_[idx(k, l)] != 0; }

  // Sorted member list of cluster i.
  const std::vector<int>& cluster(int i) const { return clusters_[i]; }
  // N_k including k itself, ascending.
  const std::vector<int>& neighbors(int k) const { return neighbors_[k]; }
  // N_k^- = N_k \ {k}, ascending.
  const std::vector<int>& strict_neighbors(int k) const { return minus_[k]; }
  // N_k ∩ C(k), ascending (always contains k).
  const std::vector<int>& in_cluster_neighbors(int k) const {
    return in_cluster_[k];
  }
  // N_k \ C(k), ascending (possibly empty).
  const std::vector<int>& extra_cluster_neighbors(int k) const {
    return extra_cluster_[k];
  }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

 private:
  std::size_t idx(int k, int l) const {
    return static_cast<std::size_t>(k) * n_nodes_ + l;
  }

  int n_nodes_ = 0;
  std::vector<std::uint8_t> adj_;
  std::vector<std::vector<int>> clusters_;
  std::vector<int> cluster_of_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> minus_;
  std::vector<std::vector<int>> in_cluster_;
  std::vector<std::vector<int>> extra_cluster_;
  std::vector<std::pair<int, int>> edges_;
};

// The three coefficient matrices of the diffusion strategy.
//   A: combination weights, left-stochastic, a(l,k) supported on l ∈ N_k ∩ C(k)
//   C: measurement-exchange weights, right-stochastic, c(l,k) supported on
//      k ∈ N_l ∩ C(l)
//   P: inter-cluster regularization weights rho(k,l), each row sums to 1 and
//      is supported on l ∈ N_k \ C(k), except rows flagged in p_zero_row which
//      must be identically zero.
struct CombinerSet {
  Eigen::MatrixXd A;
  Eigen::MatrixXd C;
  Eigen::MatrixXd P;
  std::vector<std::uint8_t> p_zero_row;
};

struct ValidationReport {
  bool ok = true;
  std::string message;  // first violated constraint, with 1-based indices
};

// Checks non-negativity, stochasticity, and support of A/C/P against the
// network. Dimension mismatches are structural and throw
// std::invalid_argument; constraint violations are reported.
ValidationReport validate(const ClusteredNetwork& net, const CombinerSet& cs);

// Averaging-rule combiners: a(l,k) = |N_k ∩ C(k)|^-1 on support,
// c(l,k) = |N_l ∩ C(l)|^-1 on support, rho(k,l) = |N_k \ C(k)|^-1 on support.
// Nodes without extra-cluster neighbors get a flagged all-zero P row.
CombinerSet uniform_combiners(const ClusteredNetwork& net);

// C = I: nodes use only their own measurements.
Eigen::MatrixXd identity_exchange(const ClusteredNetwork& net);

// JSON document round-trip:
//   {n_nodes, edges:[[k,l],...], clusters:[[...],...],
//    A:{mode:"uniform"|"explicit",...}, C:{mode:"uniform"|"identity"|"explicit"},
//    P:{mode:"uniform"|"explicit", zero_rows:[...]}}
// Node ids in the document are 1-based; explicit matrices are row-major.
struct NetworkDocument {
  ClusteredNetwork network;
  CombinerSet combiners;
};
NetworkDocument network_from_json(const std::string& json_text);
std::string network_to_json(const NetworkDocument& doc);

}  // namespace diffnet
