#include "json_support.hpp"

#include <utility>
#include <vector>

#include "diffnet/errors.hpp"

namespace diffnet::detail {

namespace {

using nlohmann::json;

const json& need(const json& j, const std::string& key,
                 const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "." + key, "missing key");
  return *it;
}

int need_int(const json& j, const std::string& key, const std::string& path) {
  const json& v = need(j, key, path);
  if (!v.is_number_integer())
    throw ConfigError(path + "." + key, "expected an integer");
  return v.get<int>();
}

Eigen::MatrixXd explicit_matrix(const json& block, int n,
                                const std::string& path) {
  const json& vals = need(block, "values", path);
  if (!vals.is_array() || static_cast<int>(vals.size()) != n * n)
    throw ConfigError(path + ".values",
                      "expected " + std::to_string(n * n) +
                          " row-major entries");
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = vals[i * n + j].get<double>();
  return m;
}

std::string mode_of(const json& block, const std::string& path) {
  const json& m = need(block, "mode", path);
  if (!m.is_string()) throw ConfigError(path + ".mode", "expected a string");
  return m.get<std::string>();
}

}  // namespace

NetworkDocument network_from_json_obj(const json& j, const std::string& key) {
  const int n = need_int(j, "n_nodes", key);
  if (n < 1) throw ConfigError(key + ".n_nodes", "must be >= 1");

  std::vector<std::pair<int, int>> edges;
  for (const auto& e : need(j, "edges", key)) {
    if (!e.is_array() || e.size() != 2)
      throw ConfigError(key + ".edges", "each edge must be a pair");
    edges.emplace_back(e[0].get<int>() - 1, e[1].get<int>() - 1);
  }
  std::vector<std::vector<int>> clusters;
  for (const auto& c : need(j, "clusters", key)) {
    std::vector<int> members;
    for (const auto& v : c) members.push_back(v.get<int>() - 1);
    clusters.push_back(std::move(members));
  }

  ClusteredNetwork net = [&] {
    try {
      return ClusteredNetwork(n, edges, std::move(clusters));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key, e.what());
    }
  }();

  CombinerSet cs = uniform_combiners(net);

  const json& a_block = need(j, "A", key);
  const std::string a_mode = mode_of(a_block, key + ".A");
  if (a_mode == "explicit") {
    cs.A = explicit_matrix(a_block, n, key + ".A");
  } else if (a_mode == "metropolis") {
    throw ConfigError(key + ".A.mode", "\"metropolis\" is reserved but unimplemented");
  } else if (a_mode != "uniform") {
    throw ConfigError(key + ".A.mode", "unknown mode \"" + a_mode + "\"");
  }

  const json& c_block = need(j, "C", key);
  const std::string c_mode = mode_of(c_block, key + ".C");
  if (c_mode == "explicit") {
    cs.C = explicit_matrix(c_block, n, key + ".C");
  } else if (c_mode == "identity") {
    cs.C = identity_exchange(net);
  } else if (c_mode != "uniform") {
    throw ConfigError(key + ".C.mode", "unknown mode \"" + c_mode + "\"");
  }

  const json& p_block = need(j, "P", key);
  const std::string p_mode = mode_of(p_block, key + ".P");
  if (p_mode == "explicit") {
    cs.P = explicit_matrix(p_block, n, key + ".P");
    cs.p_zero_row.assign(n, 0);
  } else if (p_mode != "uniform") {
    throw ConfigError(key + ".P.mode", "unknown mode \"" + p_mode + "\"");
  }
  if (p_block.contains("zero_rows")) {
    for (const auto& v : p_block["zero_rows"]) {
      const int k = v.get<int>() - 1;
      if (k < 0 || k >= n)
        throw ConfigError(key + ".P.zero_rows", "node id out of range");
      cs.P.row(k).setZero();
      cs.p_zero_row[k] = 1;
    }
  }

  return NetworkDocument{std::move(net), std::move(cs)};
}

json network_to_json_obj(const NetworkDocument& doc) {
  const auto& net = doc.network;
  const int n = net.n_nodes();
  json j;
  j["n_nodes"] = n;
  json edges = json::array();
  for (auto [a, b] : net.edges()) edges.push_back({a + 1, b + 1});
  j["edges"] = std::move(edges);
  json clusters = json::array();
  for (int i = 0; i < net.n_clusters(); ++i) {
    json c = json::array();
    for (int k : net.cluster(i)) c.push_back(k + 1);
    clusters.push_back(std::move(c));
  }
  j["clusters"] = std::move(clusters);

  auto dump_matrix = [n](const Eigen::MatrixXd& m) {
    json vals = json::array();
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) vals.push_back(m(i, k));
    return json{{"mode", "explicit"}, {"values", std::move(vals)}};
  };
  j["A"] = dump_matrix(doc.combiners.A);
  j["C"] = dump_matrix(doc.combiners.C);
  j["P"] = dump_matrix(doc.combiners.P);
  json zero_rows = json::array();
  for (int k = 0; k < n; ++k)
    if (!doc.combiners.p_zero_row.empty() && doc.combiners.p_zero_row[k])
      zero_rows.push_back(k + 1);
  j["P"]["zero_rows"] = std::move(zero_rows);
  return j;
}

}  // namespace diffnet::detail

namespace diffnet {

NetworkDocument network_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr,
                                           /*allow_exceptions=*/true);
  return detail::network_from_json_obj(j, "network");
}

std::string network_to_json(const NetworkDocument& doc) {
  return detail::network_to_json_obj(doc).dump(2);
}

}  // namespace diffnet
