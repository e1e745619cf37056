#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "xxz/combinatorics.hpp"

namespace xxz {

// Finite simple undirected graph. Construction validates and normalizes the
// edge list (endpoints in range, no self-loops, no duplicates) and requires
// connectivity; errors name the offending edge or vertex.
class BaseGraph {
 public:
  BaseGraph(int vertex_count, std::vector<std::array<int, 2>> edge_list,
            std::vector<std::string> labels = {})
      : n_(vertex_count), labels_(std::move(labels)) {
    if (n_ < 1)
      throw std::invalid_argument("vertex_count must be >= 1, got " +
                                  std::to_string(n_));
    for (auto& e : edge_list) {
      for (int v : e)
        if (v < 0 || v >= n_)
          throw std::invalid_argument(
              "edge (" + std::to_string(e[0]) + "," + std::to_string(e[1]) +
              "): vertex " + std::to_string(v) + " outside [0," +
              std::to_string(n_) + ")");
      if (e[0] == e[1])
        throw std::invalid_argument("self-loop at vertex " +
                                    std::to_string(e[0]));
      if (e[0] > e[1]) std::swap(e[0], e[1]);
    }
    std::sort(edge_list.begin(), edge_list.end());
    for (std::size_t i = 1; i < edge_list.size(); ++i)
      if (edge_list[i] == edge_list[i - 1])
        throw std::invalid_argument("duplicate edge (" +
                                    std::to_string(edge_list[i][0]) + "," +
                                    std::to_string(edge_list[i][1]) + ")");
    edges_ = std::move(edge_list);
    adj_.assign(static_cast<std::size_t>(n_), {});
    for (const auto& e : edges_) {
      adj_[static_cast<std::size_t>(e[0])].push_back(e[1]);
      adj_[static_cast<std::size_t>(e[1])].push_back(e[0]);
    }
    for (auto& a : adj_) std::sort(a.begin(), a.end());
    max_degree_ = 0;
    for (const auto& a : adj_)
      max_degree_ = std::max(max_degree_, static_cast<int>(a.size()));

    // Connectivity check (BFS from 0).
    std::vector<char> seen(static_cast<std::size_t>(n_), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int w : adj_[static_cast<std::size_t>(u)])
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          q.push(w);
        }
    }
    for (int v = 0; v < n_; ++v)
      if (!seen[static_cast<std::size_t>(v)])
        throw std::invalid_argument("graph is disconnected: vertex " +
                                    std::to_string(v) +
                                    " unreachable from vertex 0");

    if (labels_.empty()) {
      labels_.reserve(static_cast<std::size_t>(n_));
      for (int v = 0; v < n_; ++v) labels_.push_back(std::to_string(v));
    } else if (static_cast<int>(labels_.size()) != n_) {
      throw std::invalid_argument(
          "labels size " + std::to_string(labels_.size()) +
          " does not match vertex_count " + std::to_string(n_));
    }
    for (std::size_t i = 0; i < labels_.size(); ++i)
      for (std::size_t j = i + 1; j < labels_.size(); ++j)
        if (labels_[i] == labels_[j])
          throw std::invalid_argument("duplicate vertex label \"" +
                                      labels_[i] + "\"");
  }

  int vertex_count() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int max_degree() const { return max_degree_; }
  int degree(int v) const { return static_cast<int>(adjacency(v).size()); }
  const std::vector<int>& adjacency(int v) const {
    if (v < 0 || v >= n_)
      throw std::out_of_range("vertex " + std::to_string(v) +
                              " outside [0," + std::to_string(n_) + ")");
    return adj_[static_cast<std::size_t>(v)];
  }
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  const std::vector<std::string>& labels() const { return labels_; }

  int label_index(const std::string& label) const {
    for (int v = 0; v < n_; ++v)
      if (labels_[static_cast<std::size_t>(v)] == label) return v;
    throw std::invalid_argument("no vertex labeled \"" + label + "\"");
  }

  bool adjacent(int u, int v) const {
    const auto& a = adjacency(u);
    return std::binary_search(a.begin(), a.end(), v);
  }

  bool regular() const {
    for (int v = 0; v < n_; ++v)
      if (degree(v) != max_degree_) return false;
    return true;
  }

 private:
  int n_ = 0;
  int max_degree_ = 0;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::vector<int>> adj_;
  std::vector<std::string> labels_;
};

// Finite lattice windows with coordinate labels.
//   path:   dims = {L},      L >= 2, labels "z"
//   strip:  dims = {M, L},   M >= 2, L >= 2, labels "(z,m)", z in [0,L), m in [1,M]
//   grid2d: dims = {Lx, Ly}, Lx, Ly >= 2, labels "(x,y)"
inline BaseGraph build_lattice_window(const std::string& family,
                                      const std::vector<int>& dims) {
  auto need = [&](bool ok, const std::string& what) {
    if (!ok)
      throw std::invalid_argument("lattice family \"" + family + "\": " + what);
  };
  std::vector<std::array<int, 2>> edges;
  std::vector<std::string> labels;
  if (family == "path") {
    need(dims.size() == 1, "expected dims=[L]");
    int L = dims[0];
    need(L >= 2, "L must be >= 2, got " + std::to_string(L));
    for (int z = 0; z + 1 < L; ++z) edges.push_back({z, z + 1});
    for (int z = 0; z < L; ++z) labels.push_back(std::to_string(z));
    return BaseGraph(L, std::move(edges), std::move(labels));
  }
  if (family == "strip") {
    need(dims.size() == 2, "expected dims=[M,L]");
    int M = dims[0], L = dims[1];
    need(M >= 2, "M must be >= 2, got " + std::to_string(M));
    need(L >= 2, "L must be >= 2, got " + std::to_string(L));
    auto id = [M](int z, int m) { return z * M + (m - 1); };
    for (int z = 0; z < L; ++z)
      for (int m = 1; m <= M; ++m) {
        labels.push_back("(" + std::to_string(z) + "," + std::to_string(m) +
                         ")");
        if (m < M) edges.push_back({id(z, m), id(z, m + 1)});
        if (z + 1 < L) edges.push_back({id(z, m), id(z + 1, m)});
      }
    return BaseGraph(M * L, std::move(edges), std::move(labels));
  }
  if (family == "grid2d") {
    need(dims.size() == 2, "expected dims=[Lx,Ly]");
    int Lx = dims[0], Ly = dims[1];
    need(Lx >= 2, "Lx must be >= 2, got " + std::to_string(Lx));
    need(Ly >= 2, "Ly must be >= 2, got " + std::to_string(Ly));
    auto id = [Ly](int x, int y) { return x * Ly + y; };
    for (int x = 0; x < Lx; ++x)
      for (int y = 0; y < Ly; ++y) {
        labels.push_back("(" + std::to_string(x) + "," + std::to_string(y) +
                         ")");
        if (y + 1 < Ly) edges.push_back({id(x, y), id(x, y + 1)});
        if (x + 1 < Lx) edges.push_back({id(x, y), id(x + 1, y)});
      }
    return BaseGraph(Lx * Ly, std::move(edges), std::move(labels));
  }
  throw std::invalid_argument("unknown lattice family \"" + family +
                              "\" (expected path, strip, or grid2d)");
}

// Graph JSON: {"vertex_count": n, "edges": [[i,j],...], "labels": [...]?}.
inline BaseGraph parse_graph(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("graph JSON parse error: ") +
                                e.what());
  }
  if (!j.is_object())
    throw std::invalid_argument("graph JSON root must be an object");
  if (!j.contains("vertex_count"))
    throw std::invalid_argument("graph JSON missing key \"vertex_count\"");
  if (!j["vertex_count"].is_number_integer())
    throw std::invalid_argument("\"vertex_count\" must be an integer");
  int n = j["vertex_count"].get<int>();
  if (!j.contains("edges") || !j["edges"].is_array())
    throw std::invalid_argument("graph JSON missing array key \"edges\"");
  std::vector<std::array<int, 2>> edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer())
      throw std::invalid_argument(
          "each edge must be a pair of integers, got " + e.dump());
    edges.push_back({e[0].get<int>(), e[1].get<int>()});
  }
  std::vector<std::string> labels;
  if (j.contains("labels")) {
    if (!j["labels"].is_array())
      throw std::invalid_argument("\"labels\" must be an array of strings");
    for (const auto& l : j["labels"]) {
      if (!l.is_string())
        throw std::invalid_argument("\"labels\" must be an array of strings");
      labels.push_back(l.get<std::string>());
    }
  }
  return BaseGraph(n, std::move(edges), std::move(labels));
}

// BFS distance between two vertices.
inline std::vector<int> bfs_distances(const BaseGraph& g, int source) {
  std::vector<int> dist(static_cast<std::size_t>(g.vertex_count()), -1);
  std::queue<int> q;
  dist[static_cast<std::size_t>(source)] = 0;
  q.push(source);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int w : g.adjacency(u))
      if (dist[static_cast<std::size_t>(w)] < 0) {
        dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
        q.push(w);
      }
  }
  return dist;
}

inline int pair_distance(const BaseGraph& g, int u, int v) {
  if (u < 0 || u >= g.vertex_count() || v < 0 || v >= g.vertex_count())
    throw std::out_of_range("pair_distance: vertex outside [0," +
                            std::to_string(g.vertex_count()) + ")");
  return bfs_distances(g, u)[static_cast<std::size_t>(v)];
}

struct ConfigMeasures {
  int surface = 0;        // S(X) = |boundary edges|
  int interaction = 0;    // W(X) = |edges inside X|
  int total_degree = 0;   // sum of degrees over X
  int clusters = 0;       // connected components of the induced subgraph
};

namespace detail {
struct UnionFind {
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<std::size_t>(a)] = b;
    return true;
  }
  std::vector<int> parent;
};
}  // namespace detail

// Surface, interaction, total degree, and cluster count of a configuration.
// The identity S = total_degree - 2W is asserted against a direct boundary
// count.
inline ConfigMeasures config_measures(const BaseGraph& g,
                                      const Configuration& x) {
  if (x.empty()) throw std::invalid_argument("configuration must be nonempty");
  validate_configuration(x, g.vertex_count());
  std::vector<char> in(static_cast<std::size_t>(g.vertex_count()), 0);
  for (int v : x) in[static_cast<std::size_t>(v)] = 1;
  ConfigMeasures m;
  detail::UnionFind uf(static_cast<int>(x.size()));
  int boundary = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    int v = x[i];
    m.total_degree += g.degree(v);
    for (int w : g.adjacency(v)) {
      if (in[static_cast<std::size_t>(w)]) {
        if (w > v) {
          ++m.interaction;
          auto it = std::lower_bound(x.begin(), x.end(), w);
          uf.unite(static_cast<int>(i), static_cast<int>(it - x.begin()));
        }
      } else {
        ++boundary;
      }
    }
  }
  m.surface = m.total_degree - 2 * m.interaction;
  if (m.surface != boundary)
    throw std::logic_error("surface identity violated: " +
                           std::to_string(m.surface) + " vs direct count " +
                           std::to_string(boundary));
  m.clusters = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (uf.find(static_cast<int>(i)) == static_cast<int>(i)) ++m.clusters;
  return m;
}

// Validates a per-vertex potential: size |V|, entries finite and >= 0.
inline void validate_field(const BaseGraph& g, const std::vector<double>& v) {
  if (static_cast<int>(v.size()) != g.vertex_count())
    throw std::invalid_argument("field size " + std::to_string(v.size()) +
                                " does not match vertex_count " +
                                std::to_string(g.vertex_count()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] < 0.0)
      throw std::invalid_argument("field entry " + std::to_string(i) +
                                  " must be finite and nonnegative, got " +
                                  std::to_string(v[i]));
  }
}

inline void require_bulk_degree(const BaseGraph& g, int bulk_degree) {
  if (bulk_degree < g.max_degree())
    throw std::invalid_argument(
        "bulk_degree " + std::to_string(bulk_degree) +
        " below maximum degree " + std::to_string(g.max_degree()));
}

// v(x) = (1/2)(1 - 1/Delta)(bulk_degree - deg(x)): restores the ground-state
// energy offset (potential minus anisotropy-weighted degree) of a window to
// its bulk value.
inline std::vector<double> compensating_boundary_field(const BaseGraph& g,
                                                       double delta,
                                                       int bulk_degree) {
  if (!(delta > 1.0))
    throw std::invalid_argument("delta must be > 1, got " +
                                std::to_string(delta));
  require_bulk_degree(g, bulk_degree);
  std::vector<double> v(static_cast<std::size_t>(g.vertex_count()));
  for (int x = 0; x < g.vertex_count(); ++x)
    v[static_cast<std::size_t>(x)] =
        0.5 * (1.0 - 1.0 / delta) * (bulk_degree - g.degree(x));
  return v;
}

// v(x) = (1/2)(bulk_degree - deg(x)): restores the full bulk degree term, so
// the window Hamiltonian equals the compression of the bulk operator to
// configurations inside the window.
inline std::vector<double> degree_restoring_field(const BaseGraph& g,
                                                  int bulk_degree) {
  require_bulk_degree(g, bulk_degree);
  std::vector<double> v(static_cast<std::size_t>(g.vertex_count()));
  for (int x = 0; x < g.vertex_count(); ++x)
    v[static_cast<std::size_t>(x)] = 0.5 * (bulk_degree - g.degree(x));
  return v;
}

}  // namespace xxz
