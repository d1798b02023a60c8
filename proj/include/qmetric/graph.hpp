#pragma once

// Finite weighted graphs with cached single-source shortest paths,
// named boundary vertex sets, and a distinguished base point.

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "qmetric/space.hpp"

namespace qmetric {

class WeightedGraph {
 public:
  struct Edge {
    std::size_t u, v;
    double length;
  };

  static WeightedGraph build(
      std::vector<std::string> vertices,
      const std::vector<std::tuple<std::string, std::string, double>>& edges,
      std::map<std::string, std::vector<std::string>> boundary_sets = {},
      const std::string& base = "") {
    WeightedGraph g;
    if (vertices.empty()) throw invalid_space("graph: no vertices");
    g.ids_ = std::move(vertices);
    for (std::size_t i = 0; i < g.ids_.size(); ++i)
      if (!g.lookup_.emplace(g.ids_[i], i).second)
        throw invalid_space("graph: duplicate vertex id '" + g.ids_[i] + "'");
    for (const auto& [u, v, len] : edges) g.push_edge(g.index_of(u), g.index_of(v), len);
    for (auto& [name, members] : boundary_sets) {
      std::vector<std::size_t> idx;
      idx.reserve(members.size());
      for (const auto& id : members) idx.push_back(g.index_of(id));
      g.boundary_sets_.emplace(name, std::move(idx));
    }
    g.base_ = base.empty() ? 0 : g.index_of(base);
    g.reset_cache();
    return g;
  }

  // index-based assembly for generators
  static WeightedGraph from_indices(std::vector<std::string> vertices,
                                    const std::vector<Edge>& edges,
                                    std::map<std::string, std::vector<std::size_t>>
                                        boundary_sets = {},
                                    std::size_t base = 0) {
    WeightedGraph g;
    if (vertices.empty()) throw invalid_space("graph: no vertices");
    g.ids_ = std::move(vertices);
    for (std::size_t i = 0; i < g.ids_.size(); ++i)
      if (!g.lookup_.emplace(g.ids_[i], i).second)
        throw invalid_space("graph: duplicate vertex id '" + g.ids_[i] + "'");
    for (const auto& e : edges) g.push_edge(e.u, e.v, e.length);
    for (auto& [name, members] : boundary_sets)
      for (std::size_t m : members)
        if (m >= g.ids_.size()) throw invalid_space("graph: boundary index out of range");
    g.boundary_sets_ = std::move(boundary_sets);
    if (base >= g.ids_.size()) throw invalid_space("graph: base index out of range");
    g.base_ = base;
    g.reset_cache();
    return g;
  }

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t base() const { return base_; }
  const std::map<std::string, std::vector<std::size_t>>& boundary_sets() const {
    return boundary_sets_;
  }

  std::size_t index_of(const std::string& id) const {
    auto it = lookup_.find(id);
    if (it == lookup_.end()) throw invalid_input("graph: unknown vertex '" + id + "'");
    return it->second;
  }

  const std::vector<std::size_t>& boundary(const std::string& name) const {
    auto it = boundary_sets_.find(name);
    if (it == boundary_sets_.end())
      throw invalid_input("graph: unknown boundary set '" + name + "'");
    return it->second;
  }

  // (neighbor, edge index) per vertex
  const std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& adjacency()
      const {
    return adj_;
  }

  const std::vector<double>& distances_from(std::size_t u) const {
    if (u >= size()) throw invalid_input("graph: vertex index out of range");
    if (!have_[u]) {
      dist_[u] = dijkstra(u);
      have_[u] = true;
    }
    return dist_[u];
  }

  double distance(std::size_t u, std::size_t v) const { return distances_from(u)[v]; }

  bool connected() const {
    const auto& d = distances_from(0);
    return std::all_of(d.begin(), d.end(),
                       [](double x) { return x < std::numeric_limits<double>::infinity(); });
  }

 private:
  void push_edge(std::size_t u, std::size_t v, double len) {
    if (u >= ids_.size() || v >= ids_.size())
      throw invalid_space("graph: edge endpoint out of range");
    if (u == v) throw invalid_space("graph: self-loop at '" + ids_[u] + "'");
    if (!(len > 0.0) || !std::isfinite(len))
      throw invalid_space("graph: edge length must be positive and finite");
    std::size_t idx = edges_.size();
    edges_.push_back(Edge{u, v, len});
    if (adj_.size() < ids_.size()) adj_.resize(ids_.size());
    adj_[u].emplace_back(v, idx);
    adj_[v].emplace_back(u, idx);
  }

  void reset_cache() const {
    dist_.assign(size(), {});
    have_.assign(size(), 0);
    if (adj_.size() < size()) adj_.resize(size());
  }

  std::vector<double> dijkstra(std::size_t src) const {
    std::vector<double> d(size(), std::numeric_limits<double>::infinity());
    d[src] = 0.0;
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.emplace(0.0, src);
    while (!pq.empty()) {
      auto [du, u] = pq.top();
      pq.pop();
      if (du > d[u]) continue;
      for (auto [v, e] : adj_[u]) {
        double nd = du + edges_[e].length;
        if (nd < d[v]) {
          d[v] = nd;
          pq.emplace(nd, v);
        }
      }
    }
    return d;
  }

  std::vector<std::string> ids_;
  std::map<std::string, std::size_t> lookup_;
  std::vector<Edge> edges_;
  mutable std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj_;
  std::map<std::string, std::vector<std::size_t>> boundary_sets_;
  std::size_t base_ = 0;
  mutable std::vector<std::vector<double>> dist_;
  mutable std::vector<char> have_;
};

// all-pairs shortest-path distances as a quasimetric space with unit masses
inline MeasuredSpace space_from_graph(const WeightedGraph& g) {
  if (!g.connected())
    throw invalid_input("space_from_graph: graph must be connected");
  std::size_t n = g.size();
  std::vector<double> table(n * n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    const auto& d = g.distances_from(u);
    for (std::size_t v = 0; v < n; ++v) table[u * n + v] = d[v];
  }
  return with_counting_masses(QuasimetricSpace::from_table(g.ids(), std::move(table)));
}

}  // namespace qmetric
