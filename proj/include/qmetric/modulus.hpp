#pragma once

// Discrete Q-modulus of the family of E-F connecting paths on a weighted
// graph, by constraint generation: alternate a g-shortest-path separation
// oracle with a dual update over the active paths.  Densities live on edges
// and path length is sum of g(e) * length(e).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "qmetric/graph.hpp"
#include "qmetric/space.hpp"

namespace qmetric {

struct ModulusOptions {
  double feas_tol = 1e-6;
  double gap_tol = 1e-5;
  std::size_t max_iter = 10000;
  std::size_t inner_passes = 400;   // dual rebalancing sweeps per oracle call
  double inner_tol = 1e-10;         // worst |g-length - 1| over active paths
};

struct ModulusProblem {
  WeightedGraph graph;
  std::vector<std::size_t> E, F;
  double q = 2.0;
  std::vector<double> edge_measure;

  static ModulusProblem make(WeightedGraph g, std::vector<std::size_t> E,
                             std::vector<std::size_t> F, double q,
                             std::vector<double> edge_measure = {}) {
    if (E.empty() || F.empty())
      throw invalid_input("modulus: E and F must be nonempty");
    for (std::size_t v : E)
      if (v >= g.size()) throw invalid_input("modulus: E index out of range");
    for (std::size_t v : F)
      if (v >= g.size()) throw invalid_input("modulus: F index out of range");
    std::set<std::size_t> se(E.begin(), E.end());
    for (std::size_t v : F)
      if (se.count(v)) throw invalid_input("modulus: E and F must be disjoint");
    if (!(q > 1.0)) throw invalid_input("modulus: exponent Q must exceed 1");
    if (edge_measure.empty()) {
      edge_measure.reserve(g.edges().size());
      for (const auto& e : g.edges()) edge_measure.push_back(e.length);
    }
    if (edge_measure.size() != g.edges().size())
      throw invalid_input("modulus: one measure entry per edge required");
    for (double m : edge_measure)
      if (!(m > 0.0) || !std::isfinite(m))
        throw invalid_input("modulus: edge measure must be positive");
    return ModulusProblem{std::move(g), std::move(E), std::move(F), q,
                          std::move(edge_measure)};
  }
};

struct ModulusSolution {
  std::vector<double> g;
  double value = 0.0;
  double dual_bound = 0.0;
  double shortest_violation = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = true;
  bool empty_family = false;
  std::vector<std::vector<std::size_t>> active;  // paths as edge index lists
};

namespace detail {

// multi-source Dijkstra under nonnegative per-edge weights; returns the
// cheapest E-F path as edge indices, trimmed to leave E once and end on
// its first F vertex
inline std::optional<std::vector<std::size_t>> cheapest_path(
    const WeightedGraph& gr, const std::vector<std::size_t>& E,
    const std::vector<std::size_t>& F, const std::vector<double>& weight,
    double* cost_out) {
  std::size_t n = gr.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, kInf);
  std::vector<std::size_t> pred_edge(n, SIZE_MAX), pred_vertex(n, SIZE_MAX);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (std::size_t s : E) {
    dist[s] = 0.0;
    pq.emplace(0.0, s);
  }
  while (!pq.empty()) {
    auto [du, u] = pq.top();
    pq.pop();
    if (du > dist[u]) continue;
    for (auto [v, e] : gr.adjacency()[u]) {
      double nd = du + weight[e];
      if (nd < dist[v]) {
        dist[v] = nd;
        pred_edge[v] = e;
        pred_vertex[v] = u;
        pq.emplace(nd, v);
      }
    }
  }
  std::size_t best = SIZE_MAX;
  for (std::size_t f : F)
    if (best == SIZE_MAX || dist[f] < dist[best]) best = f;
  if (best == SIZE_MAX || dist[best] == kInf) return std::nullopt;

  std::vector<std::size_t> vertices{best};
  while (pred_vertex[vertices.back()] != SIZE_MAX)
    vertices.push_back(pred_vertex[vertices.back()]);
  std::reverse(vertices.begin(), vertices.end());

  std::vector<char> in_e(n, 0), in_f(n, 0);
  for (std::size_t v : E) in_e[v] = 1;
  for (std::size_t v : F) in_f[v] = 1;
  std::size_t first_f = 0;
  while (!in_f[vertices[first_f]]) ++first_f;
  std::size_t last_e = first_f;
  while (!in_e[vertices[last_e]]) --last_e;

  std::vector<std::size_t> path;
  double cost = 0.0;
  for (std::size_t i = last_e + 1; i <= first_f; ++i) {
    path.push_back(pred_edge[vertices[i]]);
    cost += weight[pred_edge[vertices[i]]];
  }
  if (cost_out) *cost_out = cost;
  return path;
}

}  // namespace detail

inline ModulusSolution modulus(const ModulusProblem& p,
                               const ModulusOptions& opt = {}) {
  const auto& gr = p.graph;
  std::size_t ne = gr.edges().size();
  ModulusSolution sol;
  sol.g.assign(ne, 0.0);

  std::vector<double> unit(ne, 1.0);
  if (!detail::cheapest_path(gr, p.E, p.F, unit, nullptr)) {
    sol.empty_family = true;  // no connecting curve: modulus 0
    return sol;
  }

  double q = p.q;
  double inv = 1.0 / (q - 1.0);
  std::vector<double> lam_mass(ne, 0.0);  // per-edge multiplier load
  std::vector<double> lambda;             // per active path
  auto gee = [&](std::size_t e) {
    double num = lam_mass[e] * gr.edges()[e].length;
    return num <= 0.0 ? 0.0 : std::pow(num / (q * p.edge_measure[e]), inv);
  };
  auto refresh = [&](const std::vector<std::size_t>& path) {
    for (std::size_t e : path) sol.g[e] = gee(e);
  };
  auto glength = [&](const std::vector<std::size_t>& path) {
    double s = 0.0;
    for (std::size_t e : path) s += sol.g[e] * gr.edges()[e].length;
    return s;
  };
  // exact single-constraint projection: grow this path's multiplier until its
  // g-length is 1, holding the others fixed
  auto tighten = [&](std::size_t idx) {
    const auto& path = sol.active[idx];
    double base = lambda[idx];
    auto with = [&](double lam) {
      double s = 0.0;
      for (std::size_t e : path) {
        double num = (lam_mass[e] - base + lam) * gr.edges()[e].length;
        s += (num <= 0.0 ? 0.0 : std::pow(num / (q * p.edge_measure[e]), inv)) *
             gr.edges()[e].length;
      }
      return s;
    };
    double hi = base > 0.0 ? base : 1.0;
    while (with(hi) < 1.0 && hi < 1e300) hi *= 2.0;
    double lo = 0.0;
    if (with(0.0) >= 1.0) {
      hi = 0.0;  // already covered by the other paths
    } else {
      for (int it = 0; it < 200 && (hi - lo) > 1e-15 * (1.0 + hi); ++it) {
        double mid = 0.5 * (lo + hi);
        (with(mid) < 1.0 ? lo : hi) = mid;
      }
    }
    for (std::size_t e : path) lam_mass[e] += hi - base;
    lambda[idx] = hi;
    refresh(path);
  };

  std::set<std::vector<std::size_t>> seen;
  double shortest = 0.0;
  bool done = false;
  std::size_t stall = 0;
  while (sol.iterations < opt.max_iter) {
    std::vector<double> w(ne);
    for (std::size_t e = 0; e < ne; ++e) w[e] = sol.g[e] * gr.edges()[e].length;
    auto path = detail::cheapest_path(gr, p.E, p.F, w, &shortest);
    if (shortest >= 1.0 - opt.feas_tol) {
      done = true;
      break;
    }
    ++sol.iterations;
    auto key = *path;
    std::sort(key.begin(), key.end());
    std::size_t idx;
    if (seen.insert(key).second) {
      sol.active.push_back(*path);
      lambda.push_back(0.0);
      idx = sol.active.size() - 1;
      stall = 0;
    } else {
      idx = 0;  // re-found an active path: rebalance it directly
      while (sol.active[idx].size() != path->size() ||
             !std::is_permutation(sol.active[idx].begin(), sol.active[idx].end(),
                                  path->begin()))
        ++idx;
      if (++stall > 64) break;  // dual sweeps stopped making progress
    }
    tighten(idx);
    for (std::size_t pass = 0; pass < opt.inner_passes; ++pass) {
      double worst = 0.0, lam_max = 0.0;
      for (double l : lambda) lam_max = std::max(lam_max, l);
      for (std::size_t i = 0; i < sol.active.size(); ++i) {
        double s = glength(sol.active[i]);
        if (lambda[i] <= 0.0) {
          if (s >= 1.0) continue;  // inactive and satisfied
          tighten(i);
          worst = std::max(worst, 1.0 - s);
          continue;
        }
        // KKT wants lambda (s - 1) = 0; track the complementarity residual so
        // constraints drifting slack do not stall the sweep
        worst = std::max(worst, s < 1.0 ? 1.0 - s
                                        : std::min(s - 1.0, lambda[i] * (s - 1.0)));
        double nl = lambda[i] * std::pow(std::max(s, 1e-12), 1.0 - q);
        if (s > 1.0 && nl < 1e-16 * lam_max) nl = 0.0;
        for (std::size_t e : sol.active[i]) lam_mass[e] += nl - lambda[i];
        lambda[i] = nl;
        refresh(sol.active[i]);
      }
      if (worst <= opt.inner_tol) break;
    }
  }
  sol.converged = done;

  double raw = 0.0, lam_sum = 0.0;
  for (std::size_t e = 0; e < ne; ++e)
    raw += p.edge_measure[e] * std::pow(sol.g[e], q);
  for (double l : lambda) lam_sum += l;
  sol.dual_bound = lam_sum - (q - 1.0) * raw;

  // certify feasibility: rescale so the cheapest path has g-length exactly 1
  if (shortest > 0.0 && shortest < 1.0)
    for (auto& x : sol.g) x /= shortest;
  sol.value = 0.0;
  for (std::size_t e = 0; e < ne; ++e)
    sol.value += p.edge_measure[e] * std::pow(sol.g[e], q);
  std::vector<double> w(ne);
  for (std::size_t e = 0; e < ne; ++e) w[e] = sol.g[e] * gr.edges()[e].length;
  detail::cheapest_path(gr, p.E, p.F, w, &sol.shortest_violation);
  return sol;
}

// dist(E,F) / min(diam E, diam F), diameters and distance by exhaustive scan
inline double relative_separation(const WeightedGraph& g,
                                  const std::vector<std::size_t>& E,
                                  const std::vector<std::size_t>& F) {
  if (E.empty() || F.empty())
    throw invalid_input("relative_separation: E and F must be nonempty");
  auto diam = [&](const std::vector<std::size_t>& S) {
    double m = 0.0;
    for (std::size_t a : S)
      for (std::size_t b : S) m = std::max(m, g.distance(a, b));
    return m;
  };
  double de = diam(E), df = diam(F);
  if (de == 0.0 || df == 0.0)
    throw invalid_input(
        "relative_separation: undefined for a degenerate (single-point) set");
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t a : E)
    for (std::size_t b : F) dist = std::min(dist, g.distance(a, b));
  return dist / std::min(de, df);
}

inline double relative_separation(const QuasimetricSpace& s,
                                  const std::vector<std::size_t>& E,
                                  const std::vector<std::size_t>& F) {
  if (E.empty() || F.empty())
    throw invalid_input("relative_separation: E and F must be nonempty");
  auto diam = [&](const std::vector<std::size_t>& S) {
    double m = 0.0;
    for (std::size_t a : S)
      for (std::size_t b : S) m = std::max(m, s.at(a, b));
    return m;
  };
  double de = diam(E), df = diam(F);
  if (de == 0.0 || df == 0.0)
    throw invalid_input(
        "relative_separation: undefined for a degenerate (single-point) set");
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t a : E)
    for (std::size_t b : F) dist = std::min(dist, s.at(a, b));
  return dist / std::min(de, df);
}

struct PairSpec {
  std::string name;
  std::vector<std::size_t> E, F;
};

struct ScanRow {
  std::string pair_id;
  double delta = 0.0;
  double modulus = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
  bool empty_family = false;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  std::vector<std::pair<double, double>> envelope;  // (bucket center, min mod)
};

// (delta, mod_Q) scatter over a pair suite plus the lower envelope per
// delta-bucket -- the empirical stand-in for a Loewner function
inline ScanResult loewner_scan(const WeightedGraph& g,
                               const std::vector<PairSpec>& pairs, double q,
                               const ModulusOptions& opt = {},
                               std::size_t buckets = 12) {
  ScanResult out;
  for (const auto& pr : pairs) {
    ScanRow row;
    row.pair_id = pr.name;
    row.delta = relative_separation(g, pr.E, pr.F);
    auto sol = modulus(ModulusProblem::make(g, pr.E, pr.F, q), opt);
    row.modulus = sol.value;
    row.iterations = sol.iterations;
    row.converged = sol.converged;
    row.empty_family = sol.empty_family;
    out.rows.push_back(std::move(row));
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : out.rows)
    if (std::isfinite(r.delta)) {
      lo = std::min(lo, r.delta);
      hi = std::max(hi, r.delta);
    }
  if (!(lo <= hi)) return out;
  double width = (hi - lo) / static_cast<double>(buckets);
  if (width <= 0.0) width = 1.0;
  for (std::size_t b = 0; b < buckets; ++b) {
    double bl = lo + width * static_cast<double>(b);
    double bh = b + 1 == buckets ? hi : bl + width;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : out.rows)
      if (std::isfinite(r.delta) && r.delta >= bl &&
          (r.delta < bh || (b + 1 == buckets && r.delta <= bh)))
        best = std::min(best, r.modulus);
    if (std::isfinite(best)) out.envelope.emplace_back(bl + 0.5 * width, best);
  }
  return out;
}

struct ConformalReport {
  double base_modulus = 0.0;
  double deformed_modulus = 0.0;
  double discrepancy = 0.0;
  ModulusSolution base;
  ModulusSolution deformed;
};

// Rescale edge lengths by the discrete conformal density
// rho(e) = 1/[(1+d(u,a))(1+d(v,a))] and edge measures by rho(e)^Q, re-solve,
// and report the relative modulus discrepancy.  The continuum identity is
// exact; the discrete gap is the discretization error.
inline ConformalReport conformal_invariance_check(const WeightedGraph& g,
                                                  std::size_t a,
                                                  const std::vector<std::size_t>& E,
                                                  const std::vector<std::size_t>& F,
                                                  double q,
                                                  const ModulusOptions& opt = {}) {
  if (a >= g.size()) throw invalid_input("conformal check: base out of range");
  for (std::size_t v : E)
    if (v == a) throw invalid_input("conformal check: base must avoid E and F");
  for (std::size_t v : F)
    if (v == a) throw invalid_input("conformal check: base must avoid E and F");

  ConformalReport rep;
  rep.base = modulus(ModulusProblem::make(g, E, F, q), opt);
  rep.base_modulus = rep.base.value;

  const auto& da = g.distances_from(a);
  std::vector<WeightedGraph::Edge> edges = g.edges();
  std::vector<double> measure;
  measure.reserve(edges.size());
  for (auto& e : edges) {
    double rho = 1.0 / ((1.0 + da[e.u]) * (1.0 + da[e.v]));
    measure.push_back(e.length * std::pow(rho, q));
    e.length *= rho;
  }
  auto deformed = WeightedGraph::from_indices(g.ids(), edges, {}, g.base());
  rep.deformed =
      modulus(ModulusProblem::make(std::move(deformed), E, F, q, measure), opt);
  rep.deformed_modulus = rep.deformed.value;

  if (rep.base_modulus == 0.0)
    rep.discrepancy =
        rep.deformed_modulus == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  else
    rep.discrepancy =
        std::abs(rep.base_modulus - rep.deformed_modulus) / rep.base_modulus;
  return rep;
}

// concentric square rings around the center of gen::grid(n), odd n;
// vertex (i,j) sits at index i*n+j
inline std::vector<std::size_t> grid_ring(std::size_t n, std::size_t half_width) {
  if (n < 3 || n % 2 == 0) throw invalid_input("grid_ring: need odd n >= 3");
  std::size_t c = (n - 1) / 2;
  if (half_width == 0 || half_width > c)
    throw invalid_input("grid_ring: half width out of range");
  std::vector<std::size_t> ring;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t di = i > c ? i - c : c - i;
      std::size_t dj = j > c ? j - c : c - j;
      if (std::max(di, dj) == half_width) ring.push_back(i * n + j);
    }
  return ring;
}

inline std::vector<PairSpec> concentric_square_pairs(std::size_t n) {
  std::size_t c = (n - 1) / 2;
  std::vector<PairSpec> out;
  for (std::size_t a = 1; a < c; ++a)
    for (std::size_t b = a + 1; b <= c; ++b)
      out.push_back(PairSpec{"ring" + std::to_string(a) + "_" + std::to_string(b),
                             grid_ring(n, a), grid_ring(n, b)});
  return out;
}

}  // namespace qmetric
