#pragma once

// Gromov products, four-point hyperbolicity, and the two boundary
// constructions (Bourdon and Hamenstadt) on finite weighted graphs.
// Boundary points are designated vertices; products at them stand in for
// the limits along rays that define the constructions on unbounded spaces.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qmetric/graph.hpp"
#include "qmetric/space.hpp"
#include "qmetric/transforms.hpp"

namespace qmetric {

inline double gromov_product(const WeightedGraph& g, std::size_t x, std::size_t y,
                             std::size_t w) {
  if (x >= g.size() || y >= g.size() || w >= g.size())
    throw invalid_input("gromov_product: vertex index out of range");
  double dxw = g.distance(w, x), dyw = g.distance(w, y), dxy = g.distance(x, y);
  if (!std::isfinite(dxw) || !std::isfinite(dyw) || !std::isfinite(dxy))
    throw invalid_input("gromov_product: graph is disconnected");
  return 0.5 * (dxw + dyw - dxy);
}

namespace detail {

// (x|y)_w for all vertex pairs; rows reuse the cached single-source trees,
// and the upper triangle is mirrored so the matrix is exactly symmetric
inline std::vector<double> product_matrix(const WeightedGraph& g, std::size_t w) {
  std::size_t n = g.size();
  const auto& dw = g.distances_from(w);
  for (double v : dw)
    if (!std::isfinite(v))
      throw invalid_input("gromov products: graph is disconnected");
  std::vector<double> p(n * n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    const auto& dx = g.distances_from(x);
    p[x * n + x] = dw[x];
    for (std::size_t y = x + 1; y < n; ++y) {
      double v = 0.5 * (dw[x] + dw[y] - dx[y]);
      p[x * n + y] = v;
      p[y * n + x] = v;
    }
  }
  return p;
}

inline double four_point_delta(const std::vector<double>& p, std::size_t n) {
  double delta = 0.0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      double pxy = p[x * n + y];
      for (std::size_t z = 0; z < n; ++z)
        delta = std::max(delta, std::min(p[x * n + z], p[z * n + y]) - pxy);
    }
  return delta;
}

}  // namespace detail

struct DeltaReport {
  double delta = 0.0;          // four-point constant at the fixed base
  std::size_t base = 0;
  double alternate_max = 0.0;  // max over the sampled alternative bases
  std::vector<std::size_t> alternates;
};

// Exhaustive O(n^3) scan at the graph's base point, plus the same scan over a
// small deterministic sample of other bases as a robustness diagnostic.
inline DeltaReport delta_hyperbolicity(const WeightedGraph& g,
                                       std::size_t alternate_samples = 3) {
  std::size_t n = g.size();
  DeltaReport r;
  r.base = g.base();
  r.delta = detail::four_point_delta(detail::product_matrix(g, r.base), n);
  r.alternate_max = r.delta;
  std::size_t want = std::min(alternate_samples, n - 1);
  for (std::size_t k = 0; k < want; ++k) {
    std::size_t w = (k * (n - 1)) / want;  // evenly spaced, skipping the base
    if (w >= r.base) ++w;
    if (std::find(r.alternates.begin(), r.alternates.end(), w) != r.alternates.end())
      continue;
    r.alternates.push_back(w);
    double d = detail::four_point_delta(detail::product_matrix(g, w), n);
    r.alternate_max = std::max(r.alternate_max, d);
  }
  return r;
}

// b(x) = (xi|w)_x - (xi|x)_w: the two-base-point surrogate for the Busemann
// function; 0 at w, decreasing like -t along a geodesic ray toward xi.
inline std::vector<double> busemann(const WeightedGraph& g, std::size_t xi,
                                    std::size_t w) {
  if (xi >= g.size() || w >= g.size())
    throw invalid_input("busemann: vertex index out of range");
  bool listed = false;
  for (const auto& [name, members] : g.boundary_sets())
    if (std::find(members.begin(), members.end(), xi) != members.end()) listed = true;
  if (!listed) throw invalid_input("busemann: xi must belong to a boundary set");
  std::vector<double> b(g.size());
  for (std::size_t x = 0; x < g.size(); ++x)
    b[x] = gromov_product(g, xi, w, x) - gromov_product(g, xi, x, w);
  return b;
}

struct BoundaryQuasimetric {
  std::string flavor;        // "bourdon" or "hamenstadt"
  double epsilon = 0.0;
  double delta = 0.0;        // hyperbolicity constant used for the range check
  bool in_range = true;      // construction parameters inside the proven range
  std::string base;          // base vertex id
  std::string omega;         // removed boundary point (hamenstadt only)
  QuasimetricSpace table;    // the boundary quasimetric
  double k = 1.0;            // its quasimetric constant
  QuasimetricSpace metric;   // chain metrization
  bool sandwich_ok = false;  // rho/2 <= d <= rho held pointwise
};

namespace detail {

inline BoundaryQuasimetric finish_boundary(std::string flavor, double eps,
                                           double delta, bool in_range,
                                           std::string base, std::string omega,
                                           std::vector<std::string> ids,
                                           std::vector<double> table) {
  BoundaryQuasimetric b;
  b.flavor = std::move(flavor);
  b.epsilon = eps;
  b.delta = delta;
  b.in_range = in_range;
  b.base = std::move(base);
  b.omega = std::move(omega);
  b.table = QuasimetricSpace::from_table(std::move(ids), std::move(table));
  b.k = quasimetric_constant(b.table);
  b.metric = chain_metrize(b.table, b.k);  // throws if k <= 2 and sandwich fails
  b.sandwich_ok = true;
  std::size_t m = b.table.size();
  for (std::size_t i = 0; i < m && b.sandwich_ok; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (2.0 * b.metric.at(i, j) < b.table.at(i, j) * (1.0 - 1e-12)) {
        b.sandwich_ok = false;
        break;
      }
  return b;
}

inline std::vector<std::size_t> boundary_for(const WeightedGraph& g,
                                             const std::string& name,
                                             const char* caller) {
  const auto& idx = g.boundary(name);
  if (idx.size() < 2)
    throw invalid_input(std::string(caller) + ": need at least two boundary points");
  return idx;
}

}  // namespace detail

// rho_{w,eps}(xi,zeta) = exp(-eps (xi|zeta)_w) on a designated boundary set.
// The proven range 0 < eps < min{1, 1/(5 delta)} is recorded, not enforced.
inline BoundaryQuasimetric bourdon(const WeightedGraph& g,
                                   const std::string& boundary_set, double eps,
                                   std::optional<double> known_delta = {}) {
  if (!(eps > 0.0)) throw invalid_input("bourdon: eps must be positive");
  auto idx = detail::boundary_for(g, boundary_set, "bourdon");
  double delta =
      known_delta ? *known_delta : delta_hyperbolicity(g, 0).delta;
  double cap = delta > 0.0 ? std::min(1.0, 1.0 / (5.0 * delta)) : 1.0;
  std::size_t w = g.base();
  std::size_t m = idx.size();
  const auto& dw = g.distances_from(w);
  std::vector<double> table(m * m, 0.0);
  std::vector<std::string> ids(m);
  for (std::size_t i = 0; i < m; ++i) {
    ids[i] = g.id(idx[i]);
    const auto& di = g.distances_from(idx[i]);
    for (std::size_t j = i + 1; j < m; ++j) {
      double p = 0.5 * (dw[idx[i]] + dw[idx[j]] - di[idx[j]]);
      if (!std::isfinite(p)) throw invalid_input("bourdon: graph is disconnected");
      double v = std::exp(-eps * p);
      table[i * m + j] = v;
      table[j * m + i] = v;
    }
  }
  return detail::finish_boundary("bourdon", eps, delta, eps < cap, g.id(w), "",
                                 std::move(ids), std::move(table));
}

// Gromov product based at the boundary point omega, in the vertex surrogate
// form (xi|eta)_omega = (xi|eta)_w - (xi|omega)_w - (eta|omega)_w.
inline double hamenstadt_product(const WeightedGraph& g, std::size_t xi,
                                 std::size_t eta, std::size_t omega,
                                 std::size_t w) {
  return gromov_product(g, xi, eta, w) - gromov_product(g, xi, omega, w) -
         gromov_product(g, eta, omega, w);
}

// Same product through Busemann sums: (xi|eta)_omega = (b(xi)+b(eta)-d)/2 with
// b the Busemann surrogate toward omega.  Algebraically identical; kept as an
// independent code path for cross-checking.
inline double hamenstadt_product_busemann(const WeightedGraph& g, std::size_t xi,
                                          std::size_t eta, std::size_t omega,
                                          std::size_t w) {
  double bxi = gromov_product(g, omega, w, xi) - gromov_product(g, omega, xi, w);
  double beta = gromov_product(g, omega, w, eta) - gromov_product(g, omega, eta, w);
  return 0.5 * (bxi + beta - g.distance(xi, eta));
}

// sigma_eps(xi,eta) = exp(-eps (xi|eta)_omega) on the boundary set minus
// omega.  The proven range exp(22 eps delta) <= 2 is recorded, not enforced.
inline BoundaryQuasimetric hamenstadt(const WeightedGraph& g,
                                      const std::string& boundary_set,
                                      const std::string& omega, double eps,
                                      std::optional<double> known_delta = {}) {
  if (!(eps > 0.0)) throw invalid_input("hamenstadt: eps must be positive");
  const auto& all = g.boundary(boundary_set);
  std::size_t om = g.index_of(omega);
  if (std::find(all.begin(), all.end(), om) == all.end())
    throw invalid_input("hamenstadt: omega must belong to the boundary set");
  std::vector<std::size_t> idx;
  for (std::size_t v : all)
    if (v != om) idx.push_back(v);
  if (idx.size() < 2)
    throw invalid_input("hamenstadt: need at least two boundary points besides omega");
  double delta =
      known_delta ? *known_delta : delta_hyperbolicity(g, 0).delta;
  std::size_t w = g.base();
  std::size_t m = idx.size();
  const auto& dw = g.distances_from(w);
  const auto& dom = g.distances_from(om);
  std::vector<double> table(m * m, 0.0);
  std::vector<std::string> ids(m);
  for (std::size_t i = 0; i < m; ++i) {
    ids[i] = g.id(idx[i]);
    const auto& di = g.distances_from(idx[i]);
    double pio = 0.5 * (dw[idx[i]] + dw[om] - di[om]);
    for (std::size_t j = i + 1; j < m; ++j) {
      double pij = 0.5 * (dw[idx[i]] + dw[idx[j]] - di[idx[j]]);
      double pjo = 0.5 * (dw[idx[j]] + dw[om] - dom[idx[j]]);
      if (!std::isfinite(pij) || !std::isfinite(pio) || !std::isfinite(pjo))
        throw invalid_input("hamenstadt: graph is disconnected");
      double v = std::exp(-eps * (pij - pio - pjo));
      table[i * m + j] = v;
      table[j * m + i] = v;
    }
  }
  return detail::finish_boundary("hamenstadt", eps, delta,
                                 22.0 * eps * delta <= std::log(2.0) + 1e-12,
                                 g.id(w), omega, std::move(ids), std::move(table));
}

struct DualityReport {
  BoundaryQuasimetric bourdon_side;
  BoundaryQuasimetric hamenstadt_side;
  MeasuredSpace flattened;       // flatten(Bourdon table + counting mass, omega)
  double identity_max_rel_err;   // Hamenstadt table vs flattened distances
  AhlforsFit bourdon_fit;
  AhlforsFit hamenstadt_fit;
  double tolerance;
  bool exponents_agree;
};

// The two sides of the sphericalization/flattening duality on a boundary:
// Hamenstadt's quasimetric must equal the flattening of Bourdon's at omega,
// and the regularity exponents on the two sides must agree.
inline DualityReport regularity_duality_check(
    const WeightedGraph& g, const std::string& boundary_set,
    const std::string& omega, double eps,
    std::optional<std::vector<double>> radii_bourdon = {},
    std::optional<std::vector<double>> radii_hamenstadt = {},
    double tolerance = 0.15, std::optional<double> known_delta = {}) {
  auto B = bourdon(g, boundary_set, eps, known_delta);
  auto H = hamenstadt(g, boundary_set, omega, eps, known_delta);
  auto msB = with_counting_masses(B.table);
  auto flat = flatten(msB, B.table.index_of(omega));

  double worst = 0.0;
  std::size_t m = H.table.size();
  if (flat.space.size() != m)
    throw error("duality: side sizes disagree");
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      double a = H.table.at(i, j), b = flat.space.at(i, j);
      worst = std::max(worst, std::abs(a - b) / b);
    }

  auto fitB = ahlfors_fit(msB, radii_bourdon ? *radii_bourdon : scan_radii(B.table));
  auto fitH = ahlfors_fit(flat,
                          radii_hamenstadt ? *radii_hamenstadt : scan_radii(flat.space));
  bool agree = std::abs(fitB.exponent - fitH.exponent) <= tolerance;
  return DualityReport{std::move(B),  std::move(H), std::move(flat), worst,
                       fitB,          fitH,         tolerance,       agree};
}

}  // namespace qmetric
