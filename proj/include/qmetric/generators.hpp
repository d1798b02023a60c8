#pragma once

// Deterministic example-space and example-graph generators.
// All sampling flows through one mt19937_64 per call; doubles are derived by
// explicit bit manipulation so outputs are identical across standard libraries.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "qmetric/graph.hpp"
#include "qmetric/space.hpp"

namespace qmetric {
namespace gen {

inline double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

namespace detail {

inline std::vector<std::string> numbered_ids(const std::string& prefix, std::size_t n) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

inline std::vector<std::vector<double>> sample_points(std::size_t n, std::size_t dim,
                                                      std::uint64_t seed) {
  if (n < 2) throw invalid_input("generator: need n >= 2");
  if (dim == 0) throw invalid_input("generator: need dim >= 1");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
  for (auto& p : pts)
    for (auto& c : p) c = unit_double(rng);
  return pts;
}

inline double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline MeasuredSpace space_from_points(
    const std::vector<std::vector<double>>& pts,
    const std::function<double(const std::vector<double>&, const std::vector<double>&)>&
        dist) {
  std::size_t n = pts.size();
  std::vector<double> table(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = dist(pts[i], pts[j]);
      table[i * n + j] = d;
      table[j * n + i] = d;
    }
  auto s = QuasimetricSpace::from_table(numbered_ids("p", n), std::move(table));
  return with_uniform_masses(std::move(s));
}

}  // namespace detail

inline MeasuredSpace euclidean_sample(std::size_t n, std::size_t dim,
                                      std::uint64_t seed) {
  return detail::space_from_points(detail::sample_points(n, dim, seed),
                                   detail::euclidean);
}

inline MeasuredSpace snowflake(std::size_t n, double alpha, std::uint64_t seed,
                               std::size_t dim = 1) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw invalid_input("snowflake: exponent must lie in (0,1]");
  return detail::space_from_points(
      detail::sample_points(n, dim, seed),
      [alpha](const auto& a, const auto& b) {
        double d = detail::euclidean(a, b);
        return alpha == 1.0 ? d : std::pow(d, alpha);
      });
}

inline MeasuredSpace nonisotropic(std::size_t n, const std::vector<double>& alphas,
                                  std::uint64_t seed) {
  if (alphas.empty()) throw invalid_input("nonisotropic: need at least one exponent");
  for (double a : alphas)
    if (!(a > 0.0)) throw invalid_input("nonisotropic: exponents must be positive");
  return detail::space_from_points(
      detail::sample_points(n, alphas.size(), seed),
      [&alphas](const auto& a, const auto& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < alphas.size(); ++i)
          s += std::pow(std::abs(a[i] - b[i]), alphas[i]);
        return s;
      });
}

// dyadic ladder {1, 1/2, ..., 2^-depth} plus the origin; mass(p_k) = 2^-k,
// mass(origin) = 2^-depth, so ball masses at the origin are exact powers of two
inline MeasuredSpace geometric_set(std::size_t depth) {
  std::size_t n = depth + 2;
  std::vector<double> xs(n);
  for (std::size_t k = 0; k <= depth; ++k) xs[k] = std::ldexp(1.0, -static_cast<int>(k));
  xs[n - 1] = 0.0;
  std::vector<double> table(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) table[i * n + j] = std::abs(xs[i] - xs[j]);
  auto s = QuasimetricSpace::from_table(detail::numbered_ids("p", n), std::move(table));
  std::vector<double> masses(n);
  for (std::size_t k = 0; k <= depth; ++k) masses[k] = std::ldexp(1.0, -static_cast<int>(k));
  masses[n - 1] = std::ldexp(1.0, -static_cast<int>(depth));
  return MeasuredSpace::attach(std::move(s), std::move(masses));
}

// Poincare-disk sample, uniform in area over |z| <= 0.8
inline MeasuredSpace hyperbolic_patch(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw invalid_input("generator: need n >= 2");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> pts(n, std::vector<double>(2));
  for (auto& p : pts) {
    double r = 0.8 * std::sqrt(unit_double(rng));
    double th = 2.0 * 3.14159265358979323846 * unit_double(rng);
    p[0] = r * std::cos(th);
    p[1] = r * std::sin(th);
  }
  return detail::space_from_points(pts, [](const auto& a, const auto& b) {
    double du = (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]);
    double qa = 1.0 - (a[0] * a[0] + a[1] * a[1]);
    double qb = 1.0 - (b[0] * b[0] + b[1] * b[1]);
    return std::acosh(1.0 + 2.0 * du / (qa * qb));
  });
}

// full b-ary tree in level order, unit edges, root n0 as base,
// deepest level collected in boundary set "leaves"
inline WeightedGraph tree(std::size_t depth, std::size_t branching) {
  if (branching < 1) throw invalid_input("tree: branching must be >= 1");
  std::size_t total = 1, level = 1;
  for (std::size_t l = 0; l < depth; ++l) {
    level *= branching;
    total += level;
  }
  std::vector<WeightedGraph::Edge> edges;
  edges.reserve(total - 1);
  for (std::size_t k = 1; k < total; ++k)
    edges.push_back({(k - 1) / branching, k, 1.0});
  std::vector<std::size_t> leaves;
  for (std::size_t k = total - level; k < total; ++k) leaves.push_back(k);
  return WeightedGraph::from_indices(detail::numbered_ids("n", total), edges,
                                     {{"leaves", std::move(leaves)}}, 0);
}

inline WeightedGraph cycle(std::size_t n) {
  if (n < 3) throw invalid_input("cycle: need n >= 3");
  std::vector<WeightedGraph::Edge> edges;
  edges.reserve(n);
  for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
  return WeightedGraph::from_indices(detail::numbered_ids("c", n), edges, {}, 0);
}

// n-by-n unit grid; vertex (i,j) -> index i*n+j, base at the (0,0) corner
inline WeightedGraph grid(std::size_t n) {
  if (n < 2) throw invalid_input("grid: need n >= 2");
  std::vector<std::string> ids;
  ids.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      ids.push_back("g" + std::to_string(i) + "_" + std::to_string(j));
  std::vector<WeightedGraph::Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (j + 1 < n) edges.push_back({i * n + j, i * n + j + 1, 1.0});
      if (i + 1 < n) edges.push_back({i * n + j, (i + 1) * n + j, 1.0});
    }
  return WeightedGraph::from_indices(std::move(ids), edges, {}, 0);
}

// random quasimetric with an exact prescribed constant: 1-D euclidean sample
// raised to the power log K_target / log K_sample (powers rescale the constant
// exactly since t -> t^b is monotone)
inline MeasuredSpace random_quasimetric(std::size_t n, double k_target,
                                        std::uint64_t seed) {
  if (!(k_target >= 1.0)) throw invalid_input("random_quasimetric: need K >= 1");
  auto base = euclidean_sample(n, 1, seed);
  double ks = quasimetric_constant(base.space);
  if (ks <= 1.0 + 1e-9) return base;  // degenerate sample, nothing to steer
  double beta = std::log(k_target) / std::log(ks);
  std::size_t m = base.space.size();
  std::vector<double> table(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j) table[i * m + j] = std::pow(base.space.at(i, j), beta);
  auto s = QuasimetricSpace::from_table(base.space.ids(), std::move(table));
  return with_uniform_masses(std::move(s));
}

}  // namespace gen
}  // namespace qmetric
