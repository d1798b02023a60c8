#pragma once

// The acceptance experiment suites.  Each experiment returns CheckResults;
// run_suite assembles them into a Report whose JSON form is byte-identical
// across reruns with the same seed.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "qmetric/analysis.hpp"
#include "qmetric/generators.hpp"
#include "qmetric/hyperbolic.hpp"
#include "qmetric/io.hpp"
#include "qmetric/modulus.hpp"
#include "qmetric/transforms.hpp"

namespace qmetric::suites {

namespace detail {

inline void push(std::vector<CheckResult>& out, std::string name, bool passed,
                 double observed, double bound, std::string note = "") {
  out.push_back({std::move(name), passed, observed, bound, std::move(note)});
}

// all minimal simple E-F paths (start in E, interior outside E and F)
inline std::vector<std::vector<std::size_t>> minimal_paths(
    const WeightedGraph& g, const std::vector<std::size_t>& E,
    const std::vector<std::size_t>& F) {
  std::vector<char> in_e(g.size(), 0), in_f(g.size(), 0), used(g.size(), 0);
  for (auto v : E) in_e[v] = 1;
  for (auto v : F) in_f[v] = 1;
  std::vector<std::vector<std::size_t>> found;
  std::vector<std::size_t> cur;
  std::function<void(std::size_t)> walk = [&](std::size_t v) {
    if (in_f[v]) {
      found.push_back(cur);
      return;
    }
    for (auto [w, e] : g.adjacency()[v]) {
      if (used[w] || in_e[w]) continue;
      used[w] = 1;
      cur.push_back(e);
      walk(w);
      cur.pop_back();
      used[w] = 0;
    }
  };
  for (auto s : E) {
    std::fill(used.begin(), used.end(), 0);
    used[s] = 1;
    walk(s);
  }
  return found;
}

// full-enumeration reference solve: exact coordinate ascent by bisection
// over the complete constraint list, then a feasibility rescale
inline double brute_modulus(const WeightedGraph& g, double q,
                            const std::vector<std::vector<std::size_t>>& paths) {
  std::size_t ne = g.edges().size();
  std::vector<double> lam(paths.size(), 0.0), load(ne, 0.0);
  // measure = edge lengths, so the length factors in the density cancel
  auto dens = [&](std::size_t e) {
    double x = load[e] / q;
    return x <= 0.0 ? 0.0 : std::pow(x, 1.0 / (q - 1.0));
  };
  auto plen = [&](const std::vector<std::size_t>& p) {
    double s = 0.0;
    for (auto e : p) s += dens(e) * g.edges()[e].length;
    return s;
  };
  for (int sweep = 0; sweep < 20000; ++sweep) {
    double moved = 0.0;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      double old = lam[i];
      for (auto e : paths[i]) load[e] -= old;
      auto len_at = [&](double l) {
        for (auto e : paths[i]) load[e] += l;
        double s = plen(paths[i]);
        for (auto e : paths[i]) load[e] -= l;
        return s;
      };
      double nl = 0.0;
      if (len_at(0.0) < 1.0) {
        double hi = 1.0;
        while (len_at(hi) < 1.0) hi *= 2.0;
        double lo = 0.0;
        for (int k = 0; k < 120; ++k) {
          double m = 0.5 * (lo + hi);
          (len_at(m) < 1.0 ? lo : hi) = m;
        }
        nl = hi;
      }
      for (auto e : paths[i]) load[e] += nl;
      lam[i] = nl;
      moved = std::max(moved, std::abs(nl - old));
    }
    if (moved < 1e-13) break;
  }
  double shortest = std::numeric_limits<double>::infinity();
  for (const auto& p : paths) shortest = std::min(shortest, plen(p));
  double scale = shortest < 1.0 && shortest > 0.0 ? shortest : 1.0;
  double value = 0.0;
  for (std::size_t e = 0; e < ne; ++e)
    value += g.edges()[e].length * std::pow(dens(e) / scale, q);
  return value;
}

}  // namespace detail

// criterion 1: deformation constant bounds over 50 seeded random spaces
inline std::vector<CheckResult> constant_bounds(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst_s = 0.0, worst_f = 0.0;
  bool ok_s = true, ok_f = true;
  for (int i = 0; i < 50; ++i) {
    double kt = 1.0 + 2.0 * gen::unit_double(rng);
    auto ms = gen::random_quasimetric(64, kt, rng());
    double k = quasimetric_constant(ms.space);
    double ks = quasimetric_constant(sphericalize(ms, 0).space);
    double kf = quasimetric_constant(flatten(ms, 0).space);
    ok_s = ok_s && ks <= 4.0 * k * k;
    ok_f = ok_f && kf <= k * k;
    worst_s = std::max(worst_s, ks / (4.0 * k * k));
    worst_f = std::max(worst_f, kf / (k * k));
  }
  std::vector<CheckResult> out;
  detail::push(out, "c1_sphericalize_bound", ok_s, worst_s, 1.0,
               "max K(sph) / 4K^2 over 50 spaces, n = 64, K in [1,3]");
  detail::push(out, "c1_flatten_bound", ok_f, worst_f, 1.0,
               "max K(flat) / K^2 over the same spaces");
  return out;
}

// criterion 2: flatten-then-sphericalize closed form and bilipschitz bound
inline std::vector<CheckResult> duality_exactness(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst_err = 0.0, worst_bl = 0.0;
  bool ok_err = true, ok_bl = true;
  for (int i = 0; i < 20; ++i) {
    double kt = 1.0 + gen::unit_double(rng);
    auto ms = gen::random_quasimetric(32, kt, rng());
    auto rt = roundtrip(ms, i % ms.size());
    ok_err = ok_err && rt.max_rel_err <= 1e-12;
    worst_err = std::max(worst_err, rt.max_rel_err);
    double rel = rt.bilipschitz_high / rt.bilipschitz_bound;
    ok_bl = ok_bl && rel <= 1.0 + 1e-12 && rt.bilipschitz_low >= 1.0 - 1e-12;
    worst_bl = std::max(worst_bl, rel);
  }
  std::vector<CheckResult> out;
  detail::push(out, "c2_duality_identity", ok_err, worst_err, 1e-12,
               "max relative error over all pairs of 20 spaces, n = 32");
  detail::push(out, "c2_bilipschitz", ok_bl, worst_bl, 1.0,
               "max bilipschitz constant relative to (1+T)^2");
  return out;
}

namespace detail {

// Per-center secant exponent: for each center, the log-mass slope between its
// klo-th and khi-th neighbour distance, aggregated by median.  Unlike a global
// log-log fit this survives the flattened image, whose unbounded tail and
// near-base mass spikes bend any fixed radii grid: each center compares two
// balls of its own, so a center-level constant (half balls at the image edge,
// local density) cancels, and the median ignores the few tail centers.
inline double secant_exponent(const MeasuredSpace& ms, std::size_t klo,
                              std::size_t khi) {
  std::size_t n = ms.space.size();
  if (khi <= klo || n <= khi + 1)
    throw invalid_input("secant_exponent: neighbour ranks out of range");
  std::vector<double> slopes;
  std::vector<std::pair<double, double>> nb;
  for (std::size_t x = 0; x < n; ++x) {
    nb.clear();
    for (std::size_t y = 0; y < n; ++y)
      if (y != x) nb.push_back({ms.space.at(x, y), ms.mass[y]});
    std::sort(nb.begin(), nb.end());
    double rlo = nb[klo].first, rhi = nb[khi].first;
    if (!(rlo > 0.0) || !(rhi > rlo)) continue;
    double mlo = ms.mass[x];
    for (std::size_t j = 0; j <= klo; ++j) mlo += nb[j].second;
    double mhi = mlo;
    for (std::size_t j = klo + 1; j <= khi; ++j) mhi += nb[j].second;
    if (!(mlo > 0.0)) continue;
    slopes.push_back(std::log(mhi / mlo) / std::log(rhi / rlo));
  }
  if (slopes.empty())
    throw invalid_input("secant_exponent: no usable centers");
  std::nth_element(slopes.begin(), slopes.begin() + slopes.size() / 2,
                   slopes.end());
  return slopes[slopes.size() / 2];
}

inline std::vector<CheckResult> stability_checks(const std::string& label,
                                                 const MeasuredSpace& ms,
                                                 double lo, double hi) {
  std::size_t khi = ms.space.size() / 8;
  double fit0 = secant_exponent(ms, 16, khi);
  auto sph = sphericalize(ms, 0);
  double fit_s = secant_exponent(sph, 16, khi);
  auto fl = flatten(ms, 0);
  double fit_f = secant_exponent(fl, 16, khi);
  std::vector<CheckResult> out;
  push(out, "c3_" + label + "_fit", fit0 >= lo && fit0 <= hi, fit0, hi,
       "fitted exponent, expected in [" + std::to_string(lo) + ", " +
           std::to_string(hi) + "]");
  push(out, "c3_" + label + "_sphericalize_stability",
       std::abs(fit_s - fit0) <= 0.15, std::abs(fit_s - fit0), 0.15);
  push(out, "c3_" + label + "_flatten_stability", std::abs(fit_f - fit0) <= 0.15,
       std::abs(fit_f - fit0), 0.15);
  return out;
}

}  // namespace detail

// criterion 3, line half: n = 2048 sample of [0,1]
inline std::vector<CheckResult> exponent_stability_line(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return detail::stability_checks("line", gen::euclidean_sample(2048, 1, rng()),
                                  0.9, 1.1);
}

// criterion 3, snowflake half: alpha = 1/2 on the same sample size
inline std::vector<CheckResult> exponent_stability_snowflake(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  rng();  // distinct stream from the line half under one governing seed
  return detail::stability_checks("snowflake", gen::snowflake(2048, 0.5, rng()),
                                  1.8, 2.2);
}

// criterion 4: David-Semmes deformation dimension and the decay certificate
// bound on the identity's distortion profile
inline std::vector<CheckResult> david_semmes_regularity(std::uint64_t /*seed*/) {
  double eps = 0.5;
  auto ms = space_from_graph(gen::cycle(512));  // uniformly perfect, doubling
  auto ds = david_semmes(ms, eps);
  double fit = ahlfors_fit(ds, scan_radii(ds.space)).exponent;

  auto decay = decay_exponent(ms, scan_radii(ms.space));
  auto prof = qs_profile(SpaceMap::identity(ms.space, ds.space), 300000, 1);
  double env1 = prof.envelope_at(1.0);
  double certificate = std::pow(decay.c0, eps) * std::pow(decay.k, decay.alpha * eps);

  std::vector<CheckResult> out;
  detail::push(out, "c4_david_semmes_fit", std::abs(fit - 1.0 / eps) <= 0.2, fit,
               1.0 / eps, "fitted exponent of (Z, beta), expected 1/eps +- 0.2");
  detail::push(out, "c4_profile_certificate",
               std::isfinite(env1) && env1 <= certificate, env1, certificate,
               "qs_profile envelope(1) against C0^eps K^(alpha eps)");
  return out;
}

// criterion 5: empirical decay below the closed-form C0 on every generator
inline std::vector<CheckResult> decay_certificates(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<std::string, MeasuredSpace>> cases;
  cases.emplace_back("euclidean_sample", gen::euclidean_sample(64, 1, rng()));
  cases.emplace_back("snowflake", gen::snowflake(64, 0.5, rng()));
  cases.emplace_back("nonisotropic", gen::nonisotropic(36, {1.0, 0.5}, rng()));
  cases.emplace_back("geometric_set", gen::geometric_set(10));
  cases.emplace_back("hyperbolic_patch", gen::hyperbolic_patch(48, rng()));
  cases.emplace_back("tree", space_from_graph(gen::tree(4, 2)));
  cases.emplace_back("cycle", space_from_graph(gen::cycle(32)));
  cases.emplace_back("grid", space_from_graph(gen::grid(5)));

  std::vector<CheckResult> out;
  for (const auto& [name, ms] : cases) {
    // the geometric set is not uniformly perfect at small radii (annuli
    // around the point at 1 are empty), so its grid stays near the diameter
    auto radii = name == "geometric_set"
                     ? std::vector<double>{0.55, 0.7, 0.85, 0.95}
                     : scan_radii(ms.space);
    auto rep = decay_exponent(ms, radii);
    bool ok = !rep.empirical_degenerate && rep.empirical_max <= rep.c0;
    detail::push(out, "c5_decay_" + name, ok, rep.empirical_max, rep.c0,
                 "alpha = " + std::to_string(rep.alpha));
  }
  return out;
}

// criterion 6: the flattening identity on binary tree boundaries, depths 6-10
inline std::vector<CheckResult> boundary_identity(std::uint64_t /*seed*/) {
  double eps = std::log(2.0);
  double worst = 0.0;
  bool sandwich_all = true;
  for (std::size_t depth = 6; depth <= 10; ++depth) {
    auto g = gen::tree(depth, 2);
    auto B = bourdon(g, "leaves", eps, 0.0);
    std::string omega = g.id(g.boundary("leaves")[0]);
    auto H = hamenstadt(g, "leaves", omega, eps, 0.0);
    std::size_t m = H.table.size();  // B slot of H slot i is i + 1
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) {
        double want = B.table.at(i + 1, j + 1);
        double got =
            H.table.at(i, j) * B.table.at(i + 1, 0) * B.table.at(j + 1, 0);
        worst = std::max(worst, std::abs(got - want) / want);
      }
    if (B.k <= 2.0) sandwich_all = sandwich_all && B.sandwich_ok;
    if (H.k <= 2.0) sandwich_all = sandwich_all && H.sandwich_ok;
  }
  std::vector<CheckResult> out;
  detail::push(out, "c6_identity", worst <= 1e-12, worst, 1e-12,
               "max relative error over all leaf pairs, depths 6-10");
  detail::push(out, "c6_sandwich", sandwich_all, sandwich_all ? 1.0 : 0.0, 1.0,
               "chain sandwich holds whenever the computed K is <= 2");
  return out;
}

// criterion 7: boundary exponents at eps = ln 2 and half of it, depth 10
inline std::vector<CheckResult> boundary_duality(std::uint64_t /*seed*/) {
  const std::size_t depth = 10;
  auto g = gen::tree(depth, 2);
  std::string omega = g.id(g.boundary("leaves")[0]);
  std::vector<CheckResult> out;
  struct Setting {
    const char* label;
    double eps, want, tol;
  };
  for (auto [label, eps, want, tol] :
       {Setting{"ln2", std::log(2.0), 1.0, 0.1},
        Setting{"half_ln2", 0.5 * std::log(2.0), 2.0, 0.15}}) {
    std::vector<double> rb, rh;
    for (std::size_t k = 1; k + 1 < depth; ++k) {
      rb.push_back(std::exp(-eps * (static_cast<double>(k) + 0.5)));
      rh.push_back(std::exp(eps * (static_cast<double>(k) + 0.5)));
    }
    auto rep = regularity_duality_check(g, "leaves", omega, eps, rb, rh, 0.15, 0.0);
    double bq = rep.bourdon_fit.exponent, hq = rep.hamenstadt_fit.exponent;
    detail::push(out, std::string("c7_bourdon_fit_") + label,
                 std::abs(bq - want) <= tol, bq, want);
    if (want == 1.0)
      detail::push(out, std::string("c7_flattened_agreement_") + label,
                   std::abs(hq - bq) <= 0.15, std::abs(hq - bq), 0.15);
    else
      detail::push(out, std::string("c7_hamenstadt_fit_") + label,
                   std::abs(hq - want) <= tol, hq, want);
    detail::push(out, std::string("c7_identity_") + label,
                 rep.identity_max_rel_err <= 1e-12, rep.identity_max_rel_err,
                 1e-12);
  }
  return out;
}

// criterion 8: closed-form modulus oracles and brute-force equality
inline std::vector<CheckResult> modulus_oracles(std::uint64_t /*seed*/) {
  std::vector<CheckResult> out;

  std::vector<std::string> pids{"p0", "p1", "p2", "p3", "p4"};
  std::vector<WeightedGraph::Edge> pes;
  for (std::size_t i = 0; i + 1 < 5; ++i) pes.push_back({i, i + 1, 1.0});
  auto path4 = WeightedGraph::from_indices(pids, pes);
  double single = modulus(ModulusProblem::make(path4, {0}, {4}, 2.0)).value;
  detail::push(out, "c8_single_path", std::abs(single - 0.25) <= 1e-6, single,
               0.25, "k = 4 unit edges, Q = 2");

  std::vector<std::string> ids2{"s", "t"};
  std::vector<WeightedGraph::Edge> es2;
  for (std::size_t m = 0; m < 3; ++m) {
    std::size_t base = ids2.size();
    for (std::size_t j = 0; j < 3; ++j)
      ids2.push_back("m" + std::to_string(m) + "_" + std::to_string(j));
    es2.push_back({0, base, 1.0});
    es2.push_back({base, base + 1, 1.0});
    es2.push_back({base + 1, base + 2, 1.0});
    es2.push_back({base + 2, 1, 1.0});
  }
  auto par = WeightedGraph::from_indices(ids2, es2);
  double triple = modulus(ModulusProblem::make(par, {0}, {1}, 2.0)).value;
  detail::push(out, "c8_parallel", std::abs(triple - 0.75) <= 1e-6, triple, 0.75,
               "3 disjoint 4-edge paths, Q = 2");

  struct Instance {
    WeightedGraph g;
    std::vector<std::size_t> E, F;
  };
  std::vector<Instance> small;
  small.push_back({WeightedGraph::from_indices(
                       {"s", "a", "b", "t"},
                       {{0, 1, 1.0}, {1, 3, 1.0}, {0, 2, 1.0}, {2, 3, 1.0}, {1, 2, 1.0}}),
                   {0},
                   {3}});
  small.push_back({WeightedGraph::from_indices(
                       {"s", "t", "a", "b"},
                       {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}, {1, 2, 1.0}, {1, 3, 1.0}, {2, 3, 1.0}}),
                   {0},
                   {1}});
  small.push_back({gen::cycle(6), {0}, {3}});
  small.push_back({WeightedGraph::from_indices(
                       {"r0c0", "r0c1", "r0c2", "r1c0", "r1c1", "r1c2"},
                       {{0, 1, 1.0},
                        {1, 2, 1.0},
                        {3, 4, 1.0},
                        {4, 5, 1.0},
                        {0, 3, 1.0},
                        {1, 4, 1.0},
                        {2, 5, 1.0}}),
                   {0, 3},
                   {2, 5}});
  small.push_back({WeightedGraph::from_indices(
                       {"s", "m", "t"}, {{0, 1, 1.0}, {1, 2, 1.0}, {1, 2, 1.0}}),
                   {0},
                   {2}});

  double worst = 0.0;
  bool families_small = true;
  for (const auto& inst : small) {
    auto paths = detail::minimal_paths(inst.g, inst.E, inst.F);
    families_small = families_small && paths.size() <= 8;
    for (double q : {2.0, 2.5}) {
      double lib = modulus(ModulusProblem::make(inst.g, inst.E, inst.F, q)).value;
      double brute = detail::brute_modulus(inst.g, q, paths);
      worst = std::max(worst, std::abs(lib - brute) / brute);
    }
  }
  detail::push(out, "c8_brute_equality", families_small && worst <= 1e-6, worst,
               1e-6, "constraint generation vs full enumeration, Q in {2, 2.5}");
  return out;
}

// criterion 9: conformal reweighting discrepancy on grid annuli
inline std::vector<CheckResult> conformal_experiment(std::uint64_t /*seed*/) {
  std::vector<CheckResult> out;
  auto nine = conformal_invariance_check(gen::grid(9), 0, grid_ring(9, 1),
                                         grid_ring(9, 2), 2.0);
  detail::push(out, "c9_grid9", nine.discrepancy <= 0.05, nine.discrepancy, 0.05,
               "corner-base reweighting, rings 1 and 2");
  auto seventeen = conformal_invariance_check(gen::grid(17), 0, grid_ring(17, 2),
                                              grid_ring(17, 4), 2.0);
  detail::push(out, "c9_grid17", seventeen.discrepancy <= 0.025,
               seventeen.discrepancy, 0.025,
               "same annulus at doubled resolution, tighter budget");
  return out;
}

inline Report run_suite(const std::string& name, std::uint64_t seed) {
  Report rep;
  rep.command = "run-suite " + name;
  rep.seed = seed;
  auto tag = [&](const std::string& input, const std::string& params) {
    rep.input_hashes.emplace_back(
        input, fnv1a_hex(params + ";seed=" + std::to_string(seed)));
  };
  auto add = [&](std::vector<CheckResult> v) {
    for (auto& c : v) rep.checks.push_back(std::move(c));
  };

  if (name == "preservation") {
    tag("random_quasimetric", "n=64;count=50;K=[1,3]");
    tag("line", "euclidean_sample;n=2048;dim=1");
    tag("snowflake", "snowflake;n=2048;alpha=0.5");
    tag("cycle", "cycle;n=512");
    add(constant_bounds(seed));
    add(exponent_stability_line(seed));
    add(exponent_stability_snowflake(seed));
    add(david_semmes_regularity(seed));
    add(decay_certificates(seed));
    auto ms = gen::geometric_set(10);
    rep.structures.emplace_back("geometric_set_10",
                                structure_report(ms, scan_radii(ms.space)));
    auto sph = sphericalize(ms, 0);
    rep.deformations.push_back(
        deformation_record("sphericalize", ms.space, sph.space, ms.space.id(0)));
    auto fl = flatten(ms, 0);
    rep.deformations.push_back(
        deformation_record("flatten", ms.space, fl.space, ms.space.id(0)));
  } else if (name == "duality") {
    tag("random_quasimetric", "n=32;count=20;K=[1,2]");
    add(duality_exactness(seed));
    auto ms = gen::random_quasimetric(24, 1.5, seed);
    rep.structures.emplace_back("random_quasimetric_24",
                                structure_report(ms, scan_radii(ms.space)));
    auto rt = roundtrip(ms, 0);
    rep.deformations.push_back(deformation_record(
        "flatten", ms.space, flatten(ms, 0).space, ms.space.id(0)));
    rep.deformations.push_back(deformation_record(
        "sphericalize", ms.space, rt.result.space, ms.space.id(0)));
  } else if (name == "boundary") {
    tag("tree", "tree;depth=6..10;branching=2");
    add(boundary_identity(seed));
    add(boundary_duality(seed));
    auto B = bourdon(gen::tree(6, 2), "leaves", std::log(2.0), 0.0);
    auto bs = with_counting_masses(B.table);
    rep.structures.emplace_back("bourdon_tree6",
                                structure_report(bs, scan_radii(bs.space)));
  } else if (name == "modulus") {
    tag("grid", "grid;n=9;n=17");
    add(modulus_oracles(seed));
    add(conformal_experiment(seed));
    auto ms = space_from_graph(gen::grid(9));
    rep.structures.emplace_back("grid9",
                                structure_report(ms, scan_radii(ms.space)));
  } else {
    throw invalid_input("unknown suite '" + name + "'");
  }
  return rep;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"preservation", "duality",
                                              "boundary", "modulus"};
  return names;
}

}  // namespace qmetric::suites
