#pragma once

// Cross-ratio machinery: distortion profiles for maps between spaces,
// the weak quasimobius check, the three-point condition, and the
// doubling-decay certificate.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "qmetric/space.hpp"

namespace qmetric {

// a total pairing between two spaces of equal size
struct SpaceMap {
  QuasimetricSpace source;
  QuasimetricSpace target;
  std::vector<std::size_t> forward;  // source index -> target index

  static SpaceMap build(QuasimetricSpace src, QuasimetricSpace tgt,
                        std::vector<std::size_t> fwd) {
    if (src.size() != tgt.size())
      throw invalid_input("SpaceMap: source and target sizes differ");
    if (fwd.size() != src.size())
      throw invalid_input("SpaceMap: pairing size mismatch");
    std::vector<char> hit(tgt.size(), 0);
    for (std::size_t t : fwd) {
      if (t >= tgt.size()) throw invalid_input("SpaceMap: target index out of range");
      if (hit[t]) throw invalid_input("SpaceMap: pairing is not a bijection");
      hit[t] = 1;
    }
    return SpaceMap{std::move(src), std::move(tgt), std::move(fwd)};
  }

  // index-aligned identity pairing
  static SpaceMap identity(QuasimetricSpace src, QuasimetricSpace tgt) {
    std::vector<std::size_t> fwd(src.size());
    for (std::size_t i = 0; i < fwd.size(); ++i) fwd[i] = i;
    return build(std::move(src), std::move(tgt), std::move(fwd));
  }

  static SpaceMap from_pairs(QuasimetricSpace src, QuasimetricSpace tgt,
                             const std::vector<std::pair<std::string, std::string>>& pairs) {
    if (pairs.size() != src.size())
      throw invalid_input("SpaceMap: need one pair per source point");
    std::vector<std::size_t> fwd(src.size());
    for (const auto& [from, to] : pairs) fwd[src.index_of(from)] = tgt.index_of(to);
    return build(std::move(src), std::move(tgt), std::move(fwd));
  }

  std::size_t size() const { return source.size(); }
};

// rho(a,c)rho(b,d) / (rho(a,b)rho(c,d))
inline double cross_ratio(const QuasimetricSpace& s, std::size_t a, std::size_t b,
                          std::size_t c, std::size_t d) {
  if (a >= s.size() || b >= s.size() || c >= s.size() || d >= s.size())
    throw invalid_input("cross_ratio: index out of range");
  if (a == b || c == d)
    throw invalid_input("cross_ratio: requires a != b and c != d");
  return (s.at(a, c) * s.at(b, d)) / (s.at(a, b) * s.at(c, d));
}

struct TripleCheck {
  double ratio;    // largest over second-largest of the three pair products
  double k_bound;  // K^2 for the space's constant
  bool ok;
};

// every quadruple forms a multiplicative K^2-triple of pair products
inline TripleCheck cross_ratio_triple_check(const QuasimetricSpace& s, std::size_t a,
                                            std::size_t b, std::size_t c, std::size_t d,
                                            std::optional<double> known_k = std::nullopt) {
  if (a == b || a == c || a == d || b == c || b == d || c == d)
    throw invalid_input("cross_ratio_triple_check: points must be distinct");
  std::array<double, 3> m{s.at(a, b) * s.at(c, d), s.at(a, c) * s.at(b, d),
                          s.at(a, d) * s.at(b, c)};
  std::sort(m.begin(), m.end());
  double ratio = m[2] / m[1];
  double k = known_k ? *known_k : quasimetric_constant(s);
  return TripleCheck{ratio, k * k, ratio <= k * k * (1.0 + 1e-9)};
}

struct DistortionProfile {
  // (t, t') sorted by t; envelope[i] = max t' among samples with t <= t_i
  std::vector<std::pair<double, double>> samples;
  std::vector<double> envelope;
  bool exhaustive = false;
  bool evidence = false;       // envelope decays toward 0 at the small-t end
  double evidence_threshold = 1.0;

  // max t' over samples with t <= query; 0 below the sampled range
  double envelope_at(double t) const {
    auto it = std::upper_bound(
        samples.begin(), samples.end(), t,
        [](double v, const std::pair<double, double>& p) { return v < p.first; });
    if (it == samples.begin()) return 0.0;
    return envelope[static_cast<std::size_t>(it - samples.begin()) - 1];
  }
};

namespace detail {

inline DistortionProfile finish_profile(std::vector<std::pair<double, double>> samples,
                                        bool exhaustive, double threshold) {
  std::sort(samples.begin(), samples.end());
  DistortionProfile p;
  p.samples = std::move(samples);
  p.envelope.resize(p.samples.size());
  double run = 0.0;
  for (std::size_t i = 0; i < p.samples.size(); ++i) {
    run = std::max(run, p.samples[i].second);
    p.envelope[i] = run;
  }
  p.exhaustive = exhaustive;
  p.evidence_threshold = threshold;
  if (!p.samples.empty()) {
    double t_decile = p.samples[(p.samples.size() - 1) / 10].first;
    p.evidence = p.envelope_at(t_decile) <= threshold;
  }
  return p;
}

template <typename Visit>
inline void for_distinct_quadruples(std::size_t n, std::uint64_t budget,
                                    std::uint64_t seed, bool& exhaustive, Visit visit) {
  std::uint64_t total = 0;
  if (n >= 4)
    total = std::uint64_t(n) * (n - 1) * (n - 2) * (n - 3);
  exhaustive = total <= budget && n >= 4;
  if (n < 4) return;
  if (exhaustive) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c)
          for (std::size_t d = 0; d < n; ++d) {
            if (a == b || a == c || a == d || b == c || b == d || c == d) continue;
            visit(a, b, c, d);
          }
    return;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::uint64_t done = 0; done < budget;) {
    std::size_t a = pick(rng), b = pick(rng), c = pick(rng), d = pick(rng);
    if (a == b || a == c || a == d || b == c || b == d || c == d) continue;
    visit(a, b, c, d);
    ++done;
  }
}

template <typename Visit>
inline void for_distinct_triples(std::size_t n, std::uint64_t budget,
                                 std::uint64_t seed, bool& exhaustive, Visit visit) {
  std::uint64_t total = 0;
  if (n >= 3) total = std::uint64_t(n) * (n - 1) * (n - 2);
  exhaustive = total <= budget && n >= 3;
  if (n < 3) return;
  if (exhaustive) {
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          if (x == a || x == b || a == b) continue;
          visit(x, a, b);
        }
    return;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::uint64_t done = 0; done < budget;) {
    std::size_t x = pick(rng), a = pick(rng), b = pick(rng);
    if (x == a || x == b || a == b) continue;
    visit(x, a, b);
    ++done;
  }
}

}  // namespace detail

inline constexpr std::uint64_t default_profile_budget = 1000000;

// cross-ratio distortion over quadruples: t = r(a,b,c,d), t' = r(fa,fb,fc,fd)
inline DistortionProfile qm_profile(const SpaceMap& map,
                                    std::uint64_t budget = default_profile_budget,
                                    std::uint64_t seed = 1,
                                    double evidence_threshold = 1.0) {
  if (budget < 1) throw invalid_input("qm_profile: budget must be >= 1");
  std::vector<std::pair<double, double>> samples;
  bool exhaustive = false;
  detail::for_distinct_quadruples(
      map.size(), budget, seed, exhaustive,
      [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
        double t = cross_ratio(map.source, a, b, c, d);
        double tp = cross_ratio(map.target, map.forward[a], map.forward[b],
                                map.forward[c], map.forward[d]);
        samples.emplace_back(t, tp);
      });
  return detail::finish_profile(std::move(samples), exhaustive, evidence_threshold);
}

// distance-ratio distortion over triples: t = rho(x,a)/rho(x,b)
inline DistortionProfile qs_profile(const SpaceMap& map,
                                    std::uint64_t budget = default_profile_budget,
                                    std::uint64_t seed = 1,
                                    double evidence_threshold = 1.0) {
  if (budget < 1) throw invalid_input("qs_profile: budget must be >= 1");
  std::vector<std::pair<double, double>> samples;
  bool exhaustive = false;
  detail::for_distinct_triples(
      map.size(), budget, seed, exhaustive,
      [&](std::size_t x, std::size_t a, std::size_t b) {
        double t = map.source.at(x, a) / map.source.at(x, b);
        double tp = map.target.at(map.forward[x], map.forward[a]) /
                    map.target.at(map.forward[x], map.forward[b]);
        samples.emplace_back(t, tp);
      });
  return detail::finish_profile(std::move(samples), exhaustive, evidence_threshold);
}

struct WeakQmResult {
  bool ok;
  double worst;  // largest image cross-ratio among source cross-ratios <= h
  std::optional<std::array<std::size_t, 4>> witness;
};

// (h,H)-weak quasimobius: source cross-ratio <= h forces image <= H
inline WeakQmResult weak_qm_check(const SpaceMap& map, double h, double H,
                                  std::uint64_t budget = default_profile_budget,
                                  std::uint64_t seed = 1) {
  if (!(h > 0.0)) throw invalid_input("weak_qm_check: h must be positive");
  if (!(H >= 1.0)) throw invalid_input("weak_qm_check: H must be >= 1");
  WeakQmResult res{true, 0.0, std::nullopt};
  bool exhaustive = false;
  detail::for_distinct_quadruples(
      map.size(), budget, seed, exhaustive,
      [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
        double t = cross_ratio(map.source, a, b, c, d);
        if (t > h) return;
        double tp = cross_ratio(map.target, map.forward[a], map.forward[b],
                                map.forward[c], map.forward[d]);
        if (tp > res.worst) {
          res.worst = tp;
          if (tp > H) {
            res.ok = false;
            res.witness = std::array<std::size_t, 4>{a, b, c, d};
          }
        }
      });
  return res;
}

struct ThreePointResult {
  bool ok;
  double best_lambda;  // smallest lambda any triple achieves on both sides
  std::array<std::size_t, 3> witness;
};

// exists a triple separated by diam/lambda in both source and target
inline ThreePointResult three_point_condition(const SpaceMap& map, double lambda) {
  if (map.size() < 3)
    throw invalid_input("three_point_condition: need at least three points");
  double d1 = map.source.diameter(), d2 = map.target.diameter();
  ThreePointResult res{false, std::numeric_limits<double>::infinity(), {0, 0, 0}};
  std::size_t n = map.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        double m1 = std::min({map.source.at(i, j), map.source.at(i, k),
                              map.source.at(j, k)});
        double m2 = std::min({map.target.at(map.forward[i], map.forward[j]),
                              map.target.at(map.forward[i], map.forward[k]),
                              map.target.at(map.forward[j], map.forward[k])});
        double lam = std::max(d1 / m1, d2 / m2);
        if (lam < res.best_lambda) {
          res.best_lambda = lam;
          res.witness = {i, j, k};
        }
      }
  res.ok = res.best_lambda <= lambda * (1.0 + 1e-12);
  return res;
}

struct DecayReport {
  double tau, k, c;          // perfectness, quasimetric constant, doubling constant
  double delta1, delta2;     // mu(B(x, delta1 r)) <= delta2 mu(B(x,r))
  double alpha, c0;          // mu(B(x,r)) <= C0 (r/R)^alpha mu(B(x,R))
  double empirical_max;      // grid max of (mu_r/mu_R)(R/r)^alpha
  bool empirical_degenerate; // no r < R pair available on the grid
};

// closed-form decay certificate from (tau, K, C) plus an empirical grid scan
inline DecayReport decay_exponent(const MeasuredSpace& ms,
                                  const std::vector<double>& radii,
                                  std::optional<double> known_k = std::nullopt) {
  auto perf = uniform_perfectness(ms.space, radii);
  if (!perf.tau)
    throw invalid_input("decay_exponent: space is not uniformly perfect on the grid");
  double tau = *perf.tau;
  double k = known_k ? *known_k : quasimetric_constant(ms.space);
  double c = measure_doubling_constant(ms, radii).constant;
  if (c <= 1.0)
    throw invalid_input("decay_exponent: doubling constant 1 degenerates the certificate");

  DecayReport rep{};
  rep.tau = tau;
  rep.k = k;
  rep.c = c;
  rep.delta1 = tau / (8.0 * k * k);
  rep.delta2 = 1.0 - std::pow(c, -(std::log2(k * k * k / tau) + 4.0));
  rep.alpha = std::log(rep.delta2) / std::log(rep.delta1);
  rep.c0 = 1.0 / rep.delta2;

  std::vector<double> grid = radii;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  rep.empirical_max = 0.0;
  rep.empirical_degenerate = grid.size() < 2;
  auto inf = ms.space.infinity_index();
  for (std::size_t x = 0; x < ms.size(); ++x) {
    if (inf && *inf == x) continue;
    SortedRow row = sorted_row(ms, x);
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (std::size_t j = i + 1; j < grid.size(); ++j) {
        double lo = row.mass_below(grid[i]);
        double hi = row.mass_below(grid[j]);
        if (hi <= 0.0) continue;
        double val = (lo / hi) * std::pow(grid[j] / grid[i], rep.alpha);
        rep.empirical_max = std::max(rep.empirical_max, val);
      }
  }
  return rep;
}

struct BallSandwich {
  bool defined;       // false when B(x,r) is the whole space
  double inner_radius;  // R = min over z outside B(x,r) of rho'(fx, fz)
  double outer_radius;  // envelope(k) * R
  bool inner_ok;      // B'(fx, R) inside f(B(x,r))
  bool outer_ok;      // f(B(x,kr)) inside B'(fx, envelope(k) * R)
};

// Ball-image sandwich under a quasisymmetric profile: B'(fx,R) sits inside
// f(B(x,r)) and f(B(x,kr)) sits inside B'(fx, eta(k) R).
inline BallSandwich qs_ball_sandwich(const SpaceMap& map,
                                     const DistortionProfile& qs, std::size_t x,
                                     double r, double k) {
  if (x >= map.size()) throw invalid_input("qs_ball_sandwich: index out of range");
  if (!(r > 0.0) || !(k >= 1.0))
    throw invalid_input("qs_ball_sandwich: need r > 0 and k >= 1");
  std::size_t n = map.size();
  std::size_t fx = map.forward[x];

  BallSandwich out{};
  double R = std::numeric_limits<double>::infinity();
  for (std::size_t z = 0; z < n; ++z) {
    if (map.source.at(x, z) < r) continue;  // z inside the ball (or z == x)
    R = std::min(R, map.target.at(fx, map.forward[z]));
  }
  if (!std::isfinite(R)) {
    out.defined = false;
    return out;
  }
  out.defined = true;
  out.inner_radius = R;
  double eta_k = qs.envelope_at(k);
  out.outer_radius = eta_k * R;

  out.inner_ok = true;
  out.outer_ok = true;
  for (std::size_t z = 0; z < n; ++z) {
    bool in_inner_target = map.target.at(fx, map.forward[z]) < R;
    bool in_r = map.source.at(x, z) < r;
    if (in_inner_target && !in_r) out.inner_ok = false;
    bool in_kr = map.source.at(x, z) < k * r;
    bool in_outer_target = map.target.at(fx, map.forward[z]) < out.outer_radius;
    if (in_kr && !in_outer_target) out.outer_ok = false;
  }
  return out;
}

struct ThreePointScales {
  double t0;  // solves 4 K0^2 C^(log2(4K^3/tau + 1)) C0 (t0 tau)^alpha = 1/2
  double t1;  // companion scale t1 = t0 * tau / (2K)
};

// proof-side diagnostic: reproduces the implicit scale constants from
// (C, tau, K, alpha, C0) and the target constant K0; no empirical claim
inline ThreePointScales three_point_proof_constants(double c_mu, double tau, double k,
                                                    double alpha, double c0,
                                                    double k0) {
  double coeff = 4.0 * k0 * k0 * std::pow(c_mu, std::log2(4.0 * k * k * k / tau + 1.0)) * c0;
  double t0 = std::pow(0.5 / coeff, 1.0 / alpha) / tau;
  return ThreePointScales{t0, t0 * tau / (2.0 * k)};
}

}  // namespace qmetric
