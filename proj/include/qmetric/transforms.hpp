#pragma once

// Conformal deformations of finite quasimetric measure spaces:
// sphericalization, flattening, inversion, the flatten/sphericalize
// roundtrip, chain metrization, and the measure-power deformation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmetric/space.hpp"

namespace qmetric {

// id of the point at infinity appended by sphericalize
inline constexpr const char* infinity_id = "@infinity";
// id of the boundary point appended by roundtrip before re-sphericalizing
inline constexpr const char* pole_id = "@pole";

enum class MeasureMode {
  ball_normalizer,  // mass(z) / mu(B(base, scale(z)))^2
  regular_density,  // mass(z) / scale(z)^(2Q); valid cross-check under Q-regularity
};

struct TransformOptions {
  MeasureMode mode = MeasureMode::ball_normalizer;
  double regularity_exponent = 1.0;  // Q used by regular_density
};

namespace detail {

inline void require_fresh_id(const QuasimetricSpace& s, const std::string& id) {
  for (const auto& existing : s.ids())
    if (existing == id)
      throw invalid_input("point id '" + id + "' is reserved for appended points");
}

}  // namespace detail

// rho_a(x,y) = rho(x,y) / ((1+rho(x,a))(1+rho(y,a))), plus a point at
// infinity with rho_a(x,inf) = 1/(1+rho(x,a)).  Masses are renormalized by
// the squared measure of B(a, 1+rho(a,z)); infinity carries mass zero.
inline MeasuredSpace sphericalize(const MeasuredSpace& ms, std::size_t a,
                                  const TransformOptions& opts = {}) {
  const auto& s = ms.space;
  if (a >= s.size()) throw invalid_input("sphericalize: base index out of range");
  if (s.infinity_index())
    throw invalid_input("sphericalize: input already carries an infinity point");
  detail::require_fresh_id(s, infinity_id);

  std::size_t n = s.size();
  std::vector<double> factor(n);
  for (std::size_t x = 0; x < n; ++x) factor[x] = 1.0 + s.at(x, a);

  std::vector<double> table((n + 1) * (n + 1), 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y)
      if (x != y) table[x * (n + 1) + y] = s.at(x, y) / (factor[x] * factor[y]);
    table[x * (n + 1) + n] = 1.0 / factor[x];
    table[n * (n + 1) + x] = 1.0 / factor[x];
  }

  std::vector<std::string> ids = s.ids();
  ids.push_back(infinity_id);
  auto out = QuasimetricSpace::from_table(std::move(ids), std::move(table), infinity_id);

  auto row = sorted_row(ms, a);
  std::vector<double> mass(n + 1, 0.0);
  for (std::size_t z = 0; z < n; ++z) {
    double norm = opts.mode == MeasureMode::ball_normalizer
                      ? row.mass_below(factor[z])
                      : std::pow(factor[z], opts.regularity_exponent);
    mass[z] = ms.mass[z] / (norm * norm);
  }
  return MeasuredSpace::attach(std::move(out), std::move(mass));
}

namespace detail {

// shared by flatten and inversion: divide out rho(x,c)rho(y,c), drop c
inline std::pair<QuasimetricSpace, std::vector<std::size_t>> flatten_space(
    const QuasimetricSpace& s, std::size_t c) {
  if (c >= s.size()) throw invalid_input("flatten: base index out of range");
  if (s.size() < 2) throw invalid_input("flatten: need at least two points");

  std::vector<std::size_t> keep;
  keep.reserve(s.size() - 1);
  for (std::size_t x = 0; x < s.size(); ++x)
    if (x != c) keep.push_back(x);

  std::size_t m = keep.size();
  std::vector<double> table(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j)
        table[i * m + j] =
            s.at(keep[i], keep[j]) / (s.at(keep[i], c) * s.at(keep[j], c));

  std::vector<std::string> ids;
  ids.reserve(m);
  for (std::size_t k : keep) ids.push_back(s.id(k));

  std::optional<std::string> inf;
  if (auto tag = s.infinity_index(); tag && *tag != c) inf = s.id(*tag);
  auto out = QuasimetricSpace::from_table(std::move(ids), std::move(table), inf);
  return {std::move(out), std::move(keep)};
}

}  // namespace detail

// rho^c(x,y) = rho(x,y) / (rho(x,c)rho(y,c)) on the points other than c,
// with masses renormalized by mu(B(c, rho(c,z)))^2.
inline MeasuredSpace flatten(const MeasuredSpace& ms, std::size_t c,
                             const TransformOptions& opts = {}) {
  auto [out, keep] = detail::flatten_space(ms.space, c);
  auto row = sorted_row(ms, c);
  std::vector<double> mass(keep.size(), 0.0);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    double scale = ms.space.at(c, keep[i]);
    double norm = opts.mode == MeasureMode::ball_normalizer
                      ? row.mass_below(scale)
                      : std::pow(scale, opts.regularity_exponent);
    mass[i] = ms.mass[keep[i]] / (norm * norm);
  }
  return MeasuredSpace::attach(std::move(out), std::move(mass));
}

// the mass-free special case of flatten
inline QuasimetricSpace inversion(const QuasimetricSpace& s, std::size_t p) {
  return detail::flatten_space(s, p).first;
}

// d(x,y) = min over chains of the summed rho steps; exact on a finite set
// via all-pairs shortest paths.  When the input constant is at most 2 the
// result is sandwiched: rho/2 <= d <= rho.
inline QuasimetricSpace chain_metrize(const QuasimetricSpace& s,
                                      std::optional<double> known_k = std::nullopt) {
  std::size_t n = s.size();
  std::vector<double> d = s.table();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      double dik = d[i * n + k];
      for (std::size_t j = 0; j < n; ++j)
        d[i * n + j] = std::min(d[i * n + j], dik + d[k * n + j]);
    }

  double k_in = known_k ? *known_k : quasimetric_constant(s);
  if (k_in <= 2.0 + 1e-12) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (2.0 * d[i * n + j] < s.at(i, j) * (1.0 - 1e-12))
          throw error("chain_metrize: sandwich rho/2 <= d failed; inconsistent input");
  }
  return QuasimetricSpace::from_table(
      s.ids(), std::move(d),
      s.infinity_index() ? std::optional<std::string>(s.id(*s.infinity_index()))
                         : std::nullopt);
}

// beta(x,y) = mu(B(x, rho(x,y)) U B(y, rho(x,y)))^epsilon, masses kept
inline MeasuredSpace david_semmes(const MeasuredSpace& ms, double epsilon) {
  if (!(epsilon > 0.0)) throw invalid_input("david_semmes: epsilon must be positive");
  const auto& s = ms.space;
  std::size_t n = s.size();
  std::vector<double> beta(n * n, 0.0);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y) {
      double r = s.at(x, y);
      double u = 0.0;
      for (std::size_t z = 0; z < n; ++z)
        if (s.at(x, z) < r || s.at(y, z) < r) u += ms.mass[z];
      double b = std::pow(u, epsilon);
      beta[x * n + y] = b;
      beta[y * n + x] = b;
    }
  auto out = QuasimetricSpace::from_table(
      s.ids(), std::move(beta),
      s.infinity_index() ? std::optional<std::string>(s.id(*s.infinity_index()))
                         : std::nullopt);
  return MeasuredSpace::attach(std::move(out), ms.mass);
}

struct RoundtripReport {
  MeasuredSpace result;      // flattened at c, extended by @pole, sphericalized there
  double max_rel_err;        // against rho(x,y)/((1+rho(x,c))(1+rho(y,c)))
  double bilipschitz_low;    // min rho/rho_roundtrip over pairs (>= 1 in exact arithmetic)
  double bilipschitz_high;   // max rho/rho_roundtrip
  double bilipschitz_bound;  // (1+T)^2, T = input diameter
  bool ok;
};

// Flatten at c, append the boundary point @pole at distance 1/rho(x,c),
// sphericalize at @pole.  On the original points (c lands on @infinity)
// this reproduces rho(x,y)/((1+rho(x,c))(1+rho(y,c))) exactly, so the
// identity back to rho is (1+T)^2-bilipschitz.
inline RoundtripReport roundtrip(const MeasuredSpace& ms, std::size_t c,
                                 double tol = 1e-12) {
  const auto& s = ms.space;
  if (c >= s.size()) throw invalid_input("roundtrip: base index out of range");
  if (s.infinity_index())
    throw invalid_input("roundtrip: input already carries an infinity point");
  detail::require_fresh_id(s, pole_id);

  auto flat = flatten(ms, c);
  std::size_t m = flat.size();
  std::vector<std::size_t> keep;  // original index of flat slot i
  for (std::size_t x = 0; x < s.size(); ++x)
    if (x != c) keep.push_back(x);

  std::vector<double> ext((m + 1) * (m + 1), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) ext[i * (m + 1) + j] = flat.space.at(i, j);
    double to_pole = 1.0 / s.at(keep[i], c);
    ext[i * (m + 1) + m] = to_pole;
    ext[m * (m + 1) + i] = to_pole;
  }
  std::vector<std::string> ids = flat.space.ids();
  ids.push_back(pole_id);
  std::vector<double> mass = flat.mass;
  mass.push_back(1.0);  // placeholder; the roundtrip comparison is metric only
  auto extended = MeasuredSpace::attach(
      QuasimetricSpace::from_table(std::move(ids), std::move(ext)), std::move(mass));

  auto out = sphericalize(extended, m);

  // original index -> index in out; c maps to the appended infinity
  std::vector<std::size_t> where(s.size());
  for (std::size_t i = 0; i < m; ++i) where[keep[i]] = i;
  where[c] = out.size() - 1;

  double max_err = 0.0, lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t x = 0; x < s.size(); ++x)
    for (std::size_t y = x + 1; y < s.size(); ++y) {
      double want = s.at(x, y) / ((1.0 + s.at(x, c)) * (1.0 + s.at(y, c)));
      double got = out.space.at(where[x], where[y]);
      max_err = std::max(max_err, std::abs(got - want) / want);
      double ratio = s.at(x, y) / got;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  double T = s.diameter();
  double bound = (1.0 + T) * (1.0 + T);
  bool ok = max_err <= tol && hi <= bound * (1.0 + 1e-12) && lo >= 1.0 - 1e-12;
  return RoundtripReport{std::move(out), max_err, lo, hi, bound, ok};
}

struct DeformationRecord {
  std::string kind;        // sphericalize | flatten | inversion | chain | david_semmes
  std::string base_point;  // empty when the deformation has no base
  double epsilon = 0.0;    // 0 when unused
  double input_k = 1.0;
  double output_k = 1.0;
};

// computes both constants and asserts the applicable deformation bound
inline DeformationRecord deformation_record(const std::string& kind,
                                            const QuasimetricSpace& in,
                                            const QuasimetricSpace& out,
                                            const std::string& base_point = "",
                                            double epsilon = 0.0) {
  DeformationRecord rec{kind, base_point, epsilon, quasimetric_constant(in),
                        quasimetric_constant(out)};
  double slack = 1.0 + 1e-9;
  if (kind == "sphericalize" &&
      rec.output_k > 4.0 * rec.input_k * rec.input_k * slack)
    throw error("deformation_record: sphericalization bound 4K^2 violated");
  if ((kind == "flatten" || kind == "inversion") &&
      rec.output_k > rec.input_k * rec.input_k * slack)
    throw error("deformation_record: flattening bound K^2 violated");
  if (kind == "chain" && rec.output_k > 2.0 * slack)
    throw error("deformation_record: chain metrization produced a non-metric");
  return rec;
}

}  // namespace qmetric
