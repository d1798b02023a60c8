#pragma once
// Test-side oracles and sample builders.  Everything here is written
// independently of the library code paths it checks: direct loops, closed
// forms, and exhaustive searches only.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qmetric/space.hpp"

namespace oracle {

// --------------------------------------------------------------------------
// Sample builders

inline std::vector<double> uniform_unit_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> xs(n);
  for (auto& x : xs) x = u(rng);
  std::sort(xs.begin(), xs.end());
  return xs;
}

inline qmetric::QuasimetricSpace space_from_1d(const std::vector<double>& xs,
                                               double alpha = 1.0) {
  std::size_t n = xs.size();
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = "p" + std::to_string(i);
  std::vector<double> t(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) t[i * n + j] = std::pow(std::abs(xs[i] - xs[j]), alpha);
  return qmetric::QuasimetricSpace::from_table(std::move(ids), std::move(t));
}

inline qmetric::MeasuredSpace line_sample(std::size_t n, std::uint64_t seed,
                                          double alpha = 1.0) {
  return qmetric::with_uniform_masses(space_from_1d(uniform_unit_points(n, seed), alpha));
}

inline qmetric::MeasuredSpace unit_spaced(std::size_t n) {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = static_cast<double>(i);
  return qmetric::with_counting_masses(space_from_1d(xs));
}

// {2^-k : 0 <= k <= depth} plus the origin, mass 2^-k at 2^-k.
inline qmetric::MeasuredSpace geometric_set(int depth) {
  std::vector<double> xs;
  std::vector<double> masses;
  for (int k = 0; k <= depth; ++k) {
    xs.push_back(std::ldexp(1.0, -k));
    masses.push_back(std::ldexp(1.0, -k));
  }
  xs.push_back(0.0);
  masses.push_back(std::ldexp(1.0, -depth));
  return qmetric::MeasuredSpace::attach(space_from_1d(xs), std::move(masses));
}

inline qmetric::QuasimetricSpace snowflake_of(const qmetric::QuasimetricSpace& s,
                                              double alpha) {
  std::size_t n = s.size();
  std::vector<double> t(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) t[i * n + j] = std::pow(s.at(i, j), alpha);
  return qmetric::QuasimetricSpace::from_table(s.ids(), std::move(t),
                                               std::nullopt);
}

// --------------------------------------------------------------------------
// Independent estimator oracles

// Direct top-down grid scan for the largest passing tau.
inline std::optional<double> tau_oracle(const qmetric::QuasimetricSpace& s,
                                        const std::vector<double>& radii) {
  for (int k = 63; k >= 1; --k) {
    double tau = k / 64.0;
    bool ok = true;
    for (std::size_t x = 0; x < s.size() && ok; ++x) {
      for (double r : radii) {
        bool complement = false, annulus = false;
        for (std::size_t y = 0; y < s.size(); ++y) {
          double d = s.at(x, y);
          if (d >= r) complement = true;
          if (y != x && d >= tau * r && d < r) annulus = true;
        }
        if (complement && !annulus) {
          ok = false;
          break;
        }
      }
    }
    if (ok) return tau;
  }
  return std::nullopt;
}

// Exhaustive minimum set cover (branch and bound on the lowest uncovered
// element), independent of the library's subset DP.
inline std::size_t min_cover_oracle(const std::vector<std::uint32_t>& sets,
                                    std::uint32_t universe) {
  std::size_t best = sets.size() + 1;
  std::function<void(std::uint32_t, std::size_t)> go = [&](std::uint32_t covered,
                                                           std::size_t used) {
    if (used >= best) return;
    std::uint32_t missing = universe & ~covered;
    if (missing == 0) {
      best = used;
      return;
    }
    std::uint32_t low = missing & (~missing + 1u);
    for (std::uint32_t set : sets)
      if (set & low) go(covered | set, used + 1);
  };
  go(0u, 0);
  return best;
}

// Expected mu(B(x,r)) for a uniform [0,1] sample with masses 1/n: the
// clipped interval length.
inline double interval_ball_mass(double x, double r) {
  return std::min(x + r, 1.0) - std::max(x - r, 0.0);
}

}  // namespace oracle
