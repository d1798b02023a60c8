#pragma once
// Finite quasimetric measure spaces: dense symmetric distance tables with
// optional point masses, ball queries, and structural constant estimators
// (quasimetric constant, uniform perfectness, doubling, Ahlfors fit).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qmetric {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Raised when a distance table violates the space invariants.
struct invalid_space : error {
  using error::error;
};
// Raised for bad arguments (unknown ids, degenerate grids, bad parameters).
struct invalid_input : error {
  using error::error;
};

// Relative tolerance for equality comparisons of derived distances.
inline constexpr double rel_tol = 1e-9;

inline bool nearly_equal(double a, double b, double tol = rel_tol) {
  double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) <= tol * scale;
}

// Symmetric positive off-diagonal distance table over named points.
// An optional "infinity" tag marks one point as the added point at infinity
// of a sphericalized space; it behaves as an ordinary point in all distance
// queries.
class QuasimetricSpace {
 public:
  QuasimetricSpace() = default;

  static QuasimetricSpace from_table(std::vector<std::string> ids,
                                     std::vector<double> table,
                                     std::optional<std::string> infinity_id = {}) {
    QuasimetricSpace s;
    s.ids_ = std::move(ids);
    s.n_ = s.ids_.size();
    if (s.n_ == 0) throw invalid_space("space needs at least one point");
    if (table.size() != s.n_ * s.n_)
      throw invalid_space("distance table is not square");
    for (std::size_t i = 0; i < s.n_; ++i)
      for (std::size_t j = i + 1; j < s.n_; ++j)
        if (s.ids_[i] == s.ids_[j])
          throw invalid_space("duplicate point id '" + s.ids_[i] + "'");
    for (std::size_t i = 0; i < s.n_; ++i) {
      if (table[i * s.n_ + i] != 0.0)
        throw invalid_space("nonzero diagonal at point '" + s.ids_[i] + "'");
      for (std::size_t j = i + 1; j < s.n_; ++j) {
        double dij = table[i * s.n_ + j];
        double dji = table[j * s.n_ + i];
        if (!nearly_equal(dij, dji))
          throw invalid_space("asymmetric table at pair ('" + s.ids_[i] +
                              "','" + s.ids_[j] + "')");
        if (!(dij > 0.0) || !std::isfinite(dij))
          throw invalid_space("degenerate distance at pair ('" + s.ids_[i] +
                              "','" + s.ids_[j] + "')");
      }
    }
    // Mirror the upper triangle so the stored table is exactly symmetric.
    s.d_.assign(s.n_ * s.n_, 0.0);
    for (std::size_t i = 0; i < s.n_; ++i)
      for (std::size_t j = i + 1; j < s.n_; ++j)
        s.d_[i * s.n_ + j] = s.d_[j * s.n_ + i] = table[i * s.n_ + j];
    if (infinity_id) s.inf_ = s.index_of(*infinity_id);
    return s;
  }

  std::size_t size() const { return n_; }
  double at(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::vector<double>& table() const { return d_; }
  std::optional<std::size_t> infinity_index() const { return inf_; }

  std::size_t index_of(const std::string& id) const {
    for (std::size_t i = 0; i < n_; ++i)
      if (ids_[i] == id) return i;
    throw invalid_input("unknown point id '" + id + "'");
  }

  // Finite surrogate for the diameter: max pairwise distance.
  double diameter() const {
    double m = 0.0;
    for (double v : d_) m = std::max(m, v);
    return m;
  }

  double min_positive_distance() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) m = std::min(m, at(i, j));
    return m;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<double> d_;
  std::size_t n_ = 0;
  std::optional<std::size_t> inf_;
};

// Space plus strictly positive point masses.  The infinity point, when
// tagged, carries mass zero and is skipped by every integral.
struct MeasuredSpace {
  QuasimetricSpace space;
  std::vector<double> mass;

  static MeasuredSpace attach(QuasimetricSpace s, std::vector<double> m) {
    if (m.size() != s.size()) throw invalid_space("mass vector length mismatch");
    for (std::size_t i = 0; i < s.size(); ++i) {
      bool is_inf = s.infinity_index() && *s.infinity_index() == i;
      if (is_inf) {
        if (m[i] != 0.0)
          throw invalid_space("infinity point must carry zero mass");
      } else if (!(m[i] > 0.0) || !std::isfinite(m[i])) {
        throw invalid_space("nonpositive mass at point '" + s.id(i) + "'");
      }
    }
    MeasuredSpace ms;
    ms.space = std::move(s);
    ms.mass = std::move(m);
    return ms;
  }

  std::size_t size() const { return space.size(); }
  double total_mass() const {
    double t = 0.0;
    for (double v : mass) t += v;
    return t;
  }
};

inline MeasuredSpace with_uniform_masses(QuasimetricSpace s) {
  std::size_t n = s.size();
  std::vector<double> m(n, 1.0 / static_cast<double>(n));
  if (auto k = s.infinity_index()) m[*k] = 0.0;
  return MeasuredSpace::attach(std::move(s), std::move(m));
}

inline MeasuredSpace with_counting_masses(QuasimetricSpace s) {
  std::vector<double> m(s.size(), 1.0);
  if (auto k = s.infinity_index()) m[*k] = 0.0;
  return MeasuredSpace::attach(std::move(s), std::move(m));
}

// ---------------------------------------------------------------------------
// Balls

struct Ball {
  std::size_t center;
  double radius;
  bool closed;
  std::vector<std::size_t> members;  // sorted by index, includes the center
};

inline Ball ball(const QuasimetricSpace& s, std::size_t center, double radius,
                 bool closed = false) {
  if (center >= s.size()) throw invalid_input("ball center out of range");
  if (!(radius > 0.0)) throw invalid_input("ball radius must be positive");
  Ball b{center, radius, closed, {}};
  for (std::size_t j = 0; j < s.size(); ++j) {
    double d = s.at(center, j);
    if (closed ? d <= radius : d < radius) b.members.push_back(j);
  }
  return b;
}

inline double ball_measure(const MeasuredSpace& ms, std::size_t center,
                           double radius, bool closed = false) {
  Ball b = ball(ms.space, center, radius, closed);
  double t = 0.0;
  for (std::size_t j : b.members) t += ms.mass[j];
  return t;
}

// One center's distances sorted ascending with cumulative masses; supports
// O(log n) strict-ball counting/measure queries during radius scans.
struct SortedRow {
  std::vector<double> dist;   // sorted, dist[0] == 0 (the center itself)
  std::vector<double> cmass;  // cmass[k] = mass of the k+1 nearest points

  std::size_t count_below(double r) const {
    return static_cast<std::size_t>(
        std::lower_bound(dist.begin(), dist.end(), r) - dist.begin());
  }
  double mass_below(double r) const {
    std::size_t k = count_below(r);
    return k == 0 ? 0.0 : cmass[k - 1];
  }
};

inline SortedRow sorted_row(const MeasuredSpace& ms, std::size_t center) {
  std::size_t n = ms.size();
  std::vector<std::pair<double, double>> dm(n);
  for (std::size_t j = 0; j < n; ++j)
    dm[j] = {ms.space.at(center, j), ms.mass[j]};
  std::sort(dm.begin(), dm.end());
  SortedRow row;
  row.dist.resize(n);
  row.cmass.resize(n);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    row.dist[k] = dm[k].first;
    acc += dm[k].second;
    row.cmass[k] = acc;
  }
  return row;
}

// ---------------------------------------------------------------------------
// Radii grids

// Spec default: log-spaced radii strictly between the smallest and largest
// positive distances.  Endpoints are excluded: at r = d_min the annulus of
// any minimal-gap center is empty, so perfectness would fail vacuously.
inline std::vector<double> default_radii(const QuasimetricSpace& s,
                                         std::size_t count = 24) {
  double lo = s.min_positive_distance();
  double hi = s.diameter();
  if (!(lo < hi)) return {lo};
  std::vector<double> r(count);
  double step = std::log(hi / lo) / static_cast<double>(count + 1);
  for (std::size_t k = 0; k < count; ++k)
    r[k] = lo * std::exp(step * static_cast<double>(k + 1));
  return r;
}

// One value per non-infinity center: an appended point at infinity is
// synthetic and isolated, and would otherwise dominate the gap statistics.
inline std::vector<double> nearest_neighbor_distances(const QuasimetricSpace& s) {
  std::size_t n = s.size();
  auto inf = s.infinity_index();
  std::vector<double> nn;
  nn.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (inf && *inf == i) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) best = std::min(best, s.at(i, j));
    nn.push_back(best);
  }
  return nn;
}

// Coarse grid for fits and annulus scans on sampled data: starts above the
// largest nearest-neighbour gap (every center resolves at every radius) and
// stops at diam/4.
inline std::vector<double> scan_radii(const QuasimetricSpace& s,
                                      std::size_t count = 24) {
  if (s.size() < 3) return default_radii(s, count);
  std::vector<double> nn = nearest_neighbor_distances(s);
  if (nn.empty()) throw invalid_input("scan_radii: no regular points");
  std::vector<double> srt = nn;
  std::sort(srt.begin(), srt.end());
  double max_nn = srt.back();
  double p90 = srt[(srt.size() * 9) / 10 == srt.size() ? srt.size() - 1
                                                       : (srt.size() * 9) / 10];
  double lo = std::max(1.10 * max_nn, 2.0 * p90);
  double hi = s.diameter() / 4.0;
  if (!(lo < hi)) {              // collapsed window; widen toward the diameter
    hi = s.diameter() / 2.0;
    if (!(lo < hi)) hi = 2.0 * lo;  // keep the resolvability floor either way
  }
  std::vector<double> r(count);
  double step = count > 1 ? std::log(hi / lo) / static_cast<double>(count - 1)
                          : 0.0;
  for (std::size_t k = 0; k < count; ++k)
    r[k] = lo * std::exp(step * static_cast<double>(k));
  return r;
}

// ---------------------------------------------------------------------------
// Structural constants

// Smallest K with dist(x,z) <= K * max(dist(x,y), dist(y,z)) over all
// triples, clamped below at 1.  Exact scan, O(n^3).
inline double quasimetric_constant(const QuasimetricSpace& s) {
  std::size_t n = s.size();
  if (n < 2) throw invalid_input("quasimetric constant needs >= 2 points");
  double K = 1.0;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t z = x + 1; z < n; ++z) {
      double dxz = s.at(x, z);
      // min over y of max(d(x,y), d(y,z)); y = x or y = z gives dxz itself
      double best = dxz;
      for (std::size_t y = 0; y < n; ++y) {
        double m = std::max(s.at(x, y), s.at(y, z));
        if (m < best) best = m;
      }
      if (dxz > K * best) K = dxz / best;
    }
  }
  return K;
}

struct PerfectnessResult {
  std::optional<double> tau;  // largest passing value from {k/64 : 1..63}
  // present when no grid value passes: witnessing (center, radius)
  std::optional<std::pair<std::size_t, double>> failure;
};

// Largest grid tau such that around every center, at every tested radius
// with nonempty complement, the annulus B(x,r) \ B(x,tau r) is nonempty.
inline PerfectnessResult uniform_perfectness(const QuasimetricSpace& s,
                                             const std::vector<double>& radii) {
  if (radii.empty()) throw invalid_input("uniform_perfectness: empty radii");
  std::size_t n = s.size();
  double worst = 1.0;  // min over active (x,r) of (largest distance < r)/r
  std::pair<std::size_t, double> worst_at{0, 0.0};
  for (std::size_t x = 0; x < n; ++x) {
    std::vector<double> row(n);
    for (std::size_t j = 0; j < n; ++j) row[j] = s.at(x, j);
    std::sort(row.begin(), row.end());
    for (double r : radii) {
      if (!(r > 0.0)) throw invalid_input("uniform_perfectness: radius <= 0");
      if (row.back() < r) continue;  // complement empty, constraint vacuous
      // largest positive distance strictly below r
      auto it = std::lower_bound(row.begin(), row.end(), r);
      double best = (it == row.begin()) ? 0.0 : *(it - 1);
      double q = best > 0.0 ? best / r : 0.0;
      if (q < worst) {
        worst = q;
        worst_at = {x, r};
      }
    }
  }
  PerfectnessResult res;
  double k = std::floor(worst * 64.0);
  if (k >= 64.0) k = 63.0;
  if (k < 1.0) {
    res.failure = worst_at;
  } else {
    res.tau = k / 64.0;
  }
  return res;
}

struct DoublingResult {
  double constant;      // max mu(B(x,2r)) / mu(B(x,r))
  std::size_t center;
  double radius;
  std::size_t zero_balls;  // (x,r) pairs skipped for mu(B(x,r)) == 0
};

inline DoublingResult measure_doubling_constant(const MeasuredSpace& ms,
                                                const std::vector<double>& radii) {
  if (radii.empty()) throw invalid_input("measure_doubling: empty radii");
  DoublingResult res{0.0, 0, 0.0, 0};
  bool any = false;
  for (std::size_t x = 0; x < ms.size(); ++x) {
    SortedRow row = sorted_row(ms, x);
    for (double r : radii) {
      if (!(r > 0.0)) throw invalid_input("measure_doubling: radius <= 0");
      double small = row.mass_below(r);
      if (small <= 0.0) {
        ++res.zero_balls;
        continue;
      }
      double big = row.mass_below(2.0 * r);
      double ratio = big / small;
      any = true;
      if (ratio > res.constant) {
        res.constant = ratio;
        res.center = x;
        res.radius = r;
      }
    }
  }
  if (!any) throw invalid_input("measure_doubling: all tested balls have zero mass");
  return res;
}

// Exact minimum set cover over <= 16 elements via subset DP.
inline std::size_t exact_min_cover(const std::vector<std::uint32_t>& sets,
                                   std::uint32_t universe) {
  if (universe == 0) return 0;
  std::vector<std::uint8_t> f(universe + 1u, 255);
  f[0] = 0;
  for (std::uint32_t mask = 0; mask <= universe; ++mask) {
    if (f[mask] == 255) continue;
    std::uint32_t missing = universe & ~mask;
    if (missing == 0) continue;
    std::uint32_t low = missing & (~missing + 1u);  // lowest uncovered element
    for (std::uint32_t set : sets) {
      if (!(set & low)) continue;
      std::uint32_t next = (mask | set) & universe;
      if (f[next] > f[mask] + 1) f[next] = static_cast<std::uint8_t>(f[mask] + 1);
    }
  }
  return f[universe];
}

enum class CoverMode { exact, greedy };

struct MetricDoublingResult {
  std::size_t constant;  // max number of half-radius balls needed
  CoverMode mode;        // mode that produced the max
  std::size_t center;
  double radius;
};

// Covers each tested ball by half-radius balls centered at member points.
// Exact (subset DP) for <= 16 members, greedy max-coverage otherwise.
inline MetricDoublingResult metric_doubling_constant(const QuasimetricSpace& s,
                                                     const std::vector<double>& radii) {
  if (radii.empty()) throw invalid_input("metric_doubling: empty radii");
  MetricDoublingResult res{0, CoverMode::exact, 0, 0.0};
  for (std::size_t x = 0; x < s.size(); ++x) {
    for (double r : radii) {
      if (!(r > 0.0)) throw invalid_input("metric_doubling: radius <= 0");
      Ball b = ball(s, x, r);
      const std::vector<std::size_t>& mem = b.members;
      std::size_t m = mem.size();
      std::size_t need;
      CoverMode mode;
      if (m <= 16) {
        std::vector<std::uint32_t> sets(m, 0);
        for (std::size_t p = 0; p < m; ++p)
          for (std::size_t q = 0; q < m; ++q)
            if (s.at(mem[p], mem[q]) < r / 2.0) sets[p] |= (1u << q);
        need = exact_min_cover(sets, m == 32 ? ~0u : (1u << m) - 1u);
        mode = CoverMode::exact;
      } else {
        std::vector<char> covered(m, 0);
        std::size_t left = m;
        need = 0;
        while (left > 0) {
          std::size_t best_p = 0, best_gain = 0;
          for (std::size_t p = 0; p < m; ++p) {
            std::size_t gain = 0;
            for (std::size_t q = 0; q < m; ++q)
              if (!covered[q] && s.at(mem[p], mem[q]) < r / 2.0) ++gain;
            if (gain > best_gain) {
              best_gain = gain;
              best_p = p;
            }
          }
          if (best_gain == 0) break;  // cannot happen: p covers itself
          for (std::size_t q = 0; q < m; ++q)
            if (!covered[q] && s.at(mem[best_p], mem[q]) < r / 2.0) {
              covered[q] = 1;
              --left;
            }
          ++need;
        }
        mode = CoverMode::greedy;
      }
      if (need > res.constant) res = {need, mode, x, r};
    }
  }
  return res;
}

struct AhlforsFit {
  double exponent;   // least-squares slope of log mu(B(x,r)) against log r
  double constant;   // smallest C with r^Q/C <= mu(B(x,r)) <= C r^Q on the grid
  double residual;   // RMS residual of the log-log fit
  std::size_t samples;
  std::size_t skipped;  // balls holding only their center (or no mass)
};

inline AhlforsFit ahlfors_fit(const MeasuredSpace& ms,
                              const std::vector<double>& radii) {
  if (radii.size() < 2) throw invalid_input("ahlfors_fit: need >= 2 radii");
  double diam = ms.space.diameter();
  double rmin = radii[0], rmax = radii[0];
  for (double r : radii) {
    if (!(r > 0.0)) throw invalid_input("ahlfors_fit: radius <= 0");
    if (r >= diam) throw invalid_input("ahlfors_fit: radius >= diameter");
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  if (nearly_equal(rmin, rmax)) throw invalid_input("ahlfors_fit: all radii equal");

  std::vector<std::pair<double, double>> pts;  // (log r, log mu)
  std::size_t skipped = 0;
  double used_lo = 0.0, used_hi = 0.0;
  for (std::size_t x = 0; x < ms.size(); ++x) {
    SortedRow row = sorted_row(ms, x);
    for (double r : radii) {
      // a ball holding only its own center probes the atom, not the measure
      if (row.count_below(r) < 2) {
        ++skipped;
        continue;
      }
      double mu = row.mass_below(r);
      if (mu <= 0.0) {
        ++skipped;
        continue;
      }
      if (pts.empty()) used_lo = used_hi = r;
      used_lo = std::min(used_lo, r);
      used_hi = std::max(used_hi, r);
      pts.emplace_back(std::log(r), std::log(mu));
    }
  }
  if (pts.size() < 2 || nearly_equal(used_lo, used_hi))
    throw invalid_input("ahlfors_fit: too few non-atomic ball samples");
  double sx = 0, sy = 0;
  for (auto& p : pts) {
    sx += p.first;
    sy += p.second;
  }
  double mx = sx / pts.size(), my = sy / pts.size();
  double sxx = 0, sxy = 0;
  for (auto& p : pts) {
    sxx += (p.first - mx) * (p.first - mx);
    sxy += (p.first - mx) * (p.second - my);
  }
  if (sxx <= 0.0) throw invalid_input("ahlfors_fit: degenerate radii spread");
  double Q = sxy / sxx;
  double b = my - Q * mx;
  double ss = 0.0, c = 1.0;
  for (auto& p : pts) {
    double e = p.second - Q * p.first - b;
    ss += e * e;
    // exp|log mu - Q log r| is the two-sided regularity defect at this sample
    double defect = std::exp(std::abs(p.second - Q * p.first));
    c = std::max(c, defect);
  }
  AhlforsFit fit;
  fit.exponent = Q;
  fit.constant = c;
  fit.residual = std::sqrt(ss / static_cast<double>(pts.size()));
  fit.samples = pts.size();
  fit.skipped = skipped;
  return fit;
}

// ---------------------------------------------------------------------------
// Restriction and reindexing

inline QuasimetricSpace restrict_to(const QuasimetricSpace& s,
                                    const std::vector<std::size_t>& keep) {
  std::vector<std::string> ids;
  ids.reserve(keep.size());
  for (std::size_t i : keep) ids.push_back(s.id(i));
  std::vector<double> table(keep.size() * keep.size(), 0.0);
  for (std::size_t a = 0; a < keep.size(); ++a)
    for (std::size_t b = 0; b < keep.size(); ++b)
      table[a * keep.size() + b] = s.at(keep[a], keep[b]);
  std::optional<std::string> inf_id;
  if (auto k = s.infinity_index())
    for (std::size_t i : keep)
      if (i == *k) inf_id = s.id(i);
  return QuasimetricSpace::from_table(std::move(ids), std::move(table), inf_id);
}

inline MeasuredSpace restrict_to(const MeasuredSpace& ms,
                                 const std::vector<std::size_t>& keep) {
  std::vector<double> m;
  m.reserve(keep.size());
  for (std::size_t i : keep) m.push_back(ms.mass[i]);
  return MeasuredSpace::attach(restrict_to(ms.space, keep), std::move(m));
}

struct StructureReport {
  double quasimetric_k;
  double diameter;  // max pairwise distance (finite surrogate)
  PerfectnessResult perfectness;
  DoublingResult doubling;
  std::optional<AhlforsFit> fit;
  std::vector<double> radii;
};

inline StructureReport structure_report(const MeasuredSpace& ms,
                                        std::vector<double> radii) {
  StructureReport rep{quasimetric_constant(ms.space), ms.space.diameter(),
                      uniform_perfectness(ms.space, radii),
                      measure_doubling_constant(ms, radii), std::nullopt,
                      radii};
  try {
    rep.fit = ahlfors_fit(ms, radii);
  } catch (const invalid_input&) {
    rep.fit = std::nullopt;  // degenerate grid; report without a fit
  }
  return rep;
}

}  // namespace qmetric
