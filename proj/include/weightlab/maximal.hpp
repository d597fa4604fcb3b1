#pragma once

// Discrete uncentered Hardy–Littlewood maximal operator on periodic samples.
//
// The interval family is every wrapped run of 1..G consecutive samples. A
// sample is the value of a step density, so the mean over a run is the plain
// sample mean, computed everywhere as (P[b] - P[a]) / (b - a) from one shared
// prefix array. The naive and fast operators therefore compare identical
// floating-point means.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "weightlab/errors.hpp"
#include "weightlab/sampled.hpp"

namespace weightlab {

/// Prefix sums over two copies of the period, accumulated with compensated
/// summation: prefix[j] = Σ_{i<j} values[i mod G] for j = 0..2G.
class IntervalStats {
 public:
  explicit IntervalStats(const SampledFunction& f)
      : grid_(f.grid_size()), samples_(f.data()), prefix_(2 * grid_ + 1) {
    CompensatedSum acc;
    prefix_[0] = 0.0;
    for (std::size_t j = 0; j < 2 * grid_; ++j) {
      acc += f[j % grid_];
      prefix_[j + 1] = acc.value();
    }
  }

  std::size_t grid_size() const { return grid_; }

  /// The G+1 one-period prefix sums.
  std::span<const double> prefix() const { return std::span<const double>(prefix_).first(grid_ + 1); }

  /// Unrolled prefix point j in [0, 2G].
  double point(std::size_t j) const { return prefix_[j]; }

  /// Mean between unrolled prefix points a < b. A single sample is returned
  /// as is, so Mf >= |f| holds without rounding slack.
  double span_mean(std::size_t a, std::size_t b) const {
    if (b - a == 1) return samples_[a % grid_];
    return (prefix_[b] - prefix_[a]) / static_cast<double>(b - a);
  }

  /// Sum of the wrapped run of `length` samples starting at `start`.
  double sum(std::size_t start, std::size_t length) const {
    return prefix_[start + length] - prefix_[start];
  }

  double mean(std::size_t start, std::size_t length) const { return span_mean(start, start + length); }

 private:
  std::size_t grid_;
  std::vector<double> samples_;
  std::vector<double> prefix_;
};

inline IntervalStats prefix_sums(const SampledFunction& f) { return IntervalStats(f); }

/// A wrapped run of samples start, start+1, ..., start+length-1 (mod G).
struct GridInterval {
  std::size_t start = 0;
  std::size_t length = 0;

  std::size_t last(std::size_t grid) const { return (start + length - 1) % grid; }

  bool contains(std::size_t i, std::size_t grid) const {
    return (i + grid - start) % grid < length;
  }

  bool operator==(const GridInterval&) const = default;
};

struct MaximalResult {
  SampledFunction values;
  std::vector<GridInterval> argbest;
};

namespace detail {

struct Candidate {
  double mean = -1.0;
  std::size_t length = 0;
  std::size_t start = 0;
  bool valid = false;
};

// Larger mean wins; ties go to the shorter run, then the smaller start index.
inline bool better(const Candidate& a, const Candidate& b) {
  if (!b.valid) return a.valid;
  if (!a.valid) return false;
  if (a.mean != b.mean) return a.mean > b.mean;
  if (a.length != b.length) return a.length < b.length;
  return a.start < b.start;
}

inline void offer(Candidate& slot, const Candidate& c) {
  if (better(c, slot)) slot = c;
}

inline SampledFunction absolute(const SampledFunction& f) {
  return f.map([](double v) { return std::abs(v); });
}

inline MaximalResult package(std::vector<Candidate> best) {
  std::vector<double> values(best.size());
  std::vector<GridInterval> arg(best.size());
  for (std::size_t i = 0; i < best.size(); ++i) {
    values[i] = best[i].mean;
    arg[i] = {best[i].start, best[i].length};
  }
  return {SampledFunction(std::move(values)), std::move(arg)};
}

}  // namespace detail

inline constexpr std::size_t kMaximalNaiveLimit = std::size_t{1} << 16;

/// Exhaustive O(G^2) enumeration of every wrapped run. Reference oracle.
inline MaximalResult maximal_naive(const SampledFunction& f) {
  const std::size_t g = f.grid_size();
  if (g > kMaximalNaiveLimit) {
    throw ValidationError("maximal_naive: grid " + std::to_string(g) + " exceeds 2^16");
  }
  const IntervalStats stats(detail::absolute(f));
  std::vector<detail::Candidate> best(g);
  std::vector<detail::Candidate> suffix(g + 1);
  for (std::size_t s = 0; s < g; ++s) {
    // suffix[L] = best run starting at s with length >= L
    detail::Candidate cur;
    for (std::size_t len = g; len >= 1; --len) {
      detail::offer(cur, {stats.mean(s, len), len, s, true});
      suffix[len] = cur;
    }
    for (std::size_t d = 0; d < g; ++d) detail::offer(best[(s + d) % g], suffix[d + 1]);
  }
  return detail::package(std::move(best));
}

namespace detail {

// Convex hulls over unrolled prefix points (j, P[j]). Vertices are kept in
// increasing j; collinear vertices are retained so tie-breaking sees them.
class HullScan {
 public:
  explicit HullScan(const IntervalStats& stats) : stats_(stats) {}

  // (b - a) * (P[c] - P[a]) - (P[b] - P[a]) * (c - a) for a < b < c.
  long double cross(std::size_t a, std::size_t b, std::size_t c) const {
    const long double pa = stats_.point(a);
    return static_cast<long double>(b - a) * (stats_.point(c) - pa) -
           (static_cast<long double>(stats_.point(b)) - pa) * static_cast<long double>(c - a);
  }

  // Append j (greater than every vertex) to an upper hull.
  void push_upper(std::vector<std::size_t>& hull, std::size_t j) const {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), j) > 0) hull.pop_back();
    hull.push_back(j);
  }

  // Prepend j (smaller than every vertex) to a lower hull stored in
  // decreasing j order.
  void push_lower_reversed(std::vector<std::size_t>& hull, std::size_t j) const {
    while (hull.size() >= 2 && cross(j, hull.back(), hull[hull.size() - 2]) < 0) hull.pop_back();
    hull.push_back(j);
  }

  // Best right endpoint for left point a over an upper hull (increasing j):
  // maximal mean, then smallest endpoint.
  Candidate best_right(std::size_t a, std::span<const std::size_t> hull) const {
    std::size_t lo = 0, hi = hull.size() - 1;
    while (lo < hi) {
      const std::size_t k = (lo + hi) / 2;
      if (stats_.span_mean(a, hull[k]) >= stats_.span_mean(a, hull[k + 1])) {
        hi = k;
      } else {
        lo = k + 1;
      }
    }
    const std::size_t b = hull[lo];
    return {stats_.span_mean(a, b), b - a, a, true};
  }

  // Best left endpoint for right point b over a lower hull stored in
  // decreasing j order: maximal mean, then largest start (shortest run).
  Candidate best_left(std::size_t b, std::span<const std::size_t> hull_reversed) const {
    // Position k in increasing order is hull_reversed[n-1-k].
    const std::size_t n = hull_reversed.size();
    auto at = [&](std::size_t k) { return hull_reversed[n - 1 - k]; };
    std::size_t lo = 0, hi = n - 1;
    while (lo < hi) {
      const std::size_t k = (lo + hi) / 2;
      if (stats_.span_mean(at(k), b) > stats_.span_mean(at(k + 1), b)) {
        hi = k;
      } else {
        lo = k + 1;
      }
    }
    const std::size_t a = at(lo);
    return {stats_.span_mean(a, b), b - a, a, true};
  }

 private:
  const IntervalStats& stats_;
};

class FastMaximal {
 public:
  explicit FastMaximal(const IntervalStats& stats)
      : stats_(stats), grid_(stats.grid_size()), hulls_(stats), best_(grid_) {}

  std::vector<Candidate> run() {
    linear(0, grid_);
    crossing();
    return std::move(best_);
  }

 private:
  // Runs [a, b) with lo <= a < b <= hi, none crossing the cut at G.
  void linear(std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) {
      offer(best_[lo], {stats_.span_mean(lo, hi), 1, lo, true});
      return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    straddle(lo, mid, hi);
    linear(lo, mid);
    linear(mid, hi);
  }

  // All pairs a in [lo, mid), b in (mid, hi].
  void straddle(std::size_t lo, std::size_t mid, std::size_t hi) {
    if (mid + 1 > hi || lo >= mid) return;
    std::vector<std::size_t> upper;
    for (std::size_t b = mid + 1; b <= hi; ++b) hulls_.push_upper(upper, b);
    Candidate running;
    for (std::size_t a = lo; a < mid; ++a) {
      offer(running, hulls_.best_right(a, upper));
      offer(best_[a], running);  // covers samples a..mid-1
    }
    std::vector<std::size_t> lower;
    for (std::size_t a = mid; a-- > lo;) hulls_.push_lower_reversed(lower, a);
    running = Candidate{};
    for (std::size_t b = hi; b > mid; --b) {
      offer(running, hulls_.best_left(b, lower));
      offer(best_[b - 1], running);  // covers samples mid..b-1
    }
  }

  // Wrapped runs: unrolled a in [1, G), b in (G, a + G].
  void crossing() {
    const std::size_t g = grid_;
    if (g < 2) return;
    std::vector<std::size_t> upper;
    Candidate running;
    for (std::size_t a = 1; a < g; ++a) {
      hulls_.push_upper(upper, a + g);
      offer(running, hulls_.best_right(a, upper));
      offer(best_[a], running);
    }
    std::vector<std::size_t> lower;
    running = Candidate{};
    for (std::size_t b = 2 * g - 1; b > g; --b) {
      hulls_.push_lower_reversed(lower, b - g);
      offer(running, hulls_.best_left(b, lower));
      offer(best_[b - 1 - g], running);
    }
  }

  const IntervalStats& stats_;
  std::size_t grid_;
  HullScan hulls_;
  std::vector<Candidate> best_;
};

}  // namespace detail

/// Same operator as maximal_naive in O(G log^2 G): divide and conquer over the
/// prefix points, answering "best partner across the split" by tangent
/// queries on convex hulls, plus one windowed pass for runs crossing x = 0.
inline MaximalResult maximal_fast(const SampledFunction& f) {
  const IntervalStats stats(detail::absolute(f));
  detail::FastMaximal engine(stats);
  return detail::package(engine.run());
}

}  // namespace weightlab
