#pragma once

// Regularity diagnostics for weights on the periodic grid. Every supremum is
// taken over an explicit interval family and is a lower bound for the
// continuum supremum over all arcs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "weightlab/errors.hpp"
#include "weightlab/maximal.hpp"
#include "weightlab/riesz.hpp"
#include "weightlab/sampled.hpp"
#include "weightlab/weight.hpp"

namespace weightlab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Which grid intervals a supremum ranges over.
///   all      every wrapped run of 1..G samples, O(G^2) runs
///   triadic  every wrapped run whose length is G / 3^k (integer division),
///            at all G starting points, O(G log G) runs
struct IntervalFamily {
  enum class Kind { all, triadic };
  Kind kind = Kind::triadic;

  static IntervalFamily all() { return {Kind::all}; }
  static IntervalFamily triadic() { return {Kind::triadic}; }

  std::string name() const { return kind == Kind::all ? "all" : "triadic"; }

  /// Distinct run lengths, longest first.
  std::vector<std::size_t> lengths(std::size_t grid, bool include_full_period = true) const {
    std::vector<std::size_t> out;
    if (kind == Kind::all) {
      for (std::size_t len = grid; len >= 1; --len) out.push_back(len);
    } else {
      for (std::size_t len = grid; len >= 1; len /= 3) {
        if (out.empty() || out.back() != len) out.push_back(len);
        if (len < 3) break;
      }
      if (out.back() != 1) out.push_back(1);
    }
    if (!include_full_period) std::erase(out, grid);
    return out;
  }

  static IntervalFamily parse(const std::string& s) {
    if (s == "all") return all();
    if (s == "triadic") return triadic();
    throw ValidationError("unknown interval family '" + s + "' (expected all|triadic)");
  }
};

/// sup over the family of fn(start, length).
template <class Fn>
double family_sup(const IntervalFamily& family, std::size_t grid, Fn&& fn,
                  bool include_full_period = true) {
  double best = -kInfinity;
  for (std::size_t len : family.lengths(grid, include_full_period)) {
    const std::size_t starts = len == grid ? 1 : grid;
    for (std::size_t s = 0; s < starts; ++s) best = std::max(best, fn(s, len));
  }
  return best;
}

// ---------------------------------------------------------------- doubling

/// For each k = 0..max_scale, the largest ratio between integrals of ω over
/// adjacent triadic intervals of length 2π/3^k (in either order).
inline std::map<unsigned, double> doubling_constant(const WeightBundle& w, unsigned max_scale) {
  const std::size_t g = w.grid_size();
  if (max_scale >= 40 || g % pow3(max_scale) != 0) {
    throw ValidationError("doubling_constant: 3^" + std::to_string(max_scale) +
                          " does not divide grid " + std::to_string(g));
  }
  const IntervalStats stats(w.omega);
  std::map<unsigned, double> out;
  for (unsigned k = 0; k <= max_scale; ++k) {
    const std::size_t len = g / pow3(k);
    const std::size_t count = pow3(k);
    double worst = 1.0;
    for (std::size_t j = 0; j < count; ++j) {
      const double here = stats.sum(j * len, len);
      const double next = stats.sum(((j + 1) % count) * len, len);
      if (here <= 0.0 || next <= 0.0) {
        if (here != next) worst = kInfinity;
        continue;
      }
      worst = std::max({worst, next / here, here / next});
    }
    out[k] = worst;
  }
  return out;
}

// ---------------------------------------------------------------- A_p, A_1

/// sup_I (mean_I ω)(mean_I ω^{-1/(p-1)})^{p-1}; +inf when ω has a zero sample.
inline double ap_characteristic(const WeightBundle& w, double p,
                                const IntervalFamily& family = IntervalFamily::triadic()) {
  if (!(p > 1.0)) throw ValidationError("ap_characteristic: p must be > 1");
  if (w.omega.min() <= 0.0) return kInfinity;
  const double e = -1.0 / (p - 1.0);
  const IntervalStats direct(w.omega);
  const IntervalStats dual(w.omega.map([e](double v) { return std::pow(v, e); }));
  return family_sup(family, w.grid_size(), [&](std::size_t s, std::size_t len) {
    return direct.mean(s, len) * std::pow(dual.mean(s, len), p - 1.0);
  });
}

/// max_i (Mω)(x_i) / ω(x_i); +inf when ω has a zero sample.
inline double a1_characteristic(const WeightBundle& w) {
  if (w.omega.min() <= 0.0) return kInfinity;
  const MaximalResult m = maximal_fast(w.omega);
  double worst = 1.0;
  for (std::size_t i = 0; i < w.grid_size(); ++i) worst = std::max(worst, m.values[i] / w.omega[i]);
  return worst;
}

// ---------------------------------------------------------------- BMO

namespace detail {

// Fenwick tree over value ranks holding counts and sums of the current window.
class RankWindow {
 public:
  explicit RankWindow(std::size_t n) : count_(n + 1, 0), sum_(n + 1, 0.0) {}

  void add(std::size_t rank, double value, int sign) {
    for (std::size_t i = rank + 1; i < count_.size(); i += i & (~i + 1)) {
      count_[i] += sign;
      sum_[i] += sign * value;
    }
  }

  // Count and sum over ranks [0, r).
  std::pair<long, double> below(std::size_t r) const {
    long c = 0;
    double s = 0.0;
    for (std::size_t i = r; i > 0; i -= i & (~i + 1)) {
      c += count_[i];
      s += sum_[i];
    }
    return {c, s};
  }

 private:
  std::vector<long> count_;
  std::vector<double> sum_;
};

}  // namespace detail

/// sup_I mean_I |f - mean_I f|. Full-period runs are excluded.
/// Each run length is scanned as a sliding window over a rank-indexed Fenwick
/// tree, so the mean absolute deviation costs O(log G) per run.
inline double bmo_norm(const SampledFunction& f,
                       const IntervalFamily& family = IntervalFamily::triadic()) {
  const std::size_t g = f.grid_size();
  if (g < 2) return 0.0;
  std::vector<std::size_t> order(g);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
  std::vector<std::size_t> rank(g);
  std::vector<double> sorted(g);
  for (std::size_t r = 0; r < g; ++r) {
    rank[order[r]] = r;
    sorted[r] = f[order[r]];
  }
  const IntervalStats stats(f);
  double best = 0.0;
  for (std::size_t len : family.lengths(g, false)) {
    if (len < 2) continue;  // a single sample has zero oscillation
    detail::RankWindow window(g);
    for (std::size_t i = 0; i < len; ++i) window.add(rank[i], f[i], +1);
    for (std::size_t s = 0; s < g; ++s) {
      const double c = stats.mean(s, len);
      const std::size_t r = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), c) - sorted.begin());
      const auto [count_le, sum_le] = window.below(r);
      // Σ (f - c) = 0 over the run, so the positive and negative parts match.
      const double deviation = 2.0 * (c * static_cast<double>(count_le) - sum_le) / static_cast<double>(len);
      best = std::max(best, deviation);
      window.add(rank[s], f[s], -1);
      const std::size_t incoming = (s + len) % g;
      window.add(rank[incoming], f[incoming], +1);
    }
  }
  return best;
}

// ---------------------------------------------------------------- reverse Hölder

/// For each δ: sup_I (mean_I ω^{1+δ})^{1/(1+δ)} / mean_I ω.
inline std::map<double, double> reverse_holder_probe(const WeightBundle& w, const std::vector<double>& deltas,
                                                     const IntervalFamily& family = IntervalFamily::triadic()) {
  const IntervalStats direct(w.omega);
  std::map<double, double> out;
  for (double delta : deltas) {
    if (!(delta > 0.0)) throw ValidationError("reverse_holder_probe: deltas must be > 0");
    const double q = 1.0 + delta;
    const IntervalStats lifted(w.omega.map([q](double v) { return std::pow(v, q); }));
    out[delta] = family_sup(family, w.grid_size(), [&](std::size_t s, std::size_t len) {
      const double base = direct.mean(s, len);
      if (base <= 0.0) return 1.0;
      return std::pow(lifted.mean(s, len), 1.0 / q) / base;
    });
  }
  return out;
}

// ---------------------------------------------------------------- distribution

struct DistributionFunction {
  std::vector<double> thresholds;
  std::vector<double> masses;  // |{|f| > t}| in dx measure
};

inline DistributionFunction distribution_function(const SampledFunction& f, std::vector<double> thresholds) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw ValidationError("distribution_function: thresholds must be sorted ascending");
  }
  std::vector<double> mags(f.grid_size());
  for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(f[i]);
  std::sort(mags.begin(), mags.end());
  DistributionFunction out;
  out.masses.reserve(thresholds.size());
  auto it = mags.begin();
  for (double t : thresholds) {
    it = std::upper_bound(it, mags.end(), t);
    out.masses.push_back(static_cast<double>(mags.end() - it) * f.step());
  }
  out.thresholds = std::move(thresholds);
  return out;
}

/// Increasing ψ with ψ(0) = 0, as used by the layer-cake identity.
struct Psi {
  enum class Kind { power, t_log_e_plus_t };
  Kind kind = Kind::power;
  double p = 2.0;

  static Psi power(double p) { return {Kind::power, p}; }
  static Psi t_log() { return {Kind::t_log_e_plus_t, 0.0}; }

  double operator()(double t) const {
    return kind == Kind::power ? std::pow(t, p) : t * std::log(std::numbers::e + t);
  }
  double derivative(double t) const {
    if (kind == Kind::power) return p * std::pow(t, p - 1.0);
    return std::log(std::numbers::e + t) + t / (std::numbers::e + t);
  }
  std::string name() const { return kind == Kind::power ? "t^" + std::to_string(p) : "t*log(e+t)"; }
};

struct LayerCake {
  double direct = 0.0;     // ∫ ψ(f) dx on the grid
  double layered = 0.0;    // ∫_0^∞ ψ'(t) m(t) dt by threshold quadrature
  double relative_gap() const {
    const double scale = std::max(std::abs(direct), std::abs(layered));
    return scale == 0.0 ? 0.0 : std::abs(direct - layered) / scale;
  }
};

/// Both sides of ∫ψ(f) = ∫ψ'(t)m(t)dt. The right side uses the composite
/// midpoint rule with `panels` thresholds on [0, max f].
inline LayerCake layer_cake_check(const SampledFunction& f, const Psi& psi, std::size_t panels = 1 << 16) {
  if (f.min() < 0.0) throw ValidationError("layer_cake_check: f must be non-negative");
  LayerCake out;
  out.direct = rect_integral(f.map([&](double v) { return psi(v); }));
  const double top = f.max();
  if (top == 0.0) return out;
  const double h = top / static_cast<double>(panels);
  std::vector<double> mids(panels);
  for (std::size_t k = 0; k < panels; ++k) mids[k] = (static_cast<double>(k) + 0.5) * h;
  const auto m = distribution_function(f, mids);
  CompensatedSum acc;
  for (std::size_t k = 0; k < panels; ++k) acc += psi.derivative(mids[k]) * m.masses[k];
  out.layered = acc.value() * h;
  return out;
}

// ---------------------------------------------------------------- L log L vs L^p

class HypothesisNotMet : public Error {
 public:
  explicit HypothesisNotMet(const std::string& what) : Error(ErrorCode::validation, what) {}
};

struct LlogLBoundReport {
  std::string measure = "dx/2pi";
  double p = 0.0;
  double lp_norm = 0.0;         // ‖f‖_p after normalising ‖f‖_1 = 1
  double llogl = 0.0;           // ∫ f log(e + f) dν
  double empirical_constant = 0.0;  // llogl·(p-1)^2 / log‖f‖_p
  // 2[log(e+T) + ((p-1)log(e+T) + 1)/(p-1)^2] with T = ‖f‖_p^{p/(p-1)}: the
  // bound the layer-cake/Chebychev split produces before constants are folded.
  double explicit_bound = 0.0;
};

/// Normalises f to unit mass under dν = dx/2π, then measures how much of the
/// L log L mass is controlled by log‖f‖_p. Throws HypothesisNotMet when
/// ‖f‖_p < 2 after normalisation.
inline LlogLBoundReport verify_llogl_lp_bound(const SampledFunction& f, double p) {
  if (!(p > 1.0)) throw ValidationError("verify_llogl_lp_bound: p must be > 1");
  if (f.min() < 0.0) throw ValidationError("verify_llogl_lp_bound: f must be non-negative");
  const double mass = sample_mean(f);
  if (!(mass > 0.0)) throw HypothesisNotMet("verify_llogl_lp_bound: f has zero mass");
  const SampledFunction unit = f.map([mass](double v) { return v / mass; });
  LlogLBoundReport r;
  r.p = p;
  r.lp_norm = std::pow(sample_mean(unit.map([p](double v) { return std::pow(v, p); })), 1.0 / p);
  if (r.lp_norm < 2.0) {
    throw HypothesisNotMet("verify_llogl_lp_bound: ||f||_p = " + std::to_string(r.lp_norm) + " < 2");
  }
  r.llogl = sample_mean(unit.map([](double v) { return v * std::log(std::numbers::e + v); }));
  r.empirical_constant = r.llogl * (p - 1.0) * (p - 1.0) / std::log(r.lp_norm);
  const double big_t = std::pow(r.lp_norm, p / (p - 1.0));
  const double l = std::log(std::numbers::e + big_t);
  r.explicit_bound = 2.0 * (l + ((p - 1.0) * l + 1.0) / ((p - 1.0) * (p - 1.0)));
  return r;
}

// ---------------------------------------------------------------- report

struct DiagnosticsOptions {
  unsigned max_scale = 0;  // 0 = every k with 3^k | G
  std::vector<double> p_values{1.5, 2.0, 3.0};
  std::vector<double> delta_values{0.1, 0.25, 0.5};
  std::vector<double> norm_exponents{1.0, 1.25, 1.5, 2.0};
  IntervalFamily family = IntervalFamily::triadic();
};

struct DiagnosticsReport {
  Provenance provenance;
  std::string family;
  std::map<unsigned, double> doubling_by_scale;
  double doubling_bound = 0.0;  // exp(π ε t / (1 - ε)) for the provenance ε, t
  std::map<double, double> ap_char;
  double a1_char = 0.0;
  double bmo_lognorm = 0.0;
  std::map<double, double> rh_probe;
  std::map<double, double> norm_table;
};

inline double doubling_bound(double epsilon, double t) {
  return std::exp(std::numbers::pi * epsilon * t / (1.0 - epsilon));
}

inline DiagnosticsReport run_diagnostics(const WeightBundle& w, const DiagnosticsOptions& options = {}) {
  w.validate();
  DiagnosticsReport r;
  r.provenance = w.provenance;
  r.family = options.family.name();
  const unsigned scales = options.max_scale == 0 ? triadic_valuation(w.grid_size()) : options.max_scale;
  r.doubling_by_scale = doubling_constant(w, scales);
  if (w.provenance.epsilon > 0.0 && w.provenance.epsilon < 1.0) {
    r.doubling_bound = doubling_bound(w.provenance.epsilon, w.t);
  }
  for (double p : options.p_values) r.ap_char[p] = ap_characteristic(w, p, options.family);
  r.a1_char = a1_characteristic(w);
  if (w.omega.min() > 0.0) {
    r.bmo_lognorm = bmo_norm(w.omega.map([](double v) { return std::log(v); }), options.family);
  } else {
    r.bmo_lognorm = kInfinity;
  }
  r.rh_probe = reverse_holder_probe(w, options.delta_values, options.family);
  for (double p : options.norm_exponents) r.norm_table[p] = lp_norm(w.omega, p);
  return r;
}

}  // namespace weightlab
