#pragma once

// Boundary data of log Φ' = u + iv with u = log ω: conjugate functions, Poisson
// extensions, the boundary curve γ' = ω e^{ib}, chord-arc and Bloch probes.
//
// Disk quantities use the sampled Poisson kernel normalised to unit mass on
// the grid, so every extension is a genuine weighted average of the samples.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "weightlab/diagnostics.hpp"
#include "weightlab/errors.hpp"
#include "weightlab/sampled.hpp"
#include "weightlab/weight.hpp"

namespace weightlab {

using Complex = std::complex<double>;

namespace detail {

inline void require_even(std::size_t g, const char* who) {
  if (g < 2 || g % 2 != 0) throw ValidationError(std::string(who) + ": grid size must be even");
}

// Half spectrum X_k = Σ_j f_j e^{-2πijk/G}, k = 0..G/2.
inline std::vector<Complex> forward_real(std::span<const double> f) {
  const int n = static_cast<int>(f.size());
  std::vector<double> in(f.begin(), f.end());
  std::vector<Complex> out(f.size() / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  return out;
}

// Inverse of forward_real including the 1/G factor.
inline std::vector<double> inverse_real(std::vector<Complex> half, std::size_t g) {
  std::vector<double> out(g);
  fftw_plan plan = fftw_plan_dft_c2r_1d(static_cast<int>(g), reinterpret_cast<fftw_complex*>(half.data()),
                                        out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  for (double& v : out) v /= static_cast<double>(g);
  return out;
}

// y_j = Σ_m a_m e^{+2πijm/n}.
inline std::vector<Complex> backward_complex(std::vector<Complex> a) {
  std::vector<Complex> out(a.size());
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(a.size()), reinterpret_cast<fftw_complex*>(a.data()),
                                    reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  return out;
}

}  // namespace detail

/// c_k = (1/G) Σ_j f_j e^{-ikx_j} for k = -G/2..G/2-1.
struct FourierSeries {
  std::size_t grid = 0;
  std::vector<Complex> coefficients;  // index k + G/2

  Complex at(long k) const { return coefficients.at(static_cast<std::size_t>(k + static_cast<long>(grid / 2))); }
  long min_k() const { return -static_cast<long>(grid / 2); }
  long max_k() const { return static_cast<long>(grid / 2) - 1; }
};

inline FourierSeries fourier_series(const SampledFunction& f) {
  const std::size_t g = f.grid_size();
  detail::require_even(g, "fourier_series");
  const auto half = detail::forward_real(f.values());
  FourierSeries s;
  s.grid = g;
  s.coefficients.resize(g);
  const long h = static_cast<long>(g / 2);
  for (long k = -h; k < h; ++k) {
    const Complex c = k >= 0 ? half[k] : std::conj(half[-k]);
    s.coefficients[static_cast<std::size_t>(k + h)] = c / static_cast<double>(g);
  }
  return s;
}

/// Boundary harmonic conjugate: c_k ↦ -i·sign(k)·c_k, with the mean and the
/// Nyquist mode sent to zero.
inline SampledFunction conjugate_function(const SampledFunction& f) {
  const std::size_t g = f.grid_size();
  detail::require_even(g, "conjugate_function");
  auto half = detail::forward_real(f.values());
  half[0] = 0.0;
  half[g / 2] = 0.0;
  for (std::size_t k = 1; k < g / 2; ++k) half[k] *= Complex(0.0, -1.0);
  return SampledFunction(detail::inverse_real(std::move(half), g));
}

inline double poisson_kernel(double r, double theta) {
  return (1.0 - r * r) / (1.0 - 2.0 * r * std::cos(theta) + r * r);
}

/// Σ_i P_r(φ - x_i) f_i / Σ_i P_r(φ - x_i).
inline double poisson_extension(const SampledFunction& f, double r, double phi) {
  if (!(r >= 0.0 && r < 1.0)) throw ValidationError("poisson_extension: r must lie in [0,1)");
  CompensatedSum num, den;
  for (std::size_t i = 0; i < f.grid_size(); ++i) {
    const double k = poisson_kernel(r, phi - f.x(i));
    num += k * f[i];
    den += k;
  }
  return num.value() / den.value();
}

/// poisson_extension at every grid angle, via the exact transform of the
/// sampled kernel: Σ_m r^{|k+mG|} = (r^k + r^{G-k}) / (1 - r^G), k = 0..G-1.
inline SampledFunction poisson_smooth(const SampledFunction& f, double r) {
  if (!(r >= 0.0 && r < 1.0)) throw ValidationError("poisson_smooth: r must lie in [0,1)");
  const std::size_t g = f.grid_size();
  detail::require_even(g, "poisson_smooth");
  auto half = detail::forward_real(f.values());
  const double rg = std::pow(r, static_cast<double>(g));
  auto transform = [&](std::size_t k) {
    return (std::pow(r, static_cast<double>(k)) + std::pow(r, static_cast<double>(g - k))) / (1.0 - rg);
  };
  const double mass = transform(0);
  for (std::size_t k = 0; k <= g / 2; ++k) half[k] *= transform(k) / mass;
  return SampledFunction(detail::inverse_real(std::move(half), g));
}

// ---------------------------------------------------------------- Jensen / H^1

struct JensenH1Probe {
  std::vector<double> radii;
  std::vector<double> min_gap;     // min over angles of (P_r*ω - exp(P_r*log ω)) / P_r*ω
  std::vector<double> h1_means;    // ∫ |Φ'(re^{iφ})| dφ = ∫ exp(P_r*log ω) dφ
  double l1_norm = 0.0;            // ∫ ω dx
  bool jensen_holds = true;        // every gap ≥ -1e-12 (relative)
  bool means_nondecreasing = true;
  bool means_bounded = true;       // every mean ≤ ∫ω + 1e-8
};

inline JensenH1Probe jensen_h1_probe(const WeightBundle& w, const std::vector<double>& radii) {
  if (w.omega.min() <= 0.0) throw ValidationError("jensen_h1_probe: weight must be positive");
  if (!std::is_sorted(radii.begin(), radii.end())) throw ValidationError("jensen_h1_probe: radii must be ascending");
  const SampledFunction log_w = w.omega.map([](double v) { return std::log(v); });
  JensenH1Probe out;
  out.radii = radii;
  out.l1_norm = rect_integral(w.omega);
  for (double r : radii) {
    const auto u = poisson_smooth(log_w, r);
    const auto a = poisson_smooth(w.omega, r);
    double gap = kInfinity;
    CompensatedSum mean;
    for (std::size_t i = 0; i < u.grid_size(); ++i) {
      const double e = std::exp(u[i]);
      gap = std::min(gap, (a[i] - e) / a[i]);
      mean += e;
    }
    out.min_gap.push_back(gap);
    out.h1_means.push_back(mean.value() * w.omega.step());
    if (gap < -1e-12) out.jensen_holds = false;
    if (out.h1_means.back() > out.l1_norm + 1e-8) out.means_bounded = false;
    if (out.h1_means.size() > 1 && out.h1_means.back() < out.h1_means[out.h1_means.size() - 2]) {
      out.means_nondecreasing = false;
    }
  }
  return out;
}

// ---------------------------------------------------------------- curves

enum class TangentConvention {
  rotated,  // γ'(x) = i e^{ix} ω e^{ib}: boundary values of z ↦ Φ(z), ω ≡ 1 gives the unit circle
  raw,      // γ'(x) = ω e^{ib}: ω ≡ 1 gives a straight segment
};

inline TangentConvention parse_convention(const std::string& s) {
  if (s == "rotated") return TangentConvention::rotated;
  if (s == "raw") return TangentConvention::raw;
  throw ValidationError("unknown tangent convention '" + s + "' (expected rotated|raw)");
}

struct CurveTrace {
  std::vector<Complex> points;            // γ(x_0) .. γ(x_G)
  std::vector<double> cumulative_length;  // s(x_0) .. s(x_G)
  bool closed = true;                     // the curve is traced as a closed loop
  double closure_defect = 0.0;            // |γ(2π) - γ(0)|

  std::size_t size() const { return points.empty() ? 0 : points.size() - 1; }
  double length() const { return cumulative_length.back(); }
};

/// γ by left-endpoint integration of the tangent; s(2π) equals ∫ω dx as
/// computed by rect_integral, bit for bit.
inline CurveTrace trace_curve(const WeightBundle& w, TangentConvention convention = TangentConvention::rotated) {
  w.validate();
  const std::size_t g = w.grid_size();
  const SampledFunction b = conjugate_function(w.omega.map([](double v) { return std::log(v); }));
  const double h = w.omega.step();
  CurveTrace c;
  c.closed = convention == TangentConvention::rotated;
  c.points.resize(g + 1);
  c.cumulative_length.resize(g + 1);
  c.points[0] = convention == TangentConvention::rotated ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
  c.cumulative_length[0] = 0.0;
  CompensatedSum re, im, len;
  for (std::size_t i = 0; i < g; ++i) {
    Complex tangent = w.omega[i] * std::polar(1.0, b[i]);
    if (convention == TangentConvention::rotated) tangent *= Complex(0.0, 1.0) * std::polar(1.0, w.omega.x(i));
    re += tangent.real();
    im += tangent.imag();
    len += w.omega[i];
    c.points[i + 1] = c.points[0] + Complex(re.value() * h, im.value() * h);
    c.cumulative_length[i + 1] = len.value() * h;
  }
  c.closure_defect = std::abs(c.points[g] - c.points[0]);
  return c;
}

namespace detail {

struct ChordArc {
  struct Pair {
    double ratio;
    std::size_t i, j;
  };
  static constexpr std::size_t kLeaders = 32;

  const CurveTrace& c;
  std::size_t n;
  double total;
  double best = 1.0;
  std::vector<Pair> leaders;  // best pairs seen, descending, at most kLeaders

  double ratio(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    double arc = c.cumulative_length[j] - c.cumulative_length[i];
    if (c.closed) arc = std::min(arc, total - arc);
    const double chord = std::abs(c.points[j] - c.points[i]);
    if (arc <= 0.0) return 0.0;
    return chord > 0.0 ? arc / chord : kInfinity;
  }

  void pair(std::size_t i, std::size_t j) {
    if (i == j) return;
    const double r = ratio(i, j);
    best = std::max(best, r);
    if (leaders.size() == kLeaders && r <= leaders.back().ratio) return;
    auto at = std::upper_bound(leaders.begin(), leaders.end(), r, [](double v, const Pair& p) { return v > p.ratio; });
    leaders.insert(at, {r, i, j});
    if (leaders.size() > kLeaders) leaders.pop_back();
  }

  // Coordinate ascent from each leader over moves of either endpoint by ±2^k.
  void refine() {
    const auto start = leaders;
    for (Pair p : start) {
      for (bool moved = true; moved;) {
        moved = false;
        for (std::size_t step = std::max<std::size_t>(n / 64, 1); step >= 1; step /= 2) {
          for (int which = 0; which < 2; ++which) {
            for (int dir = -1; dir <= 1; dir += 2) {
              std::size_t i = p.i, j = p.j;
              std::size_t& e = which == 0 ? i : j;
              e = dir > 0 ? (e + step) % n : (e + n - step) % n;
              if (i == j) continue;
              const double r = ratio(i, j);
              if (r > p.ratio) {
                p = {r, i, j};
                moved = true;
              }
            }
          }
          if (step == 1) break;
        }
      }
      best = std::max(best, p.ratio);
    }
  }
};

}  // namespace detail

inline constexpr std::size_t kChordArcFullScanLimit = 4096;

/// Largest min(arc, total - arc)/chord over index pairs (arc/chord for open
/// traces). Below 4096 points every pair is scanned; above, `pair_budget`
/// pairs from an R2 low-discrepancy sequence plus every pair whose index gap
/// is a triadic division of the period or a half period, followed by a local
/// ascent from the best pairs found. `seed` selects where the sequence starts.
inline double chord_arc_scan(const CurveTrace& c, std::size_t pair_budget = std::size_t{1} << 22,
                             std::uint64_t seed = 0) {
  const std::size_t n = c.closed ? c.size() : c.size() + 1;
  if (n < 2) throw ValidationError("chord_arc_scan: trace needs at least two points");
  detail::ChordArc scan{c, n, c.length(), 1.0, {}};
  if (n < kChordArcFullScanLimit) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) scan.pair(i, j);
    }
    return scan.best;
  }
  // R2 sequence: frac(1/2 + k·(1/ρ, 1/ρ²)) with ρ the plastic number.
  const double rho = 1.32471795724474602596;
  const double a1 = 1.0 / rho, a2 = 1.0 / (rho * rho);
  // The seed shifts the starting point of the sequence.
  double u = 0.5 + a1 * static_cast<double>(seed % 1000003), v = 0.5 + a2 * static_cast<double>(seed % 1000003);
  u -= std::floor(u);
  v -= std::floor(v);
  for (std::size_t k = 0; k < pair_budget; ++k) {
    u += a1;
    v += a2;
    u -= std::floor(u);
    v -= std::floor(v);
    scan.pair(static_cast<std::size_t>(u * static_cast<double>(n)) % n,
              static_cast<std::size_t>(v * static_cast<double>(n)) % n);
  }
  std::vector<std::size_t> gaps = IntervalFamily::triadic().lengths(n, false);
  gaps.push_back(n / 2);
  for (std::size_t d : gaps) {
    for (std::size_t i = 0; i + d < n; ++i) scan.pair(i, i + d);
  }
  scan.refine();
  return scan.best;
}

// ---------------------------------------------------------------- Bloch

/// max over r in `radii`, θ on `angles` equispaced angles of (1 - r²)|φ'(re^{iθ})|
/// for φ(z) = Σ_k a_k z^k.
inline double bloch_norm_probe(std::span<const Complex> taylor, const std::vector<double>& radii,
                               std::size_t angles) {
  if (angles == 0) throw ValidationError("bloch_norm_probe: angles_per_radius must be >= 1");
  double best = 0.0;
  for (double r : radii) {
    if (!(r >= 0.0 && r < 1.0)) throw ValidationError("bloch_norm_probe: radii must lie in [0,1)");
    // φ'(re^{iθ}) = Σ_{m≥0} (m+1) a_{m+1} r^m e^{imθ}, folded modulo `angles`.
    std::vector<Complex> folded(angles, 0.0);
    double rm = 1.0;
    for (std::size_t m = 0; m + 1 < taylor.size(); ++m) {
      folded[m % angles] += static_cast<double>(m + 1) * taylor[m + 1] * rm;
      rm *= r;
      if (rm == 0.0) break;
    }
    for (const Complex& z : detail::backward_complex(std::move(folded))) {
      best = std::max(best, (1.0 - r * r) * std::abs(z));
    }
  }
  return best;
}

/// Largest probe radius trusted for a grid of G samples.
inline double bloch_radius_limit(std::size_t grid) { return 1.0 - 3.0 / static_cast<double>(grid); }

/// Bloch probe of the analytic completion φ = c_0 + 2Σ_{0<k<G/2} c_k z^k of log ω.
inline double bloch_norm_probe(const WeightBundle& w, const std::vector<double>& radii, std::size_t angles) {
  if (w.omega.min() <= 0.0) throw ValidationError("bloch_norm_probe: weight must be positive");
  const std::size_t g = w.grid_size();
  for (double r : radii) {
    if (r > bloch_radius_limit(g)) {
      throw ValidationError("bloch_norm_probe: radius " + std::to_string(r) + " exceeds 1 - 3/G = " +
                            std::to_string(bloch_radius_limit(g)));
    }
  }
  const auto s = fourier_series(w.omega.map([](double v) { return std::log(v); }));
  std::vector<Complex> taylor(g / 2);
  taylor[0] = s.at(0);
  for (std::size_t k = 1; k < g / 2; ++k) taylor[k] = 2.0 * s.at(static_cast<long>(k));
  return bloch_norm_probe(taylor, radii, angles);
}

// ---------------------------------------------------------------- arclength

class NonMonotonic : public NumericError {
 public:
  using NumericError::NumericError;
};

/// β(s_j) = b(α(s_j)) on the uniform grid s_j = j·L/G, where α inverts the
/// cumulative length by linear interpolation and b is read piecewise-linearly.
inline SampledFunction arclength_reparam(const CurveTrace& c, const SampledFunction& b) {
  const std::size_t g = c.size();
  if (b.grid_size() != g) {
    throw ValidationError("arclength_reparam: b has " + std::to_string(b.grid_size()) + " samples, trace has " +
                          std::to_string(g));
  }
  const auto& s = c.cumulative_length;
  for (std::size_t i = 0; i < g; ++i) {
    if (!(s[i + 1] > s[i])) {
      throw NonMonotonic("arclength_reparam: cumulative length stalls at sample " + std::to_string(i));
    }
  }
  const double total = c.length();
  std::vector<double> beta(g);
  std::size_t i = 0;
  for (std::size_t j = 0; j < g; ++j) {
    const double target = total * static_cast<double>(j) / static_cast<double>(g);
    while (i + 1 < g && s[i + 1] <= target) ++i;
    const double frac = std::clamp((target - s[i]) / (s[i + 1] - s[i]), 0.0, 1.0);
    beta[j] = b[i] + frac * (b[(i + 1) % g] - b[i]);
  }
  return SampledFunction(std::move(beta));
}

}  // namespace weightlab
