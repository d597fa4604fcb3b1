#pragma once

// Riesz products P_n(x) = prod_{j=0..n} (1 + eps cos(3^j x)), their norms, the
// index selection rule and the density f~ fed into the maximal operator.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "weightlab/errors.hpp"
#include "weightlab/sampled.hpp"

namespace weightlab {

struct RieszSpec {
  double epsilon = 0.5;
  unsigned level = 0;  // product runs over j = 0..level

  void validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
      throw ValidationError("RieszSpec: epsilon must lie in (0,1), got " + std::to_string(epsilon));
    }
  }
};

/// Evaluates P_n at an arbitrary angle. Angles 3^j x are reduced in long double.
inline double eval_riesz_product(const RieszSpec& spec, double x) {
  spec.validate();
  constexpr long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  long double angle = std::fmod(static_cast<long double>(x), two_pi);
  long double product = 1.0L;
  for (unsigned j = 0; j <= spec.level; ++j) {
    product *= 1.0L + static_cast<long double>(spec.epsilon) * std::cos(angle);
    angle = std::fmod(3.0L * angle, two_pi);
  }
  return static_cast<double>(product);
}

namespace detail {

// cos(2πk/G) for k = 0..G-1, evaluated in long double.
inline std::vector<double> cosine_table(std::size_t grid) {
  constexpr long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  std::vector<double> table(grid);
  for (std::size_t k = 0; k < grid; ++k) {
    table[k] = static_cast<double>(
        std::cos(two_pi * static_cast<long double>(k) / static_cast<long double>(grid)));
  }
  return table;
}

}  // namespace detail

/// Samples P_n on the grid x_i = 2πi/G. Frequencies are reduced modulo G in
/// integer arithmetic, so 3^j x_i never loses precision.
inline SampledFunction sample_riesz(const RieszSpec& spec, std::size_t grid) {
  spec.validate();
  if (grid == 0) throw ValidationError("sample_riesz: grid size must be >= 1");
  const auto table = detail::cosine_table(grid);
  std::vector<double> values(grid, 1.0);
  std::uint64_t freq = 1 % grid;
  for (unsigned j = 0; j <= spec.level; ++j) {
    for (std::size_t i = 0; i < grid; ++i) {
      const std::size_t k = static_cast<std::size_t>((static_cast<unsigned __int128>(freq) * i) % grid);
      values[i] *= 1.0 + spec.epsilon * table[k];
    }
    freq = (freq * 3) % grid;
  }
  return SampledFunction(std::move(values));
}

/// Smallest grid on which the rectangle rule integrates P_n^2 exactly is
/// anything above 3^{n+1}; this returns 2·3^{n+1}.
inline std::size_t riesz_exact_grid(unsigned level) { return 2 * pow3(level + 1); }

/// (∫_0^{2π} |f|^p dx)^{1/p} by the rectangle rule.
inline double lp_norm(const SampledFunction& f, double p) {
  if (!(p >= 1.0)) throw ValidationError("lp_norm: p must be >= 1");
  CompensatedSum acc;
  if (p == 1.0) {
    for (double v : f.values()) acc += std::abs(v);
    return acc.value() * f.step();
  }
  for (double v : f.values()) acc += std::pow(std::abs(v), p);
  return std::pow(acc.value() * f.step(), 1.0 / p);
}

/// ∫_0^{2π} |f| log(e + |f|) dx by the rectangle rule.
inline double llogl_norm(const SampledFunction& f) {
  CompensatedSum acc;
  for (double v : f.values()) {
    const double a = std::abs(v);
    acc += a * std::log(std::numbers::e + a);
  }
  return acc.value() * f.step();
}

/// ∫_0^{2π} P_N(x)^p dx through the transfer operator
///   (L g)(y) = 1/3 Σ_{s=0..2} (1 + eps cos z_s)^p g(z_s),  z_s = (y + 2πs)/3,
/// applied N+1 times to g ≡ 1. Each iterate is analytic, so it is carried as
/// a trigonometric interpolant on `nodes` points (odd). Cost is independent of
/// 3^N, which makes norms of very deep products reachable.
inline double riesz_lp_power_transfer(double epsilon, unsigned level, double p,
                                      std::size_t nodes = 243) {
  RieszSpec{epsilon, level}.validate();
  if (nodes % 2 == 0) ++nodes;
  const std::size_t m = nodes;
  const std::size_t fine = 3 * m;
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  const std::size_t half = (m - 1) / 2;

  // Weights (1 + eps cos z)^p on the fine grid z_q = 2πq/(3m).
  std::vector<double> weight(fine);
  for (std::size_t q = 0; q < fine; ++q) {
    const long double z = two_pi * static_cast<long double>(q) / static_cast<long double>(fine);
    weight[q] = static_cast<double>(std::pow(1.0L + epsilon * std::cos(z), static_cast<long double>(p)));
  }
  // cos/sin(2π r / fine) tables; indices into them are reduced mod fine.
  std::vector<double> cf(fine), sf(fine);
  for (std::size_t r = 0; r < fine; ++r) {
    const long double a = two_pi * static_cast<long double>(r) / static_cast<long double>(fine);
    cf[r] = static_cast<double>(std::cos(a));
    sf[r] = static_cast<double>(std::sin(a));
  }

  std::vector<double> g(m, 1.0), next(m);
  std::vector<double> a(half + 1), b(half + 1);
  for (unsigned step = 0; step <= level; ++step) {
    // Real Fourier coefficients of the interpolant through g (node y_j = 2πj/m,
    // i.e. fine index 3j).
    for (std::size_t k = 0; k <= half; ++k) {
      CompensatedSum ca, sb;
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t r = (3 * k * j) % fine;
        ca += g[j] * cf[r];
        sb += g[j] * sf[r];
      }
      a[k] = ca.value() * (k == 0 ? 1.0 : 2.0) / static_cast<double>(m);
      b[k] = sb.value() * 2.0 / static_cast<double>(m);
    }
    for (std::size_t j = 0; j < m; ++j) {
      CompensatedSum acc;
      for (std::size_t s = 0; s < 3; ++s) {
        const std::size_t q = j + s * m;  // z = (y_j + 2πs)/3 = 2πq/(3m)
        CompensatedSum interp;
        interp += a[0];
        for (std::size_t k = 1; k <= half; ++k) {
          const std::size_t r = (k * q) % fine;
          interp += a[k] * cf[r] + b[k] * sf[r];
        }
        acc += weight[q] * interp.value();
      }
      next[j] = acc.value() / 3.0;
    }
    g.swap(next);
  }
  return compensated_sum(g) / static_cast<double>(m) * kTwoPi;
}

enum class NormRoute { grid, transfer };

inline const char* to_string(NormRoute r) { return r == NormRoute::grid ? "grid" : "transfer"; }

/// Grid above which select_index switches from sampling to the transfer
/// recursion (2·3^13 samples).
inline constexpr unsigned kSelectionGridCapExponent = 13;

/// ‖P_N‖_p with plain dx. Sampled on 2·3^{N+2} points while that stays under
/// the cap, otherwise through riesz_lp_power_transfer.
inline double riesz_lp_norm(double epsilon, unsigned level, double p, NormRoute* route = nullptr,
                            unsigned grid_cap_exponent = kSelectionGridCapExponent) {
  if (level + 2 <= grid_cap_exponent) {
    if (route) *route = NormRoute::grid;
    return lp_norm(sample_riesz({epsilon, level}, desk_grid(level + 2)), p);
  }
  if (route) *route = NormRoute::transfer;
  return std::pow(riesz_lp_power_transfer(epsilon, level, p), 1.0 / p);
}

struct SelectionStep {
  unsigned level = 0;
  double norm = 0.0;
  NormRoute route = NormRoute::grid;
};

struct SelectionResult {
  unsigned index = 0;
  double exponent = 0.0;   // p_n = 1 + 1/n
  double threshold = 0.0;  // base^n
  std::vector<SelectionStep> path;
  std::vector<unsigned> monotonicity_violations;  // N with ‖P_N‖ < ‖P_{N-1}‖
};

/// Least N <= max_level with ‖P_N‖_{1+1/n} >= base^n (base 4 is the literal
/// rule). Throws NotFoundError when the search is exhausted.
inline SelectionResult select_index(double epsilon, unsigned n, unsigned max_level,
                                    double base = 4.0) {
  RieszSpec{epsilon, 0}.validate();
  if (n < 1) throw ValidationError("select_index: n must be >= 1");
  SelectionResult out;
  out.exponent = 1.0 + 1.0 / static_cast<double>(n);
  out.threshold = std::pow(base, static_cast<double>(n));
  for (unsigned level = 0; level <= max_level; ++level) {
    SelectionStep step{level, 0.0, NormRoute::grid};
    step.norm = riesz_lp_norm(epsilon, level, out.exponent, &step.route);
    if (!out.path.empty() && step.norm < out.path.back().norm) {
      out.monotonicity_violations.push_back(level);
    }
    out.path.push_back(step);
    if (step.norm >= out.threshold) {
      out.index = level;
      return out;
    }
  }
  throw NotFoundError("select_index: no N <= " + std::to_string(max_level) +
                      " with ||P_N||_{p_" + std::to_string(n) + "} >= " +
                      std::to_string(out.threshold) + " at epsilon=" + std::to_string(epsilon) +
                      "; raise the search bound or epsilon");
}

struct FtildeSpec {
  double epsilon = 0.9;
  std::vector<double> p_exponents;       // p_n = 1 + 1/n, n = 1..K
  std::vector<unsigned> selected_indices;  // N_1..N_K

  std::size_t terms() const { return selected_indices.size(); }

  static FtildeSpec from_indices(double epsilon, std::vector<unsigned> indices) {
    FtildeSpec s;
    s.epsilon = epsilon;
    s.selected_indices = std::move(indices);
    for (std::size_t n = 1; n <= s.selected_indices.size(); ++n) {
      s.p_exponents.push_back(1.0 + 1.0 / static_cast<double>(n));
    }
    return s;
  }

  unsigned max_index() const {
    unsigned m = 0;
    for (unsigned v : selected_indices) m = std::max(m, v);
    return m;
  }

  void validate() const {
    RieszSpec{epsilon, 0}.validate();
    if (selected_indices.empty()) throw ValidationError("FtildeSpec: selected_indices is empty");
    if (p_exponents.size() != selected_indices.size()) {
      throw ValidationError("FtildeSpec: p_exponents and selected_indices differ in length");
    }
    for (unsigned v : selected_indices) {
      if (v == 0) throw ValidationError("FtildeSpec: selected indices must be strictly positive");
    }
  }
};

/// Runs select_index for n = 1..terms and packages the result.
inline FtildeSpec select_ftilde_spec(double epsilon, std::size_t terms, unsigned max_level,
                                     double base = 4.0) {
  std::vector<unsigned> indices;
  for (std::size_t n = 1; n <= terms; ++n) {
    indices.push_back(select_index(epsilon, static_cast<unsigned>(n), max_level, base).index);
  }
  return FtildeSpec::from_indices(epsilon, std::move(indices));
}

/// f~(x_i) = Σ_{n=1..K} 2^{-n} P_{N_n}(x_i) / ‖P_{N_n}‖_{LlogL}. The L log L
/// norms are taken on the same grid, so ‖f~‖_{LlogL} <= 1 holds on the grid.
inline SampledFunction build_ftilde(const FtildeSpec& spec, std::size_t grid) {
  spec.validate();
  const unsigned deepest = spec.max_index();
  if (deepest + 1 >= 40 || grid <= pow3(deepest + 1)) {
    throw ValidationError("build_ftilde: grid " + std::to_string(grid) +
                          " does not resolve P_" + std::to_string(deepest) +
                          " (need G > 3^" + std::to_string(deepest + 1) + ")");
  }
  std::vector<double> acc(grid, 0.0);
  double weight = 1.0;
  for (unsigned idx : spec.selected_indices) {
    weight *= 0.5;
    const SampledFunction p = sample_riesz({spec.epsilon, idx}, grid);
    const double scale = weight / llogl_norm(p);
    for (std::size_t i = 0; i < grid; ++i) acc[i] += scale * p[i];
  }
  return SampledFunction(std::move(acc));
}

}  // namespace weightlab
