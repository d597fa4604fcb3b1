#pragma once

// Circle homeomorphisms h_t(e^{ix}) = e^{i g_t(x)} with g_t' proportional to ω^t.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "weightlab/errors.hpp"
#include "weightlab/sampled.hpp"
#include "weightlab/weight.hpp"

namespace weightlab {

class NonIncreasing : public NumericError {
 public:
  using NumericError::NumericError;
};

struct WeldingMap {
  double t = 1.0;
  std::vector<double> g_values;  // g(x_0) .. g(x_G); g(x_0) = 0, g(x_G) = 2π
  double total_mass = 0.0;       // ∫ ω^t dx before rescaling

  std::size_t grid_size() const { return g_values.empty() ? 0 : g_values.size() - 1; }
  double rescale() const { return kTwoPi / total_mass; }

  /// |h(I)| for the wrapped run of `length` cells starting at cell `start`.
  double arc(std::size_t start, std::size_t length) const {
    const std::size_t g = grid_size();
    const std::size_t end = start + length;
    if (end <= g) return g_values[end] - g_values[start];
    return (kTwoPi - g_values[start]) + g_values[end - g];
  }
};

/// g(x_i) = 2π · Σ_{j<i} ω^t_j / Σ_j ω^t_j, i.e. the left-endpoint rectangle
/// integral of ω^t rescaled so that g(2π) = 2π exactly.
inline WeldingMap build_welding(const WeightBundle& w, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("build_welding: t must lie in [0,1]");
  const std::size_t g = w.grid_size();
  std::vector<double> cumulative(g + 1, 0.0);
  CompensatedSum acc;
  for (std::size_t i = 0; i < g; ++i) {
    const double density = t == 0.0 ? 1.0 : std::pow(w.omega[i], t);
    if (!(density > 0.0) || !std::isfinite(density)) {
      throw NonIncreasing("build_welding: cumulative step " + std::to_string(i) + " is not positive");
    }
    acc += density;
    cumulative[i + 1] = acc.value();
  }
  WeldingMap m;
  m.t = t;
  m.total_mass = cumulative[g] * w.omega.step();
  m.g_values.resize(g + 1);
  for (std::size_t i = 0; i <= g; ++i) m.g_values[i] = kTwoPi * (cumulative[i] / cumulative[g]);
  m.g_values[g] = kTwoPi;
  for (std::size_t i = 0; i < g; ++i) {
    if (!(m.g_values[i + 1] > m.g_values[i])) {
      throw NonIncreasing("build_welding: g is not strictly increasing at sample " + std::to_string(i));
    }
  }
  return m;
}

/// Largest ratio |h(I)|/|h(I*)| (either order) over adjacent triadic arcs of
/// length 2π/3^k, for each k = 0..max_scale.
inline std::map<unsigned, double> quasisymmetry_by_scale(const WeldingMap& m, unsigned max_scale) {
  const std::size_t g = m.grid_size();
  if (max_scale >= 40 || g == 0 || g % pow3(max_scale) != 0) {
    throw ValidationError("quasisymmetry_constant: 3^" + std::to_string(max_scale) +
                          " does not divide grid " + std::to_string(g));
  }
  std::map<unsigned, double> out;
  for (unsigned k = 0; k <= max_scale; ++k) {
    const std::size_t len = g / pow3(k);
    const std::size_t count = pow3(k);
    double worst = 1.0;
    for (std::size_t j = 0; j < count; ++j) {
      const double here = m.arc(j * len, len);
      const double next = m.arc(((j + 1) % count) * len, len);
      worst = std::max({worst, here / next, next / here});
    }
    out[k] = worst;
  }
  return out;
}

inline double quasisymmetry_constant(const WeldingMap& m, unsigned max_scale) {
  double worst = 1.0;
  for (const auto& [k, v] : quasisymmetry_by_scale(m, max_scale)) worst = std::max(worst, v);
  return worst;
}

/// log h_t'(e^{ix}) = log g_t'(x) + i(g_t(x) - x): real part t·log ω + log(rescale),
/// imaginary part g_t(x_i) - x_i.
inline std::pair<SampledFunction, SampledFunction> log_derivative_parts(const WeldingMap& m,
                                                                       const WeightBundle& w) {
  const std::size_t g = w.grid_size();
  if (m.grid_size() != g) {
    throw ValidationError("log_derivative_parts: welding grid " + std::to_string(m.grid_size()) +
                          " does not match weight grid " + std::to_string(g));
  }
  const double shift = std::log(m.rescale());
  std::vector<double> re(g), im(g);
  for (std::size_t i = 0; i < g; ++i) {
    re[i] = (m.t == 0.0 ? 0.0 : m.t * std::log(w.omega[i])) + shift;
    im[i] = m.g_values[i] - w.omega.x(i);
  }
  return {SampledFunction(std::move(re)), SampledFunction(std::move(im))};
}

}  // namespace weightlab
