#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "weightlab/errors.hpp"

namespace weightlab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Neumaier's variant of Kahan summation. Deterministic for a fixed input
// order, which every reduction in the library relies on.
class CompensatedSum {
 public:
  CompensatedSum& operator+=(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) {
  CompensatedSum acc;
  for (double v : values) acc += v;
  return acc.value();
}

/// Uniform samples of a 2π-periodic real function: values[i] = f(2πi/G).
///
/// A sample is read as the value of f on the cell [x_i, x_{i+1}), so integrals
/// are left-endpoint rectangle sums and interval means are sample means.
class SampledFunction {
 public:
  SampledFunction() = default;

  explicit SampledFunction(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ValidationError("SampledFunction: grid_size must be >= 1");
    for (double v : values_) {
      if (!std::isfinite(v)) throw NumericError("SampledFunction: non-finite sample");
    }
  }

  static SampledFunction constant(std::size_t grid_size, double c) {
    if (grid_size == 0) throw ValidationError("SampledFunction: grid_size must be >= 1");
    return SampledFunction(std::vector<double>(grid_size, c));
  }

  template <class F>
  static SampledFunction from_function(std::size_t grid_size, F&& f) {
    if (grid_size == 0) throw ValidationError("SampledFunction: grid_size must be >= 1");
    std::vector<double> v(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i) v[i] = f(node(i, grid_size));
    return SampledFunction(std::move(v));
  }

  static double node(std::size_t i, std::size_t grid_size) {
    return kTwoPi * static_cast<double>(i) / static_cast<double>(grid_size);
  }

  std::size_t grid_size() const { return values_.size(); }
  double step() const { return kTwoPi / static_cast<double>(values_.size()); }
  double x(std::size_t i) const { return node(i, values_.size()); }

  std::span<const double> values() const { return values_; }
  const std::vector<double>& data() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  template <class F>
  SampledFunction map(F&& f) const {
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) out[i] = f(values_[i]);
    return SampledFunction(std::move(out));
  }

  /// out[i] = values[(i + shift) mod G]
  SampledFunction cyclic_shift(std::size_t shift) const {
    const std::size_t g = values_.size();
    std::vector<double> out(g);
    for (std::size_t i = 0; i < g; ++i) out[i] = values_[(i + shift) % g];
    return SampledFunction(std::move(out));
  }

  double min() const {
    double m = values_.front();
    for (double v : values_) m = std::min(m, v);
    return m;
  }

  double max() const {
    double m = values_.front();
    for (double v : values_) m = std::max(m, v);
    return m;
  }

  bool operator==(const SampledFunction&) const = default;

 private:
  std::vector<double> values_;
};

inline double sample_mean(const SampledFunction& f) {
  return compensated_sum(f.values()) / static_cast<double>(f.grid_size());
}

/// Rectangle-rule integral over [0, 2π) with plain Lebesgue measure dx.
inline double rect_integral(const SampledFunction& f) {
  return compensated_sum(f.values()) * f.step();
}

inline void require_same_grid(const SampledFunction& a, const SampledFunction& b,
                              const char* where) {
  if (a.grid_size() != b.grid_size()) {
    throw ValidationError(std::string(where) + ": grid sizes differ (" +
                          std::to_string(a.grid_size()) + " vs " +
                          std::to_string(b.grid_size()) + ")");
  }
}

// 3^k as an integer; callers keep k small enough for 64 bits.
inline constexpr std::size_t pow3(unsigned k) {
  std::size_t r = 1;
  for (unsigned i = 0; i < k; ++i) r *= 3;
  return r;
}

/// Largest k with 3^k dividing n (n > 0).
inline unsigned triadic_valuation(std::size_t n) {
  unsigned k = 0;
  while (n > 0 && n % 3 == 0) {
    n /= 3;
    ++k;
  }
  return k;
}

/// Default desk grid 2·3^m.
inline constexpr std::size_t desk_grid(unsigned exponent) { return 2 * pow3(exponent); }

}  // namespace weightlab
