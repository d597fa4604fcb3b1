#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "weightlab/errors.hpp"
#include "weightlab/maximal.hpp"
#include "weightlab/riesz.hpp"
#include "weightlab/sampled.hpp"

namespace weightlab {

// How a weight came to be. Recorded verbatim in archives and reports.
struct Provenance {
  double epsilon = 0.0;
  std::size_t terms = 0;
  std::vector<unsigned> selected_indices;
  std::size_t grid = 0;
  double t = 1.0;
  std::string selection = "explicit";  // "literal" when the 4^n rule chose the indices
  std::string measure = "dx";          // norm convention used for the selection

  bool operator==(const Provenance&) const = default;
};

/// ω^t on the grid together with its provenance.
struct WeightBundle {
  SampledFunction omega;
  double t = 1.0;
  Provenance provenance;

  std::size_t grid_size() const { return omega.grid_size(); }

  void validate() const {
    if (provenance.grid != omega.grid_size()) {
      throw ValidationError("WeightBundle: provenance grid " + std::to_string(provenance.grid) +
                            " does not match " + std::to_string(omega.grid_size()) + " samples");
    }
    if (omega.min() < 0.0) throw ValidationError("WeightBundle: negative weight sample");
  }

  /// Pointwise power of this bundle's samples.
  WeightBundle power(double s) const {
    WeightBundle out = *this;
    out.omega = omega.map([s](double v) { return std::pow(v, s); });
    out.t = t * s;
    out.provenance.t = out.t;
    return out;
  }

  bool operator==(const WeightBundle&) const = default;
};

/// A bare weight with no construction behind it (tests, synthetic inputs).
inline WeightBundle make_weight(SampledFunction omega, double t = 1.0) {
  Provenance p;
  p.grid = omega.grid_size();
  p.t = t;
  p.selection = "synthetic";
  return {std::move(omega), t, std::move(p)};
}

/// ω = M f~ raised pointwise to t.
inline WeightBundle build_omega(const SampledFunction& ftilde, double t, Provenance provenance = {}) {
  if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("build_omega: t must lie in [0,1]");
  if (ftilde.min() < 0.0) throw ValidationError("build_omega: ftilde has a negative sample");
  const MaximalResult m = maximal_fast(ftilde);
  std::vector<double> values(ftilde.grid_size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = t == 0.0 ? 1.0 : std::pow(m.values[i], t);
    if (!std::isfinite(values[i])) {
      throw NumericError("build_omega: non-finite weight at sample " + std::to_string(i));
    }
  }
  provenance.grid = ftilde.grid_size();
  provenance.t = t;
  return {SampledFunction(std::move(values)), t, std::move(provenance)};
}

}  // namespace weightlab
