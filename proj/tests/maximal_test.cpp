#include "weightlab/maximal.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "weightlab/riesz.hpp"
#include "weightlab/weight.hpp"

namespace weightlab {
namespace {

SampledFunction random_nonneg(std::mt19937_64& rng, std::size_t g, bool integral) {
  std::vector<double> v(g);
  if (integral) {
    std::uniform_int_distribution<int> d(0, 4);
    for (auto& x : v) x = d(rng);
  } else {
    std::exponential_distribution<double> d(1.0);
    for (auto& x : v) x = std::pow(d(rng), 3.0);
  }
  return SampledFunction(std::move(v));
}

TEST(PrefixSums, SmallExamples) {
  const auto a = prefix_sums(SampledFunction({1, 1, 1, 1}));
  EXPECT_EQ(std::vector<double>(a.prefix().begin(), a.prefix().end()), (std::vector<double>{0, 1, 2, 3, 4}));
  const auto b = prefix_sums(SampledFunction({0, 0, 4, 0}));
  EXPECT_EQ(std::vector<double>(b.prefix().begin(), b.prefix().end()), (std::vector<double>{0, 0, 0, 4, 4}));
}

TEST(PrefixSums, TotalMatchesPairwiseSum) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> d(0.0, 1e3);
  std::vector<double> v(10007);
  for (auto& x : v) x = d(rng);
  // Oracle: pairwise summation in long double.
  auto pairwise = [&](auto&& self, std::size_t lo, std::size_t hi) -> long double {
    if (hi - lo == 1) return v[lo];
    const std::size_t mid = (lo + hi) / 2;
    return self(self, lo, mid) + self(self, mid, hi);
  };
  const long double oracle = pairwise(pairwise, 0, v.size());
  const auto stats = prefix_sums(SampledFunction(v));
  EXPECT_NEAR(stats.prefix().back(), static_cast<double>(oracle), 1e-15 * std::abs(static_cast<double>(oracle)) + 1e-9);
}

TEST(MaximalNaive, GoldenFourPoint) {
  const auto m = maximal_naive(SampledFunction({0, 0, 4, 0}));
  EXPECT_DOUBLE_EQ(m.values[0], 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.values[1], 2.0);
  EXPECT_DOUBLE_EQ(m.values[2], 4.0);
  EXPECT_DOUBLE_EQ(m.values[3], 2.0);
  EXPECT_EQ(m.argbest[2], (GridInterval{2, 1}));
  EXPECT_EQ(m.argbest[1], (GridInterval{1, 2}));
  EXPECT_EQ(m.argbest[0], (GridInterval{0, 3}));  // ties with {2,3,0}; leftmost start wins
}

TEST(MaximalNaive, ConstantAndSignedConstant) {
  const auto m = maximal_naive(SampledFunction::constant(9, -2.5));
  for (double v : m.values.values()) EXPECT_EQ(v, 2.5);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(m.argbest[i], (GridInterval{i, 1}));
}

TEST(MaximalNaive, RejectsOversizedGrid) {
  EXPECT_THROW(maximal_naive(SampledFunction::constant(kMaximalNaiveLimit + 1, 1.0)), ValidationError);
}

TEST(MaximalFast, EqualsNaiveOnRandomInstances) {
  std::mt19937_64 rng(2024);
  int instances = 0;
  for (std::size_t g : {7u, 64u, 243u, 1024u}) {
    for (int rep = 0; rep < 125; ++rep, ++instances) {
      const auto f = random_nonneg(rng, g, rep % 2 == 0);
      const auto naive = maximal_naive(f);
      const auto fast = maximal_fast(f);
      ASSERT_EQ(naive.values, fast.values) << "G=" << g << " rep=" << rep;
      ASSERT_EQ(naive.argbest, fast.argbest) << "G=" << g << " rep=" << rep;
    }
  }
  EXPECT_EQ(instances, 500);
}

TEST(MaximalFast, EqualsNaiveOnSmallGridsAndSignedInput) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d;
  for (std::size_t g = 1; g <= 40; ++g) {
    std::vector<double> v(g);
    for (auto& x : v) x = d(rng);
    const SampledFunction f(v);
    const auto naive = maximal_naive(f);
    const auto fast = maximal_fast(f);
    ASSERT_EQ(naive.values, fast.values) << g;
    ASSERT_EQ(naive.argbest, fast.argbest) << g;
  }
}

TEST(MaximalFast, GoldenAndConstant) {
  EXPECT_EQ(maximal_fast(SampledFunction({0, 0, 4, 0})).values, SampledFunction({4.0 / 3.0, 2, 4, 2}));
  const auto ones = maximal_fast(SampledFunction::constant(100, 1.0));
  for (double v : ones.values.values()) EXPECT_EQ(v, 1.0);
}

TEST(MaximalFast, ArgbestContainsPointAndDominates) {
  std::mt19937_64 rng(3);
  const auto f = random_nonneg(rng, 500, false);
  const auto m = maximal_fast(f);
  const IntervalStats stats(f);
  for (std::size_t i = 0; i < f.grid_size(); ++i) {
    EXPECT_TRUE(m.argbest[i].contains(i, f.grid_size()));
    EXPECT_EQ(stats.mean(m.argbest[i].start, m.argbest[i].length), m.values[i]);
    EXPECT_GE(m.values[i], f[i]);
  }
}

TEST(MaximalFast, MonotoneSublinearHomogeneous) {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    const auto f = random_nonneg(rng, 81, false);
    const auto g = random_nonneg(rng, 81, false);
    std::vector<double> sum(81), bigger(81), scaled(81);
    for (std::size_t i = 0; i < 81; ++i) {
      sum[i] = f[i] + g[i];
      bigger[i] = f[i] + std::abs(g[i]);
      scaled[i] = -3.0 * f[i];
    }
    const auto mf = maximal_fast(f).values;
    const auto mg = maximal_fast(g).values;
    const auto msum = maximal_fast(SampledFunction(sum)).values;
    const auto mbig = maximal_fast(SampledFunction(bigger)).values;
    const auto mscaled = maximal_fast(SampledFunction(scaled)).values;
    for (std::size_t i = 0; i < 81; ++i) {
      EXPECT_LE(msum[i], (mf[i] + mg[i]) * (1 + 1e-14));
      EXPECT_LE(mf[i], mbig[i] * (1 + 1e-14));
      EXPECT_NEAR(mscaled[i], 3.0 * mf[i], 1e-12 * mf[i]);
    }
  }
}

TEST(MaximalFast, ShiftEquivariant) {
  std::mt19937_64 rng(23);
  const auto f = random_nonneg(rng, 243, true);
  const auto m = maximal_fast(f).values;
  for (std::size_t s : {1u, 27u, 100u}) {
    const auto ms = maximal_fast(f.cyclic_shift(s)).values;
    EXPECT_EQ(ms, m.cyclic_shift(s));
  }
}

TEST(MaximalFast, StepRefinementIncreasesPointwise) {
  std::mt19937_64 rng(29);
  const auto f = random_nonneg(rng, 81, false);
  std::vector<double> fine(243);
  for (std::size_t i = 0; i < 243; ++i) fine[i] = f[i / 3];
  const auto coarse = maximal_fast(f).values;
  const auto refined = maximal_fast(SampledFunction(fine)).values;
  for (std::size_t i = 0; i < 243; ++i) EXPECT_GE(refined[i], coarse[i / 3] - 1e-12);
}

TEST(MaximalFamily, RunsLongerThanOnePeriodCanWin) {
  // Two copies of the spike inside one run of G+1 samples beat every run of at
  // most G samples through index 2.
  const SampledFunction f({4, 0, 0, 0});
  const IntervalStats stats(f);
  const double best_short = maximal_naive(f).values[2];
  EXPECT_DOUBLE_EQ(best_short, 4.0 / 3.0);
  EXPECT_GT(stats.mean(0, 5), best_short);
}

TEST(MaximalFamily, LongRunsDoNotWinForRieszDensities) {
  const auto f = sample_riesz({0.9, 3}, 162);
  const IntervalStats stats(f);
  const auto m = maximal_fast(f).values;
  const std::size_t g = f.grid_size();
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t len = g + 1; len < 2 * g; ++len) {
      for (std::size_t back = len - g; back < g; back += 7) {  // runs through i
        const std::size_t start = (i + g - back) % g;
        ASSERT_LE(stats.mean(start, len), m[i] * (1 + 1e-14));
      }
    }
  }
}

TEST(BuildOmega, PowersAndDomination) {
  const auto f = build_ftilde(FtildeSpec::from_indices(0.9, {2, 4}), desk_grid(6));
  const auto w0 = build_omega(f, 0.0);
  for (double v : w0.omega.values()) EXPECT_EQ(v, 1.0);
  const auto w1 = build_omega(f, 1.0);
  for (std::size_t i = 0; i < f.grid_size(); ++i) EXPECT_GE(w1.omega[i], f[i]);
  EXPECT_EQ(w1.provenance.grid, f.grid_size());
  const auto one = build_omega(SampledFunction::constant(27, 1.0), 1.0);
  for (double v : one.omega.values()) EXPECT_EQ(v, 1.0);
  EXPECT_THROW(build_omega(SampledFunction({1.0, -1.0}), 1.0), ValidationError);
  EXPECT_THROW(build_omega(f, 1.5), ValidationError);
}

TEST(BuildOmega, ShiftBoundTransfersToMaximalFunction) {
  const double eps = 0.3;
  const auto f = build_ftilde(FtildeSpec::from_indices(eps, {2, 4}), desk_grid(7));
  const auto w = build_omega(f, 1.0).omega;
  const double bound = std::exp(std::numbers::pi * eps / (1 - eps));
  for (unsigned m = 1; m <= 7; ++m) {
    const auto shifted = w.cyclic_shift(w.grid_size() / pow3(m));
    for (std::size_t i = 0; i < w.grid_size(); ++i) {
      ASSERT_LE(shifted[i], bound * w[i] * (1 + 1e-12));
      ASSERT_GE(shifted[i] * (1 + 1e-12), w[i] / bound);
    }
  }
}

}  // namespace
}  // namespace weightlab
