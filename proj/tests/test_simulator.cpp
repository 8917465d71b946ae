#include <gtest/gtest.h>

#include <cmath>

#include "ballsbins/exact_solver.hpp"
#include "ballsbins/simulator.hpp"

using namespace ballsbins;

namespace {
const WeightVector skewed = WeightVector::parse("5/6,1/6");

void expect_near_exact(const SimSummary& s, const Rational& exact, double sigmas) {
  const double f = to_double(exact);
  if (s.stderr_x == 0) {
    EXPECT_EQ(s.mean_x, f);
  } else {
    EXPECT_LE(std::abs(s.mean_x - f), sigmas * s.stderr_x)
        << "mean " << s.mean_x << " exact " << f << " stderr " << s.stderr_x;
  }
}
}  // namespace

TEST(SplitMix64, KnownSequence) {
  // Reference outputs of the published SplitMix64 generator for state 0.
  SplitMix64 g(0);
  EXPECT_EQ(g(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(g(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(g(), 0x06c45d188009454fULL);
}

TEST(Simulate, SingleNonEmptyBinIsDeterministic) {
  for (auto mode : {SimMode::discrete, SimMode::continuous}) {
    const auto s = simulate(Allocation{4, 0}, WeightVector::uniform(2), {500, 3, mode});
    EXPECT_EQ(s.mean_x, 4);
    EXPECT_EQ(s.stderr_x, 0);
    EXPECT_EQ(s.mean_t, 0);
    EXPECT_EQ(s.histogram_x.size(), 1u);
  }
}

TEST(Simulate, OneBallEachEndsWithOne) {
  const auto s = simulate(Allocation{1, 1, 1}, WeightVector::uniform(3), {1000, 9});
  EXPECT_EQ(s.mean_x, 1);
  EXPECT_EQ(s.mean_t, 2);
}

TEST(Simulate, ReproducibleAndThreadIndependent) {
  const Allocation a{5, 3, 2};
  const auto w = WeightVector::parse("1/2,1/3,1/6");
  for (auto mode : {SimMode::discrete, SimMode::continuous}) {
    const auto one = simulate(a, w, {20000, 42, mode, false, 1});
    const auto again = simulate(a, w, {20000, 42, mode, false, 1});
    const auto four = simulate(a, w, {20000, 42, mode, false, 4});
    EXPECT_EQ(one.histogram_x, again.histogram_x);
    EXPECT_EQ(one.histogram_x, four.histogram_x);
    EXPECT_EQ(one.mean_x, four.mean_x);
    EXPECT_EQ(one.mean_t, four.mean_t);
    const auto other = simulate(a, w, {20000, 43, mode, false, 1});
    EXPECT_NE(one.histogram_x, other.histogram_x);
  }
}

TEST(Simulate, MatchesExactValuesUnderSkewedWeights) {
  for (auto mode : {SimMode::discrete, SimMode::continuous}) {
    const SimConfig cfg{1'000'000, 2024, mode, false, 4};
    expect_near_exact(simulate(Allocation{5, 1}, skewed, cfg), Rational(3125, 1296), 3);
    expect_near_exact(simulate(Allocation{4, 2}, skewed, cfg), Rational(139, 81), 3);
  }
}

TEST(Simulate, HistogramAccountsForEveryTrial) {
  const Allocation a{3, 2, 2};
  const auto s = simulate(a, WeightVector::uniform(3), {5000, 5});
  std::uint64_t n = 0;
  for (const auto& [x, c] : s.histogram_x) {
    EXPECT_GE(x, 1);
    EXPECT_LE(x, 3);
    n += c;
  }
  EXPECT_EQ(n, 5000u);
  EXPECT_EQ(s.trials, 5000u);
}

TEST(Simulate, RemovalsPlusRemainderIsTotal) {
  const Allocation a{4, 3, 1};
  const auto w = WeightVector::parse("1/4,1/4,1/2");
  for (auto mode : {SimMode::discrete, SimMode::continuous}) {
    const auto s = simulate(a, w, {4000, 11, mode});
    EXPECT_NEAR(s.mean_t + s.mean_x, 8.0, 1e-9);
  }
}

TEST(Simulate, LiteralSelectionHasSameLawForX) {
  const Allocation a{3, 2, 1};
  const auto w = WeightVector::uniform(3);
  const auto lit = simulate(a, w, {200000, 8, SimMode::discrete, true});
  const auto eff = simulate(a, w, {200000, 8, SimMode::discrete, false});
  expect_near_exact(lit, expected_remaining(a, w), 4);
  // Wasted rounds on empty bins make literal T at least the number of removals.
  EXPECT_GE(lit.mean_t, eff.mean_t);
  EXPECT_NEAR(eff.mean_t + eff.mean_x, 6.0, 1e-9);
}

TEST(Simulate, RejectsBadInput) {
  const auto u2 = WeightVector::uniform(2);
  EXPECT_THROW(simulate(Allocation{1, 1}, u2, {0}), ValidationError);
  EXPECT_THROW(simulate(Allocation{0, 0}, u2, {}), ValidationError);
  EXPECT_THROW(simulate(Allocation{1, 1, 1}, u2, {}), ValidationError);
  EXPECT_THROW(simulate(Allocation{1, 1}, u2, {10, 1, SimMode::continuous, true}), ValidationError);
  try {
    simulate(Allocation{1, 1, 1}, u2, {});
  } catch (const ValidationError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("length mismatch: ", 0), 0u);
  }
}

TEST(CompareModes, AgreeWithEachOtherAndTheSolver) {
  for (const auto& [a, w] : {std::pair{Allocation{3, 3}, WeightVector::uniform(2)},
                             std::pair{Allocation{1, 1}, WeightVector::uniform(2)},
                             std::pair{Allocation{4, 1, 1}, WeightVector::uniform(3)},
                             std::pair{Allocation{5, 1}, skewed}}) {
    const auto cmp = compare_modes(a, w, 100000, 77, {}, 2);
    EXPECT_TRUE(cmp.agree()) << a.to_string() << " z=" << cmp.z << " chi2=" << cmp.chi_square;
    const Rational f = expected_remaining(a, w);
    expect_near_exact(cmp.discrete, f, 4);
    expect_near_exact(cmp.continuous, f, 4);
  }
}
