#include <gtest/gtest.h>

#include <random>
#include <set>

#include "ballsbins/core_model.hpp"

using namespace ballsbins;

namespace {
ProcessState state_of(std::vector<Count> residuals) {
  ProcessState s;
  s.residuals = std::move(residuals);
  s.selection_counts.assign(s.residuals.size(), 0);
  return s;
}
}  // namespace

TEST(Step, RemovesFromNonEmptyBin) {
  const auto s = step(state_of({2, 1}), 1, StepMode::plain);
  EXPECT_EQ(s.residuals, (std::vector<Count>{2, 0}));
  EXPECT_EQ(s.round, 1u);
  EXPECT_EQ(s.selection_counts, (std::vector<Count>{0, 1}));
}

TEST(Step, EmptyBinIsNoOpInPlainMode) {
  const auto s = step(state_of({2, 0}), 1, StepMode::plain);
  EXPECT_EQ(s.residuals, (std::vector<Count>{2, 0}));
  EXPECT_EQ(s.round, 1u);
}

TEST(Step, SignedModeGoesNegative) {
  const auto s = step(state_of({2, 0}), 1, StepMode::signed_);
  EXPECT_EQ(s.residuals, (std::vector<Count>{2, -1}));
}

TEST(Step, RejectsUnknownBin) {
  EXPECT_THROW(step(state_of({1, 1}), 2, StepMode::plain), ValidationError);
}

TEST(IsTerminal, AtMostOneNonEmptyBin) {
  EXPECT_TRUE(is_terminal(state_of({3, 0, 0})));
  EXPECT_FALSE(is_terminal(state_of({1, 1, 0})));
  EXPECT_TRUE(is_terminal(state_of({0, 0})));
  EXPECT_TRUE(is_terminal(state_of({0, -1, 2})));
}

TEST(Allocation, ParseAndPrint) {
  const auto a = Allocation::parse("5,1");
  EXPECT_EQ(a, (Allocation{5, 1}));
  EXPECT_EQ(a.to_string(), "5,1");
  EXPECT_EQ(a.total(), 6);
  EXPECT_EQ(Allocation::parse(Allocation{0, 3, 7}.to_string()), (Allocation{0, 3, 7}));
  for (const char* bad : {"", "5,", ",5", "5,-1", "a,1", "5 ,1", "1,99999999999999999999"})
    EXPECT_THROW(Allocation::parse(bad), ValidationError) << bad;
  EXPECT_THROW(Allocation(std::vector<Count>{}), ValidationError);
  EXPECT_THROW((Allocation{1, -2}), ValidationError);
}

TEST(Allocation, Transfer) {
  EXPECT_EQ((Allocation{5, 1}.transfer(0, 1)), (Allocation{4, 2}));
  EXPECT_THROW((Allocation{0, 1}.transfer(0, 1)), ValidationError);
  EXPECT_THROW((Allocation{1, 1}.transfer(0, 2)), ValidationError);
}

TEST(WeightVector, ValidatesProbabilities) {
  const auto w = WeightVector::parse("5/6,1/6");
  EXPECT_EQ(w[0], Rational(5, 6));
  EXPECT_FALSE(w.is_uniform());
  EXPECT_EQ(w.to_string(), "5/6,1/6");
  EXPECT_TRUE(WeightVector::uniform(3).is_uniform());
  EXPECT_TRUE(WeightVector::parse("1/2,2/4").is_uniform());
  EXPECT_THROW(WeightVector::parse("1/2,1/3"), ValidationError);
  EXPECT_THROW(WeightVector::parse("1,0"), ValidationError);
  EXPECT_THROW(WeightVector::parse("3/2,-1/2"), ValidationError);
  EXPECT_THROW(WeightVector::parse("1/2;1/2"), ValidationError);
  EXPECT_EQ(WeightVector::parse("1/2,1/3,1/6").restricted({1, 2}),
            WeightVector::parse("2/3,1/3"));
}

TEST(WeightVector, LengthMismatchHasStablePrefix) {
  try {
    require_same_length(Allocation{1, 2, 3}, WeightVector::uniform(2));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(std::string(e.what()).rfind(prefix::mismatch, 0), 0u);
  }
}

TEST(BalancedAllocations, SmallCases) {
  EXPECT_EQ(balanced_allocations(2, 2), (std::vector<Allocation>{{1, 1}}));
  EXPECT_EQ(balanced_allocations(3, 2), (std::vector<Allocation>{{1, 2}, {2, 1}}));
  EXPECT_EQ(balanced_allocations(7, 3),
            (std::vector<Allocation>{{2, 2, 3}, {2, 3, 2}, {3, 2, 2}}));
  EXPECT_EQ(balanced_allocations(0, 3), (std::vector<Allocation>{{0, 0, 0}}));
  EXPECT_EQ(balanced_allocations(1, 3).size(), 3u);
  EXPECT_THROW(balanced_allocations(3, 1), ValidationError);
}

TEST(BalancedAllocations, ClosedUnderPermutationAndSumToN) {
  for (Count n = 0; n <= 12; ++n)
    for (std::size_t k = 2; k <= 5; ++k) {
      const auto set = balanced_allocations(n, k);
      const std::set<Allocation> members(set.begin(), set.end());
      EXPECT_EQ(members.size(), set.size());
      for (const auto& a : set) {
        EXPECT_EQ(a.total(), n);
        auto c = a.counts();
        EXPECT_LE(*std::max_element(c.begin(), c.end()) - *std::min_element(c.begin(), c.end()), 1);
        std::sort(c.begin(), c.end());
        do {
          EXPECT_TRUE(members.count(Allocation(c)));
        } while (std::next_permutation(c.begin(), c.end()));
      }
    }
}

TEST(ProportionalAllocation, IntegralQuotasAreExact) {
  EXPECT_EQ(proportional_allocation(6, WeightVector::parse("5/6,1/6")), (Allocation{5, 1}));
  EXPECT_EQ(proportional_allocation(4, WeightVector::uniform(2)), (Allocation{2, 2}));
}

TEST(ProportionalAllocation, LargestRemainderWithLowIndexTies) {
  // quotas 2.5, 1.25, 1.25: floors (2,1,1), the single extra ball goes to the
  // largest remainder.
  EXPECT_EQ(proportional_allocation(5, WeightVector::parse("1/2,1/4,1/4")),
            (Allocation{3, 1, 1}));
  // quotas 1/3 each: ties go to the lowest index.
  EXPECT_EQ(proportional_allocation(1, WeightVector::uniform(3)), (Allocation{1, 0, 0}));
  EXPECT_EQ(proportional_allocation(2, WeightVector::uniform(3)), (Allocation{1, 1, 0}));
  EXPECT_EQ(proportional_allocation(7, WeightVector::parse("2/3,1/3")), (Allocation{5, 2}));
  for (Count n = 0; n <= 30; ++n)
    EXPECT_EQ(proportional_allocation(n, WeightVector::parse("1/7,2/7,4/7")).total(), n);
}

TEST(ProcessState, RandomTracesKeepBookkeepingConsistent) {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t k = 2 + rng() % 4;
    std::vector<Count> init(k);
    for (auto& c : init) c = static_cast<Count>(rng() % 6);
    const Allocation alloc(init);
    RemovalTrace trace;
    const std::size_t len = rng() % 20;
    for (std::size_t t = 0; t < len; ++t) trace.selections.push_back(rng() % k);

    for (auto mode : {StepMode::plain, StepMode::signed_}) {
      const auto s = replay(alloc, trace, mode);
      EXPECT_EQ(s, replay(alloc, trace, mode));
      Count rounds = 0;
      for (std::size_t j = 0; j < k; ++j) {
        rounds += s.selection_counts[j];
        if (mode == StepMode::signed_)
          EXPECT_EQ(s.residuals[j], init[j] - s.selection_counts[j]);
        else
          EXPECT_EQ(s.residuals[j], std::max<Count>(0, init[j] - s.selection_counts[j]));
      }
      EXPECT_EQ(static_cast<Count>(s.round), rounds);
    }
  }
}

TEST(ProcessState, PlainAndSignedAgreeWithoutEmptySelections) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 300; ++rep) {
    const Allocation alloc{static_cast<Count>(rng() % 5), static_cast<Count>(rng() % 5),
                           static_cast<Count>(rng() % 5)};
    auto plain = ProcessState::initial(alloc);
    auto signed_state = plain;
    while (plain.non_empty() > 0) {
      std::vector<BinIndex> live;
      for (BinIndex j = 0; j < 3; ++j)
        if (plain.residuals[j] > 0) live.push_back(j);
      const auto b = live[rng() % live.size()];
      plain = step(std::move(plain), b, StepMode::plain);
      signed_state = step(std::move(signed_state), b, StepMode::signed_);
      EXPECT_EQ(plain, signed_state);
    }
  }
}
