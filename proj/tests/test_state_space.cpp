#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "rarexact/state_space.hpp"

using namespace rarexact;

TEST(Layer, EmptyTrialHasOneState) {
  const auto li = layer(0, 0, 10);
  ASSERT_EQ(li.size(), 1u);
  EXPECT_EQ(li.state(0), (TrialState{0, 0, 0, 0}));
}

TEST(Layer, EndOfBurnInIsBalanced) {
  const auto li = layer(12, 6, 50);
  ASSERT_EQ(li.size(), 49u);
  li.for_each([](std::size_t, const TrialState& x) {
    EXPECT_EQ(x.n_c, 6);
    EXPECT_EQ(x.n_d, 6);
  });
  for (int b = 0; b <= 8; ++b) EXPECT_EQ(layer(2 * b, b, 20).size(), static_cast<std::size_t>((b + 1) * (b + 1)));
}

TEST(Layer, TwoParticipantsWithoutBurnIn) {
  // (n_c + 1)(n_d + 1) summed over n_c = 0, 1, 2.
  EXPECT_EQ(layer(2, 0, 4).size(), 10u);
}

TEST(Layer, RejectsInfeasibleArguments) {
  EXPECT_THROW(layer(11, 0, 10), std::invalid_argument);
  EXPECT_THROW(layer(4, 6, 10), std::invalid_argument);
  EXPECT_THROW(layer(-1, 0, 10), std::invalid_argument);
}

TEST(Layer, IndexOrderIsAscendingNcThenScThenSd) {
  const auto li = layer(1, 0, 4);
  EXPECT_EQ(li.index({0, 0, 0, 1}), 0u);
  EXPECT_EQ(li.index({0, 1, 0, 1}), 1u);
  EXPECT_EQ(li.index({0, 0, 1, 0}), 2u);
  EXPECT_EQ(li.index({1, 0, 1, 0}), 3u);
  EXPECT_THROW(li.index({0, 0, 2, 0}), std::out_of_range);
}

TEST(Layer, SizeMatchesHistoryEnumeration) {
  for (int n = 0; n <= 8; ++n)
    for (int b = 0; 2 * b <= n && b <= 2; ++b) {
      // Alternating burn-in, then either arm.
      std::set<oracle::Key> reach;
      std::function<void(TrialState)> rec = [&](TrialState x) {
        if (x.epoch() == n) {
          reach.insert(oracle::key(x));
          return;
        }
        const int t = x.epoch();
        const bool c_ok = t >= 2 * b || t % 2 == 0;
        const bool d_ok = t >= 2 * b || t % 2 == 1;
        if (c_ok) {
          rec({x.s_c + 1, x.s_d, x.n_c + 1, x.n_d});
          rec({x.s_c, x.s_d, x.n_c + 1, x.n_d});
        }
        if (d_ok) {
          rec({x.s_c, x.s_d + 1, x.n_c, x.n_d + 1});
          rec({x.s_c, x.s_d, x.n_c, x.n_d + 1});
        }
      };
      rec({});
      const auto li = layer(n, b, n);
      EXPECT_EQ(li.size(), reach.size()) << "n=" << n << " b=" << b;
      li.for_each([&](std::size_t, const TrialState& x) { EXPECT_TRUE(reach.count(oracle::key(x))); });
      if (n >= 2 * b) {
        std::size_t formula = 0;
        for (int nc = b; nc <= n - b; ++nc) formula += static_cast<std::size_t>(nc + 1) * (n - nc + 1);
        EXPECT_EQ(li.size(), formula);
      }
    }
}

TEST(Layer, IndexIsBijection) {
  for (int b : {0, 1, 6})
    for (int t = 0; t <= 60; ++t) {
      if (2 * b > 60) continue;
      const auto li = layer(t, b, 60);
      for (std::size_t i = 0; i < li.size(); ++i) ASSERT_EQ(li.index(li.state(i)), i);
      std::size_t expect = 0;
      li.for_each([&](std::size_t i, const TrialState& x) {
        ASSERT_EQ(i, expect++);
        ASSERT_EQ(li.index_unchecked(x.s_c, x.s_d, x.n_c), i);
      });
    }
}

TEST(Successors, Examples) {
  auto [s1, f1] = successors({0, 0, 0, 0}, Arm::kControl);
  EXPECT_EQ(s1, (TrialState{1, 0, 1, 0}));
  EXPECT_EQ(f1, (TrialState{0, 0, 1, 0}));
  auto [s2, f2] = successors({1, 2, 2, 2}, Arm::kDevelopmental);
  EXPECT_EQ(s2, (TrialState{1, 3, 2, 3}));
  EXPECT_EQ(f2, (TrialState{1, 2, 2, 3}));
}

TEST(Successors, EveryStateHasItsPredecessors) {
  const auto prev = layer(4, 0, 5), cur = layer(5, 0, 5);
  std::set<oracle::Key> hit;
  prev.for_each([&](std::size_t, const TrialState& x) {
    for (Arm a : {Arm::kControl, Arm::kDevelopmental}) {
      auto [s, f] = successors(x, a);
      EXPECT_TRUE(cur.contains(s));
      EXPECT_TRUE(cur.contains(f));
      hit.insert(oracle::key(s));
      hit.insert(oracle::key(f));
    }
  });
  EXPECT_EQ(hit.size(), cur.size());
}

TEST(TrialState, SwapAndValidity) {
  const TrialState x{1, 2, 3, 4};
  EXPECT_EQ(swap_arms(x), (TrialState{2, 1, 4, 3}));
  EXPECT_EQ(swap_arms(swap_arms(x)), x);
  EXPECT_TRUE(is_valid(x));
  EXPECT_FALSE(is_valid({4, 0, 3, 0}));
}

TEST(Layer, TotalStates) {
  std::size_t acc = 0;
  for (int t = 0; t <= 20; ++t) acc += layer(t, 3, 20).size();
  EXPECT_EQ(total_states(20, 3), acc);
}
