#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "rarexact/rng.hpp"

using namespace rarexact;

TEST(Philox, KnownAnswers) {
  using B = std::array<std::uint32_t, 4>;
  EXPECT_EQ(CounterRng::block({0, 0, 0, 0}, {0, 0}), (B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(CounterRng::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(CounterRng::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterRng, StreamsAreReproducibleAndDistinct) {
  CounterRng a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    seen.insert(x);
    seen.insert(c.next_u64());
    seen.insert(d.next_u64());
  }
  EXPECT_EQ(seen.size(), 300u);
}

TEST(CounterRng, UniformMoments) {
  CounterRng r(7, 3);
  double s = 0.0, s2 = 0.0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    s2 += u * u;
  }
  EXPECT_NEAR(s / m, 0.5, 4 * std::sqrt(1.0 / 12 / m));
  EXPECT_NEAR(s2 / m, 1.0 / 3, 0.005);
}

TEST(CounterRng, BelowIsUnbiased) {
  CounterRng r(9, 0);
  std::array<int, 7> count{};
  const int m = 70000;
  for (int i = 0; i < m; ++i) ++count[r.below(7)];
  double chi = 0.0;
  for (int c : count) chi += (c - m / 7.0) * (c - m / 7.0) / (m / 7.0);
  EXPECT_LT(chi, 22.5);  // chi-square(6) upper 0.001 quantile
}
