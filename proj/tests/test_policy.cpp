#include <gtest/gtest.h>

#include <cmath>

#include "rarexact/numerics.hpp"
#include "rarexact/policy.hpp"

using namespace rarexact;

namespace {

// Straight-line Hu-Zhang allocation with half-success shrinkage.
double dbcd_reference(int sc, int nc, int sd, int nd, double gamma) {
  const double tc = (sc + 0.5) / (nc + 1.0), td = (sd + 0.5) / (nd + 1.0);
  const double rho = std::sqrt(tc * (1 - tc)) / (std::sqrt(tc * (1 - tc)) + std::sqrt(td * (1 - td)));
  const double r = static_cast<double>(nc) / (nc + nd);
  const double u = rho * std::pow(rho / r, gamma), v = (1 - rho) * std::pow((1 - rho) / (1 - r), gamma);
  return std::clamp(u / (u + v), 0.01, 0.99);
}

}  // namespace

TEST(Neyman, Examples) {
  for (double th : {0.01, 0.3, 0.5, 0.97}) EXPECT_DOUBLE_EQ(neyman_target(th, th), 0.5);
  EXPECT_NEAR(neyman_target(0.5, 0.52), 0.50, 0.005);
  EXPECT_NEAR(neyman_target(0.97, 0.99), 0.63, 0.005);
  EXPECT_THROW(neyman_target(0.0, 0.5), std::domain_error);
}

TEST(Dbcd, AllocationFunctionFixedPoints) {
  for (double rho : {0.2, 0.5, 0.63})
    for (double g : {0.0, 1.0, 2.0, 5.0}) EXPECT_NEAR(dbcd_allocation(rho, rho, g), rho, 1e-15);
  for (double r : {0.2, 0.5, 0.8}) EXPECT_NEAR(dbcd_allocation(0.37, r, 0.0), 0.37, 1e-15);
}

TEST(Dbcd, MatchesReferenceImplementation) {
  EXPECT_NEAR(dbcd_prob({3, 3, 6, 6}, 2.0), dbcd_reference(3, 6, 3, 6, 2.0), 1e-15);
  for (int nc = 1; nc <= 12; ++nc)
    for (int nd = 1; nd <= 12; ++nd)
      for (int sc = 0; sc <= nc; ++sc)
        for (int sd = 0; sd <= nd; ++sd)
          for (double g : {0.0, 2.0, 3.5})
            ASSERT_NEAR(dbcd_prob({sc, sd, nc, nd}, g), dbcd_reference(sc, nc, sd, nd, g), 1e-14);
}

TEST(Dbcd, MonotoneInTarget) {
  for (double r : {0.1, 0.4, 0.5, 0.7, 0.95}) {
    double prev = 0.0;
    for (int i = 1; i < 200; ++i) {
      const double q = dbcd_allocation(i / 200.0, r, 2.0);
      EXPECT_GE(q, prev);
      prev = q;
    }
  }
}

TEST(Tempered, Branches) {
  // Find states covering each branch and compare against the definition.
  int seen_keep = 0, seen_half = 0, seen_tie = 0;
  for (int nc = 1; nc <= 10; ++nc)
    for (int nd = 1; nd <= 10; ++nd)
      for (int sc = 0; sc <= nc; ++sc)
        for (int sd = 0; sd <= nd; ++sd) {
          const TrialState x{sc, sd, nc, nd};
          const double q = dbcd_prob(x, 2.0);
          const double tc = dbcd_estimate(sc, nc), td = dbcd_estimate(sd, nd);
          const double t = tempered_dbcd_prob(x, 2.0);
          if (tc == td) {
            EXPECT_EQ(t, 0.5);
            ++seen_tie;
          } else if ((q > 0.5 && tc > td) || (q < 0.5 && td > tc)) {
            EXPECT_EQ(t, q);
            ++seen_keep;
          } else {
            EXPECT_EQ(t, 0.5);
            ++seen_half;
          }
        }
  EXPECT_GT(seen_keep, 0);
  EXPECT_GT(seen_half, 0);
  EXPECT_GT(seen_tie, 0);
}

TEST(Brar, Examples) {
  EXPECT_EQ(brar_prob({0, 0, 0, 0}, 50), 0.5);
  EXPECT_EQ(brar_prob({2, 2, 4, 4}, 50), 0.5);
  // P = 5/6 at x = ((1,0),(1,1)); exponent (t + 1) / (2n) with t = 2, n = 4.
  const double e = 3.0 / 8.0, pc = std::pow(5.0 / 6.0, e), pd = std::pow(1.0 / 6.0, e);
  EXPECT_NEAR(brar_prob({1, 0, 1, 1}, 4), pc / (pc + pd), 1e-14);
}

TEST(Brar, LayerFillMatchesPointwise) {
  for (int n : {20, 60}) {
    const Policy p(BayesianRar{}, n, 1);
    for (int t = 2; t < n; t += 3) {
      const LayerIndex li(t, 1);
      std::vector<double> q(li.size());
      p.layer_probs(li, q);
      li.for_each([&](std::size_t i, const TrialState& x) {
        const double ref = brar_prob(x, n);
        ASSERT_NEAR(q[i], ref, 1e-13 + 1e-11 * std::min(ref, 1 - ref)) << t;
      });
    }
  }
}

TEST(Policy, SymmetryUnderArmSwap) {
  const int n = 30;
  for (const PolicyKind& k : {PolicyKind{DbcdNeyman{}}, PolicyKind{TemperedDbcdNeyman{}}, PolicyKind{BayesianRar{}}}) {
    const Policy p(k, n, 1);
    EXPECT_TRUE(p.is_symmetric());
    for (int t = 2; t < n; ++t) {
      const LayerIndex li(t, 1);
      li.for_each([&](std::size_t, const TrialState& x) {
        ASSERT_NEAR(*p.alloc_prob(swap_arms(x)), 1.0 - *p.alloc_prob(x), 1e-12) << p.name();
      });
    }
  }
  EXPECT_TRUE(Policy(EqualAllocation{}, n, 1).is_symmetric());
}

TEST(Policy, BurnInOverridesRule) {
  const Policy p(BayesianRar{}, 20, 3);
  EXPECT_EQ(*p.alloc_prob({0, 0, 0, 0}), 1.0);
  EXPECT_EQ(*p.alloc_prob({1, 0, 1, 0}), 0.0);
  EXPECT_EQ(*p.alloc_prob({1, 1, 2, 2}), 1.0);
  EXPECT_FALSE(Policy(EqualAllocation{}, 20, 3).alloc_prob({3, 3, 3, 3}).has_value());
}

TEST(PolicyTable, ActionsAreFromTheThreePointSet) {
  auto table = std::make_shared<PolicyTable>(10, 2, 0.95);
  table->layer_codes(5)[0] = PolicyTable::kLow;
  table->layer_codes(6)[3] = PolicyTable::kHigh;
  const Policy p(CmdpTable{table}, 10, 2);
  for (int t = 4; t < 10; ++t)
    LayerIndex(t, 2).for_each([&](std::size_t, const TrialState& x) {
      const double q = *p.alloc_prob(x);
      EXPECT_TRUE(q == 1.0 - 0.95 || q == 0.5 || q == 0.95) << q;
    });
  EXPECT_EQ(table->code(LayerIndex(5, 2).state(0)), PolicyTable::kLow);
  EXPECT_EQ(table->layer_codes(1)[0], PolicyTable::kBurnIn);
  EXPECT_THROW(table->action_prob(7), std::out_of_range);
  EXPECT_THROW(Policy(CmdpTable{table}, 12, 2), std::invalid_argument);
}

TEST(Policy, TemperedTieGivesHalf) {
  const Policy p(TemperedDbcdNeyman{}, 20, 1);
  EXPECT_EQ(*p.alloc_prob({2, 2, 5, 5}), 0.5);
}

TEST(Policy, RejectsOutOfRangeCustomRule) {
  const Policy p(CustomRule{[](const TrialState&) { return 1.5; }}, 4, 0);
  EXPECT_THROW(p.alloc_prob({0, 0, 0, 0}), std::domain_error);
}
