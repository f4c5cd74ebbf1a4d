#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rarexact/cmdp.hpp"
#include "rarexact/oc.hpp"

using namespace rarexact;

namespace {

std::shared_ptr<PolicyTable> random_table(int n, int b, std::uint32_t seed) {
  auto t = std::make_shared<PolicyTable>(n, b, 0.95);
  std::mt19937 gen(seed);
  for (int e = 2 * b; e < n; ++e)
    for (auto& c : t->layer_codes(e)) c = static_cast<std::uint8_t>(gen() % 3);
  return t;
}

double forward_value(const PolicyTable& t, const std::vector<double>& reward) {
  const auto g = forward_g(Policy(CmdpTable{std::make_shared<PolicyTable>(t)}, t.horizon(), t.burn_in()));
  double v = 0.0;
  for (std::size_t i = 0; i < reward.size(); ++i)
    if (g.log_g[i] != kNegInf) v += std::exp(g.log_g[i]) * reward[i];
  return v;
}

std::vector<double> random_reward(int n, int b, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> r(LayerIndex(n, b).size());
  for (auto& v : r) v = u(gen);
  return r;
}

// Exhaustive search over every deterministic three-action table.
double best_over_all_tables(int n, int b, const std::vector<double>& reward) {
  PolicyTable t(n, b, 0.95);
  std::vector<std::uint8_t*> slots;
  for (int e = 2 * b; e < n; ++e)
    for (auto& c : t.layer_codes(e)) slots.push_back(&c);
  double best = -INFINITY;
  std::vector<int> digit(slots.size(), 0);
  while (true) {
    for (std::size_t k = 0; k < slots.size(); ++k) *slots[k] = static_cast<std::uint8_t>(digit[k]);
    best = std::max(best, forward_value(t, reward));
    std::size_t k = 0;
    while (k < digit.size() && ++digit[k] == 3) digit[k++] = 0;
    if (k == digit.size()) break;
  }
  return best;
}

CmdpSpec small_spec(int n, int b) {
  CmdpSpec s;
  s.n = n;
  s.burn_in = b;
  s.null_grid = default_null_grid();
  s.dual.max_iterations = 60;
  return s;
}

}  // namespace

TEST(Measure, NormalizedAgainstPathWeights) {
  const auto g = forward_g(Policy(BayesianRar{}, 20, 1));
  const std::vector<Measure> ms{Measure::alt_uniform(), Measure::null_uniform(), Measure::point(0.3),
                                Measure::point(0.0), Measure::rectangle(0.0, 0.25, 0.5, 0.75)};
  for (const auto& m : ms) {
    NeumaierSum s;
    g.layer().for_each([&](std::size_t i, const TrialState& x) {
      const double lw = g.log_g[i] + measure_log_weight(x, m);
      if (lw != kNegInf) s.add(std::exp(lw));
    });
    EXPECT_NEAR(s.value(), 1.0, 1e-12);
  }
}

TEST(Measure, RectangleMatchesQuadrature) {
  using boost::math::quadrature::gauss_kronrod;
  const Measure m = Measure::rectangle(0.1, 0.25, 0.5, 0.75);
  for (const TrialState x : {TrialState{0, 0, 3, 4}, TrialState{2, 5, 7, 9}, TrialState{10, 1, 12, 14}}) {
    auto arm = [](int s, int f, double l, double u) {
      return gauss_kronrod<double, 31>::integrate(
                 [&](double t) { return std::pow(t, s) * std::pow(1 - t, f); }, l, u, 10, 1e-14) /
             (u - l);
    };
    const double ref = arm(x.s_c, x.failures_c(), 0.1, 0.25) * arm(x.s_d, x.failures_d(), 0.5, 0.75);
    EXPECT_NEAR(std::exp(measure_log_weight(x, m)), ref, 1e-12 * ref);
  }
  EXPECT_NEAR(measure_log_weight({1, 2, 3, 4}, Measure::alt_uniform()), std::log(1.0 / 12 * 1.0 / 30), 1e-13);
  EXPECT_THROW(Measure::rectangle(0.1, 0.5, 0.3, 0.6), std::invalid_argument);
}

TEST(Backward, MatchesAllPolicyEnumeration) {
  for (auto [n, b] : {std::pair{3, 1}, std::pair{5, 2}}) {
    for (std::uint32_t seed : {1u, 2u}) {
      const auto reward = random_reward(n, b, seed * 31 + n);
      const auto rel = relative_reward(reward, n, b);
      const auto res = lagrangian_backward(rel, n, b, 0.95);
      const double brute = best_over_all_tables(n, b, reward);
      EXPECT_NEAR(res.value, brute, 1e-12) << n << ' ' << b;
      EXPECT_NEAR(forward_value(res.table, reward), brute, 1e-12);
    }
  }
}

TEST(Backward, EvaluationEqualsForwardSum) {
  for (int n : {10, 21, 30})
    for (int b : {0, 2}) {
      const auto table = random_table(n, b, n + b);
      const auto reward = random_reward(n, b, n * 7 + b);
      std::vector<double> mag(reward.size());
      for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(reward[i]);
      EXPECT_NEAR(evaluate_backward(*table, relative_reward(reward, n, b)), forward_value(*table, reward),
                  1e-12 * forward_value(*table, mag));
    }
}

TEST(Backward, ZeroRewardPicksHalf) {
  const int n = 12, b = 1;
  const std::vector<double> zero(LayerIndex(n, b).size(), 0.0);
  const auto res = lagrangian_backward(zero, n, b, 0.95);
  EXPECT_EQ(res.value, 0.0);
  for (int t = 2; t < n; ++t)
    for (auto c : res.table.layer_codes(t)) EXPECT_EQ(c, PolicyTable::kHalf);
}

TEST(Backward, UnconstrainedBeatsEveryFixedTable) {
  const int n = 16, b = 2;
  std::vector<double> reward(LayerIndex(n, b).size());
  LayerIndex(n, b).for_each([&](std::size_t i, const TrialState& x) {
    reward[i] = asymptotic_reject(x, 0.05) ? std::exp(measure_log_weight(x, Measure::alt_uniform())) : 0.0;
  });
  const auto res = lagrangian_backward(relative_reward(reward, n, b), n, b, 0.95);
  EXPECT_GE(res.value + 1e-12, forward_value(PolicyTable(n, b, 0.95), reward));
  for (std::uint32_t s = 0; s < 5; ++s) EXPECT_GE(res.value + 1e-12, forward_value(*random_table(n, b, s), reward));
}

TEST(Audit, MatchesForwardOperatingCharacteristics) {
  CmdpSpec spec = small_spec(16, 2);
  spec.rectangles = {Measure::rectangle(0.5, 0.75, 0.0, 0.25), Measure::rectangle(0.1, 0.25, 0.75, 1.0)};
  const auto table = random_table(16, 2, 3);
  const auto rep = audit_policy(*table, spec);
  const auto g = forward_g(Policy(CmdpTable{table}, 16, 2));
  double obj = 0.0;
  g.layer().for_each([&](std::size_t i, const TrialState& x) {
    if (g.log_g[i] != kNegInf && asymptotic_reject(x, 0.05))
      obj += std::exp(g.log_g[i] + measure_log_weight(x, Measure::alt_uniform()));
  });
  EXPECT_NEAR(rep.objective, obj, 1e-12);
  using GL = boost::math::quadrature::gauss<double, 20>;
  for (const auto& c : rep.constraints) {
    if (c.name.rfind("pointwise_type1@", 0) == 0) {
      const double th = std::stod(c.name.substr(16));
      EXPECT_NEAR(c.value, rejection_rate(g, AsymptoticRule{}, th, th), 1e-12) << c.name;
    } else if (c.name == "average_type1") {
      const double ref = GL::integrate([&](double t) { return rejection_rate(g, AsymptoticRule{}, t, t); }, 0.0, 1.0);
      EXPECT_NEAR(c.value, ref, 1e-12);
    } else {
      const Measure& m = c.name == "benefit@[0.5,0.75]x[0,0.25]" ? spec.rectangles[0] : spec.rectangles[1];
      const double ref = GL::integrate(
                             [&](double tc) {
                               return GL::integrate([&](double td) { return patient_benefit(g, tc, td); }, m.ld,
                                                    m.ud);
                             },
                             m.lc, m.uc) /
                         ((m.uc - m.lc) * (m.ud - m.ld));
      EXPECT_NEAR(c.value, ref, 1e-12) << c.name;
      EXPECT_FALSE(c.upper);
    }
  }
}

TEST(Solver, DualBoundDominatesIncumbent) {
  // Single average constraint: the scalar dual function is scanned on a grid.
  CmdpSpec spec = small_spec(14, 1);
  spec.null_grid.clear();
  spec.average_bound = 0.03;
  const auto sol = solve_cmdp(spec);
  ASSERT_TRUE(sol.feasible);
  const int n = spec.n, b = spec.burn_in;
  std::vector<double> rej(LayerIndex(n, b).size()), wa(rej.size()), wn(rej.size());
  LayerIndex(n, b).for_each([&](std::size_t i, const TrialState& x) {
    rej[i] = asymptotic_reject(x, spec.alpha) ? 1.0 : 0.0;
    wa[i] = std::exp(measure_log_weight(x, Measure::alt_uniform()));
    wn[i] = std::exp(measure_log_weight(x, Measure::null_uniform()));
  });
  double dual_min = INFINITY, grid_best = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double lam = k * 0.01;
    std::vector<double> r(rej.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = rej[i] * (wa[i] - lam * wn[i]);
    const auto res = lagrangian_backward(relative_reward(r, n, b), n, b, spec.p);
    dual_min = std::min(dual_min, res.value + lam * spec.average_bound);
    const auto rep = audit_policy(res.table, spec);
    if (rep.feasible(spec.dual.tolerance)) grid_best = std::max(grid_best, rep.objective);
  }
  EXPECT_LE(sol.audit.objective, dual_min + 10.0 * spec.dual.tolerance);
  EXPECT_GE(sol.audit.objective, grid_best - 1e-9);
  EXPECT_LE(sol.audit.max_violation(), spec.dual.tolerance);
}

TEST(Solver, IncumbentAuditIsReproducible) {
  CmdpSpec spec = small_spec(16, 2);
  spec.dual.max_iterations = 40;
  const auto sol = solve_cmdp(spec);
  const auto rep = audit_policy(sol.table, spec);
  EXPECT_EQ(rep.objective, sol.audit.objective);
  ASSERT_EQ(rep.constraints.size(), sol.audit.constraints.size());
  for (std::size_t i = 0; i < rep.constraints.size(); ++i)
    EXPECT_EQ(rep.constraints[i].value, sol.audit.constraints[i].value);
  EXPECT_EQ(sol.feasible, rep.feasible(spec.dual.tolerance));
  EXPECT_FALSE(sol.dual.history.empty());
}

TEST(Solver, SubgradientRunsAndRespectsTolerance) {
  CmdpSpec spec = small_spec(16, 2);
  spec.dual.method = DualMethod::kSubgradient;
  const auto sol = solve_cmdp(spec);
  if (sol.feasible) EXPECT_LE(sol.audit.max_violation(), spec.dual.tolerance);
  EXPECT_EQ(static_cast<int>(sol.dual.history.size()), spec.dual.max_iterations);
}

TEST(Solver, RejectsInvalidSpec) {
  CmdpSpec spec = small_spec(16, 2);
  spec.pointwise_bound = 0.2;
  EXPECT_THROW(solve_cmdp(spec), std::invalid_argument);
  spec = small_spec(16, 9);
  EXPECT_THROW(solve_cmdp(spec), std::invalid_argument);
}
