#pragma once

#include <span>
#include <string>
#include <vector>

#include "rarexact/numerics.hpp"
#include "rarexact/policy.hpp"
#include "rarexact/state_space.hpp"

namespace rarexact {

struct Measure {
  enum class Kind { kAltUniform, kNullUniform, kPoint, kRectangle };
  Kind kind = Kind::kAltUniform;
  double theta0 = 0.0;
  double lc = 0.0, uc = 1.0, ld = 0.0, ud = 1.0;

  static Measure alt_uniform() { return {}; }
  static Measure null_uniform() { return {Kind::kNullUniform}; }
  static Measure point(double theta0) { return {Kind::kPoint, theta0}; }
  static Measure rectangle(double lc, double uc, double ld, double ud);
};

/// Log of the prior-predictive weight w(x) with sum_x g(x) w(x) = 1.
LogWeight measure_log_weight(const TrialState& x, const Measure& m);

enum class DualMethod { kSubgradient, kCuttingPlane };

struct DualSettings {
  DualMethod method = DualMethod::kCuttingPlane;
  int max_iterations = 400;
  double tolerance = 1e-4;  // feasibility tolerance on audited constraints
  // Subgradient: eta_k = step0 / sqrt(k).
  double step0 = 3.0;
  bool stop_when_feasible = false;
  // Cutting plane: multiplier box, stabilization weight, relative gap.
  double multiplier_cap = 10.0;
  double stabilization = 0.5;
  double gap_tolerance = 1e-7;
};

struct CmdpSpec {
  int n = 50;
  int burn_in = 6;
  double p = 0.95;
  double alpha = 0.05;            // embedded asymptotic Wald test
  double average_bound = 0.045;   // alpha'
  double pointwise_bound = 0.05;  // alpha''
  bool average_constraint = true;
  std::vector<double> null_grid;  // Theta_0
  std::vector<Measure> rectangles;
  double benefit_floor = 0.5;
  DualSettings dual;
};

/// Default 21-point null grid {0, 0.05, ..., 1}.
std::vector<double> default_null_grid();
/// All ordered pairs of distinct intervals from the six-interval partition.
std::vector<Measure> default_rectangles();

struct ConstraintValue {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool upper = true;  // value <= bound, else value >= bound
  double violation() const { return upper ? value - bound : bound - value; }
};

struct AuditReport {
  double objective = 0.0;  // Bayesian average power
  std::vector<ConstraintValue> constraints;
  double max_violation() const;
  bool feasible(double tol) const { return max_violation() <= tol; }
};

struct IterateRecord {
  int iteration = 0;
  double objective = 0.0;
  double max_violation = 0.0;
  double lagrangian = 0.0;
};

struct DualState {
  std::vector<double> multipliers;
  std::vector<IterateRecord> history;
};

struct CmdpSolution {
  PolicyTable table;
  AuditReport audit;
  DualState dual;
  bool feasible = false;
  int iteration = 0;
};

/// Backward induction over layers n-1..2b. `relative_reward` is the terminal
/// reward divided by w_alt(x) = B(s_c+1, f_c+1) B(s_d+1, f_d+1); in this
/// scaling each arm's outcome split is a Laplace-rule convex combination.
/// The returned value equals sum_x g(x) reward(x) under the optimal table.
struct BackwardResult {
  PolicyTable table;
  double value = 0.0;
};
BackwardResult lagrangian_backward(std::span<const double> relative_reward, int n, int burn_in, double p);
/// Evaluation mode: the same recursion with the table's actions fixed.
double evaluate_backward(const PolicyTable& table, std::span<const double> relative_reward);
/// Converts a natural terminal reward to the relative scaling above.
std::vector<double> relative_reward(std::span<const double> reward, int n, int burn_in);

AuditReport audit_policy(const PolicyTable& table, const CmdpSpec& spec);
CmdpSolution solve_cmdp(const CmdpSpec& spec);

}  // namespace rarexact
