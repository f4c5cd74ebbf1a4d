#include "rarexact/cmdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <stdexcept>

#include "rarexact/parallel.hpp"
#include "rarexact/path_engine.hpp"
#include "rarexact/wald.hpp"
#include "simplex.hpp"

namespace rarexact {

Measure Measure::rectangle(double lc, double uc, double ld, double ud) {
  if (!(0.0 <= lc && lc < uc && uc <= 1.0 && 0.0 <= ld && ld < ud && ud <= 1.0))
    throw std::invalid_argument("rectangle: degenerate interval");
  if (!(uc <= ld || ud <= lc)) throw std::invalid_argument("rectangle: intervals overlap");
  return Measure{Kind::kRectangle, 0.0, lc, uc, ld, ud};
}

namespace {

// ln of (I_u(a,b) - I_l(a,b)), choosing the tail that avoids cancellation.
double log_interval_mass(double l, double u, double a, double b) {
  const double il = beta_cdf(l, a, b);
  double d;
  if (il > 0.5)
    d = beta_cdf(1.0 - l, b, a) - beta_cdf(1.0 - u, b, a);
  else
    d = beta_cdf(u, a, b) - il;
  return d > 0.0 ? std::log(d) : kNegInf;
}

}  // namespace

LogWeight measure_log_weight(const TrialState& x, const Measure& m) {
  const int fc = x.failures_c(), fd = x.failures_d();
  switch (m.kind) {
    case Measure::Kind::kAltUniform:
      return log_beta(x.s_c + 1, fc + 1) + log_beta(x.s_d + 1, fd + 1);
    case Measure::Kind::kNullUniform:
      return log_beta(x.successes() + 1, fc + fd + 1);
    case Measure::Kind::kPoint:
      return binomial_log_kernel(x.s_c, fc, m.theta0) + binomial_log_kernel(x.s_d, fd, m.theta0);
    case Measure::Kind::kRectangle: {
      auto arm = [](int s, int f, double l, double u) {
        return log_interval_mass(l, u, s + 1.0, f + 1.0) - std::log(u - l) + log_beta(s + 1.0, f + 1.0);
      };
      return arm(x.s_c, fc, m.lc, m.uc) + arm(x.s_d, fd, m.ld, m.ud);
    }
  }
  return kNegInf;
}

std::vector<double> default_null_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 20; ++k) g.push_back(k / 20.0);
  return g;
}

std::vector<Measure> default_rectangles() {
  static constexpr double kCuts[] = {0.0, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0};
  std::vector<Measure> out;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (i != j) out.push_back(Measure::rectangle(kCuts[i], kCuts[i + 1], kCuts[j], kCuts[j + 1]));
  return out;
}

double AuditReport::max_violation() const {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& c : constraints) v = std::max(v, c.violation());
  return constraints.empty() ? 0.0 : v;
}

// ---------------------------------------------------------------------------
// Backward induction

namespace {

void check_shape(int n, int b, double p) {
  if (n < 1 || b < 0 || 2 * b > n) throw std::invalid_argument("cmdp: infeasible horizon/burn-in");
  if (n > 1000) throw std::overflow_error("horizon above 1000 exceeds the numeric guard");
  if (!(p >= 0.5 && p <= 1.0)) throw std::invalid_argument("cmdp: p outside [1/2, 1]");
}

// One backward step from layer t+1 values `next` to layer t.
template <class Choose>
void backward_layer(const LayerIndex& li, const LayerIndex& next_li, const std::vector<double>& next,
                    std::vector<double>& cur, Choose choose) {
  const int t = li.epoch();
  cur.resize(li.size());
  std::vector<int> blocks;
  for (int nc = li.min_nc(); nc <= li.max_nc(); ++nc) blocks.push_back(nc);
  parallel_for(blocks.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t bi = lo; bi < hi; ++bi) {
      const int nc = blocks[bi];
      const int nd = t - nc;
      const double inv_c = 1.0 / (nc + 2), inv_d = 1.0 / (nd + 2);
      std::size_t i = li.block_offset(nc);
      for (int sc = 0; sc <= nc; ++sc) {
        const double pc = (sc + 1) * inv_c;
        const std::size_t c_plus = next_li.index_unchecked(sc + 1, 0, nc + 1);
        const std::size_t c_minus = next_li.index_unchecked(sc, 0, nc + 1);
        const std::size_t d_base = next_li.index_unchecked(sc, 0, nc);
        for (int sd = 0; sd <= nd; ++sd, ++i) {
          const double wc = pc * next[c_plus + sd] + (1.0 - pc) * next[c_minus + sd];
          const double pd = (sd + 1) * inv_d;
          const double wd = pd * next[d_base + sd + 1] + (1.0 - pd) * next[d_base + sd];
          cur[i] = choose(i, wc, wd);
        }
      }
    }
  });
}

double burn_in_value(const std::vector<double>& w, int b) {
  double v = 0.0;
  for (double x : w) v += x;
  return v / ((b + 1.0) * (b + 1.0));
}

}  // namespace

std::vector<double> relative_reward(std::span<const double> reward, int n, int burn_in) {
  const LayerIndex li(n, burn_in);
  if (reward.size() != li.size()) throw std::invalid_argument("relative_reward: size mismatch");
  const LogFactorials lf(n + 1);
  std::vector<double> out(li.size());
  li.for_each([&](std::size_t i, const TrialState& x) {
    const double lw = lf.log_beta(x.s_c + 1, x.failures_c() + 1) + lf.log_beta(x.s_d + 1, x.failures_d() + 1);
    out[i] = reward[i] * std::exp(-lw);
  });
  return out;
}

BackwardResult lagrangian_backward(std::span<const double> relative_reward, int n, int b, double p) {
  check_shape(n, b, p);
  BackwardResult res{PolicyTable(n, b, p), 0.0};
  LayerIndex next_li(n, b);
  if (relative_reward.size() != next_li.size())
    throw std::invalid_argument("lagrangian_backward: reward size mismatch");
  std::vector<double> next(relative_reward.begin(), relative_reward.end());
  std::vector<double> cur;
  for (int t = n - 1; t >= 2 * b; --t) {
    const LayerIndex li(t, b);
    auto codes = res.table.layer_codes(t);
    backward_layer(li, next_li, next, cur, [&](std::size_t i, double wc, double wd) {
      // Candidates in tie-break order: 1/2, then 1-p, then p.
      double best = 0.5 * wc + 0.5 * wd;
      std::uint8_t code = PolicyTable::kHalf;
      const double low = (1.0 - p) * wc + p * wd;
      if (low > best) {
        best = low;
        code = PolicyTable::kLow;
      }
      const double high = p * wc + (1.0 - p) * wd;
      if (high > best) {
        best = high;
        code = PolicyTable::kHigh;
      }
      codes[i] = code;
      return best;
    });
    next.swap(cur);
    next_li = li;
  }
  res.value = burn_in_value(next, b);
  return res;
}

double evaluate_backward(const PolicyTable& table, std::span<const double> relative_reward) {
  const int n = table.horizon(), b = table.burn_in();
  LayerIndex next_li(n, b);
  if (relative_reward.size() != next_li.size())
    throw std::invalid_argument("evaluate_backward: reward size mismatch");
  std::vector<double> next(relative_reward.begin(), relative_reward.end());
  std::vector<double> cur;
  for (int t = n - 1; t >= 2 * b; --t) {
    const LayerIndex li(t, b);
    const auto codes = table.layer_codes(t);
    backward_layer(li, next_li, next, cur, [&](std::size_t i, double wc, double wd) {
      const double q = table.action_prob(codes[i]);
      return q * wc + (1.0 - q) * wd;
    });
    next.swap(cur);
    next_li = li;
  }
  return burn_in_value(next, b);
}

// ---------------------------------------------------------------------------
// Terminal model: rejection indicator and relative measure weights

namespace {

// w_m(x) / w_alt(x) on the terminal layer, either dense or as a product of
// per-arm tables indexed by n_a * (n + 1) + s_a.
struct RelativeWeights {
  bool dense = false;
  std::vector<double> values;
  std::vector<double> arm_c, arm_d;
};

struct Constraint {
  std::string name;
  RelativeWeights w;
  bool benefit = false;   // integrand n_{a*}/n instead of the rejection indicator
  bool favours_c = false;
  double bound = 0.0;
};

class TerminalModel {
 public:
  explicit TerminalModel(const CmdpSpec& spec) : spec_(spec), li_(spec.n, spec.burn_in), lf_(spec.n + 1) {
    const int n = spec.n;
    reject_.resize(li_.size());
    const double z = wald_critical_value(spec.alpha);
    li_.for_each([&](std::size_t i, const TrialState& x) {
      reject_[i] = (x.n_c > 0 && x.n_d > 0 && std::abs(wald_statistic(x)) >= z) ? 1 : 0;
    });
    if (spec.average_constraint) {
      Constraint c{"average_type1", {}, false, false, spec.average_bound};
      c.w.dense = true;
      c.w.values.resize(li_.size());
      li_.for_each([&](std::size_t i, const TrialState& x) {
        const int s = x.successes();
        c.w.values[i] = std::exp(lf_.log_beta(s + 1, n - s + 1) - log_alt(x));
      });
      constraints_.push_back(std::move(c));
    }
    for (double th : spec.null_grid) {
      if (!(th >= 0.0 && th <= 1.0)) throw std::invalid_argument("cmdp: null grid point outside [0,1]");
      Constraint c{"pointwise_type1@" + format(th), {}, false, false, spec.pointwise_bound};
      c.w.arm_c = arm_table([&](int s, int f) { return binomial_log_kernel(s, f, th); });
      c.w.arm_d = c.w.arm_c;
      constraints_.push_back(std::move(c));
    }
    for (const Measure& m : spec.rectangles) {
      if (m.kind != Measure::Kind::kRectangle) throw std::invalid_argument("cmdp: benefit measure must be a rectangle");
      Constraint c{"benefit@[" + format(m.lc) + "," + format(m.uc) + "]x[" + format(m.ld) + "," + format(m.ud) + "]",
                   {}, true, m.lc >= m.ud, spec.benefit_floor};
      auto rect = [&](double l, double u) {
        return arm_table([&](int s, int f) {
          return log_interval_mass(l, u, s + 1.0, f + 1.0) - std::log(u - l) + lf_.log_beta(s + 1, f + 1);
        });
      };
      c.w.arm_c = rect(m.lc, m.uc);
      c.w.arm_d = rect(m.ld, m.ud);
      constraints_.push_back(std::move(c));
    }
  }

  const LayerIndex& layer() const { return li_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  double weight(const Constraint& c, std::size_t i, const TrialState& x) const {
    if (c.w.dense) return c.w.values[i];
    const int stride = spec_.n + 1;
    return c.w.arm_c[x.n_c * stride + x.s_c] * c.w.arm_d[x.n_d * stride + x.s_d];
  }

  double integrand(const Constraint& c, std::size_t i, const TrialState& x) const {
    if (c.benefit) return static_cast<double>(c.favours_c ? x.n_c : x.n_d) / spec_.n;
    return reject_[i];
  }

  /// Relative reward f - sum_i lambda_i r_i, with benefit constraints
  /// entering as -(n_{a*}/n) so every constraint reads "<= bound".
  std::vector<double> reward(const std::vector<double>& lambda) const {
    std::vector<double> r(li_.size());
    li_.for_each([&](std::size_t i, const TrialState& x) {
      double v = reject_[i];
      for (std::size_t k = 0; k < constraints_.size(); ++k) {
        if (lambda[k] == 0.0) continue;
        const auto& c = constraints_[k];
        const double term = integrand(c, i, x) * weight(c, i, x);
        v += c.benefit ? lambda[k] * term : -lambda[k] * term;
      }
      r[i] = v;
    });
    return r;
  }

  AuditReport audit(const PolicyTable& table) const {
    if (table.horizon() != spec_.n || table.burn_in() != spec_.burn_in)
      throw std::invalid_argument("audit_policy: table shape mismatch");
    const Policy pol(CmdpTable{std::make_shared<PolicyTable>(table)}, spec_.n, spec_.burn_in);
    const auto a = forward_scaled(pol);
    // u(x) = g(x) w_alt(x)
    std::vector<double> u(li_.size());
    li_.for_each([&](std::size_t i, const TrialState& x) { u[i] = a[i] / ((x.n_c + 1.0) * (x.n_d + 1.0)); });
    AuditReport rep;
    NeumaierSum obj;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (reject_[i]) obj.add(u[i]);
    rep.objective = obj.value();
    for (const auto& c : constraints_) {
      NeumaierSum acc;
      li_.for_each([&](std::size_t i, const TrialState& x) {
        const double f = integrand(c, i, x);
        if (f != 0.0) acc.add(u[i] * f * weight(c, i, x));
      });
      rep.constraints.push_back(ConstraintValue{c.name, acc.value(), c.bound, !c.benefit});
    }
    return rep;
  }

 private:
  double log_alt(const TrialState& x) const {
    return lf_.log_beta(x.s_c + 1, x.failures_c() + 1) + lf_.log_beta(x.s_d + 1, x.failures_d() + 1);
  }

  template <class LogArm>
  std::vector<double> arm_table(LogArm log_arm) const {
    const int n = spec_.n;
    std::vector<double> t(static_cast<std::size_t>(n + 1) * (n + 1), 0.0);
    for (int na = 0; na <= n; ++na)
      for (int s = 0; s <= na; ++s) {
        const double lw = log_arm(s, na - s) - lf_.log_beta(s + 1, na - s + 1);
        t[na * (n + 1) + s] = lw == kNegInf ? 0.0 : std::exp(lw);
      }
    return t;
  }

  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
  }

  const CmdpSpec& spec_;
  LayerIndex li_;
  LogFactorials lf_;
  std::vector<std::uint8_t> reject_;
  std::vector<Constraint> constraints_;
};

void validate(const CmdpSpec& spec) {
  check_shape(spec.n, spec.burn_in, spec.p);
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) throw std::invalid_argument("cmdp: alpha outside (0,1)");
  if (spec.pointwise_bound > spec.alpha) throw std::invalid_argument("cmdp: pointwise bound exceeds alpha");
  if (spec.dual.max_iterations < 1 || !(spec.dual.step0 > 0.0) || !(spec.dual.tolerance >= 0.0))
    throw std::invalid_argument("cmdp: invalid dual settings");
}

}  // namespace

AuditReport audit_policy(const PolicyTable& table, const CmdpSpec& spec) {
  validate(spec);
  return TerminalModel(spec).audit(table);
}

namespace {

// Tracks the best feasible iterate by objective, else the least violating one.
class IncumbentTracker {
 public:
  explicit IncumbentTracker(double tol) : tol_(tol) {}

  void offer(int k, const PolicyTable& table, const AuditReport& rep) {
    const double viol = rep.max_violation();
    const bool feasible = viol <= tol_;
    if (feasible ? (!best_.feasible || rep.objective > best_.audit.objective)
                 : (!best_.feasible && viol < best_violation_)) {
      best_.table = table;
      best_.audit = rep;
      best_.feasible = feasible;
      best_.iteration = k;
      best_violation_ = std::min(best_violation_, viol);
    }
  }

  CmdpSolution take(DualState dual) {
    best_.dual = std::move(dual);
    return std::move(best_);
  }

 private:
  double tol_;
  double best_violation_ = std::numeric_limits<double>::infinity();
  CmdpSolution best_;
};

// L(pi, lambda) = objective - sum_i lambda_i violation_i.
double lagrangian(const AuditReport& rep, const std::vector<double>& lambda) {
  double v = rep.objective;
  for (std::size_t i = 0; i < lambda.size(); ++i) v -= lambda[i] * rep.constraints[i].violation();
  return v;
}

CmdpSolution solve_subgradient(const CmdpSpec& spec, const TerminalModel& model) {
  const std::size_t m = model.constraints().size();
  IncumbentTracker best(spec.dual.tolerance);
  std::vector<double> lambda(m, 0.0);
  DualState dual;
  for (int k = 1; k <= spec.dual.max_iterations; ++k) {
    auto bw = lagrangian_backward(model.reward(lambda), spec.n, spec.burn_in, spec.p);
    const auto rep = model.audit(bw.table);
    const double viol = rep.max_violation();
    dual.history.push_back(IterateRecord{k, rep.objective, viol, lagrangian(rep, lambda)});
    best.offer(k, bw.table, rep);
    const double eta = spec.dual.step0 / std::sqrt(static_cast<double>(k));
    for (std::size_t i = 0; i < m; ++i)
      lambda[i] = std::max(0.0, lambda[i] + eta * rep.constraints[i].violation());
    if (viol <= spec.dual.tolerance && spec.dual.stop_when_feasible) break;
  }
  dual.multipliers = lambda;
  return best.take(std::move(dual));
}

// Kelley cutting planes on the dual function over the box [0, cap]^m, with
// in-out stabilization around the best dual point found so far. The master
// is solved in its dual form, whose variables are convex weights on the
// generated policies.
CmdpSolution solve_cutting_plane(const CmdpSpec& spec, const TerminalModel& model) {
  const std::size_t m = model.constraints().size();
  const double cap = spec.dual.multiplier_cap;
  IncumbentTracker best(spec.dual.tolerance);
  DualState dual;
  std::vector<double> cut_c;                 // L_k(lambda) = c_k - viol_k . lambda
  std::vector<std::vector<double>> cut_v;
  std::vector<double> query(m, 0.0), center(m, 0.0);
  double center_value = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= spec.dual.max_iterations; ++k) {
    auto bw = lagrangian_backward(model.reward(query), spec.n, spec.burn_in, spec.p);
    const auto rep = model.audit(bw.table);
    const double value = lagrangian(rep, query);
    dual.history.push_back(IterateRecord{k, rep.objective, rep.max_violation(), value});
    best.offer(k, bw.table, rep);
    cut_c.push_back(rep.objective);
    std::vector<double> v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = rep.constraints[i].violation();
    cut_v.push_back(std::move(v));
    if (value < center_value) {
      center_value = value;
      center = query;
    }
    // Master dual: max sum mu_k c_k - cap sum nu_i
    //   s.t. sum_k mu_k viol_ki - nu_i <= 0, sum_k mu_k = 1, mu, nu >= 0.
    const std::size_t kk = cut_c.size();
    std::vector<double> obj(kk + m);
    for (std::size_t j = 0; j < kk; ++j) obj[j] = cut_c[j];
    for (std::size_t i = 0; i < m; ++i) obj[kk + i] = -cap;
    std::vector<std::vector<double>> rows(m + 1, std::vector<double>(kk + m, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < kk; ++j) rows[i][j] = cut_v[j][i];
      rows[i][kk + i] = -1.0;
    }
    for (std::size_t j = 0; j < kk; ++j) rows[m][j] = 1.0;
    std::vector<double> rhs(m + 1, 0.0);
    rhs[m] = 1.0;
    const auto lp = detail::simplex_maximize(obj, rows, rhs, static_cast<int>(m));
    if (!lp.optimal) throw std::runtime_error("cmdp: cutting-plane master failed");
    std::vector<double> lp_lambda(m);
    for (std::size_t i = 0; i < m; ++i) lp_lambda[i] = std::clamp(lp.y[i], 0.0, cap);
    const double gap = center_value - lp.value;
    if (gap <= spec.dual.gap_tolerance * std::max(1.0, std::abs(center_value))) {
      dual.multipliers = center;
      return best.take(std::move(dual));
    }
    const double a = spec.dual.stabilization;
    for (std::size_t i = 0; i < m; ++i) query[i] = a * center[i] + (1.0 - a) * lp_lambda[i];
  }
  dual.multipliers = center;
  return best.take(std::move(dual));
}

}  // namespace

CmdpSolution solve_cmdp(const CmdpSpec& spec) {
  validate(spec);
  const TerminalModel model(spec);
  return spec.dual.method == DualMethod::kCuttingPlane ? solve_cutting_plane(spec, model)
                                                       : solve_subgradient(spec, model);
}

}  // namespace rarexact
