#include "rarexact/path_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rarexact/parallel.hpp"

namespace rarexact {

namespace {

void check_horizon(int n) {
  if (n > 1000) throw std::overflow_error("horizon above 1000 exceeds the numeric guard");
}

double policy_p(const Policy& policy) {
  if (const auto* c = std::get_if<CmdpTable>(&policy.kind())) return c->table->p();
  return 0.0;
}

PathWeightTable to_log_table(const Policy& policy, const std::vector<double>& scaled) {
  const int n = policy.horizon();
  const LayerIndex li(n, policy.burn_in());
  const LogFactorials lf(n);
  PathWeightTable out{n, policy.burn_in(), policy.descriptor(), policy_p(policy), {}};
  out.log_g.resize(li.size());
  li.for_each([&](std::size_t i, const TrialState& x) {
    out.log_g[i] = scaled[i] > 0.0 ? std::log(scaled[i]) + lf.log_binomial(x.n_c, x.s_c) +
                                         lf.log_binomial(x.n_d, x.s_d)
                                   : kNegInf;
  });
  return out;
}

}  // namespace

std::vector<double> forward_scaled(const Policy& policy) {
  const int n = policy.horizon();
  const int b = policy.burn_in();
  check_horizon(n);
  if (policy.is_equal_allocation())
    throw std::logic_error("forward_scaled: equal allocation uses the closed form");
  LayerIndex cur_li(2 * b, b);
  std::vector<double> cur(cur_li.size(), 1.0);
  std::vector<double> q;
  std::vector<double> to_c;
  std::vector<double> to_d;
  for (int t = 2 * b; t < n; ++t) {
    q.resize(cur_li.size());
    policy.layer_probs(cur_li, q);
    to_c.resize(cur.size());
    to_d.resize(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i) {
      to_c[i] = cur[i] * q[i];
      to_d[i] = cur[i] * (1.0 - q[i]);
    }
    const LayerIndex next_li(t + 1, b);
    std::vector<double> next(next_li.size());
    std::vector<int> blocks;
    for (int nc = next_li.min_nc(); nc <= next_li.max_nc(); ++nc) blocks.push_back(nc);
    parallel_for(blocks.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t bi = lo; bi < hi; ++bi) {
        const int nc = blocks[bi];
        const int nd = t + 1 - nc;
        const bool from_c = nc - 1 >= cur_li.min_nc() && nc - 1 <= cur_li.max_nc();
        const bool from_d = nc >= cur_li.min_nc() && nc <= cur_li.max_nc();
        const double inv_nc = nc > 0 ? 1.0 / nc : 0.0;
        const double inv_nd = nd > 0 ? 1.0 / nd : 0.0;
        std::size_t i = next_li.block_offset(nc);
        for (int sc = 0; sc <= nc; ++sc) {
          for (int sd = 0; sd <= nd; ++sd, ++i) {
            double acc = 0.0;
            if (from_c) {
              if (sc >= 1) acc += sc * inv_nc * to_c[cur_li.index_unchecked(sc - 1, sd, nc - 1)];
              if (sc <= nc - 1) acc += (nc - sc) * inv_nc * to_c[cur_li.index_unchecked(sc, sd, nc - 1)];
            }
            if (from_d) {
              if (sd >= 1) acc += sd * inv_nd * to_d[cur_li.index_unchecked(sc, sd - 1, nc)];
              if (sd <= nd - 1) acc += (nd - sd) * inv_nd * to_d[cur_li.index_unchecked(sc, sd, nc)];
            }
            next[i] = acc;
          }
        }
      }
    });
    cur.swap(next);
    cur_li = next_li;
  }
  return cur;
}

PathWeightTable forward_g(const Policy& policy) {
  if (policy.is_equal_allocation()) return equal_allocation_g(policy.horizon());
  return to_log_table(policy, forward_scaled(policy));
}

PathWeightTable equal_allocation_g(int n) {
  if (n < 0 || n % 2 != 0) throw std::invalid_argument("equal_allocation_g: n must be even");
  check_horizon(n);
  const LayerIndex li(n, n / 2);
  const LogFactorials lf(n);
  PathWeightTable out{n, n / 2, R"({"kind":"ea","n":)" + std::to_string(n) + "}", 0.0, {}};
  out.log_g.resize(li.size());
  li.for_each([&](std::size_t i, const TrialState& x) {
    out.log_g[i] = lf.log_binomial(x.n_c, x.s_c) + lf.log_binomial(x.n_d, x.s_d);
  });
  return out;
}

LogWeight log_likelihood_weight(const TrialState& x, double theta_c, double theta_d) {
  return binomial_log_kernel(x.s_c, x.failures_c(), theta_c) +
         binomial_log_kernel(x.s_d, x.failures_d(), theta_d);
}

double oc_value(std::span<const double> f, const PathWeightTable& g, double theta_c, double theta_d) {
  return OcEvaluator(g, f)(theta_c, theta_d);
}

OcEvaluator::OcEvaluator(const PathWeightTable& g, std::span<const double> f) {
  const LayerIndex li = g.layer();
  if (f.size() != li.size() || g.log_g.size() != li.size())
    throw std::invalid_argument("oc_value: dimension mismatch");
  li.for_each([&](std::size_t i, const TrialState& x) {
    if (f[i] == 0.0 || g.log_g[i] == kNegInf) return;
    if (!std::isfinite(f[i])) throw std::invalid_argument("oc_value: non-finite f");
    terms_.push_back(Term{x.s_c, x.failures_c(), x.s_d, x.failures_d(),
                          g.log_g[i] + std::log(std::abs(f[i])), f[i] > 0 ? 1.0 : -1.0});
  });
}

double OcEvaluator::operator()(double theta_c, double theta_d) const {
  if (!(theta_c >= 0.0 && theta_c <= 1.0 && theta_d >= 0.0 && theta_d <= 1.0))
    throw std::domain_error("oc_value: theta outside [0,1]");
  const double lc = std::log(theta_c), lc1 = std::log1p(-theta_c);
  const double ld = std::log(theta_d), ld1 = std::log1p(-theta_d);
  auto term = [&](const Term& t) {
    double v = t.log_abs;
    if (t.s_c) v += t.s_c * lc;
    if (t.f_c) v += t.f_c * lc1;
    if (t.s_d) v += t.s_d * ld;
    if (t.f_d) v += t.f_d * ld1;
    return v;
  };
  double m = kNegInf;
  for (const Term& t : terms_) m = std::max(m, term(t));
  if (m == kNegInf) return 0.0;
  NeumaierSum acc;
  for (const Term& t : terms_) acc.add(t.sign * std::exp(term(t) - m));
  return acc.value() * std::exp(m);
}

}  // namespace rarexact
