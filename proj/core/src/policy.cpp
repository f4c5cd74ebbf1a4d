#include "rarexact/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <stdexcept>

#include "json.hpp"
#include "rarexact/numerics.hpp"
#include "rarexact/parallel.hpp"

namespace rarexact {

namespace {
int g_default_threads = 0;
}

int default_threads() {
  if (g_default_threads > 0) return g_default_threads;
  if (const char* env = std::getenv("RAREXACT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void set_default_threads(int threads) { g_default_threads = threads; }

// ---------------------------------------------------------------------------
// PolicyTable

PolicyTable::PolicyTable(int n, int burn_in, double p, std::uint8_t fill)
    : n_(n), b_(burn_in), p_(p), codes_(n) {
  if (n < 0 || burn_in < 0 || 2 * burn_in > n)
    throw std::invalid_argument("PolicyTable: infeasible horizon/burn-in");
  if (!(p >= 0.5 && p <= 1.0)) throw std::invalid_argument("PolicyTable: p outside [1/2, 1]");
  for (int t = 0; t < n; ++t) {
    const LayerIndex li(t, burn_in);
    codes_[t].assign(li.size(), li.in_burn_in() ? kBurnIn : fill);
  }
}

double PolicyTable::action_prob(std::uint8_t code) const {
  switch (code) {
    case kLow: return 1.0 - p_;
    case kHalf: return 0.5;
    case kHigh: return p_;
    default: throw std::out_of_range("PolicyTable: invalid action code");
  }
}

std::uint8_t PolicyTable::code(const TrialState& x) const {
  const int t = x.epoch();
  if (t < 0 || t >= n_) throw std::out_of_range("PolicyTable: epoch outside table");
  return codes_[t][LayerIndex(t, b_).index(x)];
}

double PolicyTable::prob(const TrialState& x) const {
  if (x.epoch() < 2 * b_) return burn_in_prob(x);
  return action_prob(code(x));
}

// ---------------------------------------------------------------------------
// Allocation rules

double neyman_target(double theta_c, double theta_d) {
  if (!(theta_c > 0.0 && theta_c < 1.0 && theta_d > 0.0 && theta_d < 1.0))
    throw std::domain_error("neyman_target: theta must lie in (0,1)");
  const double sc = std::sqrt(theta_c * (1.0 - theta_c));
  const double sd = std::sqrt(theta_d * (1.0 - theta_d));
  return sc / (sc + sd);
}

double dbcd_estimate(int s, int n) { return (s + 0.5) / (n + 1.0); }

double dbcd_allocation(double rho, double r, double gamma) {
  if (!(r > 0.0 && r < 1.0)) throw std::domain_error("dbcd: allocation proportion must be in (0,1)");
  double u;
  double v;
  if (gamma == 2.0) {
    const double a = rho / r;
    const double b = (1.0 - rho) / (1.0 - r);
    u = rho * a * a;
    v = (1.0 - rho) * b * b;
  } else {
    u = rho * std::pow(rho / r, gamma);
    v = (1.0 - rho) * std::pow((1.0 - rho) / (1.0 - r), gamma);
  }
  return std::clamp(u / (u + v), 0.01, 0.99);
}

double dbcd_prob(const TrialState& x, double gamma) {
  if (x.n_c <= 0 || x.n_d <= 0) throw std::domain_error("dbcd: both arms need participants");
  const double rho = neyman_target(dbcd_estimate(x.s_c, x.n_c), dbcd_estimate(x.s_d, x.n_d));
  return dbcd_allocation(rho, static_cast<double>(x.n_c) / x.epoch(), gamma);
}

double tempered_dbcd_prob(const TrialState& x, double gamma) {
  const double q = dbcd_prob(x, gamma);
  const double tc = dbcd_estimate(x.s_c, x.n_c);
  const double td = dbcd_estimate(x.s_d, x.n_d);
  if ((q > 0.5 && tc > td) || (q < 0.5 && td > tc)) return q;
  return 0.5;
}

namespace {

// q = P^e / (P^e + (1-P)^e) from ln P and ln(1-P).
double tempered_posterior(double log_pc, double log_pd, double e) {
  if (e == 0.0) return 0.5;
  if (log_pc == log_pd) return 0.5;
  return 1.0 / (1.0 + std::exp(e * (log_pd - log_pc)));
}

}  // namespace

double brar_prob(const TrialState& x, int horizon) {
  if (horizon <= 0) throw std::invalid_argument("brar: horizon must be positive");
  const int a = x.s_c + 1, b = x.failures_c() + 1, c = x.s_d + 1, d = x.failures_d() + 1;
  const double pc = prob_beta_greater(a, b, c, d);
  const double pd = prob_beta_greater(c, d, a, b);
  // The exponent counts the participant about to be allocated.
  const double e = static_cast<double>(x.epoch() + 1) / (2.0 * horizon);
  return tempered_posterior(std::log(pc), std::log(pd), e);
}

namespace {

// H[k] = P(Y_k > X) for X ~ Beta(a, b), Y_k ~ Beta(k+1, m-k+1), k = 0..m,
// walked upward from k = 0 while H <= 1/2; entries past the crossing are left
// untouched. All increments are positive, so small values keep full relative
// precision.
void walk_upward(const LogFactorials& lf, int a, int b, int m, std::vector<double>& h,
                 std::vector<char>& valid) {
  auto lbeta = [&](int x, int y) { return lf.log_beta(x, y); };
  const double lb_ab = lbeta(a, b);
  // Y ~ Beta(1, m+1): P(Y > X) = B(a, b+m+1) / B(a, b).
  double cur = std::exp(lbeta(a, b + m + 1) - lb_ab);
  for (int k = 0; k <= m; ++k) {
    h[k] = cur;
    valid[k] = 1;
    if (cur > 0.5 || k == m) break;
    const int c = k + 1, d = m - k + 1;
    // H(c+1, d-1) = H(c, d) + G(c, d)/c + G(c+1, d-1)/(d-1),
    // G(c, d) = B(a+c, b+d) / (B(a,b) B(c,d)).
    const double g1 = std::exp(lbeta(a + c, b + d) - lb_ab - lbeta(c, d));
    const double g2 = std::exp(lbeta(a + c + 1, b + d - 1) - lb_ab - lbeta(c + 1, d - 1));
    cur = cur + g1 / c + g2 / (d - 1);
  }
}

void brar_layer(const LayerIndex& li, int horizon, std::span<double> out) {
  const int t = li.epoch();
  const LogFactorials lf(2 * t + 4);
  const double e = static_cast<double>(t + 1) / (2.0 * horizon);
  // One work item per (n_c, s_c) pair.
  std::vector<std::pair<int, int>> items;
  for (int nc = li.min_nc(); nc <= li.max_nc(); ++nc)
    for (int sc = 0; sc <= nc; ++sc) items.emplace_back(nc, sc);
  parallel_for(items.size(), [&](std::size_t lo, std::size_t hi) {
    std::vector<double> hd, hc;
    std::vector<char> vd, vc;
    for (std::size_t it = lo; it < hi; ++it) {
      const auto [nc, sc] = items[it];
      const int nd = t - nc;
      const int a = sc + 1, b = nc - sc + 1;
      hd.assign(nd + 1, 0.0);
      hc.assign(nd + 1, 0.0);
      vd.assign(nd + 1, 0);
      vc.assign(nd + 1, 0);
      // P(theta_D > theta_C) as s_d rises.
      walk_upward(lf, a, b, nd, hd, vd);
      // P(theta_C > theta_D) as s_d falls: mirror via theta -> 1 - theta.
      walk_upward(lf, b, a, nd, hc, vc);
      const std::size_t base = li.index_unchecked(sc, 0, nc);
      for (int sd = 0; sd <= nd; ++sd) {
        const int k = nd - sd;  // mirrored index
        double log_pd;
        double log_pc;
        if (vd[sd] && hd[sd] <= 0.5) {
          log_pd = std::log(hd[sd]);
          log_pc = std::log1p(-hd[sd]);
        } else {
          const double pc = vc[k] ? hc[k] : 1.0 - hd[sd];
          log_pc = std::log(pc);
          log_pd = std::log1p(-pc);
        }
        out[base + sd] = tempered_posterior(log_pc, log_pd, e);
      }
    }
  });
}

struct AllocVisitor {
  const TrialState& x;
  int n;
  std::optional<double> operator()(const EqualAllocation&) const { return std::nullopt; }
  std::optional<double> operator()(const DbcdNeyman& p) const { return dbcd_prob(x, p.gamma); }
  std::optional<double> operator()(const TemperedDbcdNeyman& p) const {
    return tempered_dbcd_prob(x, p.gamma);
  }
  std::optional<double> operator()(const BayesianRar&) const { return brar_prob(x, n); }
  std::optional<double> operator()(const CmdpTable& p) const { return p.table->prob(x); }
  std::optional<double> operator()(const CustomRule& p) const { return p.q(x); }
};

}  // namespace

Policy::Policy(PolicyKind kind, int n, int burn_in) : kind_(std::move(kind)), n_(n), b_(burn_in) {
  if (n < 0 || burn_in < 0 || 2 * burn_in > n)
    throw std::invalid_argument("Policy: infeasible horizon/burn-in");
  if (const auto* t = std::get_if<CmdpTable>(&kind_)) {
    if (!t->table) throw std::invalid_argument("Policy: missing CMDP table");
    if (t->table->horizon() != n || t->table->burn_in() != burn_in)
      throw std::invalid_argument("Policy: CMDP table shape mismatch");
  }
  if (const auto* c = std::get_if<CustomRule>(&kind_); c && !c->q)
    throw std::invalid_argument("Policy: empty custom rule");
}

bool Policy::is_symmetric() const {
  return std::holds_alternative<EqualAllocation>(kind_) ||
         std::holds_alternative<DbcdNeyman>(kind_) ||
         std::holds_alternative<TemperedDbcdNeyman>(kind_) ||
         std::holds_alternative<BayesianRar>(kind_);
}

std::string Policy::name() const {
  struct V {
    std::string operator()(const EqualAllocation&) const { return "ea"; }
    std::string operator()(const DbcdNeyman&) const { return "dbcd"; }
    std::string operator()(const TemperedDbcdNeyman&) const { return "tna"; }
    std::string operator()(const BayesianRar&) const { return "brar"; }
    std::string operator()(const CmdpTable&) const { return "cmdp"; }
    std::string operator()(const CustomRule& c) const { return c.name; }
  };
  return std::visit(V{}, kind_);
}

std::string Policy::descriptor() const {
  nlohmann::ordered_json j;
  j["kind"] = name();
  j["n"] = n_;
  j["burn_in"] = b_;
  if (const auto* d = std::get_if<DbcdNeyman>(&kind_)) j["gamma"] = d->gamma;
  if (const auto* d = std::get_if<TemperedDbcdNeyman>(&kind_)) j["gamma"] = d->gamma;
  if (const auto* c = std::get_if<CmdpTable>(&kind_)) j["p"] = c->table->p();
  return j.dump();
}

std::optional<double> Policy::alloc_prob(const TrialState& x) const {
  if (x.epoch() < 2 * b_) return burn_in_prob(x);
  const auto q = std::visit(AllocVisitor{x, n_}, kind_);
  if (q && !(*q >= 0.0 && *q <= 1.0)) throw std::domain_error("alloc_prob: probability outside [0,1]");
  return q;
}

void Policy::layer_probs(const LayerIndex& li, std::span<double> out) const {
  if (out.size() != li.size()) throw std::invalid_argument("layer_probs: size mismatch");
  if (li.in_burn_in()) {
    li.for_each([&](std::size_t i, const TrialState& x) { out[i] = burn_in_prob(x); });
    return;
  }
  if (is_equal_allocation())
    throw std::logic_error("layer_probs: equal allocation has no per-state probability");
  if (std::holds_alternative<BayesianRar>(kind_)) {
    brar_layer(li, n_, out);
  } else if (const auto* c = std::get_if<CmdpTable>(&kind_)) {
    const auto codes = c->table->layer_codes(li.epoch());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c->table->action_prob(codes[i]);
  } else {
    const int t = li.epoch();
    std::vector<std::pair<int, int>> blocks;
    for (int nc = li.min_nc(); nc <= li.max_nc(); ++nc) blocks.emplace_back(nc, t - nc);
    parallel_for(blocks.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t bi = lo; bi < hi; ++bi) {
        const auto [nc, nd] = blocks[bi];
        std::size_t i = li.block_offset(nc);
        for (int sc = 0; sc <= nc; ++sc)
          for (int sd = 0; sd <= nd; ++sd, ++i)
            out[i] = *std::visit(AllocVisitor{TrialState{sc, sd, nc, nd}, n_}, kind_);
      }
    });
  }
  for (double q : out)
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("layer_probs: probability outside [0,1]");
}

}  // namespace rarexact
