#include "rarexact/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace rarexact {

BernsteinCertifier::BernsteinCertifier(int n) : n_(n), grid_(4 * std::max(n, 1)) {
  if (n < 0) throw std::invalid_argument("BernsteinCertifier: negative degree");
  const LogFactorials lf(n);
  lbinom_.resize(n + 1);
  for (int k = 0; k <= n; ++k) lbinom_[k] = lf.log_binomial(n, k);
  pmf_.resize(static_cast<std::size_t>(grid_ + 1) * (n + 1));
  for (int j = 0; j <= grid_; ++j) {
    const double th = static_cast<double>(j) / grid_;
    for (int k = 0; k <= n; ++k)
      pmf_[static_cast<std::size_t>(j) * (n + 1) + k] =
          std::exp(lbinom_[k] + binomial_log_kernel(k, n - k, th));
  }
}

double BernsteinCertifier::evaluate(std::span<const double> coef, double theta) const {
  double acc = 0.0;
  for (int k = 0; k <= n_; ++k)
    if (coef[k] != 0.0) acc += coef[k] * std::exp(lbinom_[k] + binomial_log_kernel(k, n_ - k, theta));
  return acc;
}

SupBracket BernsteinCertifier::coarse(std::span<const double> coef) const {
  if (static_cast<int>(coef.size()) != n_ + 1)
    throw std::invalid_argument("BernsteinCertifier: coefficient count mismatch");
  SupBracket br;
  br.upper = *std::max_element(coef.begin(), coef.end());
  if (br.upper <= 0.0) return br;
  for (int j = 0; j <= grid_; ++j) {
    const double* row = &pmf_[static_cast<std::size_t>(j) * (n_ + 1)];
    double acc = 0.0;
    for (int k = 0; k <= n_; ++k) acc += coef[k] * row[k];
    if (acc > br.lower) {
      br.lower = acc;
      br.argmax = static_cast<double>(j) / grid_;
    }
  }
  return br;
}

namespace {

struct Piece {
  double lo;
  double hi;
  double ub;
  std::vector<double> coef;
};

struct ByUpper {
  bool operator()(const Piece& a, const Piece& b) const { return a.ub < b.ub; }
};

// Splits Bernstein coefficients on [lo, hi] at the midpoint.
void de_casteljau(const std::vector<double>& c, std::vector<double>& left, std::vector<double>& right) {
  const std::size_t m = c.size();
  std::vector<double> work(c);
  left.resize(m);
  right.resize(m);
  left[0] = work[0];
  right[m - 1] = work[m - 1];
  for (std::size_t r = 1; r < m; ++r) {
    for (std::size_t i = 0; i + r < m; ++i) work[i] = 0.5 * (work[i] + work[i + 1]);
    left[r] = work[0];
    right[m - 1 - r] = work[m - 1 - r];
  }
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

BernsteinCertifier::Decision BernsteinCertifier::certify(std::span<const double> coef, double target,
                                                         double tol) const {
  Decision d;
  d.bracket = coarse(coef);
  if (d.bracket.upper <= target) {
    d.accept = true;
    return d;
  }
  if (d.bracket.lower > target) return d;

  // Golden-section polish of the lower bound around the best grid point.
  {
    const double h = 1.0 / grid_;
    double a = std::max(0.0, d.bracket.argmax - h);
    double b = std::min(1.0, d.bracket.argmax + h);
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = evaluate(coef, x1), f2 = evaluate(coef, x2);
    for (int it = 0; it < 60 && b - a > 1e-13; ++it) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + r * (b - a);
        f2 = evaluate(coef, x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - r * (b - a);
        f1 = evaluate(coef, x1);
      }
    }
    const double best = std::max(f1, f2);
    if (best > d.bracket.lower) {
      d.bracket.lower = best;
      d.bracket.argmax = f1 > f2 ? x1 : x2;
    }
  }
  if (d.bracket.lower > target) return d;

  // Branch-and-bound on de Casteljau subdivisions for a rigorous upper bound.
  std::priority_queue<Piece, std::vector<Piece>, ByUpper> queue;
  std::vector<double> root(coef.begin(), coef.end());
  const double root_ub = max_of(root);
  queue.push(Piece{0.0, 1.0, root_ub, std::move(root)});
  double dropped = 0.0;  // largest bound among discarded pieces (all <= target)
  constexpr int kMaxSplits = 20000;
  std::vector<double> left, right;
  for (int splits = 0;; ++splits) {
    if (queue.empty()) {
      d.bracket.upper = std::max(dropped, d.bracket.lower);
      d.accept = true;
      return d;
    }
    const double top = queue.top().ub;
    d.bracket.upper = std::max(top, dropped);
    if (top <= target) {
      d.accept = true;
      return d;
    }
    if (d.bracket.lower > target) return d;
    if (top - d.bracket.lower <= tol) {
      d.accept = d.bracket.lower <= target;
      return d;
    }
    if (splits >= kMaxSplits) return d;
    Piece p = queue.top();
    queue.pop();
    de_casteljau(p.coef, left, right);
    const double mid = 0.5 * (p.lo + p.hi);
    if (left.back() > d.bracket.lower) {
      d.bracket.lower = left.back();
      d.bracket.argmax = mid;
    }
    for (auto* part : {&left, &right}) {
      const double ub = max_of(*part);
      const double lo = part == &left ? p.lo : mid;
      const double hi = part == &left ? mid : p.hi;
      if (ub <= target)
        dropped = std::max(dropped, ub);
      else
        queue.push(Piece{lo, hi, ub, *part});
    }
  }
}

std::vector<double> bernstein_coefficients(const PathWeightTable& g,
                                           std::span<const std::uint8_t> reject) {
  const LayerIndex li = g.layer();
  if (reject.size() != li.size()) throw std::invalid_argument("bernstein: indicator size mismatch");
  const LogFactorials lf(g.n);
  std::vector<double> coef(g.n + 1, 0.0);
  li.for_each([&](std::size_t i, const TrialState& x) {
    if (reject[i] && g.log_g[i] != kNegInf) {
      const int s = x.successes();
      coef[s] += std::exp(g.log_g[i] - lf.log_binomial(g.n, s));
    }
  });
  return coef;
}

std::pair<double, double> bernstein_tail_sup(const PathWeightTable& g,
                                             std::span<const std::uint8_t> reject) {
  const auto coef = bernstein_coefficients(g, reject);
  const auto br = BernsteinCertifier(g.n).coarse(coef);
  return {br.lower, br.upper};
}

}  // namespace rarexact
