#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace rarexact {

/// Natural log of a nonnegative weight; -inf encodes zero.
using LogWeight = double;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

/// Max-shifted log-sum-exp in the order given.
double log_sum_exp(std::span<const double> v);

/// Neumaier compensated summation.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double log_beta(double a, double b);
/// Regularized incomplete beta I_x(a, b).
double beta_cdf(double x, double a, double b);
/// P(X > Y) for independent X ~ Beta(a1, b1), Y ~ Beta(a2, b2), integer parameters.
double prob_beta_greater(int a1, int b1, int a2, int b2);
double normal_quantile(double p);
double normal_cdf(double z);

/// Table of ln k! for k <= kmax.
class LogFactorials {
 public:
  explicit LogFactorials(int kmax);
  int kmax() const { return static_cast<int>(lf_.size()) - 1; }
  double operator()(int k) const { return lf_[k]; }
  double log_binomial(int n, int k) const { return lf_[n] - lf_[k] - lf_[n - k]; }
  /// ln B(a, b) for positive integers.
  double log_beta(int a, int b) const { return lf_[a - 1] + lf_[b - 1] - lf_[a + b - 1]; }

 private:
  std::vector<double> lf_;
};

/// s ln(theta) + f ln(1 - theta) with 0 * ln 0 = 0.
inline double binomial_log_kernel(int s, int f, double theta) {
  double v = 0.0;
  if (s > 0) v += (theta > 0.0) ? s * std::log(theta) : kNegInf;
  if (f > 0) v += (theta < 1.0) ? f * std::log1p(-theta) : kNegInf;
  return v;
}

}  // namespace rarexact
