#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rarexact/path_engine.hpp"

namespace rarexact {

/// Bracket on sup_theta of a null rejection polynomial.
struct SupBracket {
  double lower = 0.0;
  double upper = 0.0;
  double argmax = 0.0;
};

/// Null tail probability sum_k b_k C(n,k) theta^k (1-theta)^(n-k) in
/// Bernstein form, with a rigorous supremum certificate.
class BernsteinCertifier {
 public:
  explicit BernsteinCertifier(int n);

  int degree() const { return n_; }
  double evaluate(std::span<const double> coef, double theta) const;
  /// (max over the theta grid of step 1/(4n), max coefficient).
  SupBracket coarse(std::span<const double> coef) const;

  struct Decision {
    bool accept = false;
    SupBracket bracket;
  };
  /// Decides sup <= target. Refines the lower bound by golden-section search
  /// around the best grid point and the upper bound by de Casteljau
  /// branch-and-bound, stopping once decided or once the bracket is within
  /// `tol`; an accepted set then satisfies sup <= target + tol.
  Decision certify(std::span<const double> coef, double target, double tol = 1e-10) const;

 private:
  int n_;
  int grid_;
  std::vector<double> pmf_;  // (grid_ + 1) x (n_ + 1)
  std::vector<double> lbinom_;
};

/// Bernstein coefficients b_s = sum_{x in R, s(x)=s} g(x) / C(n, s).
std::vector<double> bernstein_coefficients(const PathWeightTable& g,
                                           std::span<const std::uint8_t> reject);

/// (grid lower bound, coefficient upper bound) of the null rejection probability.
std::pair<double, double> bernstein_tail_sup(const PathWeightTable& g,
                                             std::span<const std::uint8_t> reject);

}  // namespace rarexact
