#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rarexact/numerics.hpp"
#include "rarexact/policy.hpp"
#include "rarexact/state_space.hpp"

namespace rarexact {

/// Terminal path coefficients g(x) of a policy, stored as log-weights in
/// canonical order of the terminal layer.
struct PathWeightTable {
  int n = 0;
  int burn_in = 0;
  std::string policy;  // descriptor
  double p = 0.0;      // randomization rate for CMDP tables, else 0
  std::vector<double> log_g;

  LayerIndex layer() const { return LayerIndex(n, burn_in); }
};

/// Network algorithm: forward sweep over layers 2b..n.
PathWeightTable forward_g(const Policy& policy);

/// Closed form g for equal allocation; the layer is LayerIndex(n, n/2).
PathWeightTable equal_allocation_g(int n);

/// g(x) / (C(n_c, s_c) C(n_d, s_d)) on the terminal layer. This quantity is
/// at most C(n, n_c), so it is representable without logs for n <= 1000.
std::vector<double> forward_scaled(const Policy& policy);

LogWeight log_likelihood_weight(const TrialState& x, double theta_c, double theta_d);

/// sum_x f(x) exp(log_g(x) + log_likelihood_weight(x, theta)).
double oc_value(std::span<const double> f, const PathWeightTable& g, double theta_c, double theta_d);

/// Precomputed f o g for repeated evaluation across theta.
class OcEvaluator {
 public:
  OcEvaluator(const PathWeightTable& g, std::span<const double> f);
  double operator()(double theta_c, double theta_d) const;

 private:
  struct Term {
    std::int32_t s_c, f_c, s_d, f_d;
    double log_abs;
    double sign;
  };
  std::vector<Term> terms_;
};

}  // namespace rarexact
