#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rarexact/state_space.hpp"

namespace rarexact {

/// Deterministic three-action policy {1-p, 1/2, p} over layers 0..n-1.
class PolicyTable {
 public:
  static constexpr std::uint8_t kLow = 0;      // 1 - p
  static constexpr std::uint8_t kHalf = 1;     // 1/2
  static constexpr std::uint8_t kHigh = 2;     // p
  static constexpr std::uint8_t kBurnIn = 255;

  PolicyTable() = default;
  /// All post-burn-in entries initialized to `fill`.
  PolicyTable(int n, int burn_in, double p, std::uint8_t fill = kHalf);

  int horizon() const { return n_; }
  int burn_in() const { return b_; }
  double p() const { return p_; }

  double action_prob(std::uint8_t code) const;
  std::span<std::uint8_t> layer_codes(int t) { return codes_[t]; }
  std::span<const std::uint8_t> layer_codes(int t) const { return codes_[t]; }
  std::uint8_t code(const TrialState& x) const;
  /// Allocation probability to C; burn-in states follow the alternating schedule.
  double prob(const TrialState& x) const;

  friend bool operator==(const PolicyTable&, const PolicyTable&) = default;

 private:
  int n_ = 0;
  int b_ = 0;
  double p_ = 0.5;
  std::vector<std::vector<std::uint8_t>> codes_;
};

struct EqualAllocation {};
struct DbcdNeyman {
  double gamma = 2.0;
};
struct TemperedDbcdNeyman {
  double gamma = 2.0;
};
struct BayesianRar {};
struct CmdpTable {
  std::shared_ptr<const PolicyTable> table;
};
/// Arbitrary allocation rule, used for oracles and experiments.
struct CustomRule {
  std::function<double(const TrialState&)> q;
  std::string name = "custom";
};

using PolicyKind =
    std::variant<EqualAllocation, DbcdNeyman, TemperedDbcdNeyman, BayesianRar, CmdpTable, CustomRule>;

class Policy {
 public:
  Policy(PolicyKind kind, int n, int burn_in);

  const PolicyKind& kind() const { return kind_; }
  int horizon() const { return n_; }
  int burn_in() const { return b_; }
  bool is_equal_allocation() const { return std::holds_alternative<EqualAllocation>(kind_); }
  /// True for policies with alloc_prob(swap(x)) = 1 - alloc_prob(x).
  bool is_symmetric() const;
  std::string name() const;
  /// Compact JSON description.
  std::string descriptor() const;

  /// Probability of allocating the next participant to C. Empty for
  /// EqualAllocation, whose path coefficients are closed-form.
  std::optional<double> alloc_prob(const TrialState& x) const;

  /// Allocation probabilities for every state of a post-burn-in layer, in
  /// canonical order.
  void layer_probs(const LayerIndex& layer, std::span<double> out) const;

 private:
  PolicyKind kind_;
  int n_;
  int b_;
};

double neyman_target(double theta_c, double theta_d);
/// Shrunk success-rate estimate (s + 1/2) / (n + 1).
double dbcd_estimate(int s, int n);
/// Hu-Zhang allocation function h(rho, r).
double dbcd_allocation(double rho, double r, double gamma);
double dbcd_prob(const TrialState& x, double gamma);
double tempered_dbcd_prob(const TrialState& x, double gamma);
double brar_prob(const TrialState& x, int horizon);

/// Burn-in schedule: C at even epochs, D at odd ones.
inline double burn_in_prob(const TrialState& x) { return x.epoch() % 2 == 0 ? 1.0 : 0.0; }

}  // namespace rarexact
