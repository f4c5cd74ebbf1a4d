#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rarexact/bernstein.hpp"
#include "rarexact/path_engine.hpp"

namespace rarexact {

/// Absolute slack on conditional tail comparisons.
inline constexpr double kTailSlack = 1e-12;

/// Reachable terminal states with their Wald statistic, total successes and
/// conditional probability g(x) / C(n, s(x)).
struct TerminalSupport {
  int n = 0;
  std::vector<std::uint32_t> index;
  std::vector<double> stat;
  std::vector<int> stratum;
  std::vector<double> cond;

  static TerminalSupport build(const PathWeightTable& g);
  std::size_t size() const { return index.size(); }
};

/// Critical values per total-success stratum; an empty optional means the
/// stratum never rejects in that tail.
struct ConditionalRule {
  int n = 0;
  double alpha = 0.05;
  std::vector<std::optional<double>> lower;
  std::vector<std::optional<double>> upper;
  SupBracket lower_audit;
  SupBracket upper_audit;

  bool rejects(double stat, int stratum) const {
    return (upper[stratum] && stat >= *upper[stratum]) || (lower[stratum] && stat <= *lower[stratum]);
  }
};

struct UnconditionalRule {
  int n = 0;
  double alpha = 0.05;
  std::optional<double> lower;
  std::optional<double> upper;
  SupBracket lower_audit;
  SupBracket upper_audit;

  bool rejects(double stat) const {
    return (upper && stat >= *upper) || (lower && stat <= *lower);
  }
};

/// One-sided rule on the conditional p-value T_GB: reject iff T_GB <= threshold.
struct GbRule {
  int n = 0;
  double alpha = 0.05;
  std::optional<double> threshold;    // largest included T_GB
  double excluded_floor = 0.0;        // smallest excluded T_GB (+inf if none)
  std::vector<double> p_value;        // per terminal index; NaN when unreachable
  SupBracket audit;

  bool rejects(std::size_t i) const {
    return threshold && !std::isnan(p_value[i]) && p_value[i] <= *threshold;
  }
};

ConditionalRule conditional_rule(const PathWeightTable& g, double alpha);
UnconditionalRule unconditional_rule(const PathWeightTable& g, double alpha);
/// Per terminal index, NaN for unreachable states.
std::vector<double> gb_statistic(const PathWeightTable& g);
GbRule gb_rule(const PathWeightTable& g, double alpha);

}  // namespace rarexact
