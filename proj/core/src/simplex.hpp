#pragma once

#include <vector>

namespace rarexact::detail {

/// Dense two-phase primal simplex for
///   maximize c.x  subject to  A_i.x <= b_i (i < n_le),  A_i.x = b_i (i >= n_le),  x >= 0,
/// with b >= 0. Sized for small master problems (tens of rows).
struct LpResult {
  bool optimal = false;
  double value = 0.0;
  std::vector<double> x;
  /// Row duals; nonnegative for the inequality rows.
  std::vector<double> y;
};

LpResult simplex_maximize(const std::vector<double>& c, const std::vector<std::vector<double>>& rows,
                          const std::vector<double>& b, int n_le);

}  // namespace rarexact::detail
