#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace rarexact {

enum class Arm : std::uint8_t { kControl = 0, kDevelopmental = 1 };

/// Sufficient statistic of a two-arm binary-outcome trial after n_c + n_d
/// participants: successes and group sizes per arm.
struct TrialState {
  int s_c = 0;
  int s_d = 0;
  int n_c = 0;
  int n_d = 0;

  constexpr int epoch() const { return n_c + n_d; }
  constexpr int successes() const { return s_c + s_d; }
  constexpr int failures_c() const { return n_c - s_c; }
  constexpr int failures_d() const { return n_d - s_d; }
  friend constexpr bool operator==(const TrialState&, const TrialState&) = default;
};

bool is_valid(const TrialState& x);

/// Relabels the arms.
TrialState swap_arms(const TrialState& x);

/// (success successor, failure successor) after allocating to `arm`.
std::pair<TrialState, TrialState> successors(const TrialState& x, Arm arm);

/// The reachable states at epoch t under a balanced burn-in of b per arm.
///
/// For t < 2b the burn-in alternates C, D, so n_c = ceil(t/2). From t = 2b on,
/// n_c ranges over [b, t - b]. States are ordered by ascending n_c, then s_c,
/// then s_d: index = offset(n_c) + s_c * (n_d + 1) + s_d.
class LayerIndex {
 public:
  LayerIndex(int t, int burn_in);

  int epoch() const { return t_; }
  int burn_in() const { return b_; }
  int min_nc() const { return nc_lo_; }
  int max_nc() const { return nc_hi_; }
  bool in_burn_in() const { return t_ < 2 * b_; }
  std::size_t size() const { return offsets_.back(); }

  /// Offset of the block with the given n_c (min_nc <= n_c <= max_nc + 1).
  std::size_t block_offset(int n_c) const { return offsets_[n_c - nc_lo_]; }

  bool contains(const TrialState& x) const;
  /// Throws std::out_of_range for states outside the layer.
  std::size_t index(const TrialState& x) const;
  /// Unchecked variant for hot loops.
  std::size_t index_unchecked(int s_c, int s_d, int n_c) const {
    return offsets_[n_c - nc_lo_] + static_cast<std::size_t>(s_c) * (t_ - n_c + 1) + s_d;
  }
  TrialState state(std::size_t i) const;

  /// Calls f(index, state) in canonical order.
  template <class F>
  void for_each(F&& f) const {
    std::size_t i = 0;
    for (int nc = nc_lo_; nc <= nc_hi_; ++nc) {
      const int nd = t_ - nc;
      for (int sc = 0; sc <= nc; ++sc)
        for (int sd = 0; sd <= nd; ++sd) f(i++, TrialState{sc, sd, nc, nd});
    }
  }

 private:
  int t_;
  int b_;
  int nc_lo_;
  int nc_hi_;
  std::vector<std::size_t> offsets_;
};

/// Validating constructor: requires 0 <= t <= n and 0 <= 2b <= n.
LayerIndex layer(int t, int burn_in, int horizon);

/// Total number of states over epochs 0..n.
std::size_t total_states(int horizon, int burn_in);

}  // namespace rarexact
