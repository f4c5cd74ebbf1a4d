#include "rarexact/state_space.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace rarexact {

bool is_valid(const TrialState& x) {
  return x.n_c >= 0 && x.n_d >= 0 && x.s_c >= 0 && x.s_d >= 0 && x.s_c <= x.n_c &&
         x.s_d <= x.n_d;
}

TrialState swap_arms(const TrialState& x) { return TrialState{x.s_d, x.s_c, x.n_d, x.n_c}; }

std::pair<TrialState, TrialState> successors(const TrialState& x, Arm arm) {
  if (arm == Arm::kControl)
    return {TrialState{x.s_c + 1, x.s_d, x.n_c + 1, x.n_d},
            TrialState{x.s_c, x.s_d, x.n_c + 1, x.n_d}};
  return {TrialState{x.s_c, x.s_d + 1, x.n_c, x.n_d + 1},
          TrialState{x.s_c, x.s_d, x.n_c, x.n_d + 1}};
}

LayerIndex::LayerIndex(int t, int burn_in) : t_(t), b_(burn_in) {
  if (t < 0 || burn_in < 0) throw std::invalid_argument("layer: negative epoch or burn-in");
  if (t < 2 * burn_in) {
    nc_lo_ = nc_hi_ = (t + 1) / 2;
  } else {
    nc_lo_ = burn_in;
    nc_hi_ = t - burn_in;
  }
  offsets_.reserve(nc_hi_ - nc_lo_ + 2);
  std::size_t acc = 0;
  offsets_.push_back(0);
  for (int nc = nc_lo_; nc <= nc_hi_; ++nc) {
    acc += static_cast<std::size_t>(nc + 1) * static_cast<std::size_t>(t - nc + 1);
    offsets_.push_back(acc);
  }
}

bool LayerIndex::contains(const TrialState& x) const {
  return is_valid(x) && x.epoch() == t_ && x.n_c >= nc_lo_ && x.n_c <= nc_hi_;
}

std::size_t LayerIndex::index(const TrialState& x) const {
  if (!contains(x))
    throw std::out_of_range("state not in layer " + std::to_string(t_));
  return index_unchecked(x.s_c, x.s_d, x.n_c);
}

TrialState LayerIndex::state(std::size_t i) const {
  if (i >= size()) throw std::out_of_range("layer index out of range");
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), i) - 1;
  const int nc = nc_lo_ + static_cast<int>(it - offsets_.begin());
  const int nd = t_ - nc;
  const std::size_t r = i - *it;
  return TrialState{static_cast<int>(r / (nd + 1)), static_cast<int>(r % (nd + 1)), nc, nd};
}

LayerIndex layer(int t, int burn_in, int horizon) {
  if (horizon < 0 || 2 * burn_in > horizon || burn_in < 0)
    throw std::invalid_argument("layer: burn-in infeasible for horizon");
  if (t < 0 || t > horizon) throw std::invalid_argument("layer: epoch outside [0, n]");
  return LayerIndex(t, burn_in);
}

std::size_t total_states(int horizon, int burn_in) {
  std::size_t acc = 0;
  for (int t = 0; t <= horizon; ++t) acc += LayerIndex(t, burn_in).size();
  return acc;
}

}  // namespace rarexact
