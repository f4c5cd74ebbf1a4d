#include "rarexact/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rarexact/parallel.hpp"
#include "rarexact/wald.hpp"

namespace rarexact {

namespace {

constexpr std::uint32_t kObservedStream = 0;

}  // namespace

TrialState TrialHistory::terminal() const {
  TrialState x;
  for (std::size_t t = 0; t < arms.size(); ++t) {
    if (arms[t] == Arm::kControl) {
      ++x.n_c;
      x.s_c += outcomes[t];
    } else {
      ++x.n_d;
      x.s_d += outcomes[t];
    }
  }
  return x;
}

std::vector<double> TrialHistory::running_proportion() const {
  std::vector<double> out;
  out.reserve(arms.size());
  int nc = 0;
  for (std::size_t t = 0; t < arms.size(); ++t) {
    nc += arms[t] == Arm::kControl;
    out.push_back(static_cast<double>(nc) / (t + 1));
  }
  return out;
}

AllocationCache::AllocationCache(const Policy& policy, std::size_t max_states) : policy_(&policy) {
  if (policy.is_equal_allocation()) return;
  const int n = policy.horizon(), b = policy.burn_in();
  std::size_t total = 0;
  for (int t = 2 * b; t < n; ++t) total += LayerIndex(t, b).size();
  if (total > max_states) return;
  layers_.resize(n);
  for (int t = 0; t < n; ++t) index_.emplace_back(t, b);
  for (int t = 2 * b; t < n; ++t) {
    layers_[t].resize(index_[t].size());
    policy.layer_probs(index_[t], layers_[t]);
  }
}

double AllocationCache::prob(const TrialState& x) const {
  const int t = x.epoch();
  if (t < 2 * policy_->burn_in()) return burn_in_prob(x);
  if (!layers_.empty()) return layers_[t][index_[t].index_unchecked(x.s_c, x.s_d, x.n_c)];
  return *policy_->alloc_prob(x);
}

std::vector<Arm> permuted_block_sequence(int n, int block, CounterRng& rng) {
  if (block <= 0 || block % 2 != 0) throw std::invalid_argument("permuted blocks need an even block size");
  std::vector<Arm> out;
  out.reserve(n);
  std::vector<Arm> blk(block);
  while (static_cast<int>(out.size()) < n) {
    for (int i = 0; i < block; ++i) blk[i] = i < block / 2 ? Arm::kControl : Arm::kDevelopmental;
    for (int i = block - 1; i > 0; --i) std::swap(blk[i], blk[rng.below(static_cast<std::uint32_t>(i + 1))]);
    const int take = std::min(block, n - static_cast<int>(out.size()));
    out.insert(out.end(), blk.begin(), blk.begin() + take);
  }
  return out;
}

namespace {

// Drives one trial; `outcome(t, arm)` supplies Y_t.
template <class Outcome>
TrialHistory run_allocation(const Policy& policy, CounterRng& rng, const SimulationOptions& opt,
                            const AllocationCache* cache, Outcome outcome) {
  const int n = policy.horizon();
  TrialHistory h;
  h.arms.reserve(n);
  h.outcomes.reserve(n);
  std::vector<Arm> fixed;
  int fixed_len = 0;
  if (policy.is_equal_allocation()) {
    fixed = permuted_block_sequence(n, opt.ea_block, rng);
    fixed_len = n;
  } else if (opt.burn_in == BurnInMode::kPermutedBlock && policy.burn_in() > 0) {
    fixed = permuted_block_sequence(2 * policy.burn_in(), 2 * policy.burn_in(), rng);
    fixed_len = 2 * policy.burn_in();
  }
  TrialState x;
  for (int t = 0; t < n; ++t) {
    Arm a;
    if (t < fixed_len) {
      a = fixed[t];
    } else {
      const double q = cache ? cache->prob(x) : *policy.alloc_prob(x);
      a = rng.bernoulli(q) ? Arm::kControl : Arm::kDevelopmental;
    }
    const std::uint8_t y = outcome(t, a);
    h.arms.push_back(a);
    h.outcomes.push_back(y);
    if (a == Arm::kControl) {
      ++x.n_c;
      x.s_c += y;
    } else {
      ++x.n_d;
      x.s_d += y;
    }
  }
  return h;
}

double stat_or_zero(const TrialState& x) {
  return (x.n_c > 0 && x.n_d > 0) ? wald_statistic(x) : 0.0;
}

}  // namespace

TrialHistory simulate_trial(const Policy& policy, double theta_c, double theta_d, CounterRng& rng,
                            const SimulationOptions& opt, const AllocationCache* cache) {
  if (!(theta_c >= 0.0 && theta_c <= 1.0 && theta_d >= 0.0 && theta_d <= 1.0))
    throw std::domain_error("simulate_trial: theta outside [0,1]");
  return run_allocation(policy, rng, opt, cache, [&](int, Arm a) -> std::uint8_t {
    return rng.bernoulli(a == Arm::kControl ? theta_c : theta_d) ? 1 : 0;
  });
}

TrialHistory simulate_trial(const Policy& policy, double theta_c, double theta_d, std::uint64_t seed,
                            const SimulationOptions& opt) {
  CounterRng rng(seed, 0, kObservedStream);
  return simulate_trial(policy, theta_c, theta_d, rng, opt);
}

RandomizationResult randomization_test(const TrialHistory& observed, const Policy& policy, int reps,
                                       double alpha, CounterRng& rng, const SimulationOptions& opt,
                                       const AllocationCache* cache) {
  if (reps < 100) throw std::invalid_argument("randomization_test: reps must be at least 100");
  if (static_cast<int>(observed.outcomes.size()) != policy.horizon())
    throw std::invalid_argument("randomization_test: history length differs from horizon");
  RandomizationResult res;
  res.t_obs = stat_or_zero(observed.terminal());
  const double t_abs = std::abs(res.t_obs);
  int extreme = 0;
  for (int r = 0; r < reps; ++r) {
    const auto h = run_allocation(policy, rng, opt, cache,
                                  [&](int t, Arm) { return observed.outcomes[t]; });
    if (std::abs(stat_or_zero(h.terminal())) >= t_abs) ++extreme;
  }
  res.p_value = (1.0 + extreme) / (reps + 1.0);
  res.reject = res.p_value <= alpha;
  return res;
}

SimulationOptions randomization_defaults() {
  SimulationOptions o;
  o.burn_in = BurnInMode::kPermutedBlock;
  return o;
}

McEstimate randomization_rejection_rate(const Policy& policy, double theta_c, double theta_d, int sims,
                                        int reps, double alpha, std::uint64_t seed,
                                        const SimulationOptions& opt) {
  if (sims < 100 || reps < 100) throw std::invalid_argument("randomization_rejection_rate: sims, reps >= 100");
  const AllocationCache cache(policy);
  std::vector<std::uint8_t> rejected(sims, 0);
  parallel_for(static_cast<std::size_t>(sims), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      CounterRng trial_rng(seed, static_cast<std::uint32_t>(i), 0);
      const auto obs = simulate_trial(policy, theta_c, theta_d, trial_rng, opt, &cache);
      CounterRng rerand_rng(seed, static_cast<std::uint32_t>(i), 1);
      rejected[i] = randomization_test(obs, policy, reps, alpha, rerand_rng, opt, &cache).reject;
    }
  });
  long count = 0;
  for (auto v : rejected) count += v;
  McEstimate e;
  e.estimate = static_cast<double>(count) / sims;
  e.half_width = 1.96 * std::sqrt(e.estimate * (1.0 - e.estimate) / sims);
  e.sims = sims;
  e.reps = reps;
  e.seed = seed;
  return e;
}

std::vector<TrialState> simulate_terminal_states(const Policy& policy, double theta_c, double theta_d,
                                                 int sims, std::uint64_t seed, const SimulationOptions& opt) {
  const AllocationCache cache(policy);
  std::vector<TrialState> out(sims);
  parallel_for(static_cast<std::size_t>(sims), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      CounterRng rng(seed, static_cast<std::uint32_t>(i), 0);
      out[i] = simulate_trial(policy, theta_c, theta_d, rng, opt, &cache).terminal();
    }
  });
  return out;
}

}  // namespace rarexact
