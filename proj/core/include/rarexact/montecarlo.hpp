#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rarexact/policy.hpp"
#include "rarexact/rng.hpp"
#include "rarexact/state_space.hpp"

namespace rarexact {

struct TrialHistory {
  std::vector<Arm> arms;
  std::vector<std::uint8_t> outcomes;

  TrialState terminal() const;
  /// n_c / t after each participant.
  std::vector<double> running_proportion() const;
};

enum class BurnInMode { kAlternating, kPermutedBlock };

struct SimulationOptions {
  int ea_block = 10;
  BurnInMode burn_in = BurnInMode::kAlternating;
};

/// Per-layer allocation probabilities, precomputed when the lattice is small.
class AllocationCache {
 public:
  explicit AllocationCache(const Policy& policy, std::size_t max_states = 5'000'000);
  double prob(const TrialState& x) const;

 private:
  const Policy* policy_;
  std::vector<std::vector<double>> layers_;
  std::vector<LayerIndex> index_;
};

std::vector<Arm> permuted_block_sequence(int n, int block, CounterRng& rng);

TrialHistory simulate_trial(const Policy& policy, double theta_c, double theta_d, CounterRng& rng,
                            const SimulationOptions& opt = {}, const AllocationCache* cache = nullptr);
TrialHistory simulate_trial(const Policy& policy, double theta_c, double theta_d, std::uint64_t seed,
                            const SimulationOptions& opt = {});

struct RandomizationResult {
  bool reject = false;
  double p_value = 1.0;
  double t_obs = 0.0;
};

/// Re-randomizes allocations with the design's own mechanism while holding
/// outcomes fixed by participant position.
RandomizationResult randomization_test(const TrialHistory& observed, const Policy& policy, int reps,
                                       double alpha, CounterRng& rng, const SimulationOptions& opt = {},
                                       const AllocationCache* cache = nullptr);

struct McEstimate {
  double estimate = 0.0;
  double half_width = 0.0;
  int sims = 0;
  int reps = 0;
  std::uint64_t seed = 0;
  std::string generator{CounterRng::kIdentity};
};

/// Defaults: permuted-block burn-in.
SimulationOptions randomization_defaults();

McEstimate randomization_rejection_rate(const Policy& policy, double theta_c, double theta_d, int sims,
                                        int reps, double alpha, std::uint64_t seed,
                                        const SimulationOptions& opt = randomization_defaults());

/// Terminal states of `sims` independent trials; trial i uses stream i.
std::vector<TrialState> simulate_terminal_states(const Policy& policy, double theta_c, double theta_d,
                                                 int sims, std::uint64_t seed,
                                                 const SimulationOptions& opt = {});

}  // namespace rarexact
