#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "eubrl/mdp.hpp"

namespace eubrl {

enum class EnvKind { chain, loop, deep_sea, lazy_chain, bandit };

struct EnvSpec {
    EnvKind kind = EnvKind::chain;
    int size = 5;       // DeepSea side N / LazyChain balanced length N
    int loops = 2;      // Loop: number of loops L
    bool stochastic = false;
    Real slip_prob = 0.22;             // Chain slip probability
    bool chain_classic_reward = false; // classic +2 payoff on the reset action
    Real mu1 = 0.9;                    // bandit arm 0
    Real mu2 = 0.4;                    // bandit arm 1

    int num_states() const;
    int num_actions() const;
    int start_state() const;
    bool episodic() const { return kind == EnvKind::deep_sea; }
    int episode_length() const { return kind == EnvKind::deep_sea ? size : 0; }
    Real max_reward() const;      // known R_max handed to RMAX / MBIE-EB
    Real default_gamma() const;
    long long default_t_max(long long total_steps) const;

    /// Throws std::invalid_argument on invalid sizes (N < 2, L < 2, bad arms).
    void validate() const;
};

struct StepResult {
    int next_state = 0;
    Real reward = 0.0;
    bool terminated = false;        // DeepSea only: episode ended at step N
    bool episode_boundary = false;  // environment-driven reset happened
};

/// One outcome branch of the exact dynamics; rewards are branch means.
struct Branch {
    Real prob;
    int next;
    Real mean_reward;
    bool boundary;
};

/// Exact outcome distribution for (s, a); single source of truth shared by
/// step() and ground_truth_mdp().
std::vector<Branch> env_branches(const EnvSpec& spec, int s, int a);

/// A tabular environment owning its rng stream. One instance per run.
class EnvInstance {
  public:
    EnvInstance(EnvSpec spec, uint64_t seed);

    const EnvSpec& spec() const { return spec_; }
    int state() const { return state_; }
    int episode_step() const { return episode_step_; }

    StepResult step(int action);
    void reset();  // start a new episode at the start state

    void set_state_for_testing(int s) { state_ = s; }

  private:
    EnvSpec spec_;
    std::mt19937_64 rng_;
    int state_;
    int episode_step_ = 0;
    bool terminated_ = false;
};

inline EnvInstance make_env(const EnvSpec& spec, uint64_t seed) {
    return EnvInstance(spec, seed);
}

/// Exact expected-reward MDP of the environment (metric oracle; never
/// exposed to agents).
TabularMdp ground_truth_mdp(const EnvSpec& spec, Real gamma);

/// VI at tol 1e-9 on the ground-truth MDP.
std::pair<Policy, ValueFunction> optimal_policy_and_value(const EnvSpec& spec, Real gamma);

}  // namespace eubrl
