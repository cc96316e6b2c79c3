#pragma once

#include <cstdint>
#include <random>

#include "eubrl/belief.hpp"
#include "eubrl/mdp.hpp"

namespace eubrl {

enum class AgentKind { eubrl, mean_mdp, beb, vbrb, mbie_eb, rmax, psrl };

/// Epistemically guided reward: convex combination of the posterior mean
/// reward and the uncertainty intrinsic reward, weighted by the probability
/// of uncertainty.
inline Real eubrl_reward(Real r_b, Real e_total, Real p_u) {
    return (1.0 - p_u) * r_b + p_u * e_total;
}

struct AgentConfig {
    AgentKind kind = AgentKind::eubrl;
    BeliefConfig belief;
    Real gamma = 0.95;
    bool episodic = false;          // episodic: replan at episode boundaries
    int replan_period = 0;          // infinite-horizon replan stride; 0 = every step
    int psrl_resample_period = 0;   // 0 = auto: ceil(1/(1-gamma)) steps / every episode
    Real beta_bonus = 1.0;          // BEB and MBIE-EB bonus scale
    int knownness_m = 1;            // RMAX visit threshold
    Real r_max = 1.0;               // known maximum reward (RMAX, MBIE-EB)
    Real planner_tol = 1e-6;
    int planner_max_iters = 2000000;
    bool warm_start = true;
};

/// One learning agent: a belief, a rule for turning it into a planning MDP,
/// and a replan schedule. One instance per run; transferable between workers.
class Agent {
  public:
    Agent(AgentConfig config, int num_states, int num_actions, uint64_t seed);

    const AgentConfig& config() const { return config_; }
    BeliefState& belief() { return belief_; }
    const BeliefState& belief() const { return belief_; }

    /// Deterministic lookup in the current policy.
    int act(int s) const;

    /// Absorb a transition and replan per schedule (every step for
    /// infinite-horizon mode, at episode boundaries for episodic mode).
    void observe(int s, int a, int s2, Real r, bool episode_boundary);

    /// Planning MDP for the current belief, per agent kind.
    TabularMdp build_planning_mdp();

    void replan();

    const Policy& policy() const { return policy_; }
    const ValueFunction& value() const { return value_; }
    long long replan_count() const { return replan_count_; }

  private:
    void apply_rmax_crossing(int s, int a);

    AgentConfig config_;
    int num_states_;
    int num_actions_;
    BeliefState belief_;
    std::mt19937_64 rng_;

    Policy policy_;
    ValueFunction value_;
    long long steps_since_replan_ = 0;
    long long steps_since_resample_ = 0;
    long long replan_count_ = 0;
    bool rmax_dirty_ = false;

    TabularMdp psrl_model_;
    bool psrl_model_valid_ = false;
    TabularMdp rmax_model_;
    bool rmax_model_valid_ = false;
};

}  // namespace eubrl
