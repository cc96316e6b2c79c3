#include "eubrl/agents.hpp"

#include <cmath>
#include <stdexcept>

namespace eubrl {

Agent::Agent(AgentConfig config, int num_states, int num_actions, uint64_t seed)
    : config_(config), num_states_(num_states), num_actions_(num_actions),
      belief_(num_states, num_actions, config.belief), rng_(seed) {
    if (!(config_.gamma >= 0.0 && config_.gamma < 1.0))
        throw std::invalid_argument("Agent: gamma must lie in [0, 1)");
    if (config_.kind == AgentKind::rmax && config_.knownness_m < 1)
        throw std::invalid_argument("Agent: RMAX knownness must be >= 1");
    if (config_.kind == AgentKind::rmax) {
        // Unknown pairs self-loop at the maximum reward; rows are frozen at
        // the moment a pair crosses the knowness threshold.
        rmax_model_ = TabularMdp(num_states_, num_actions_, config_.gamma);
        for (int s = 0; s < num_states_; ++s)
            for (int a = 0; a < num_actions_; ++a) {
                rmax_model_.prob(s, a, s) = 1.0;
                rmax_model_.reward(s, a) = config_.r_max;
            }
        rmax_model_valid_ = true;
    }
    replan();
}

int Agent::act(int s) const {
    if (s < 0 || s >= num_states_) throw std::out_of_range("Agent::act: state out of range");
    return policy_[s];
}

void Agent::apply_rmax_crossing(int s, int a) {
    const auto row = belief_.empirical_transition(s, a);
    for (int k = 0; k < num_states_; ++k) rmax_model_.prob(s, a, k) = row[k];
    rmax_model_.reward(s, a) = belief_.empirical_reward_mean(s, a);
    rmax_dirty_ = true;
}

void Agent::observe(int s, int a, int s2, Real r, bool episode_boundary) {
    belief_.update(s, a, s2, r);
    ++steps_since_replan_;
    ++steps_since_resample_;

    if (config_.kind == AgentKind::rmax &&
        belief_.visit_count(s, a) == config_.knownness_m)
        apply_rmax_crossing(s, a);

    bool do_replan = false;
    if (config_.episodic) {
        do_replan = episode_boundary;
    } else {
        const int period = config_.replan_period > 0 ? config_.replan_period : 1;
        do_replan = steps_since_replan_ >= period;
    }

    if (config_.kind == AgentKind::psrl) {
        bool resample = false;
        if (config_.episodic && config_.psrl_resample_period <= 0) {
            resample = episode_boundary;
        } else {
            const int period = config_.psrl_resample_period > 0
                                   ? config_.psrl_resample_period
                                   : static_cast<int>(std::ceil(1.0 / (1.0 - config_.gamma)));
            resample = steps_since_resample_ >= period;
        }
        if (resample) {
            psrl_model_valid_ = false;
            steps_since_resample_ = 0;
        }
        // Between resamples the sampled model is frozen, so replanning on it
        // would reproduce the same policy.
        do_replan = do_replan && !psrl_model_valid_;
    }
    if (config_.kind == AgentKind::rmax) {
        do_replan = do_replan && rmax_dirty_;
    }

    if (do_replan) replan();
}

TabularMdp Agent::build_planning_mdp() {
    switch (config_.kind) {
        case AgentKind::psrl: {
            if (!psrl_model_valid_) {
                psrl_model_ = belief_.sample_model(rng_, config_.gamma);
                psrl_model_valid_ = true;
            }
            return psrl_model_;
        }
        case AgentKind::rmax:
            rmax_dirty_ = false;
            return rmax_model_;
        default: break;
    }

    TabularMdp mdp(num_states_, num_actions_, config_.gamma);
    const bool empirical_p = config_.kind == AgentKind::mbie_eb;

    // Refresh the running uncertainty maximum over the whole table before
    // normalizing, so p_uncertain at fresh pairs evaluates to 1.
    std::vector<Real> e_table;
    if (config_.kind == AgentKind::eubrl) {
        e_table.resize(static_cast<size_t>(num_states_) * num_actions_);
        for (int s = 0; s < num_states_; ++s)
            for (int a = 0; a < num_actions_; ++a)
                e_table[static_cast<size_t>(s) * num_actions_ + a] =
                    belief_.epistemic_total_tracked(s, a);
    }

    for (int s = 0; s < num_states_; ++s) {
        for (int a = 0; a < num_actions_; ++a) {
            if (empirical_p) {
                const auto row = belief_.empirical_transition(s, a);
                for (int k = 0; k < num_states_; ++k) mdp.prob(s, a, k) = row[k];
            } else {
                belief_.predictive_transition_into(
                    s, a, &mdp.p[(static_cast<size_t>(s) * num_actions_ + a) * num_states_]);
            }

            Real reward = 0.0;
            const long long n = belief_.visit_count(s, a);
            switch (config_.kind) {
                case AgentKind::eubrl: {
                    const Real e = e_table[static_cast<size_t>(s) * num_actions_ + a];
                    const Real e_max = belief_.e_max();
                    Real p_u = 0.0;
                    if (e_max > 0.0)
                        p_u = std::min(1.0, std::max(0.0, e / e_max));
                    else if (e != 0.0)
                        throw DegeneratePriorError("planning: prior admits no uncertainty");
                    reward = eubrl_reward(belief_.predictive_reward_mean(s, a), e, p_u);
                    break;
                }
                case AgentKind::mean_mdp:
                    reward = belief_.predictive_reward_mean(s, a);
                    break;
                case AgentKind::beb:
                    reward = belief_.empirical_reward_mean(s, a) +
                             config_.beta_bonus /
                                 (1.0 + static_cast<Real>(n) + belief_.prior_strength(s, a));
                    break;
                case AgentKind::vbrb:
                    reward = belief_.predictive_reward_mean(s, a) + belief_.epistemic_total(s, a);
                    break;
                case AgentKind::mbie_eb:
                    if (n == 0)
                        reward = config_.r_max / (1.0 - config_.gamma);
                    else
                        reward = belief_.empirical_reward_mean(s, a) +
                                 config_.beta_bonus / std::sqrt(static_cast<Real>(n));
                    break;
                case AgentKind::rmax:
                case AgentKind::psrl:
                    break;  // handled above
            }
            mdp.reward(s, a) = reward;
        }
    }
    return mdp;
}

void Agent::replan() {
    const TabularMdp mdp = build_planning_mdp();
    const ValueFunction* warm =
        (config_.warm_start && !value_.empty()) ? &value_ : nullptr;
    PlanResult plan = value_iteration(mdp, config_.planner_tol, config_.planner_max_iters, warm);
    value_ = std::move(plan.value);
    policy_ = std::move(plan.policy);
    steps_since_replan_ = 0;
    ++replan_count_;
}

}  // namespace eubrl
