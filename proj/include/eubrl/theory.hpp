#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "eubrl/mdp.hpp"

namespace eubrl {

struct CheckReport {
    std::string name;
    bool passed = false;
    nlohmann::json details;         // measured quantities and tolerances
    nlohmann::json counterexample;  // payload on failure
};

/// Dirichlet posterior-mean decomposition
/// P_b - P = n/(n+a0) (P_hat - P) + a0/(n+a0) (P_b0 - P), to 1e-12.
CheckReport check_transition_decomposition(int trials = 1000, uint64_t seed = 7);

/// Normal-Normal and Normal-Gamma posterior-mean decompositions, to 1e-12.
CheckReport check_reward_decomposition(int trials = 1000, uint64_t seed = 11);

/// Rate bounds of the epistemic uncertainty: O(1/n) and Omega(1/n^2) for
/// Dirichlet, Theta(1/n) for Normal-Normal, and the Normal-Gamma
/// zero-sample-variance degeneracy (Omega(1/n^2)), over n <= 10^4.
CheckReport check_uncertainty_rates(uint64_t seed = 13);

/// On count-based-mode trajectories across all environments, verifies
/// sum_{t<=T} P_U(s_t,a_t) >= 1 + (2/E_max)(sqrt(T)-1) at every prefix.
CheckReport check_resistance_lower_bound(int trajectories = 100, uint64_t seed = 17);

/// Beta-Bernoulli two-armed bandit stickiness under a misspecified prior.
/// prior_a <= 0 selects floor(max{a1, a2}) + 1 automatically. Requires
/// mu2 > 5/16. The first pull's tie-break coin flip is realized by randomly
/// assigning the suboptimal arm to index 0 or 1 per seed.
CheckReport run_misspecification_bandit(Real prior_a, Real mu1 = 0.9, Real mu2 = 0.4,
                                        Real eta_conf = 0.1, int num_seeds = 200,
                                        long long horizon = 10000, uint64_t seed = 23);

/// Threshold max{a1, a2} above which the stickiness theorem applies.
Real misspecification_prior_threshold(Real mu2, Real eta_conf);

/// Closed-form Dirichlet mutual information against a Monte-Carlo estimate
/// of E_b[KL(P(.|w) || P_b)], within 3 standard errors per trial.
CheckReport check_mi_closed_form(int trials = 100, long long samples = 1000000,
                                 uint64_t seed = 29);

/// Dispatch by name ("all" runs every check with default parameters).
std::vector<CheckReport> run_checks(const std::string& name);

nlohmann::json report_to_json(const CheckReport& report);

}  // namespace eubrl
