#pragma once

#include <random>
#include <vector>

#include "eubrl/mdp.hpp"

namespace eubrl {

enum class UncertaintyMode { variance, mutual_information, count_based };
enum class RewardModelKind { normal_gamma, normal, beta_bernoulli };

/// Shared-vector alignment for the tied transition prior.
enum class TiedEncoding { relative, absolute };

struct BeliefConfig {
    // Transition model: symmetric Dirichlet prior Dir(alpha * 1_S) per (s,a).
    Real alpha = 1.0;
    bool tied = false;
    TiedEncoding tied_encoding = TiedEncoding::relative;

    RewardModelKind reward_model = RewardModelKind::normal_gamma;
    // Normal-Gamma hyperparameters (lambda0 = beta0 gives unit prior uncertainty).
    Real mu0 = 0.0;
    Real lambda0 = 0.01;
    Real ng_alpha0 = 2.0;
    Real ng_beta0 = 0.01;
    // Normal model with known data precision tau.
    Real tau0 = 1.0;
    Real tau = 1.0;
    // Beta-Bernoulli reward model.
    Real beta_a0 = 1.0;
    Real beta_b0 = 1.0;

    UncertaintyMode mode = UncertaintyMode::variance;
    Real eta = 1.0;  // scaling factor in h(x, y) = eta*(sqrt(x) + sqrt(y))

    Real dirichlet_sample_clip = 1e-3;  // applied only inside sample_model
};

/// Raised by p_uncertain when the prior admits no uncertainty to normalize by.
class DegeneratePriorError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Conjugate posteriors over transitions and per-(s,a,s') rewards, their
/// posterior predictives, and closed-form epistemic uncertainty.
///
/// Single writer per run; instances are plain values and may be moved
/// between worker threads.
class BeliefState {
  public:
    BeliefState(int num_states, int num_actions, BeliefConfig config);

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    const BeliefConfig& config() const { return config_; }

    /// Absorb one transition (s, a) -> s2 with observed reward r.
    void update(int s, int a, int s2, Real r);

    /// Posterior predictive transition row: entry k = (alpha_k+n_k)/(alpha_0+n).
    std::vector<Real> predictive_transition(int s, int a) const;
    void predictive_transition_into(int s, int a, Real* out) const;

    /// r_b(s,a) = sum_k P_b(k|s,a) * posterior mean reward at (s,a,k).
    Real predictive_reward_mean(int s, int a) const;

    /// Variance-based transition uncertainty, sum_k Var(theta_k).
    Real epistemic_transition(int s, int a) const;

    /// Closed-form Dirichlet mutual information (digamma form).
    Real mutual_info_transition(int s, int a) const;

    /// Hierarchical reward uncertainty E_{P_b(s'|s,a)}[E_R(s,a,s')].
    Real epistemic_reward(int s, int a) const;

    /// Combined uncertainty: eta*(sqrt(E_T)+sqrt(E_R)) in variance/MI mode,
    /// 1/sqrt(N(s,a)) in count-based mode (E_max at N=0).
    Real epistemic_total(int s, int a) const;

    /// epistemic_total that also refreshes the running maximum.
    Real epistemic_total_tracked(int s, int a);

    /// E_b(s,a) / E_max, clamped to [0, 1].
    Real p_uncertain(int s, int a) const;

    Real e_max() const { return e_max_; }
    void note_uncertainty(Real value);

    // Visit statistics (frequentist view of the same data).
    long long visit_count(int s, int a) const;
    long long transition_count(int s, int a, int s2) const;
    long long total_updates() const { return total_updates_; }
    std::vector<Real> empirical_transition(int s, int a) const;  // uniform when unvisited
    Real empirical_reward_mean(int s, int a) const;              // 0 when unvisited
    Real prior_strength(int s, int a) const;                     // 1^T alpha for this row

    /// Posterior mean reward of the per-(s,a,s') model.
    Real reward_mean(int s, int a, int s2) const;
    /// Per-(s,a,s') epistemic reward uncertainty.
    Real reward_uncertainty(int s, int a, int s2) const;

    /// Draw a full model from the posterior (PSRL). Dirichlet parameters are
    /// clipped at config.dirichlet_sample_clip inside this call only.
    TabularMdp sample_model(std::mt19937_64& rng, Real gamma) const;

  private:
    struct SasStats {  // streaming sufficient statistics per (s,a,s')
        Real n = 0.0;
        Real mean = 0.0;  // running mean (Welford)
        Real m2 = 0.0;    // sum of squared deviations, n * sigma_hat^2
    };

    void check_indices(int s, int a, int s2) const;
    void check_pair(int s, int a) const;
    size_t sa(int s, int a) const { return static_cast<size_t>(s) * num_actions_ + a; }
    size_t sas(int s, int a, int s2) const { return sa(s, a) * num_states_ + s2; }

    // Tied-mode addressing: per-action shared vector, indexed by next-state
    // offset (relative) or next-state index (absolute).
    int tied_index(int s, int s2) const;
    Real dirichlet_param(int s, int a, int s2) const;  // prior + counts
    Real dirichlet_total(int s, int a) const;
    void init_e_max();

    int num_states_;
    int num_actions_;
    BeliefConfig config_;

    std::vector<Real> dir_counts_;       // untied: S*A*S; tied: A*(2S-1) or A*S
    std::vector<SasStats> reward_stats_;  // S*A*S
    std::vector<long long> n_sa_;
    std::vector<long long> n_sas_;
    std::vector<Real> reward_sum_sa_;
    long long total_updates_ = 0;
    Real e_max_ = 0.0;
};

}  // namespace eubrl
