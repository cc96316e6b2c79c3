#include "eubrl/belief.hpp"

#include <cmath>
#include <stdexcept>

#include "eubrl/special.hpp"

namespace eubrl {

BeliefState::BeliefState(int num_states, int num_actions, BeliefConfig config)
    : num_states_(num_states), num_actions_(num_actions), config_(config) {
    if (num_states <= 0 || num_actions <= 0)
        throw std::invalid_argument("BeliefState: empty state or action space");
    if (!(config_.alpha > 0.0))
        throw std::invalid_argument("BeliefState: Dirichlet alpha must be positive");
    switch (config_.reward_model) {
        case RewardModelKind::normal_gamma:
            if (!(config_.lambda0 > 0.0 && config_.ng_beta0 > 0.0))
                throw std::invalid_argument("BeliefState: Normal-Gamma lambda0, beta0 must be positive");
            if (!(config_.ng_alpha0 > 1.0))
                throw std::invalid_argument(
                    "BeliefState: Normal-Gamma alpha0 must exceed 1 (variance undefined)");
            break;
        case RewardModelKind::normal:
            if (!(config_.tau0 > 0.0 && config_.tau > 0.0))
                throw std::invalid_argument("BeliefState: Normal tau0, tau must be positive");
            break;
        case RewardModelKind::beta_bernoulli:
            if (!(config_.beta_a0 > 0.0 && config_.beta_b0 > 0.0))
                throw std::invalid_argument("BeliefState: Beta prior parameters must be positive");
            break;
    }
    const size_t n_pairs = static_cast<size_t>(num_states_) * num_actions_;
    if (config_.tied) {
        const size_t dim = (config_.tied_encoding == TiedEncoding::relative)
                               ? static_cast<size_t>(2 * num_states_ - 1)
                               : static_cast<size_t>(num_states_);
        dir_counts_.assign(static_cast<size_t>(num_actions_) * dim, 0.0);
    } else {
        dir_counts_.assign(n_pairs * num_states_, 0.0);
    }
    reward_stats_.assign(n_pairs * num_states_, SasStats{});
    n_sa_.assign(n_pairs, 0);
    n_sas_.assign(n_pairs * num_states_, 0);
    reward_sum_sa_.assign(n_pairs, 0.0);
    init_e_max();
}

void BeliefState::init_e_max() {
    if (config_.mode == UncertaintyMode::count_based) {
        // Maximum of 1/sqrt(N) over N >= 1; doubles as the N = 0 value.
        e_max_ = 1.0;
        return;
    }
    e_max_ = 0.0;
    for (int s = 0; s < num_states_; ++s)
        for (int a = 0; a < num_actions_; ++a)
            e_max_ = std::max(e_max_, epistemic_total(s, a));
}

void BeliefState::check_pair(int s, int a) const {
    if (s < 0 || s >= num_states_ || a < 0 || a >= num_actions_)
        throw std::out_of_range("BeliefState: state or action index out of range");
}

void BeliefState::check_indices(int s, int a, int s2) const {
    check_pair(s, a);
    if (s2 < 0 || s2 >= num_states_)
        throw std::out_of_range("BeliefState: next-state index out of range");
}

int BeliefState::tied_index(int s, int s2) const {
    return (config_.tied_encoding == TiedEncoding::relative) ? s2 - s + num_states_ - 1 : s2;
}

Real BeliefState::dirichlet_param(int s, int a, int s2) const {
    if (config_.tied) {
        const size_t dim = (config_.tied_encoding == TiedEncoding::relative)
                               ? static_cast<size_t>(2 * num_states_ - 1)
                               : static_cast<size_t>(num_states_);
        return config_.alpha + dir_counts_[a * dim + tied_index(s, s2)];
    }
    return config_.alpha + dir_counts_[sas(s, a, s2)];
}

Real BeliefState::dirichlet_total(int s, int a) const {
    Real total = 0.0;
    for (int k = 0; k < num_states_; ++k) total += dirichlet_param(s, a, k);
    return total;
}

void BeliefState::update(int s, int a, int s2, Real r) {
    check_indices(s, a, s2);
    if (!std::isfinite(r)) throw std::invalid_argument("BeliefState::update: non-finite reward");

    if (config_.tied) {
        const size_t dim = (config_.tied_encoding == TiedEncoding::relative)
                               ? static_cast<size_t>(2 * num_states_ - 1)
                               : static_cast<size_t>(num_states_);
        dir_counts_[a * dim + tied_index(s, s2)] += 1.0;
    } else {
        dir_counts_[sas(s, a, s2)] += 1.0;
    }

    SasStats& st = reward_stats_[sas(s, a, s2)];
    st.n += 1.0;
    const Real delta = r - st.mean;
    st.mean += delta / st.n;
    st.m2 += delta * (r - st.mean);

    n_sa_[sa(s, a)] += 1;
    n_sas_[sas(s, a, s2)] += 1;
    reward_sum_sa_[sa(s, a)] += r;
    total_updates_ += 1;

    epistemic_total_tracked(s, a);
}

void BeliefState::predictive_transition_into(int s, int a, Real* out) const {
    check_pair(s, a);
    Real total = 0.0;
    for (int k = 0; k < num_states_; ++k) {
        out[k] = dirichlet_param(s, a, k);
        total += out[k];
    }
    const Real inv = 1.0 / total;
    for (int k = 0; k < num_states_; ++k) out[k] *= inv;
}

std::vector<Real> BeliefState::predictive_transition(int s, int a) const {
    std::vector<Real> out(num_states_);
    predictive_transition_into(s, a, out.data());
    return out;
}

Real BeliefState::reward_mean(int s, int a, int s2) const {
    const SasStats& st = reward_stats_[sas(s, a, s2)];
    switch (config_.reward_model) {
        case RewardModelKind::normal_gamma:
            return (config_.lambda0 * config_.mu0 + st.n * st.mean) / (config_.lambda0 + st.n);
        case RewardModelKind::normal:
            return (config_.tau0 * config_.mu0 + config_.tau * st.n * st.mean) /
                   (config_.tau0 + config_.tau * st.n);
        case RewardModelKind::beta_bernoulli: {
            const Real successes = st.n * st.mean;  // rewards are 0/1
            return (config_.beta_a0 + successes) / (config_.beta_a0 + config_.beta_b0 + st.n);
        }
    }
    return 0.0;
}

Real BeliefState::reward_uncertainty(int s, int a, int s2) const {
    const SasStats& st = reward_stats_[sas(s, a, s2)];
    switch (config_.reward_model) {
        case RewardModelKind::normal_gamma: {
            const Real lambda = config_.lambda0 + st.n;
            const Real alpha = config_.ng_alpha0 + 0.5 * st.n;
            const Real dev = st.mean - config_.mu0;
            const Real beta =
                config_.ng_beta0 +
                0.5 * (st.m2 + config_.lambda0 * st.n * dev * dev / (config_.lambda0 + st.n));
            return beta / (lambda * (alpha - 1.0));
        }
        case RewardModelKind::normal:
            return 1.0 / (config_.tau0 + config_.tau * st.n);
        case RewardModelKind::beta_bernoulli: {
            const Real ap = config_.beta_a0 + st.n * st.mean;
            const Real bp = config_.beta_b0 + st.n * (1.0 - st.mean);
            const Real sum = ap + bp;
            return ap * bp / (sum * sum * (sum + 1.0));
        }
    }
    return 0.0;
}

Real BeliefState::predictive_reward_mean(int s, int a) const {
    check_pair(s, a);
    const Real total = dirichlet_total(s, a);
    Real out = 0.0;
    for (int k = 0; k < num_states_; ++k)
        out += dirichlet_param(s, a, k) / total * reward_mean(s, a, k);
    return out;
}

Real BeliefState::epistemic_transition(int s, int a) const {
    check_pair(s, a);
    const Real total = dirichlet_total(s, a);
    Real out = 0.0;
    for (int k = 0; k < num_states_; ++k) {
        const Real w = dirichlet_param(s, a, k);
        out += w * (total - w);
    }
    return out / (total * total * (total + 1.0));
}

Real BeliefState::mutual_info_transition(int s, int a) const {
    check_pair(s, a);
    const Real total = dirichlet_total(s, a);
    const Real psi_total = digamma(total + 1.0);
    Real out = 0.0;
    for (int k = 0; k < num_states_; ++k) {
        const Real w = dirichlet_param(s, a, k);
        const Real frac = w / total;
        out += frac * (digamma(w + 1.0) - psi_total - std::log(frac));
    }
    return std::max(out, 0.0);
}

Real BeliefState::epistemic_reward(int s, int a) const {
    check_pair(s, a);
    const Real total = dirichlet_total(s, a);
    Real out = 0.0;
    for (int k = 0; k < num_states_; ++k)
        out += dirichlet_param(s, a, k) / total * reward_uncertainty(s, a, k);
    return out;
}

Real BeliefState::epistemic_total(int s, int a) const {
    check_pair(s, a);
    switch (config_.mode) {
        case UncertaintyMode::count_based: {
            const long long n = n_sa_[sa(s, a)];
            return n == 0 ? e_max_ : 1.0 / std::sqrt(static_cast<Real>(n));
        }
        case UncertaintyMode::mutual_information:
            return config_.eta *
                   (std::sqrt(mutual_info_transition(s, a)) + std::sqrt(epistemic_reward(s, a)));
        case UncertaintyMode::variance:
            return config_.eta *
                   (std::sqrt(epistemic_transition(s, a)) + std::sqrt(epistemic_reward(s, a)));
    }
    return 0.0;
}

void BeliefState::note_uncertainty(Real value) { e_max_ = std::max(e_max_, value); }

Real BeliefState::epistemic_total_tracked(int s, int a) {
    const Real e = epistemic_total(s, a);
    note_uncertainty(e);
    return e;
}

Real BeliefState::p_uncertain(int s, int a) const {
    const Real e = epistemic_total(s, a);
    if (e_max_ <= 0.0) {
        if (e == 0.0) return 0.0;  // eta = 0 disables guidance entirely
        throw DegeneratePriorError("p_uncertain: prior admits no uncertainty (E_max = 0)");
    }
    const Real p = e / e_max_;
    return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
}

long long BeliefState::visit_count(int s, int a) const {
    check_pair(s, a);
    return n_sa_[sa(s, a)];
}

long long BeliefState::transition_count(int s, int a, int s2) const {
    check_indices(s, a, s2);
    return n_sas_[sas(s, a, s2)];
}

std::vector<Real> BeliefState::empirical_transition(int s, int a) const {
    check_pair(s, a);
    std::vector<Real> out(num_states_, 0.0);
    const long long n = n_sa_[sa(s, a)];
    if (n == 0) {
        const Real u = 1.0 / num_states_;
        for (auto& v : out) v = u;
        return out;
    }
    for (int k = 0; k < num_states_; ++k)
        out[k] = static_cast<Real>(n_sas_[sas(s, a, k)]) / static_cast<Real>(n);
    return out;
}

Real BeliefState::empirical_reward_mean(int s, int a) const {
    check_pair(s, a);
    const long long n = n_sa_[sa(s, a)];
    return n == 0 ? 0.0 : reward_sum_sa_[sa(s, a)] / static_cast<Real>(n);
}

Real BeliefState::prior_strength(int s, int a) const {
    check_pair(s, a);
    return config_.alpha * num_states_;
}

TabularMdp BeliefState::sample_model(std::mt19937_64& rng, Real gamma) const {
    TabularMdp mdp(num_states_, num_actions_, gamma);
    std::vector<Real> row(num_states_);
    for (int s = 0; s < num_states_; ++s) {
        for (int a = 0; a < num_actions_; ++a) {
            Real total = 0.0;
            for (int k = 0; k < num_states_; ++k) {
                const Real shape = std::max(dirichlet_param(s, a, k), config_.dirichlet_sample_clip);
                std::gamma_distribution<Real> gam(shape, 1.0);
                row[k] = gam(rng);
                total += row[k];
            }
            Real mean_reward = 0.0;
            for (int k = 0; k < num_states_; ++k) {
                row[k] /= total;
                mdp.prob(s, a, k) = row[k];

                const SasStats& st = reward_stats_[sas(s, a, k)];
                Real sampled = 0.0;
                switch (config_.reward_model) {
                    case RewardModelKind::normal_gamma: {
                        const Real lambda = config_.lambda0 + st.n;
                        const Real alpha = config_.ng_alpha0 + 0.5 * st.n;
                        const Real dev = st.mean - config_.mu0;
                        const Real beta = config_.ng_beta0 +
                                          0.5 * (st.m2 + config_.lambda0 * st.n * dev * dev /
                                                             (config_.lambda0 + st.n));
                        std::gamma_distribution<Real> gtau(alpha, 1.0 / beta);
                        const Real tau = gtau(rng);
                        std::normal_distribution<Real> nd(reward_mean(s, a, k),
                                                          std::sqrt(1.0 / (lambda * tau)));
                        sampled = nd(rng);
                        break;
                    }
                    case RewardModelKind::normal: {
                        std::normal_distribution<Real> nd(
                            reward_mean(s, a, k),
                            std::sqrt(1.0 / (config_.tau0 + config_.tau * st.n)));
                        sampled = nd(rng);
                        break;
                    }
                    case RewardModelKind::beta_bernoulli: {
                        const Real ap = config_.beta_a0 + st.n * st.mean;
                        const Real bp = config_.beta_b0 + st.n * (1.0 - st.mean);
                        std::gamma_distribution<Real> g1(ap, 1.0);
                        std::gamma_distribution<Real> g2(bp, 1.0);
                        const Real x = g1(rng);
                        const Real y = g2(rng);
                        sampled = x / (x + y);
                        break;
                    }
                }
                mean_reward += row[k] * sampled;
            }
            mdp.reward(s, a) = mean_reward;
        }
    }
    return mdp;
}

}  // namespace eubrl
