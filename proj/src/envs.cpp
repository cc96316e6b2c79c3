#include "eubrl/envs.hpp"

#include <cmath>
#include <stdexcept>

namespace eubrl {

int EnvSpec::num_states() const {
    switch (kind) {
        case EnvKind::chain: return 5;
        case EnvKind::loop: return 4 * loops + 1;
        case EnvKind::deep_sea: return size * size;
        case EnvKind::lazy_chain: return 2 * size + 1;
        case EnvKind::bandit: return 1;
    }
    return 0;
}

int EnvSpec::num_actions() const {
    switch (kind) {
        case EnvKind::chain: return 2;
        case EnvKind::loop: return loops;
        case EnvKind::deep_sea: return 2;
        case EnvKind::lazy_chain: return 3;
        case EnvKind::bandit: return 2;
    }
    return 0;
}

int EnvSpec::start_state() const {
    switch (kind) {
        case EnvKind::chain: return 0;             // leftmost
        case EnvKind::loop: return 0;              // hub
        case EnvKind::deep_sea: return 0;          // top-left
        case EnvKind::lazy_chain: return size;     // middle
        case EnvKind::bandit: return 0;
    }
    return 0;
}

Real EnvSpec::max_reward() const {
    switch (kind) {
        case EnvKind::chain: return 10.0;
        case EnvKind::loop: return 2.0;
        case EnvKind::deep_sea: return 1.0;
        case EnvKind::lazy_chain: return 2.0 * size - 1.0;
        case EnvKind::bandit: return 1.0;
    }
    return 1.0;
}

Real EnvSpec::default_gamma() const {
    switch (kind) {
        case EnvKind::chain: return 0.95;
        case EnvKind::loop: return 0.95;
        case EnvKind::deep_sea: return 0.99;
        case EnvKind::lazy_chain: return 0.999;
        case EnvKind::bandit: return 0.95;
    }
    return 0.95;
}

long long EnvSpec::default_t_max(long long total_steps) const {
    switch (kind) {
        case EnvKind::deep_sea: return 50LL * size * size;
        case EnvKind::lazy_chain: return 1000LL * size;
        default: return total_steps;
    }
}

void EnvSpec::validate() const {
    if (kind == EnvKind::deep_sea && size < 2)
        throw std::invalid_argument("EnvSpec: DeepSea needs N >= 2");
    if (kind == EnvKind::lazy_chain && size < 2)
        throw std::invalid_argument("EnvSpec: LazyChain needs N >= 2");
    if (kind == EnvKind::loop && loops < 2)
        throw std::invalid_argument("EnvSpec: Loop needs L >= 2");
    if (kind == EnvKind::chain && !(slip_prob >= 0.0 && slip_prob < 1.0))
        throw std::invalid_argument("EnvSpec: Chain slip probability must lie in [0, 1)");
    if (kind == EnvKind::bandit &&
        !(mu1 >= 0.0 && mu1 <= 1.0 && mu2 >= 0.0 && mu2 <= 1.0))
        throw std::invalid_argument("EnvSpec: bandit means must lie in [0, 1]");
}

namespace {

std::vector<Branch> chain_branches(const EnvSpec& spec, int s, int a) {
    const int right_next = std::min(s + 1, 4);
    const int left_next = 0;
    const Real classic = spec.chain_classic_reward ? 2.0 : 0.0;
    const Real r_right = (right_next == 4) ? 10.0 : 0.0;
    const Real slip = spec.slip_prob;
    // action 0 = reset to the leftmost state, action 1 = advance; slipping
    // swaps the effects. The default tie-break action is the non-advancing
    // one, which is what makes the task an exploration problem.
    if (a == 1)
        return {{1.0 - slip, right_next, r_right, false}, {slip, left_next, classic, false}};
    return {{1.0 - slip, left_next, classic, false}, {slip, right_next, r_right, false}};
}

std::vector<Branch> loop_branches(const EnvSpec& spec, int s, int a) {
    // Action k enters loop k from the hub. The last loop is the optimal one
    // (reward 2, strict traversal), matching the original two-loop task where
    // the second action traverses the reward-2 loop; the others pay 1 and
    // tolerate any action.
    const int optimal = spec.loops - 1;
    if (s == 0) return {{1.0, 4 * a + 1, 0.0, false}};
    const int k = (s - 1) / 4;
    const int pos = (s - 1) % 4 + 1;  // 1..4 within loop k
    const bool last = pos == 4;
    const int forward = last ? 0 : s + 1;
    if (k == optimal) {
        if (a == optimal) return {{1.0, forward, last ? 2.0 : 0.0, false}};
        return {{1.0, 0, 0.0, false}};  // missed step: straight back to the hub
    }
    return {{1.0, forward, last ? 1.0 : 0.0, false}};
}

std::vector<Branch> deep_sea_branches(const EnvSpec& spec, int s, int a) {
    const int n = spec.size;
    const int row = s / n;
    const int col = s % n;
    const Real cost = (a == 1) ? -0.01 / n : 0.0;
    if (row == n - 1) return {{1.0, 0, cost, false}};  // episode's final move
    auto landing = [&](int c) {
        const int next = (row + 1) * n + c;
        Real bonus = 0.0;
        if (row + 1 == n - 1 && c == n - 1) bonus = 1.0;  // treasure (mean 1 when stochastic)
        return Branch{1.0, next, cost + bonus, false};
    };
    const int right_col = std::min(col + 1, n - 1);
    const int left_col = std::max(col - 1, 0);
    if (a == 1) {
        if (spec.stochastic) {
            const Real bad = 1.0 / n;
            Branch good = landing(right_col);
            Branch slip = landing(left_col);
            good.prob = 1.0 - bad;
            slip.prob = bad;
            if (good.next == slip.next) {
                good.prob = 1.0;
                return {good};
            }
            return {good, slip};
        }
        return {landing(right_col)};
    }
    return {landing(left_col)};
}

std::vector<Branch> lazy_chain_branches(const EnvSpec& spec, int s, int a) {
    const int n = spec.size;
    const int right_end = 2 * n;
    const int middle = n;
    if (s == 0 || s == right_end) return {{1.0, s, 0.0, false}};  // never occupied
    if (a == 2) return {{1.0, s, 0.0, false}};                    // do nothing, no cost
    auto move = [&](int dir) {
        const int target = s + dir;
        if (target == right_end) return Branch{1.0, middle, 2.0 * n - 1.0, true};
        if (target == 0) return Branch{1.0, middle, n - 1.0, true};
        return Branch{1.0, target, -1.0, false};
    };
    const int dir = (a == 1) ? 1 : -1;
    if (spec.stochastic) {
        Branch intended = move(dir);
        Branch flipped = move(-dir);
        intended.prob = 0.8;
        flipped.prob = 0.2;
        return {intended, flipped};
    }
    return {move(dir)};
}

std::vector<Branch> bandit_branches(const EnvSpec& spec, int /*s*/, int a) {
    return {{1.0, 0, a == 0 ? spec.mu1 : spec.mu2, false}};
}

}  // namespace

std::vector<Branch> env_branches(const EnvSpec& spec, int s, int a) {
    if (s < 0 || s >= spec.num_states() || a < 0 || a >= spec.num_actions())
        throw std::out_of_range("env_branches: state or action index out of range");
    switch (spec.kind) {
        case EnvKind::chain: return chain_branches(spec, s, a);
        case EnvKind::loop: return loop_branches(spec, s, a);
        case EnvKind::deep_sea: return deep_sea_branches(spec, s, a);
        case EnvKind::lazy_chain: return lazy_chain_branches(spec, s, a);
        case EnvKind::bandit: return bandit_branches(spec, s, a);
    }
    return {};
}

EnvInstance::EnvInstance(EnvSpec spec, uint64_t seed) : spec_(spec), rng_(seed) {
    spec_.validate();
    state_ = spec_.start_state();
}

void EnvInstance::reset() {
    state_ = spec_.start_state();
    episode_step_ = 0;
    terminated_ = false;
}

StepResult EnvInstance::step(int action) {
    if (terminated_)
        throw std::logic_error("EnvInstance::step: episode has terminated; call reset()");
    const auto branches = env_branches(spec_, state_, action);

    const Branch* chosen = &branches.back();
    if (branches.size() > 1) {
        std::uniform_real_distribution<Real> unif(0.0, 1.0);
        Real u = unif(rng_);
        for (const auto& b : branches) {
            if (u < b.prob) {
                chosen = &b;
                break;
            }
            u -= b.prob;
        }
    } else {
        chosen = &branches.front();
    }

    StepResult out;
    out.next_state = chosen->next;
    out.reward = chosen->mean_reward;
    out.episode_boundary = chosen->boundary;

    if (spec_.kind == EnvKind::bandit) {
        std::uniform_real_distribution<Real> unif(0.0, 1.0);
        out.reward = unif(rng_) < chosen->mean_reward ? 1.0 : 0.0;
    } else if (spec_.kind == EnvKind::deep_sea && spec_.stochastic) {
        const int n = spec_.size;
        const int next_row = out.next_state / n;
        const int next_col = out.next_state % n;
        const bool corner_cell =
            next_row == n - 1 && (next_col == n - 1 || next_col == 0) && episode_step_ < n - 1;
        if (corner_cell) {
            std::normal_distribution<Real> noise(0.0, 1.0);
            out.reward += noise(rng_);
        }
    }

    if (spec_.kind == EnvKind::deep_sea) {
        ++episode_step_;
        if (episode_step_ >= spec_.size) {
            out.terminated = true;
            out.episode_boundary = true;
            terminated_ = true;
        }
    }
    state_ = out.next_state;
    return out;
}

TabularMdp ground_truth_mdp(const EnvSpec& spec, Real gamma) {
    spec.validate();
    TabularMdp mdp(spec.num_states(), spec.num_actions(), gamma);
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            Real expected = 0.0;
            for (const auto& b : env_branches(spec, s, a)) {
                mdp.prob(s, a, b.next) += b.prob;
                expected += b.prob * b.mean_reward;
            }
            mdp.reward(s, a) = expected;
        }
    }
    mdp.validate();
    return mdp;
}

std::pair<Policy, ValueFunction> optimal_policy_and_value(const EnvSpec& spec, Real gamma) {
    const TabularMdp mdp = ground_truth_mdp(spec, gamma);
    PlanResult plan = value_iteration(mdp, 1e-9, 2000000);
    return {std::move(plan.policy), std::move(plan.value)};
}

}  // namespace eubrl
