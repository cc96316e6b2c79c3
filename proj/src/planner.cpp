#include "eubrl/mdp.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

namespace eubrl {

void TabularMdp::validate() const {
    if (num_states <= 0 || num_actions <= 0)
        throw std::invalid_argument("TabularMdp: empty state or action space");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("TabularMdp: gamma must lie in [0, 1)");
    for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < num_actions; ++a) {
            Real sum = 0.0;
            const Real* pr = row(s, a);
            for (int k = 0; k < num_states; ++k) {
                if (pr[k] < 0.0)
                    throw std::invalid_argument("TabularMdp: negative transition probability");
                sum += pr[k];
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw std::invalid_argument("TabularMdp: transition row off the simplex at s=" +
                                            std::to_string(s) + " a=" + std::to_string(a));
        }
    }
}

namespace {

Real backup_state(const TabularMdp& mdp, const ValueFunction& v, int s, int* argmax_out) {
    Real best = -std::numeric_limits<Real>::infinity();
    int best_a = 0;
    for (int a = 0; a < mdp.num_actions; ++a) {
        const Real* pr = mdp.row(s, a);
        Real q = 0.0;
        for (int k = 0; k < mdp.num_states; ++k) q += pr[k] * v[k];
        q = mdp.reward(s, a) + mdp.gamma * q;
        if (q > best) {
            best = q;
            best_a = a;
        }
    }
    if (argmax_out != nullptr) *argmax_out = best_a;
    return best;
}

}  // namespace

ValueFunction bellman_backup(const TabularMdp& mdp, const ValueFunction& v) {
    ValueFunction out(mdp.num_states);
    for (int s = 0; s < mdp.num_states; ++s) out[s] = backup_state(mdp, v, s, nullptr);
    return out;
}

Real bellman_residual(const TabularMdp& mdp, const ValueFunction& v) {
    Real res = 0.0;
    for (int s = 0; s < mdp.num_states; ++s)
        res = std::max(res, std::abs(backup_state(mdp, v, s, nullptr) - v[s]));
    return res;
}

PlanResult value_iteration(const TabularMdp& mdp, Real tol, int max_iters,
                           const ValueFunction* warm_start) {
    if (tol <= 0.0) throw std::invalid_argument("value_iteration: tol must be positive");
    PlanResult result;
    ValueFunction v = (warm_start != nullptr && static_cast<int>(warm_start->size()) == mdp.num_states)
                          ? *warm_start
                          : ValueFunction(mdp.num_states, 0.0);
    ValueFunction next(mdp.num_states, 0.0);
    Real residual = std::numeric_limits<Real>::infinity();
    int iter = 0;
    for (; iter < max_iters; ++iter) {
        residual = 0.0;
        for (int s = 0; s < mdp.num_states; ++s) {
            next[s] = backup_state(mdp, v, s, nullptr);
            residual = std::max(residual, std::abs(next[s] - v[s]));
        }
        v.swap(next);
        if (residual <= tol) break;
    }
    if (residual > tol)
        throw ConvergenceError("value_iteration: residual " + std::to_string(residual) +
                                   " above tol after " + std::to_string(max_iters) + " iterations",
                               residual);
    result.value = std::move(v);
    result.policy = greedy_policy(mdp, result.value);
    result.iterations = iter + 1;
    result.residual = residual;
    return result;
}

Policy greedy_policy(const TabularMdp& mdp, const ValueFunction& v) {
    Policy policy(mdp.num_states, 0);
    for (int s = 0; s < mdp.num_states; ++s) backup_state(mdp, v, s, &policy[s]);
    return policy;
}

ValueFunction policy_evaluation(const TabularMdp& mdp, const Policy& policy, Real tol,
                                int max_iters, const ValueFunction* warm_start) {
    if (static_cast<int>(policy.size()) != mdp.num_states)
        throw std::invalid_argument("policy_evaluation: policy size mismatch");
    for (int s = 0; s < mdp.num_states; ++s)
        if (policy[s] < 0 || policy[s] >= mdp.num_actions)
            throw std::invalid_argument("policy_evaluation: action index out of range");
    ValueFunction v = (warm_start != nullptr && static_cast<int>(warm_start->size()) == mdp.num_states)
                          ? *warm_start
                          : ValueFunction(mdp.num_states, 0.0);
    ValueFunction next(mdp.num_states, 0.0);
    Real residual = std::numeric_limits<Real>::infinity();
    for (int iter = 0; iter < max_iters; ++iter) {
        residual = 0.0;
        for (int s = 0; s < mdp.num_states; ++s) {
            const Real* pr = mdp.row(s, policy[s]);
            Real q = 0.0;
            for (int k = 0; k < mdp.num_states; ++k) q += pr[k] * v[k];
            next[s] = mdp.reward(s, policy[s]) + mdp.gamma * q;
            residual = std::max(residual, std::abs(next[s] - v[s]));
        }
        v.swap(next);
        if (residual <= tol) return v;
    }
    throw ConvergenceError("policy_evaluation: residual " + std::to_string(residual) +
                               " above tol after " + std::to_string(max_iters) + " iterations",
                           residual);
}

}  // namespace eubrl
