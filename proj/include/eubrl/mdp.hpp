#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace eubrl {

using Real = double;

/// Dense tabular MDP: transition tensor P (S x A x S, rows on the simplex),
/// reward table R (S x A) and discount gamma in [0, 1).
struct TabularMdp {
    int num_states = 0;
    int num_actions = 0;
    std::vector<Real> p;  // flattened [s][a][s']
    std::vector<Real> r;  // flattened [s][a]
    Real gamma = 0.0;

    TabularMdp() = default;
    TabularMdp(int s, int a, Real g)
        : num_states(s), num_actions(a),
          p(static_cast<size_t>(s) * a * s, 0.0),
          r(static_cast<size_t>(s) * a, 0.0), gamma(g) {}

    Real& prob(int s, int a, int s2) {
        return p[(static_cast<size_t>(s) * num_actions + a) * num_states + s2];
    }
    Real prob(int s, int a, int s2) const {
        return p[(static_cast<size_t>(s) * num_actions + a) * num_states + s2];
    }
    Real& reward(int s, int a) { return r[static_cast<size_t>(s) * num_actions + a]; }
    Real reward(int s, int a) const { return r[static_cast<size_t>(s) * num_actions + a]; }

    const Real* row(int s, int a) const {
        return p.data() + (static_cast<size_t>(s) * num_actions + a) * num_states;
    }

    /// Throws std::invalid_argument when a row is off the simplex (1e-9),
    /// an entry is negative, or gamma is outside [0, 1).
    void validate() const;
};

using ValueFunction = std::vector<Real>;
using Policy = std::vector<int>;

struct PlanResult {
    ValueFunction value;
    Policy policy;
    int iterations = 0;
    Real residual = 0.0;
};

/// Thrown when the iteration budget runs out before the tolerance is met.
class ConvergenceError : public std::runtime_error {
  public:
    ConvergenceError(const std::string& what, Real residual)
        : std::runtime_error(what), residual_(residual) {}
    Real residual() const { return residual_; }

  private:
    Real residual_;
};

/// One Bellman optimality backup of v.
ValueFunction bellman_backup(const TabularMdp& mdp, const ValueFunction& v);

/// sup-norm Bellman residual ||max_a(R + gamma P v) - v||_inf.
Real bellman_residual(const TabularMdp& mdp, const ValueFunction& v);

/// Exact value iteration until the Bellman residual drops below tol.
/// The returned policy is greedy w.r.t. the returned value function with
/// deterministic lowest-index tie breaking. An optional warm start reuses a
/// previous value function.
PlanResult value_iteration(const TabularMdp& mdp, Real tol = 1e-6, int max_iters = 200000,
                           const ValueFunction* warm_start = nullptr);

/// Iterative policy evaluation: ||v - (R_pi + gamma P_pi v)||_inf <= tol.
ValueFunction policy_evaluation(const TabularMdp& mdp, const Policy& policy, Real tol = 1e-6,
                                int max_iters = 200000,
                                const ValueFunction* warm_start = nullptr);

/// Greedy policy w.r.t. v, lowest action index on ties.
Policy greedy_policy(const TabularMdp& mdp, const ValueFunction& v);

}  // namespace eubrl
