#pragma once

#include <random>
#include <stdexcept>
#include <vector>

#include "eubrl/mdp.hpp"

// Test-only oracles, independent of the library's iterative solvers.
namespace testsupport {

using eubrl::Real;
using eubrl::TabularMdp;

/// Dense Gaussian elimination with partial pivoting; solves A x = b.
inline std::vector<Real> solve_linear(std::vector<std::vector<Real>> a, std::vector<Real> b) {
    const size_t n = b.size();
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-14) throw std::runtime_error("singular system");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (size_t r = col + 1; r < n; ++r) {
            const Real f = a[r][col] / a[col][col];
            for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<Real> x(n, 0.0);
    for (size_t r = n; r-- > 0;) {
        Real acc = b[r];
        for (size_t c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return x;
}

/// Policy value by direct linear solve of (I - gamma P_pi) v = R_pi.
inline std::vector<Real> policy_value_linear(const TabularMdp& mdp,
                                             const std::vector<int>& policy) {
    const int n = mdp.num_states;
    std::vector<std::vector<Real>> a(n, std::vector<Real>(n, 0.0));
    std::vector<Real> b(n, 0.0);
    for (int s = 0; s < n; ++s) {
        for (int k = 0; k < n; ++k) a[s][k] = -mdp.gamma * mdp.prob(s, policy[s], k);
        a[s][s] += 1.0;
        b[s] = mdp.reward(s, policy[s]);
    }
    return solve_linear(std::move(a), std::move(b));
}

inline TabularMdp random_mdp(int num_states, int num_actions, Real gamma,
                             std::mt19937_64& rng) {
    TabularMdp mdp(num_states, num_actions, gamma);
    std::exponential_distribution<Real> expo(1.0);
    std::uniform_real_distribution<Real> unif(-1.0, 1.0);
    for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < num_actions; ++a) {
            Real total = 0.0;
            for (int k = 0; k < num_states; ++k) {
                mdp.prob(s, a, k) = expo(rng);
                total += mdp.prob(s, a, k);
            }
            for (int k = 0; k < num_states; ++k) mdp.prob(s, a, k) /= total;
            mdp.reward(s, a) = unif(rng);
        }
    }
    return mdp;
}

}  // namespace testsupport
