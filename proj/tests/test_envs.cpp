#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "eubrl/envs.hpp"

using namespace eubrl;

namespace {

EnvSpec spec_of(EnvKind kind, int size = 5, int loops = 2, bool stochastic = false) {
    EnvSpec s;
    s.kind = kind;
    s.size = size;
    s.loops = loops;
    s.stochastic = stochastic;
    return s;
}

}  // namespace

TEST_CASE("task dimensions follow the benchmark summary") {
    CHECK(spec_of(EnvKind::chain).num_states() == 5);
    CHECK(spec_of(EnvKind::chain).num_actions() == 2);
    CHECK(spec_of(EnvKind::loop, 5, 2).num_states() == 9);
    CHECK(spec_of(EnvKind::loop, 5, 3).num_states() == 13);
    CHECK(spec_of(EnvKind::loop, 5, 3).num_actions() == 3);
    CHECK(spec_of(EnvKind::deep_sea, 10).num_states() == 100);
    CHECK(spec_of(EnvKind::deep_sea, 10).episode_length() == 10);
    CHECK(spec_of(EnvKind::lazy_chain, 7).num_states() == 15);
    CHECK(spec_of(EnvKind::lazy_chain, 7).num_actions() == 3);
}

TEST_CASE("invalid sizes are rejected") {
    CHECK_THROWS_AS(make_env(spec_of(EnvKind::deep_sea, 1), 0), std::invalid_argument);
    CHECK_THROWS_AS(make_env(spec_of(EnvKind::lazy_chain, 1), 0), std::invalid_argument);
    CHECK_THROWS_AS(make_env(spec_of(EnvKind::loop, 5, 1), 0), std::invalid_argument);
}

TEST_CASE("chain dynamics") {
    EnvSpec spec = spec_of(EnvKind::chain);
    spec.slip_prob = 0.0;
    EnvInstance env(spec, 1);
    CHECK(env.state() == 0);
    for (int i = 0; i < 4; ++i) env.step(1);
    CHECK(env.state() == 4);
    StepResult r = env.step(1);  // advance from the last state stays there
    CHECK(r.next_state == 4);
    CHECK(r.reward == doctest::Approx(10.0));
    r = env.step(0);
    CHECK(r.next_state == 0);
    CHECK(r.reward == doctest::Approx(0.0));

    SUBCASE("classic small reward on the reset action") {
        spec.chain_classic_reward = true;
        EnvInstance env2(spec, 1);
        const StepResult r2 = env2.step(0);
        CHECK(r2.reward == doctest::Approx(2.0));
    }
}

TEST_CASE("chain reward support") {
    EnvSpec spec = spec_of(EnvKind::chain);
    EnvInstance env(spec, 99);
    for (int t = 0; t < 2000; ++t) {
        const StepResult r = env.step(static_cast<int>(t % 2));
        CHECK((r.reward == 0.0 || r.reward == 10.0));
    }
}

TEST_CASE("loop traversal and rewards") {
    EnvSpec spec = spec_of(EnvKind::loop, 5, 2);
    EnvInstance env(spec, 3);
    // optimal loop (entered by the last action): five steps return to the
    // hub with +2
    Real total = 0.0;
    for (int i = 0; i < 5; ++i) {
        total += env.step(1).reward;
        if (i < 4) CHECK(env.state() != 0);
    }
    CHECK(env.state() == 0);
    CHECK(total == doctest::Approx(2.0));

    // suboptimal loop pays 1 and tolerates any action
    total = 0.0;
    env.step(0);
    for (int i = 0; i < 4; ++i) total += env.step(i % 2).reward;
    CHECK(env.state() == 0);
    CHECK(total == doctest::Approx(1.0));

    // a wrong action inside the optimal loop resets to the hub with nothing
    env.step(1);
    const StepResult r = env.step(0);
    CHECK(r.next_state == 0);
    CHECK(r.reward == doctest::Approx(0.0));
}

TEST_CASE("deep sea episodes terminate after exactly N steps") {
    EnvSpec spec = spec_of(EnvKind::deep_sea, 4);
    EnvInstance env(spec, 5);
    for (int episode = 0; episode < 3; ++episode) {
        for (int t = 0; t < 4; ++t) {
            const bool terminated = env.step(t % 2).terminated;
            CHECK(terminated == (t == 3));
        }
        CHECK_THROWS_AS(env.step(0), std::logic_error);
        env.reset();
        CHECK(env.state() == 0);
    }
}

TEST_CASE("deep sea rewards") {
    EnvSpec spec = spec_of(EnvKind::deep_sea, 4);
    EnvInstance env(spec, 5);
    StepResult r = env.step(1);
    CHECK(r.reward == doctest::Approx(-0.0025));  // right costs 0.01/N
    r = env.step(0);
    CHECK(r.reward == doctest::Approx(0.0));
    env.reset();
    // all-right reaches the treasure on the (N-1)-th move
    Real treasure = 0.0;
    for (int t = 0; t < 3; ++t) treasure = env.step(1).reward;
    CHECK(treasure == doctest::Approx(1.0 - 0.0025));
    CHECK(env.state() == 15);
}

TEST_CASE("lazy chain dynamics") {
    EnvSpec spec = spec_of(EnvKind::lazy_chain, 4);
    EnvInstance env(spec, 7);
    CHECK(env.state() == 4);  // middle of 2N+1 = 9 states

    StepResult r = env.step(2);  // do nothing
    CHECK(r.next_state == 4);
    CHECK(r.reward == doctest::Approx(0.0));

    r = env.step(1);
    CHECK(r.reward == doctest::Approx(-1.0));

    // ride to the right end: reward 2N-1 and an immediate reset to the middle
    env.step(1);
    env.step(1);
    r = env.step(1);
    CHECK(r.reward == doctest::Approx(7.0));
    CHECK(r.next_state == 4);
    CHECK(r.episode_boundary);

    // left end pays N-1; net return of the left excursion is zero
    Real total = 0.0;
    for (int i = 0; i < 4; ++i) total += env.step(0).reward;
    CHECK(total == doctest::Approx(0.0));
    CHECK(env.state() == 4);
}

TEST_CASE("lazy chain reward support") {
    EnvSpec spec = spec_of(EnvKind::lazy_chain, 5, 2, true);
    EnvInstance env(spec, 11);
    const std::set<Real> support = {-1.0, 0.0, 4.0, 9.0};
    for (int t = 0; t < 3000; ++t) {
        const StepResult r = env.step(static_cast<int>(t % 3));
        CHECK(support.count(r.reward) == 1);
    }
}

TEST_CASE("ground truth matches sampled frequencies") {
    std::vector<EnvSpec> specs = {spec_of(EnvKind::chain), spec_of(EnvKind::loop, 5, 2),
                                  spec_of(EnvKind::deep_sea, 4, 2, true),
                                  spec_of(EnvKind::lazy_chain, 3, 2, true)};
    for (const auto& spec : specs) {
        const TabularMdp gt = ground_truth_mdp(spec, 0.9);
        EnvInstance env(spec, 123);
        // probe a handful of reachable (s,a) pairs
        for (int probe = 0; probe < 4; ++probe) {
            const int s = (probe * 3) % std::max(1, spec.num_states() - 1);
            const int a = probe % spec.num_actions();
            if (spec.kind == EnvKind::lazy_chain && (s == 0 || s == spec.num_states() - 1))
                continue;  // pass-through states are never occupied
            const int samples = 20000;
            std::map<int, int> freq;
            for (int i = 0; i < samples; ++i) {
                env.reset();
                env.set_state_for_testing(s);
                freq[env.step(a).next_state] += 1;
            }
            for (const auto& [next, count] : freq) {
                const Real p = gt.prob(s, a, next);
                const Real se = std::sqrt(std::max(p * (1.0 - p), 1e-9) / samples);
                CHECK(std::abs(static_cast<Real>(count) / samples - p) <= 3.5 * se + 1e-9);
            }
        }
    }
}

TEST_CASE("optimal policies match the analytic solutions") {
    SUBCASE("chain: always advance") {
        const auto [pi, v] = optimal_policy_and_value(spec_of(EnvKind::chain), 0.95);
        for (int s = 0; s < 5; ++s) CHECK(pi[s] == 1);
        CHECK(v[4] > v[0]);
    }
    SUBCASE("loop: enter and stay in the reward-2 loop") {
        const auto [pi, v] = optimal_policy_and_value(spec_of(EnvKind::loop, 5, 2), 0.95);
        CHECK(pi[0] == 1);
        for (int s = 5; s <= 8; ++s) CHECK(pi[s] == 1);
    }
    SUBCASE("deterministic deep sea: right along the diagonal") {
        const auto [pi, v] = optimal_policy_and_value(spec_of(EnvKind::deep_sea, 5), 0.99);
        for (int d = 0; d < 4; ++d) CHECK(pi[d * 5 + d] == 1);
    }
    SUBCASE("bandit: the better arm") {
        EnvSpec spec = spec_of(EnvKind::bandit);
        spec.mu1 = 0.2;
        spec.mu2 = 0.7;
        const auto [pi, v] = optimal_policy_and_value(spec, 0.95);
        CHECK(pi[0] == 1);
    }
}

TEST_CASE("identical seeds give identical trajectories") {
    const EnvSpec spec = spec_of(EnvKind::deep_sea, 5, 2, true);
    EnvInstance e1(spec, 77), e2(spec, 77);
    for (int t = 0; t < 200; ++t) {
        const int a = (t * 7) % 2;
        const StepResult r1 = e1.step(a);
        const StepResult r2 = e2.step(a);
        CHECK(r1.next_state == r2.next_state);
        CHECK(r1.reward == doctest::Approx(r2.reward));
        if (r1.terminated) {
            e1.reset();
            e2.reset();
        }
    }
}
