#include "eubrl/theory.hpp"

#include <cmath>
#include <random>

#include "eubrl/agents.hpp"
#include "eubrl/belief.hpp"
#include "eubrl/envs.hpp"
#include "eubrl/special.hpp"

namespace eubrl {

using nlohmann::json;

namespace {

uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::vector<Real> sample_dirichlet(const std::vector<Real>& params, std::mt19937_64& rng) {
    std::vector<Real> out(params.size());
    Real total = 0.0;
    for (size_t k = 0; k < params.size(); ++k) {
        std::gamma_distribution<Real> gam(params[k], 1.0);
        out[k] = gam(rng);
        total += out[k];
    }
    for (auto& v : out) v /= total;
    return out;
}

}  // namespace

CheckReport check_transition_decomposition(int trials, uint64_t seed) {
    CheckReport report;
    report.name = "transition_decomposition";
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> s_dist(2, 8);
    std::uniform_real_distribution<Real> alpha_dist(1e-3, 5.0);
    std::uniform_int_distribution<long long> n_dist(0, 500);

    Real max_err = 0.0;
    Real max_weak_prior_err = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const int S = s_dist(rng);
        const bool weak_prior = trial % 10 == 9;  // alpha0 -> 0 limit
        std::vector<Real> alpha(S);
        Real alpha0 = 0.0;
        for (auto& a : alpha) {
            a = weak_prior ? 1e-8 * alpha_dist(rng) : alpha_dist(rng);
            alpha0 += a;
        }
        const std::vector<Real> truth = sample_dirichlet(std::vector<Real>(S, 1.0), rng);
        const long long n = weak_prior ? std::max<long long>(1, n_dist(rng)) : n_dist(rng);
        std::vector<long long> counts(S, 0);
        for (long long i = 0; i < n; ++i) {
            Real u = std::uniform_real_distribution<Real>(0.0, 1.0)(rng);
            int k = S - 1;
            for (int c = 0; c < S; ++c) {
                if (u < truth[c]) {
                    k = c;
                    break;
                }
                u -= truth[c];
            }
            ++counts[k];
        }
        for (int k = 0; k < S; ++k) {
            const Real nr = static_cast<Real>(n);
            const Real p_b = (alpha[k] + counts[k]) / (alpha0 + nr);
            const Real p_hat = n > 0 ? counts[k] / nr : 0.0;
            const Real p_b0 = alpha[k] / alpha0;
            const Real lhs = p_b - truth[k];
            const Real rhs = nr / (nr + alpha0) * (p_hat - truth[k]) +
                             alpha0 / (nr + alpha0) * (p_b0 - truth[k]);
            max_err = std::max(max_err, std::abs(lhs - rhs));
            if (weak_prior) max_weak_prior_err = std::max(max_weak_prior_err, std::abs(p_b - p_hat));
        }
    }
    report.details = {{"trials", trials},
                      {"max_identity_error", max_err},
                      {"tolerance", 1e-12},
                      {"max_weak_prior_gap", max_weak_prior_err},
                      {"weak_prior_tolerance", 1e-7}};
    report.passed = max_err <= 1e-12 && max_weak_prior_err <= 1e-7;
    if (!report.passed) report.counterexample = report.details;
    return report;
}

CheckReport check_reward_decomposition(int trials, uint64_t seed) {
    CheckReport report;
    report.name = "reward_decomposition";
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<Real> unit(0.1, 5.0);
    std::uniform_real_distribution<Real> wide(-2.0, 2.0);
    std::uniform_int_distribution<int> n_dist(0, 100);

    Real max_nn = 0.0;
    Real max_ng = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const int n = n_dist(rng);
        const Real truth = wide(rng);
        const Real mu0 = wide(rng);
        std::vector<Real> data(n);
        Real sum = 0.0;
        for (auto& r : data) {
            r = truth + std::normal_distribution<Real>(0.0, 1.0)(rng);
            sum += r;
        }
        const Real r_hat = n > 0 ? sum / n : 0.0;

        // Normal-Normal
        const Real tau0 = unit(rng);
        const Real tau = unit(rng);
        const Real r_b_nn = (tau0 * mu0 + tau * sum) / (tau0 + n * tau);
        const Real rhs_nn = tau0 / (tau0 + n * tau) * (mu0 - truth) +
                            n * tau / (tau0 + n * tau) * (r_hat - truth);
        max_nn = std::max(max_nn, std::abs((r_b_nn - truth) - rhs_nn));

        // Normal-Gamma
        const Real lambda0 = unit(rng);
        const Real r_b_ng = (lambda0 * mu0 + n * r_hat) / (lambda0 + n);
        const Real rhs_ng = lambda0 / (lambda0 + n) * (mu0 - truth) +
                            n / (lambda0 + n) * (r_hat - truth);
        max_ng = std::max(max_ng, std::abs((r_b_ng - truth) - rhs_ng));
    }
    report.details = {{"trials", trials},
                      {"max_normal_normal_error", max_nn},
                      {"max_normal_gamma_error", max_ng},
                      {"tolerance", 1e-12}};
    report.passed = max_nn <= 1e-12 && max_ng <= 1e-12;
    if (!report.passed) report.counterexample = report.details;
    return report;
}

CheckReport check_uncertainty_rates(uint64_t seed) {
    CheckReport report;
    report.name = "uncertainty_rates";
    const long long n_max = 10000;
    bool ok = true;
    json details = json::object();

    // Dirichlet, single repeated next state: E_T <= 1/n and n^2 E_T >= C1.
    {
        Real min_ratio = 1e300;  // measured infimum of n^2 E / C1
        for (int S : {2, 5}) {
            for (Real alpha : {1.0, 0.1}) {
                const Real alpha0 = S * alpha;
                const Real c1 = 2.0 * (alpha0 - alpha) /
                                ((1.0 + alpha0) * (1.0 + alpha0) * (2.0 + alpha0));
                for (long long n = 1; n <= n_max; ++n) {
                    const Real total = alpha0 + n;
                    const Real visited = alpha + n;
                    const Real e = (visited * (total - visited) +
                                    (S - 1) * alpha * (total - alpha)) /
                                   (total * total * (total + 1.0));
                    if (e > 1.0 / n + 1e-15) ok = false;
                    min_ratio = std::min(min_ratio, n * static_cast<Real>(n) * e / c1);
                }
            }
        }
        details["dirichlet_min_n2E_over_C1"] = min_ratio;
        if (min_ratio < 1.0 - 1e-12) ok = false;
    }

    // Normal-Normal: 1/((tau0+tau)n) <= E_R <= 1/(tau n).
    {
        bool nn_ok = true;
        for (Real tau0 : {0.5, 1.0, 3.0}) {
            for (Real tau : {0.5, 1.0, 2.0}) {
                for (long long n = 1; n <= n_max; ++n) {
                    const Real e = 1.0 / (tau0 + tau * n);
                    if (e > 1.0 / (tau * n) + 1e-15 || e < 1.0 / ((tau0 + tau) * n) - 1e-15)
                        nn_ok = false;
                }
            }
        }
        details["normal_normal_theta_1_over_n"] = nn_ok;
        ok = ok && nn_ok;
    }

    // Normal-Gamma, deterministic rewards (zero sample variance): the
    // degeneracy mechanism behind the quasi-optimism failure. n^2 E stays
    // bounded below by its n = 1 value; random bounded streams obey the
    // derived O(1/n) constant 2*beta0 + sup sigma^2 + lambda0 sup(dev)^2.
    {
        bool ng_ok = true;
        Real min_n2e = 1e300;
        for (Real b0 : {0.1, 0.01}) {
            const Real lambda0 = b0, alpha0 = 2.0, mu0 = 0.0, r = 1.0;
            Real floor_value = 0.0;
            for (long long n = 1; n <= n_max; ++n) {
                const Real beta = b0 + lambda0 * n * r * r / (2.0 * (lambda0 + n));
                const Real e = beta / ((lambda0 + n) * (alpha0 + 0.5 * n - 1.0));
                const Real n2e = static_cast<Real>(n) * n * e;
                if (n == 1) floor_value = n2e;
                if (n2e < floor_value - 1e-12) ng_ok = false;
                min_n2e = std::min(min_n2e, n2e);
            }
        }
        details["normal_gamma_deterministic_min_n2E"] = min_n2e;

        std::mt19937_64 rng(seed);
        for (int stream = 0; stream < 10 && ng_ok; ++stream) {
            const Real b0 = 0.05, lambda0 = 0.05, alpha0 = 2.0, mu0 = 0.0;
            Real mean = 0.0, m2 = 0.0, sup_var = 0.0, sup_dev = 0.0;
            for (long long n = 1; n <= n_max; ++n) {
                const Real r = std::uniform_real_distribution<Real>(-1.0, 1.0)(rng);
                const Real delta = r - mean;
                mean += delta / n;
                m2 += delta * (r - mean);
                sup_var = std::max(sup_var, m2 / n);
                sup_dev = std::max(sup_dev, (mean - mu0) * (mean - mu0));
                const Real beta =
                    b0 + 0.5 * (m2 + lambda0 * n * (mean - mu0) * (mean - mu0) / (lambda0 + n));
                const Real e = beta / ((lambda0 + n) * (alpha0 + 0.5 * n - 1.0));
                const Real c2 = 2.0 * b0 + sup_var + lambda0 * sup_dev;
                if (n * e > c2 + 1e-12) ng_ok = false;
            }
        }
        details["normal_gamma_bounds"] = ng_ok;
        ok = ok && min_n2e > 0.0 && ng_ok;
    }

    report.details = details;
    report.passed = ok;
    if (!ok) report.counterexample = details;
    return report;
}

CheckReport check_resistance_lower_bound(int trajectories, uint64_t seed) {
    CheckReport report;
    report.name = "resistance_lower_bound";
    std::mt19937_64 rng(seed);
    bool ok = true;
    Real min_slack = 1e300;
    json fail;

    for (int traj = 0; traj < trajectories && ok; ++traj) {
        EnvSpec spec;
        switch (traj % 5) {
            case 0: spec.kind = EnvKind::chain; break;
            case 1:
                spec.kind = EnvKind::loop;
                spec.loops = 2 + traj % 3;
                break;
            case 2:
                spec.kind = EnvKind::deep_sea;
                spec.size = 4 + traj % 3;
                spec.stochastic = traj % 2 == 0;
                break;
            case 3:
                spec.kind = EnvKind::lazy_chain;
                spec.size = 3 + traj % 3;
                spec.stochastic = traj % 2 == 1;
                break;
            case 4: spec.kind = EnvKind::bandit; break;
        }
        AgentConfig acfg;
        acfg.kind = AgentKind::eubrl;
        acfg.belief.mode = UncertaintyMode::count_based;
        acfg.belief.alpha = 0.5;
        acfg.gamma = spec.default_gamma();
        acfg.episodic = spec.episodic();

        const uint64_t base = seed * 0x9E3779B97F4A7C15ULL + 2ULL * traj;
        EnvInstance env(spec, base + 1);
        Agent agent(acfg, spec.num_states(), spec.num_actions(), base + 2);
        const long long T = 50 + static_cast<long long>(rng() % 151);

        const Real e_max = agent.belief().e_max();
        Real sum_pu = 0.0;
        for (long long t = 1; t <= T; ++t) {
            const int s = env.state();
            const int a = agent.act(s);
            sum_pu += agent.belief().p_uncertain(s, a);
            const StepResult res = env.step(a);
            agent.observe(s, a, res.next_state, res.reward, res.episode_boundary);
            if (res.terminated) env.reset();
            const Real bound = 1.0 + (2.0 / e_max) * (std::sqrt(static_cast<Real>(t)) - 1.0);
            min_slack = std::min(min_slack, sum_pu - bound);
            if (sum_pu < bound - 1e-9) {
                ok = false;
                fail = {{"trajectory", traj}, {"t", t}, {"sum_pu", sum_pu}, {"bound", bound}};
                break;
            }
        }
    }
    report.details = {{"trajectories", trajectories}, {"min_slack", min_slack}};
    report.passed = ok;
    report.counterexample = fail;
    return report;
}

Real misspecification_prior_threshold(Real mu2, Real eta_conf) {
    if (!(mu2 > 5.0 / 16.0))
        throw std::invalid_argument(
            "misspecification construction requires mu2 > 5/16");
    if (!(eta_conf > 0.0 && eta_conf < 1.0))
        throw std::invalid_argument("misspecification: eta_conf must lie in (0, 1)");
    const Real c = (mu2 - 5.0 / 16.0) * (mu2 - 5.0 / 16.0);
    const Real a1 = 1.0 / (2.0 * c) * std::log(2.0 / (eta_conf * (1.0 - std::exp(-2.0 * c)))) - 1.0;
    const Real a2 = -(32.0 / 9.0) * lambert_w_m1(-9.0 * eta_conf / 64.0);
    return std::max(a1, a2);
}

CheckReport run_misspecification_bandit(Real prior_a, Real mu1, Real mu2, Real eta_conf,
                                        int num_seeds, long long horizon, uint64_t seed) {
    CheckReport report;
    report.name = "misspecification_bandit";
    if (!(mu1 > mu2))
        throw std::invalid_argument("misspecification bandit requires mu1 > mu2");
    const Real threshold = misspecification_prior_threshold(mu2, eta_conf);
    if (prior_a <= 0.0) prior_a = std::floor(threshold) + 1.0;

    int stuck_count = 0;
    for (int i = 0; i < num_seeds; ++i) {
        const uint64_t base = mix64(seed ^ mix64(static_cast<uint64_t>(i)));
        const int sub_idx = static_cast<int>(base % 2);

        EnvSpec spec;
        spec.kind = EnvKind::bandit;
        spec.mu1 = sub_idx == 0 ? mu2 : mu1;
        spec.mu2 = sub_idx == 0 ? mu1 : mu2;

        AgentConfig acfg;
        acfg.kind = AgentKind::eubrl;
        acfg.belief.mode = UncertaintyMode::variance;
        acfg.belief.eta = 1.0;
        acfg.belief.reward_model = RewardModelKind::beta_bernoulli;
        acfg.belief.beta_a0 = prior_a;
        acfg.belief.beta_b0 = prior_a;
        acfg.belief.alpha = 1.0;
        acfg.gamma = 0.95;
        acfg.episodic = false;

        EnvInstance env(spec, mix64(base + 1));
        Agent agent(acfg, 1, 2, mix64(base + 2));

        bool stuck = true;
        for (long long t = 0; t < horizon; ++t) {
            const int a = agent.act(0);
            if (a != sub_idx) {
                stuck = false;
                break;
            }
            const StepResult res = env.step(a);
            agent.observe(0, a, res.next_state, res.reward, res.episode_boundary);
        }
        if (stuck) ++stuck_count;
    }

    const Real fraction = static_cast<Real>(stuck_count) / num_seeds;
    const Real bound = 0.5 * (1.0 - eta_conf);
    const Real margin = 3.0 * std::sqrt(bound * (1.0 - bound) / num_seeds);
    const bool above_threshold = prior_a > threshold;
    report.details = {{"prior_a", prior_a},
                      {"threshold", threshold},
                      {"mu1", mu1},
                      {"mu2", mu2},
                      {"eta_conf", eta_conf},
                      {"num_seeds", num_seeds},
                      {"horizon", horizon},
                      {"stick_fraction", fraction},
                      {"bound", bound},
                      {"binomial_margin", margin},
                      {"prior_above_threshold", above_threshold}};
    // Above the threshold the theorem promises sticking; below it (weak
    // prior) the agent should escape in the majority of seeds.
    report.passed = above_threshold ? fraction >= bound - margin : fraction < 0.5;
    if (!report.passed) report.counterexample = report.details;
    return report;
}

CheckReport check_mi_closed_form(int trials, long long samples, uint64_t seed) {
    CheckReport report;
    report.name = "mi_closed_form";
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> s_dist(2, 6);
    std::uniform_real_distribution<Real> param_dist(0.05, 8.0);

    bool ok = true;
    Real max_sigma_distance = 0.0;
    json fail;
    for (int trial = 0; trial < trials && ok; ++trial) {
        const int S = s_dist(rng);
        std::vector<Real> w(S);
        Real w0 = 0.0;
        for (auto& x : w) {
            x = param_dist(rng);
            w0 += x;
        }
        Real closed = 0.0;
        const Real psi0 = digamma(w0 + 1.0);
        for (int k = 0; k < S; ++k)
            closed += w[k] / w0 * (digamma(w[k] + 1.0) - psi0 - std::log(w[k] / w0));
        if (closed < -1e-12) {
            ok = false;
            fail = {{"trial", trial}, {"negative_mi", closed}};
            break;
        }

        Real mean = 0.0, m2 = 0.0;
        for (long long i = 1; i <= samples; ++i) {
            const auto theta = sample_dirichlet(w, rng);
            Real kl = 0.0;
            for (int k = 0; k < S; ++k)
                if (theta[k] > 0.0) kl += theta[k] * std::log(theta[k] * w0 / w[k]);
            const Real delta = kl - mean;
            mean += delta / i;
            m2 += delta * (kl - mean);
        }
        const Real se = std::sqrt(m2 / (samples - 1) / samples);
        const Real dist = std::abs(closed - mean) / se;
        max_sigma_distance = std::max(max_sigma_distance, dist);
        if (dist > 3.0) {
            ok = false;
            fail = {{"trial", trial}, {"closed", closed}, {"monte_carlo", mean},
                    {"se", se},       {"sigma_distance", dist}};
        }
    }
    report.details = {{"trials", trials},
                      {"samples", samples},
                      {"max_sigma_distance", max_sigma_distance}};
    report.passed = ok;
    report.counterexample = fail;
    return report;
}

std::vector<CheckReport> run_checks(const std::string& name) {
    std::vector<CheckReport> reports;
    const bool all = name == "all";
    if (all || name == "transition_decomposition")
        reports.push_back(check_transition_decomposition());
    if (all || name == "reward_decomposition") reports.push_back(check_reward_decomposition());
    if (all || name == "uncertainty_rates") reports.push_back(check_uncertainty_rates());
    if (all || name == "resistance_lower_bound")
        reports.push_back(check_resistance_lower_bound());
    if (all || name == "misspecification_bandit")
        reports.push_back(run_misspecification_bandit(0.0));
    if (all || name == "misspecification_bandit_weak") {
        CheckReport weak = run_misspecification_bandit(1.0);
        weak.name = "misspecification_bandit_weak";
        reports.push_back(weak);
    }
    if (all || name == "mi_closed_form") reports.push_back(check_mi_closed_form());
    if (reports.empty()) throw std::invalid_argument("unknown theory check: " + name);
    return reports;
}

nlohmann::json report_to_json(const CheckReport& report) {
    json j;
    j["name"] = report.name;
    j["passed"] = report.passed;
    j["details"] = report.details;
    if (!report.counterexample.is_null()) j["counterexample"] = report.counterexample;
    return j;
}

}  // namespace eubrl
