// Acceptance suite: runs every gate criterion end to end and prints one
// pass/fail line per criterion. Exit code 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "eubrl/harness.hpp"
#include "eubrl/special.hpp"
#include "eubrl/theory.hpp"
#include "../support.hpp"

using namespace eubrl;
using nlohmann::json;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool passed, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s  (%s)\n", passed ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!passed) ++g_failures;
}

MetricsSummary run_json(json j) { return run_experiment(parse_experiment_config(j)); }

json chain_cfg(const std::string& agent, Real eta, Real alpha, Real beta0, Real bonus,
               int first, int count) {
    return json{{"env", {{"kind", "chain"}}},
                {"agent", {{"kind", agent}, {"beta_bonus", bonus}}},
                {"belief", {{"alpha", alpha}, {"ng_beta0", beta0}}},
                {"uncertainty", {{"mode", "variance"}, {"eta", eta}}},
                {"total_steps", 1000},
                {"seeds", {{"first", first}, {"count", count}}}};
}

json apply_overrides(json base, const json& overrides) {
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
        json* cur = &base;
        std::string path = it.key();
        size_t pos = 0;
        for (;;) {
            const size_t dot = path.find('.', pos);
            const std::string key = path.substr(pos, dot - pos);
            if (dot == std::string::npos) {
                (*cur)[key] = it.value();
                break;
            }
            cur = &(*cur)[key];
            pos = dot + 1;
        }
    }
    return base;
}

// Desk-scale tuning protocol, identical for every agent: coarse line search
// on sweep seeds, re-score the leaders on disjoint tuning seeds, then report
// the winner on the held-out 200 evaluation seeds.
MetricsSummary tuned(const json& grid, const json& base, json* winner_out = nullptr) {
    SweepResult sw = sweep(parse_experiment_config(base), grid);
    std::vector<size_t> order(sw.table.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return sw.table[a].summary.mean_return > sw.table[b].summary.mean_return;
    });

    json best_overrides;
    Real best_score = -1e300;
    const size_t leaders = std::min<size_t>(8, order.size());
    for (size_t k = 0; k < leaders; ++k) {
        json candidate = apply_overrides(base, sw.table[order[k]].overrides);
        candidate["seeds"] = {{"first", 2000}, {"count", 400}};
        const MetricsSummary s = run_json(candidate);
        if (s.mean_return > best_score) {
            best_score = s.mean_return;
            best_overrides = sw.table[order[k]].overrides;
        }
    }
    json final_cfg = apply_overrides(base, best_overrides);
    final_cfg["seeds"] = {{"first", 0}, {"count", 200}};
    if (winner_out != nullptr) *winner_out = best_overrides;
    return run_json(final_cfg);
}

void criterion_1_chain() {
    // Sweep per the benchmark's prior grids plus an eta line search.
    const json base = chain_cfg("eubrl", 2.0, 0.1, 0.1, 1.0, 0, 200);
    const json grid = {{"uncertainty.eta", {2.0, 3.0, 4.0, 5.0, 6.0, 8.0}},
                       {"belief.alpha", {1.0, 0.3, 0.1, 0.01, 0.001}},
                       {"belief.ng_beta0", {1.0, 0.1, 0.05, 0.01, 0.005}},
                       {"_seeds", {{"first", 1000}, {"count", 64}}}};
    json eubrl_pick;
    const MetricsSummary eubrl = tuned(grid, base, &eubrl_pick);

    const Real alpha = eubrl_pick.value("belief.alpha", 0.3);
    const Real beta0 = eubrl_pick.value("belief.ng_beta0", 0.05);
    const MetricsSummary mean_mdp = run_json(chain_cfg("mean_mdp", 1.0, alpha, beta0, 1.0, 0, 200));

    const json bonus_grid = {{"agent.beta_bonus", {1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0}},
                             {"_seeds", {{"first", 1000}, {"count", 64}}}};
    const MetricsSummary beb = tuned(bonus_grid, chain_cfg("beb", 1.0, alpha, beta0, 1.0, 0, 200));
    const MetricsSummary mbie =
        tuned(bonus_grid, chain_cfg("mbie_eb", 1.0, alpha, beta0, 1.0, 0, 200));
    const json vbrb_grid = {{"uncertainty.eta", {0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0}},
                            {"_seeds", {{"first", 1000}, {"count", 64}}}};
    const MetricsSummary vbrb = tuned(vbrb_grid, chain_cfg("vbrb", 1.0, alpha, beta0, 1.0, 0, 200));

    // Paper band 3400..3550 widened by twice the reported SE (16) at desk scale.
    const Real lo = 3400.0 - 32.0, hi = 3550.0 + 32.0;
    const bool band = eubrl.mean_return >= lo && eubrl.mean_return <= hi;
    const bool gap = eubrl.mean_return - mean_mdp.mean_return >= 300.0;
    const Real beb_class_hi = std::max({beb.mean_return, mbie.mean_return, vbrb.mean_return});
    const Real beb_class_lo = std::min({beb.mean_return, mbie.mean_return, vbrb.mean_return});
    const bool ordering = eubrl.mean_return > beb_class_hi && beb_class_lo > mean_mdp.mean_return;
    const bool se_order = eubrl.se_return < mean_mdp.se_return;

    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "eubrl=%.1f+-%.1f in [%.0f,%.0f]=%d; mean_mdp=%.1f+-%.1f gap>=300=%d; "
                  "beb=%.1f mbie_eb=%.1f vbrb=%.1f ordering=%d; se_order=%d; picked %s",
                  eubrl.mean_return, eubrl.se_return, lo, hi, band, mean_mdp.mean_return,
                  mean_mdp.se_return, gap, beb.mean_return, mbie.mean_return, vbrb.mean_return,
                  ordering, se_order, eubrl_pick.dump().c_str());
    report(1, "Chain reproduction (200 seeds x 1000 steps)", band && gap && ordering && se_order,
           buf);
}

void criterion_2_loop() {
    const json base = {{"env", {{"kind", "loop"}, {"loops", 2}}},
                       {"agent", {{"kind", "eubrl"}}},
                       {"belief", {{"alpha", 0.01}, {"ng_beta0", 0.01}}},
                       {"uncertainty", {{"mode", "variance"}, {"eta", 1.0}}},
                       {"total_steps", 1000},
                       {"seeds", {{"first", 0}, {"count", 200}}}};
    const json grid = {{"uncertainty.eta", {0.5, 1.0, 2.0}},
                       {"belief.alpha", {0.01, 0.001}},
                       {"belief.ng_beta0", {0.1, 0.01, 0.001}},
                       {"_seeds", {{"first", 1000}, {"count", 8}}}};
    json pick;
    const MetricsSummary eubrl = tuned(grid, base, &pick);

    json mdp_cfg = base;
    mdp_cfg["agent"]["kind"] = "mean_mdp";
    const MetricsSummary mean_mdp = run_json(mdp_cfg);

    const bool ok =
        eubrl.mean_return >= 390.0 && eubrl.se_return <= 1.0 && mean_mdp.mean_return <= 300.0;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "eubrl=%.1f+-%.2f (need >=390, se<=1); mean_mdp=%.1f (<=300)",
                  eubrl.mean_return, eubrl.se_return, mean_mdp.mean_return);
    report(2, "Loop reproduction (2 loops, 200 seeds x 1000 steps)", ok, buf);
}

void criterion_3_deep_sea() {
    bool ok = true;
    std::string detail;
    for (int n : {4, 8, 12, 16, 20}) {
        const json j = {{"env", {{"kind", "deepsea"}, {"size", n}}},
                        {"agent", {{"kind", "eubrl"}}},
                        {"belief", {{"alpha", 1e-4}, {"ng_beta0", 0.01}}},
                        {"uncertainty", {{"mode", "variance"}, {"eta", 0.1}}},
                        {"seeds", {{"first", 0}, {"count", 20}}}};
        const MetricsSummary s = run_json(j);
        ok = ok && s.success_rate == 1.0;
        char buf[48];
        std::snprintf(buf, sizeof(buf), "N=%d:%.2f ", n, s.success_rate);
        detail += buf;
    }
    report(3, "DeepSea deterministic: 100% success for N in {4..20}", ok, detail);
}

void criterion_4_lazy_chain() {
    bool ok = true;
    std::string detail;
    for (int n : {5, 10, 15}) {
        auto run_one = [&](const char* agent) {
            const json j = {{"env", {{"kind", "lazychain"}, {"size", n}}},
                            {"agent", {{"kind", agent}}},
                            {"belief", {{"alpha", 1e-4}, {"ng_beta0", 0.01}}},
                            {"uncertainty", {{"mode", "variance"}, {"eta", 0.1}}},
                            {"seeds", {{"first", 0}, {"count", 20}}}};
            return run_json(j);
        };
        const MetricsSummary eubrl = run_one("eubrl");
        const MetricsSummary mean_mdp = run_one("mean_mdp");
        ok = ok && eubrl.success_rate >= mean_mdp.success_rate;
        if (n == 15) ok = ok && eubrl.success_rate > 0.5;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "N=%d eubrl=%.2f mdp=%.2f  ", n, eubrl.success_rate,
                      mean_mdp.success_rate);
        detail += buf;
    }
    report(4, "LazyChain ordering (det, 20 seeds, T_max=1000N)", ok, detail);
}

void criterion_5_identities() {
    const CheckReport t = check_transition_decomposition(1000);
    const CheckReport r = check_reward_decomposition(1000);
    char buf[192];
    std::snprintf(buf, sizeof(buf), "transition max err=%.2e, reward max err=%.2e (tol 1e-12)",
                  t.details.at("max_identity_error").get<double>(),
                  std::max(r.details.at("max_normal_normal_error").get<double>(),
                           r.details.at("max_normal_gamma_error").get<double>()));
    report(5, "Identity suite: posterior-mean decompositions at 1e-12", t.passed && r.passed, buf);
}

void criterion_6_rates() {
    const CheckReport rep = check_uncertainty_rates();
    char buf[192];
    std::snprintf(buf, sizeof(buf), "dirichlet inf n^2*E/C1=%.3f, NG bounds=%s",
                  rep.details.at("dirichlet_min_n2E_over_C1").get<double>(),
                  rep.details.at("normal_gamma_bounds").get<bool>() ? "ok" : "violated");
    report(6, "Rate suite: O(1/n), Omega(1/n^2), Theta(1/n) bounds to n=1e4", rep.passed, buf);
}

void criterion_7_mi() {
    const CheckReport rep = check_mi_closed_form(100, 1000000);
    const double dir11 = digamma(2.0) - digamma(3.0) + std::log(2.0);
    const bool anchor = std::abs(dir11 - 0.19315) <= 1e-3;
    char buf[192];
    std::snprintf(buf, sizeof(buf), "max |closed-MC|/se=%.2f over 100 trials; Dir(1,1)=%.5f",
                  rep.details.at("max_sigma_distance").get<double>(), dir11);
    report(7, "MI oracle: closed form within 3 sigma of Monte-Carlo KL", rep.passed && anchor, buf);
}

void criterion_8_resistance() {
    const CheckReport rep = check_resistance_lower_bound(100);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "min prefix slack=%.4f over 100 trajectories",
                  rep.details.at("min_slack").get<double>());
    report(8, "Epistemic-resistance inequality on count-based trajectories", rep.passed, buf);
}

void criterion_9_misspecification() {
    const CheckReport strong = run_misspecification_bandit(0.0, 0.9, 0.4, 0.1, 200, 10000);
    const CheckReport weak = run_misspecification_bandit(1.0, 0.9, 0.4, 0.1, 200, 10000);
    const double f_strong = strong.details.at("stick_fraction").get<double>();
    const double f_weak = weak.details.at("stick_fraction").get<double>();
    const bool ok = f_strong >= 0.40 && f_weak < 0.10;
    char buf[192];
    std::snprintf(buf, sizeof(buf), "a=%.0f sticks %.3f (>=0.40); a=1 sticks %.3f (<0.10)",
                  strong.details.at("prior_a").get<double>(), f_strong, f_weak);
    report(9, "Misspecification stickiness (200 seeds x 1e4 steps)", ok, buf);
}

void criterion_10_planner() {
    std::mt19937_64 rng(4242);
    Real max_gap = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const TabularMdp mdp = testsupport::random_mdp(4, 3, 0.9, rng);
        Policy pi(4);
        for (auto& a : pi) a = static_cast<int>(rng() % 3);
        const ValueFunction v = policy_evaluation(mdp, pi, 1e-9);
        const auto direct = testsupport::policy_value_linear(mdp, pi);
        for (int s = 0; s < 4; ++s) max_gap = std::max(max_gap, std::abs(v[s] - direct[s]));
    }
    const bool eval_ok = max_gap <= 1e-6;

    bool contraction_ok = true;
    Real worst_rate = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const TabularMdp mdp = testsupport::random_mdp(6, 3, 0.95, rng);
        ValueFunction v(6, 0.0);
        Real prev = -1.0;
        for (int k = 0; k < 200; ++k) {
            const ValueFunction next = bellman_backup(mdp, v);
            Real diff = 0.0;
            for (int s = 0; s < 6; ++s) diff = std::max(diff, std::abs(next[s] - v[s]));
            if (prev > 1e-13) {
                worst_rate = std::max(worst_rate, diff / prev);
                if (diff > mdp.gamma * prev + 1e-9) contraction_ok = false;
            }
            prev = diff;
            v = next;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "max |iterative-direct|=%.2e (tol 1e-6); worst residual ratio=%.6f (gamma=0.95)",
                  max_gap, worst_rate);
    report(10, "Planner oracle: linear-solve match and gamma-contraction",
           eval_ok && contraction_ok, buf);
}

}  // namespace

int main(int argc, char** argv) {
    const int only = argc > 1 ? std::atoi(argv[1]) : 0;
    const auto t0 = std::chrono::steady_clock::now();
    struct Entry {
        int id;
        void (*fn)();
    };
    const Entry entries[] = {{1, criterion_1_chain},
                             {2, criterion_2_loop},
                             {3, criterion_3_deep_sea},
                             {4, criterion_4_lazy_chain},
                             {5, criterion_5_identities},
                             {6, criterion_6_rates},
                             {7, criterion_7_mi},
                             {8, criterion_8_resistance},
                             {9, criterion_9_misspecification},
                             {10, criterion_10_planner}};
    for (const auto& e : entries) {
        if (only != 0 && e.id != only) continue;
        e.fn();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("acceptance: %s (%d failure%s, %.1f s)\n", g_failures == 0 ? "ALL PASS" : "FAILED",
                g_failures, g_failures == 1 ? "" : "s", secs);
    return g_failures == 0 ? 0 : 1;
}
