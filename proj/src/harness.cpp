#include "eubrl/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace eubrl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

uint64_t stream_seed(uint64_t seed, uint64_t salt) { return splitmix64(seed ^ splitmix64(salt)); }

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw std::invalid_argument("config: unknown key \"" + it.key() + "\" in " + ctx);
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

EnvKind env_kind_from(const std::string& s) {
    if (s == "chain") return EnvKind::chain;
    if (s == "loop") return EnvKind::loop;
    if (s == "deepsea" || s == "deep_sea") return EnvKind::deep_sea;
    if (s == "lazychain" || s == "lazy_chain") return EnvKind::lazy_chain;
    if (s == "bandit") return EnvKind::bandit;
    throw std::invalid_argument("config: unknown env kind \"" + s + "\"");
}

AgentKind agent_kind_from(const std::string& s) {
    if (s == "eubrl") return AgentKind::eubrl;
    if (s == "mean_mdp") return AgentKind::mean_mdp;
    if (s == "beb") return AgentKind::beb;
    if (s == "vbrb") return AgentKind::vbrb;
    if (s == "mbie_eb") return AgentKind::mbie_eb;
    if (s == "rmax") return AgentKind::rmax;
    if (s == "psrl") return AgentKind::psrl;
    throw std::invalid_argument("config: unknown agent kind \"" + s + "\"");
}

UncertaintyMode mode_from(const std::string& s) {
    if (s == "variance") return UncertaintyMode::variance;
    if (s == "mutual_information" || s == "mi") return UncertaintyMode::mutual_information;
    if (s == "count_based" || s == "count") return UncertaintyMode::count_based;
    throw std::invalid_argument("config: unknown uncertainty mode \"" + s + "\"");
}

RewardModelKind reward_model_from(const std::string& s) {
    if (s == "normal_gamma") return RewardModelKind::normal_gamma;
    if (s == "normal") return RewardModelKind::normal;
    if (s == "beta_bernoulli") return RewardModelKind::beta_bernoulli;
    throw std::invalid_argument("config: unknown reward model \"" + s + "\"");
}

}  // namespace

const char* agent_kind_name(AgentKind kind) {
    switch (kind) {
        case AgentKind::eubrl: return "eubrl";
        case AgentKind::mean_mdp: return "mean_mdp";
        case AgentKind::beb: return "beb";
        case AgentKind::vbrb: return "vbrb";
        case AgentKind::mbie_eb: return "mbie_eb";
        case AgentKind::rmax: return "rmax";
        case AgentKind::psrl: return "psrl";
    }
    return "?";
}

const char* env_kind_name(EnvKind kind) {
    switch (kind) {
        case EnvKind::chain: return "chain";
        case EnvKind::loop: return "loop";
        case EnvKind::deep_sea: return "deepsea";
        case EnvKind::lazy_chain: return "lazychain";
        case EnvKind::bandit: return "bandit";
    }
    return "?";
}

const char* uncertainty_mode_name(UncertaintyMode mode) {
    switch (mode) {
        case UncertaintyMode::variance: return "variance";
        case UncertaintyMode::mutual_information: return "mutual_information";
        case UncertaintyMode::count_based: return "count_based";
    }
    return "?";
}

static const char* reward_model_name(RewardModelKind kind) {
    switch (kind) {
        case RewardModelKind::normal_gamma: return "normal_gamma";
        case RewardModelKind::normal: return "normal";
        case RewardModelKind::beta_bernoulli: return "beta_bernoulli";
    }
    return "?";
}

ExperimentConfig parse_experiment_config_impl(const json& j, bool apply_seed_offset) {
    check_keys(j,
               {"name", "env", "agent", "belief", "uncertainty", "gamma", "mode", "total_steps",
                "t_max", "success_window", "halt_on_solve", "replan_period", "planner", "regret",
                "seeds", "workers", "out", "log_stream"},
               "top level");
    ExperimentConfig cfg;
    cfg.name = get_or<std::string>(j, "name", "");

    if (!j.contains("env")) throw std::invalid_argument("config: missing \"env\"");
    const json& je = j.at("env");
    check_keys(je,
               {"kind", "size", "loops", "stochastic", "slip_prob", "chain_classic_reward",
                "mu1", "mu2"},
               "env");
    cfg.env.kind = env_kind_from(je.at("kind").get<std::string>());
    cfg.env.size = get_or<int>(je, "size", cfg.env.kind == EnvKind::chain ? 5 : 10);
    cfg.env.loops = get_or<int>(je, "loops", 2);
    cfg.env.stochastic = get_or<bool>(je, "stochastic", false);
    cfg.env.slip_prob = get_or<Real>(je, "slip_prob", 0.22);
    cfg.env.chain_classic_reward = get_or<bool>(je, "chain_classic_reward", false);
    cfg.env.mu1 = get_or<Real>(je, "mu1", 0.9);
    cfg.env.mu2 = get_or<Real>(je, "mu2", 0.4);
    cfg.env.validate();

    if (!j.contains("agent")) throw std::invalid_argument("config: missing \"agent\"");
    const json& ja = j.at("agent");
    check_keys(ja, {"kind", "beta_bonus", "knownness_m", "r_max", "psrl_resample_period"}, "agent");
    cfg.agent.kind = agent_kind_from(ja.at("kind").get<std::string>());
    cfg.agent.beta_bonus = get_or<Real>(ja, "beta_bonus", 1.0);
    cfg.agent.knownness_m = get_or<int>(ja, "knownness_m", 1);
    cfg.agent.r_max = get_or<Real>(ja, "r_max", 0.0);
    cfg.agent.psrl_resample_period = get_or<int>(ja, "psrl_resample_period", 0);
    if (cfg.agent.r_max <= 0.0) cfg.agent.r_max = cfg.env.max_reward();

    BeliefConfig& b = cfg.agent.belief;
    if (j.contains("belief")) {
        const json& jb = j.at("belief");
        check_keys(jb,
                   {"alpha", "tied", "reward_model", "mu0", "lambda0", "ng_alpha0", "ng_beta0",
                    "tau0", "tau", "beta_a0", "beta_b0"},
                   "belief");
        b.alpha = get_or<Real>(jb, "alpha", 1.0);
        b.tied = get_or<bool>(jb, "tied", false);
        if (jb.contains("reward_model"))
            b.reward_model = reward_model_from(jb.at("reward_model").get<std::string>());
        b.mu0 = get_or<Real>(jb, "mu0", 0.0);
        b.lambda0 = get_or<Real>(jb, "lambda0", 0.0);
        b.ng_alpha0 = get_or<Real>(jb, "ng_alpha0", 2.0);
        b.ng_beta0 = get_or<Real>(jb, "ng_beta0", 0.01);
        b.tau0 = get_or<Real>(jb, "tau0", 1.0);
        b.tau = get_or<Real>(jb, "tau", 1.0);
        b.beta_a0 = get_or<Real>(jb, "beta_a0", 1.0);
        b.beta_b0 = get_or<Real>(jb, "beta_b0", 1.0);
    }
    if (b.lambda0 <= 0.0) b.lambda0 = b.ng_beta0;  // single tunable prior parameter
    b.tied_encoding = (cfg.env.kind == EnvKind::loop || cfg.env.kind == EnvKind::bandit)
                          ? TiedEncoding::absolute
                          : TiedEncoding::relative;

    if (j.contains("uncertainty")) {
        const json& ju = j.at("uncertainty");
        check_keys(ju, {"mode", "eta", "eta_scale_with_size"}, "uncertainty");
        if (ju.contains("mode")) b.mode = mode_from(ju.at("mode").get<std::string>());
        b.eta = get_or<Real>(ju, "eta", 1.0);
        cfg.eta_scale_with_size = get_or<bool>(ju, "eta_scale_with_size", false);
    }
    if (cfg.eta_scale_with_size) b.eta *= cfg.env.num_states();

    cfg.agent.gamma = get_or<Real>(j, "gamma", 0.0);
    if (cfg.agent.gamma <= 0.0) cfg.agent.gamma = cfg.env.default_gamma();

    const std::string mode = get_or<std::string>(j, "mode", "auto");
    if (mode == "episodic")
        cfg.agent.episodic = true;
    else if (mode == "infinite")
        cfg.agent.episodic = false;
    else if (mode == "auto")
        cfg.agent.episodic = cfg.env.episodic();
    else
        throw std::invalid_argument("config: mode must be auto/episodic/infinite");

    cfg.agent.replan_period = get_or<int>(j, "replan_period", 0);
    if (j.contains("planner")) {
        const json& jp = j.at("planner");
        check_keys(jp, {"tol", "max_iters", "warm_start"}, "planner");
        cfg.agent.planner_tol = get_or<Real>(jp, "tol", 1e-6);
        cfg.agent.planner_max_iters = get_or<int>(jp, "max_iters", 2000000);
        cfg.agent.warm_start = get_or<bool>(jp, "warm_start", true);
    }

    const long long total_steps = get_or<long long>(j, "total_steps", 1000);
    const long long t_max_in = get_or<long long>(j, "t_max", 0);
    const bool solve_style =
        cfg.env.kind == EnvKind::deep_sea || cfg.env.kind == EnvKind::lazy_chain;
    cfg.t_max = t_max_in > 0 ? t_max_in : cfg.env.default_t_max(total_steps);
    cfg.budget = solve_style ? cfg.t_max : total_steps;
    cfg.success_window = get_or<int>(j, "success_window", 5);
    cfg.halt_on_solve = get_or<bool>(j, "halt_on_solve", solve_style);
    cfg.log_stream = get_or<bool>(j, "log_stream", false);

    if (j.contains("regret")) {
        const json& jr = j.at("regret");
        check_keys(jr, {"enabled", "stride"}, "regret");
        cfg.regret.enabled = get_or<bool>(jr, "enabled", false);
        cfg.regret.stride = get_or<int>(jr, "stride", 10);
    }

    if (j.contains("seeds")) {
        const json& js = j.at("seeds");
        if (js.is_array()) {
            for (const auto& v : js) cfg.seeds.push_back(v.get<uint64_t>());
        } else {
            check_keys(js, {"first", "count"}, "seeds");
            const uint64_t first = get_or<uint64_t>(js, "first", 0);
            const uint64_t count = get_or<uint64_t>(js, "count", 1);
            for (uint64_t i = 0; i < count; ++i) cfg.seeds.push_back(first + i);
        }
    } else {
        cfg.seeds = {0};
    }
    if (apply_seed_offset) {
        if (const char* off = std::getenv("EUBRL_SEED_OFFSET")) {
            const long long shift = std::atoll(off);
            for (auto& s : cfg.seeds) s = static_cast<uint64_t>(static_cast<long long>(s) + shift);
        }
    }

    cfg.workers = get_or<int>(j, "workers", 0);
    cfg.out_dir = get_or<std::string>(j, "out", "");
    return cfg;
}

ExperimentConfig parse_experiment_config(const json& j) {
    return parse_experiment_config_impl(j, true);
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j = json::parse(in);
    return parse_experiment_config(j);
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    j["env"] = {{"kind", env_kind_name(cfg.env.kind)},
                {"size", cfg.env.size},
                {"loops", cfg.env.loops},
                {"stochastic", cfg.env.stochastic},
                {"slip_prob", cfg.env.slip_prob},
                {"chain_classic_reward", cfg.env.chain_classic_reward},
                {"mu1", cfg.env.mu1},
                {"mu2", cfg.env.mu2}};
    j["agent"] = {{"kind", agent_kind_name(cfg.agent.kind)},
                  {"beta_bonus", cfg.agent.beta_bonus},
                  {"knownness_m", cfg.agent.knownness_m},
                  {"r_max", cfg.agent.r_max},
                  {"psrl_resample_period", cfg.agent.psrl_resample_period}};
    const BeliefConfig& b = cfg.agent.belief;
    j["belief"] = {{"alpha", b.alpha},
                   {"tied", b.tied},
                   {"reward_model", reward_model_name(b.reward_model)},
                   {"mu0", b.mu0},
                   {"lambda0", b.lambda0},
                   {"ng_alpha0", b.ng_alpha0},
                   {"ng_beta0", b.ng_beta0},
                   {"tau0", b.tau0},
                   {"tau", b.tau},
                   {"beta_a0", b.beta_a0},
                   {"beta_b0", b.beta_b0}};
    j["uncertainty"] = {{"mode", uncertainty_mode_name(b.mode)}, {"eta", b.eta}};
    j["gamma"] = cfg.agent.gamma;
    j["mode"] = cfg.agent.episodic ? "episodic" : "infinite";
    j["total_steps"] = cfg.budget;
    j["t_max"] = cfg.t_max;
    j["success_window"] = cfg.success_window;
    j["halt_on_solve"] = cfg.halt_on_solve;
    j["replan_period"] = cfg.agent.replan_period;
    j["planner"] = {{"tol", cfg.agent.planner_tol},
                    {"max_iters", cfg.agent.planner_max_iters},
                    {"warm_start", cfg.agent.warm_start}};
    j["regret"] = {{"enabled", cfg.regret.enabled}, {"stride", cfg.regret.stride}};
    j["seeds"] = cfg.seeds;
    // workers and out are execution parameters, not experiment identity;
    // omitting them keeps config.json byte-identical across worker counts.
    j["log_stream"] = cfg.log_stream;
    return j;
}

OptimalOracle make_oracle(const EnvSpec& spec, Real gamma) {
    OptimalOracle oracle;
    oracle.ground_truth = ground_truth_mdp(spec, gamma);
    PlanResult plan = value_iteration(oracle.ground_truth, 1e-9, 2000000);
    oracle.pi_star = std::move(plan.policy);
    oracle.v_star = std::move(plan.value);
    return oracle;
}

RunRecord run_single(const ExperimentConfig& cfg, uint64_t seed, const OptimalOracle* oracle) {
    const auto t0 = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.seed = seed;

    const bool track_solve =
        cfg.env.kind == EnvKind::deep_sea || cfg.env.kind == EnvKind::lazy_chain;
    OptimalOracle local_oracle;
    if (oracle == nullptr && (track_solve || cfg.regret.enabled)) {
        local_oracle = make_oracle(cfg.env, cfg.agent.gamma);
        oracle = &local_oracle;
    }

    try {
        EnvInstance env(cfg.env, stream_seed(seed, 0xE17));
        Agent agent(cfg.agent, cfg.env.num_states(), cfg.env.num_actions(),
                    stream_seed(seed, 0xA6E17));

        SolveTracker tracker(oracle != nullptr ? oracle->pi_star : agent.policy(),
                             cfg.success_window);
        ValueFunction eval_warm;
        Real cum_regret = 0.0;

        for (long long t = 1; t <= cfg.budget; ++t) {
            const int s = env.state();
            const int a = agent.act(s);

            if (cfg.regret.enabled && oracle != nullptr &&
                (t - 1) % std::max(1, cfg.regret.stride) == 0) {
                eval_warm = policy_evaluation(oracle->ground_truth, agent.policy(), 1e-6,
                                              2000000, eval_warm.empty() ? nullptr : &eval_warm);
                const Real delta = std::max(0.0, oracle->v_star[s] - eval_warm[s]);
                cum_regret += delta * std::max(1, cfg.regret.stride);
                rec.regret_curve.emplace_back(t - 1, cum_regret);
            }

            const StepResult res = env.step(a);
            rec.cumulative_return += res.reward;
            rec.steps_taken = t;
            if (cfg.log_stream) rec.stream.push_back({t - 1, s, a, res.reward});
            if (track_solve && oracle != nullptr) tracker.record(s, a);

            agent.observe(s, a, res.next_state, res.reward, res.episode_boundary);
            if (res.terminated) env.reset();

            if (res.episode_boundary && track_solve && oracle != nullptr) {
                tracker.end_episode(t);
                if (tracker.solved() && cfg.halt_on_solve) break;
            }
        }

        rec.episodes = tracker.episodes();
        rec.success = track_solve && tracker.solved();
        rec.solve_step = tracker.solve_step();
        rec.solve_episode = tracker.solve_episode();
        rec.steps_to_solve_penalized = rec.success ? rec.solve_step : cfg.t_max;
        rec.final_cumulative_regret = cum_regret;
        if (rec.success && cfg.halt_on_solve)
            rec.halt_reason = "solved";
        else if (track_solve)
            rec.halt_reason = "t_max";
        else
            rec.halt_reason = "budget";
    } catch (const std::exception& e) {
        throw std::runtime_error("run_single(seed=" + std::to_string(seed) + ", env=" +
                                 env_kind_name(cfg.env.kind) + ", agent=" +
                                 agent_kind_name(cfg.agent.kind) + "): " + e.what());
    }

    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    return rec;
}

namespace {

std::pair<Real, Real> mean_se(const std::vector<Real>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    Real mean = 0.0;
    for (Real x : xs) mean += x;
    mean /= static_cast<Real>(xs.size());
    if (xs.size() == 1) return {mean, 0.0};
    Real var = 0.0;
    for (Real x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<Real>(xs.size() - 1);
    return {mean, std::sqrt(var / static_cast<Real>(xs.size()))};
}

}  // namespace

MetricsSummary summarize(const ExperimentConfig& cfg, const std::vector<RunRecord>& records) {
    MetricsSummary sum;
    sum.num_runs = static_cast<int>(records.size());
    std::vector<Real> returns, successes, steps;
    std::vector<Real> episodes_to_solve;
    std::map<long long, std::vector<Real>> regret_points;
    for (const auto& r : records) {
        if (!r.error.empty()) {
            ++sum.num_failed;
            continue;
        }
        returns.push_back(r.cumulative_return);
        successes.push_back(r.success ? 1.0 : 0.0);
        steps.push_back(static_cast<Real>(r.steps_to_solve_penalized));
        if (cfg.env.episodic()) {
            const Real penal_episodes = static_cast<Real>(cfg.t_max) /
                                        std::max(1, cfg.env.episode_length());
            episodes_to_solve.push_back(r.success ? static_cast<Real>(r.solve_episode)
                                                  : penal_episodes);
        }
        for (const auto& [t, c] : r.regret_curve) regret_points[t].push_back(c);
    }
    sum.incomplete = sum.num_failed > 0;
    std::tie(sum.mean_return, sum.se_return) = mean_se(returns);
    std::tie(sum.success_rate, sum.se_success) = mean_se(successes);
    std::tie(sum.mean_steps_to_solve, sum.se_steps_to_solve) = mean_se(steps);
    if (cfg.env.episodic() && !episodes_to_solve.empty())
        sum.mean_episodes_to_solve = mean_se(episodes_to_solve).first;
    for (const auto& [t, cs] : regret_points)
        sum.regret_curve.emplace_back(t, mean_se(cs).first);
    return sum;
}

std::string format_real(Real x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') out += '"';
    }
    out += '"';
    return out;
}

const char* kCrlf = "\r\n";

}  // namespace

void write_records_jsonl(const std::string& path, const std::vector<RunRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& r : records) {
        out << "{\"seed\":" << r.seed << ",\"return\":" << format_real(r.cumulative_return)
            << ",\"steps\":" << r.steps_taken << ",\"episodes\":" << r.episodes
            << ",\"success\":" << (r.success ? "true" : "false")
            << ",\"solve_step\":" << r.solve_step << ",\"solve_episode\":" << r.solve_episode
            << ",\"steps_to_solve_penalized\":" << r.steps_to_solve_penalized
            << ",\"halt_reason\":\"" << r.halt_reason << "\"";
        if (!r.error.empty()) out << ",\"error\":" << json(r.error).dump();
        if (!r.regret_curve.empty()) {
            out << ",\"final_cumulative_regret\":" << format_real(r.final_cumulative_regret);
            out << ",\"regret_curve\":[";
            for (size_t i = 0; i < r.regret_curve.size(); ++i) {
                if (i > 0) out << ",";
                out << "[" << r.regret_curve[i].first << ","
                    << format_real(r.regret_curve[i].second) << "]";
            }
            out << "]";
        }
        if (!r.stream.empty()) {
            out << ",\"stream\":[";
            for (size_t i = 0; i < r.stream.size(); ++i) {
                if (i > 0) out << ",";
                out << "[" << r.stream[i].t << "," << r.stream[i].state << ","
                    << r.stream[i].action << "," << format_real(r.stream[i].reward) << "]";
            }
            out << "]";
        }
        out << "}\n";
    }
}

void write_summary_csv(const std::string& path, const ExperimentConfig& cfg,
                       const MetricsSummary& sum) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "name,env,size,loops,stochastic,agent,uncertainty_mode,tied,eta,alpha,gamma,"
           "num_seeds,budget,t_max,success_window,num_runs,num_failed,incomplete,"
           "mean_return,se_return,success_rate,se_success,mean_steps_to_solve,"
           "se_steps_to_solve,mean_episodes_to_solve"
        << kCrlf;
    out << csv_escape(cfg.name) << "," << env_kind_name(cfg.env.kind) << ","
        << (cfg.env.kind == EnvKind::loop ? cfg.env.loops : cfg.env.size) << ","
        << cfg.env.loops << "," << (cfg.env.stochastic ? "true" : "false") << ","
        << agent_kind_name(cfg.agent.kind) << ","
        << uncertainty_mode_name(cfg.agent.belief.mode) << ","
        << (cfg.agent.belief.tied ? "true" : "false") << ","
        << format_real(cfg.agent.belief.eta) << "," << format_real(cfg.agent.belief.alpha) << ","
        << format_real(cfg.agent.gamma) << "," << cfg.seeds.size() << "," << cfg.budget << ","
        << cfg.t_max << "," << cfg.success_window << "," << sum.num_runs << "," << sum.num_failed
        << "," << (sum.incomplete ? "true" : "false") << "," << format_real(sum.mean_return)
        << "," << format_real(sum.se_return) << "," << format_real(sum.success_rate) << ","
        << format_real(sum.se_success) << "," << format_real(sum.mean_steps_to_solve) << ","
        << format_real(sum.se_steps_to_solve) << ","
        << (sum.mean_episodes_to_solve ? format_real(*sum.mean_episodes_to_solve) : "")
        << kCrlf;
}

MetricsSummary run_experiment(const ExperimentConfig& cfg, std::vector<RunRecord>* records_out) {
    if (cfg.seeds.empty()) throw std::invalid_argument("run_experiment: empty seed list");

    const bool track_solve =
        cfg.env.kind == EnvKind::deep_sea || cfg.env.kind == EnvKind::lazy_chain;
    OptimalOracle oracle;
    const OptimalOracle* oracle_ptr = nullptr;
    if (track_solve || cfg.regret.enabled) {
        oracle = make_oracle(cfg.env, cfg.agent.gamma);
        oracle_ptr = &oracle;
    }

    std::vector<RunRecord> records(cfg.seeds.size());
    std::atomic<size_t> next{0};
    int workers = cfg.workers > 0 ? cfg.workers
                                  : static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 1;
    workers = std::min<int>(workers, static_cast<int>(cfg.seeds.size()));

    auto worker_fn = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= cfg.seeds.size()) return;
            try {
                records[i] = run_single(cfg, cfg.seeds[i], oracle_ptr);
            } catch (const std::exception& e) {
                records[i].seed = cfg.seeds[i];
                records[i].error = e.what();
                records[i].halt_reason = "error";
                records[i].steps_to_solve_penalized = cfg.t_max;
            }
        }
    };
    if (workers == 1) {
        worker_fn();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn);
        for (auto& th : pool) th.join();
    }

    MetricsSummary summary = summarize(cfg, records);

    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        write_records_jsonl((fs::path(cfg.out_dir) / "records.jsonl").string(), records);
        write_summary_csv((fs::path(cfg.out_dir) / "summary.csv").string(), cfg, summary);
        {
            std::ofstream out(fs::path(cfg.out_dir) / "config.json", std::ios::binary);
            out << experiment_config_to_json(cfg).dump(2) << "\n";
        }
        {
            std::ofstream out(fs::path(cfg.out_dir) / "timings.csv", std::ios::binary);
            out << "seed,wall_ms" << kCrlf;
            for (const auto& r : records)
                out << r.seed << "," << format_real(r.wall_ms) << kCrlf;
        }
        if (cfg.regret.enabled) {
            std::ofstream out(fs::path(cfg.out_dir) / "regret_curve.csv", std::ios::binary);
            out << "t,mean_cumulative_regret" << kCrlf;
            for (const auto& [t, c] : summary.regret_curve)
                out << t << "," << format_real(c) << kCrlf;
        }
    }

    if (records_out != nullptr) *records_out = std::move(records);
    return summary;
}

namespace {

void set_json_path(json& j, const std::string& dotted, const json& value) {
    json* cur = &j;
    size_t pos = 0;
    for (;;) {
        const size_t dot = dotted.find('.', pos);
        const std::string key = dotted.substr(pos, dot - pos);
        if (dot == std::string::npos) {
            (*cur)[key] = value;
            return;
        }
        cur = &(*cur)[key];
        pos = dot + 1;
    }
}

bool sweep_better(const ExperimentConfig& cfg, const MetricsSummary& a, const MetricsSummary& b) {
    // true when a is strictly better than b
    const bool solve_style =
        cfg.env.kind == EnvKind::deep_sea || cfg.env.kind == EnvKind::lazy_chain;
    if (solve_style) {
        if (a.success_rate != b.success_rate) return a.success_rate > b.success_rate;
        if (a.mean_steps_to_solve != b.mean_steps_to_solve)
            return a.mean_steps_to_solve < b.mean_steps_to_solve;
    }
    return a.mean_return > b.mean_return;
}

}  // namespace

SweepResult sweep(const ExperimentConfig& base, const json& grid, const std::string& out_dir) {
    if (!grid.is_object()) throw std::invalid_argument("sweep: grid must be a JSON object");

    std::vector<std::string> paths;
    std::vector<std::vector<json>> values;
    json seeds_override;
    for (auto it = grid.begin(); it != grid.end(); ++it) {
        if (it.key() == "_seeds") {
            seeds_override = it.value();
            continue;
        }
        if (!it.value().is_array() || it.value().empty())
            throw std::invalid_argument("sweep: grid entry \"" + it.key() +
                                        "\" must be a nonempty array");
        paths.push_back(it.key());
        values.emplace_back(it.value().begin(), it.value().end());
    }

    json base_json = experiment_config_to_json(base);
    base_json["out"] = "";
    if (!seeds_override.is_null()) base_json["seeds"] = seeds_override;

    size_t total = 1;
    for (const auto& v : values) total *= v.size();

    SweepResult result;
    for (size_t idx = 0; idx < total; ++idx) {
        json point = base_json;
        json overrides = json::object();
        size_t rem = idx;
        for (size_t k = 0; k < paths.size(); ++k) {
            const json& v = values[k][rem % values[k].size()];
            rem /= values[k].size();
            set_json_path(point, paths[k], v);
            overrides[paths[k]] = v;
        }
        ExperimentConfig cfg = parse_experiment_config_impl(point, false);
        cfg.workers = base.workers;
        MetricsSummary summary = run_experiment(cfg);
        result.table.push_back({overrides, summary});
        if (result.best_index < 0 ||
            sweep_better(cfg, summary, result.table[result.best_index].summary)) {
            result.best_index = static_cast<int>(idx);
            result.best_config = cfg;
        }
    }

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream out(fs::path(out_dir) / "sweep_table.csv", std::ios::binary);
        out << "overrides,mean_return,se_return,success_rate,mean_steps_to_solve,best" << kCrlf;
        for (size_t i = 0; i < result.table.size(); ++i) {
            const auto& e = result.table[i];
            out << csv_escape(e.overrides.dump()) << "," << format_real(e.summary.mean_return)
                << "," << format_real(e.summary.se_return) << ","
                << format_real(e.summary.success_rate) << ","
                << format_real(e.summary.mean_steps_to_solve) << ","
                << (static_cast<int>(i) == result.best_index ? "true" : "false") << kCrlf;
        }
        std::ofstream best(fs::path(out_dir) / "best_config.json", std::ios::binary);
        best << experiment_config_to_json(result.best_config).dump(2) << "\n";
    }
    return result;
}

namespace {

std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

void write_report(const std::string& in_dir, const std::string& out_dir) {
    struct Row {
        int size;
        Real mean_return, se_return, success_rate, se_success, steps, se_steps;
    };
    std::map<std::pair<std::string, std::string>, std::vector<Row>> groups;

    for (const auto& entry : fs::recursive_directory_iterator(in_dir)) {
        if (!entry.is_regular_file() || entry.path().filename() != "summary.csv") continue;
        std::ifstream in(entry.path());
        std::string header, line;
        if (!std::getline(in, header) || !std::getline(in, line)) continue;
        const auto names = parse_csv_line(header);
        const auto vals = parse_csv_line(line);
        std::map<std::string, std::string> row;
        for (size_t i = 0; i < names.size() && i < vals.size(); ++i) row[names[i]] = vals[i];
        Row r;
        r.size = std::atoi(row["size"].c_str());
        r.mean_return = std::atof(row["mean_return"].c_str());
        r.se_return = std::atof(row["se_return"].c_str());
        r.success_rate = std::atof(row["success_rate"].c_str());
        r.se_success = std::atof(row["se_success"].c_str());
        r.steps = std::atof(row["mean_steps_to_solve"].c_str());
        r.se_steps = std::atof(row["se_steps_to_solve"].c_str());
        groups[{row["env"], row["agent"]}].push_back(r);
    }

    fs::create_directories(out_dir);
    for (auto& [key, rows] : groups) {
        std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
            return a.size < b.size;
        });
        const std::string path =
            (fs::path(out_dir) / ("curve_" + key.first + "_" + key.second + ".csv")).string();
        std::ofstream out(path, std::ios::binary);
        out << "size,metric,mean,se" << kCrlf;
        for (const auto& r : rows) {
            out << r.size << ",success_rate," << format_real(r.success_rate) << ","
                << format_real(r.se_success) << kCrlf;
            out << r.size << ",steps_to_solve," << format_real(r.steps) << ","
                << format_real(r.se_steps) << kCrlf;
            out << r.size << ",return," << format_real(r.mean_return) << ","
                << format_real(r.se_return) << kCrlf;
        }
    }
}

}  // namespace eubrl
