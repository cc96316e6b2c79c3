#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eubrl/agents.hpp"
#include "eubrl/envs.hpp"

namespace eubrl {

struct RegretConfig {
    bool enabled = false;
    int stride = 10;
};

struct ExperimentConfig {
    std::string name;
    EnvSpec env;
    AgentConfig agent;
    bool eta_scale_with_size = false;
    long long budget = 1000;  // steps per run: total_steps, or T_max for solve-style tasks
    long long t_max = 1000;   // penalty value for failed runs
    int success_window = 5;
    bool halt_on_solve = false;
    bool log_stream = false;
    RegretConfig regret;
    std::vector<uint64_t> seeds;
    int workers = 0;  // 0 = hardware concurrency
    std::string out_dir;
};

/// Strict parser: unknown keys are rejected, defaults follow the benchmark
/// protocol (gamma per task, T_max = 50*N^2 / 1000*N, tied encoding by
/// environment family). EUBRL_SEED_OFFSET shifts every seed.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

struct StepLogEntry {
    long long t;
    int state;
    int action;
    Real reward;
};

struct RunRecord {
    uint64_t seed = 0;
    Real cumulative_return = 0.0;
    long long steps_taken = 0;
    long long episodes = 0;
    bool success = false;
    long long solve_step = -1;     // 1-based step at which the success window closed
    long long solve_episode = -1;  // 1-based episode index
    long long steps_to_solve_penalized = 0;  // solve_step, or T_max on failure
    std::string halt_reason;                 // "solved" | "budget" | "t_max" | "error"
    std::string error;
    Real final_cumulative_regret = 0.0;
    std::vector<std::pair<long long, Real>> regret_curve;  // (t, cumulative regret)
    std::vector<StepLogEntry> stream;                      // only when log_stream
    double wall_ms = 0.0;  // reported in timings.csv, never in records.jsonl
};

struct MetricsSummary {
    int num_runs = 0;
    int num_failed = 0;
    bool incomplete = false;
    Real mean_return = 0.0;
    Real se_return = 0.0;
    Real success_rate = 0.0;
    Real se_success = 0.0;
    Real mean_steps_to_solve = 0.0;  // failures counted at T_max
    Real se_steps_to_solve = 0.0;
    std::optional<Real> mean_episodes_to_solve;  // episodic tasks only
    std::vector<std::pair<long long, Real>> regret_curve;  // mean cumulative regret
};

/// Ground-truth planning artifacts shared across a run batch.
struct OptimalOracle {
    TabularMdp ground_truth;
    Policy pi_star;
    ValueFunction v_star;
};

OptimalOracle make_oracle(const EnvSpec& spec, Real gamma);

/// Detects the first step/episode after which the greedy trajectory matches
/// the optimal policy on all visited states for `window` consecutive
/// episodes.
class SolveTracker {
  public:
    SolveTracker(const Policy& pi_star, int window) : pi_star_(pi_star), window_(window) {}

    void record(int s, int a) {
        ++episode_len_;
        if (pi_star_[s] != a) episode_match_ = false;
    }
    /// Close the current episode/segment; t is the 1-based global step count.
    void end_episode(long long t) {
        ++episodes_;
        streak_ = episode_match_ && episode_len_ > 0 ? streak_ + 1 : 0;
        if (streak_ >= window_ && solve_step_ < 0) {
            solve_step_ = t;
            solve_episode_ = episodes_;
        }
        episode_match_ = true;
        episode_len_ = 0;
    }
    bool solved() const { return solve_step_ >= 0; }
    long long solve_step() const { return solve_step_; }
    long long solve_episode() const { return solve_episode_; }
    long long episodes() const { return episodes_; }

  private:
    const Policy& pi_star_;
    int window_;
    bool episode_match_ = true;
    long long episode_len_ = 0;
    long long episodes_ = 0;
    long long streak_ = 0;
    long long solve_step_ = -1;
    long long solve_episode_ = -1;
};

RunRecord run_single(const ExperimentConfig& cfg, uint64_t seed,
                     const OptimalOracle* oracle = nullptr);

/// Runs every seed on a fixed-size worker pool, aggregates the summary and,
/// when cfg.out_dir is set, persists records.jsonl / summary.csv /
/// config.json / timings.csv (plus regret_curve.csv when enabled).
/// Results files are byte-identical across invocations and worker counts.
MetricsSummary run_experiment(const ExperimentConfig& cfg,
                              std::vector<RunRecord>* records_out = nullptr);

MetricsSummary summarize(const ExperimentConfig& cfg, const std::vector<RunRecord>& records);

struct SweepEntry {
    nlohmann::json overrides;
    MetricsSummary summary;
};

struct SweepResult {
    std::vector<SweepEntry> table;
    int best_index = -1;
    ExperimentConfig best_config;
};

/// Cartesian line-search over a grid {dotted.path: [values...]}; selects by
/// success rate, then steps-to-solve, then mean return for solve-style
/// tasks, and by mean return otherwise.
SweepResult sweep(const ExperimentConfig& base, const nlohmann::json& grid,
                  const std::string& out_dir = "");

/// Re-reads experiment directories under `in_dir` and emits plot-ready
/// curve CSVs (size, metric, mean, se) grouped by environment and agent.
void write_report(const std::string& in_dir, const std::string& out_dir);

// Serialization helpers (17 significant digits; RFC 4180 CSV).
std::string format_real(Real x);
void write_records_jsonl(const std::string& path, const std::vector<RunRecord>& records);
void write_summary_csv(const std::string& path, const ExperimentConfig& cfg,
                       const MetricsSummary& summary);

const char* agent_kind_name(AgentKind kind);
const char* env_kind_name(EnvKind kind);
const char* uncertainty_mode_name(UncertaintyMode mode);

}  // namespace eubrl
