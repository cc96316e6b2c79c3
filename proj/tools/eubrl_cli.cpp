#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "eubrl/harness.hpp"
#include "eubrl/theory.hpp"

namespace {

// "a..b" inclusive, or a single integer
std::vector<uint64_t> parse_seed_range(const std::string& text) {
    const size_t pos = text.find("..");
    std::vector<uint64_t> seeds;
    if (pos == std::string::npos) {
        seeds.push_back(std::stoull(text));
        return seeds;
    }
    const uint64_t a = std::stoull(text.substr(0, pos));
    const uint64_t b = std::stoull(text.substr(pos + 2));
    if (b < a) throw CLI::ValidationError("--seeds", "range end precedes start");
    for (uint64_t s = a; s <= b; ++s) seeds.push_back(s);
    return seeds;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"eubrl: tabular Bayesian RL experiments with epistemically guided rewards"};
    app.require_subcommand(1);

    std::string config_path, grid_path, seeds_arg, out_dir, in_dir, check_name, theory_out;
    int workers = -1;

    auto* run_cmd = app.add_subcommand("run", "run one experiment from a JSON config");
    run_cmd->add_option("--config", config_path, "experiment config file")->required();
    run_cmd->add_option("--seeds", seeds_arg, "seed range a..b (overrides config)");
    run_cmd->add_option("--out", out_dir, "output directory (overrides config)");
    run_cmd->add_option("--workers", workers, "worker threads (overrides config)");

    auto* sweep_cmd = app.add_subcommand("sweep", "line-search over a hyperparameter grid");
    sweep_cmd->add_option("--config", config_path, "base experiment config")->required();
    sweep_cmd->add_option("--grid", grid_path, "grid JSON: {\"dotted.path\": [values...]}")
        ->required();
    sweep_cmd->add_option("--out", out_dir, "output directory for the sweep table");
    sweep_cmd->add_option("--workers", workers, "worker threads (overrides config)");

    auto* theory_cmd = app.add_subcommand("theory", "run a diagnostic check suite");
    theory_cmd->add_option("--check", check_name, "check name or 'all'")->required();
    theory_cmd->add_option("--out", theory_out, "write the JSON report here");

    auto* report_cmd = app.add_subcommand("report", "aggregate result dirs into curve CSVs");
    report_cmd->add_option("--in", in_dir, "directory containing experiment outputs")->required();
    report_cmd->add_option("--out", out_dir, "directory for curve CSVs (default: --in)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            eubrl::ExperimentConfig cfg = eubrl::load_experiment_config(config_path);
            if (!seeds_arg.empty()) cfg.seeds = parse_seed_range(seeds_arg);
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            if (workers >= 0) cfg.workers = workers;
            const eubrl::MetricsSummary sum = eubrl::run_experiment(cfg);
            std::cout << "runs=" << sum.num_runs << " failed=" << sum.num_failed
                      << " mean_return=" << eubrl::format_real(sum.mean_return)
                      << " se=" << eubrl::format_real(sum.se_return)
                      << " success_rate=" << eubrl::format_real(sum.success_rate)
                      << " mean_steps_to_solve=" << eubrl::format_real(sum.mean_steps_to_solve)
                      << "\n";
            return sum.num_failed > 0 ? 2 : 0;
        }
        if (sweep_cmd->parsed()) {
            eubrl::ExperimentConfig cfg = eubrl::load_experiment_config(config_path);
            if (workers >= 0) cfg.workers = workers;
            std::ifstream gin(grid_path);
            if (!gin) throw std::runtime_error("cannot open grid file: " + grid_path);
            const nlohmann::json grid = nlohmann::json::parse(gin);
            const eubrl::SweepResult result = eubrl::sweep(cfg, grid, out_dir);
            for (size_t i = 0; i < result.table.size(); ++i) {
                const auto& e = result.table[i];
                std::cout << (static_cast<int>(i) == result.best_index ? "* " : "  ")
                          << e.overrides.dump()
                          << " mean_return=" << eubrl::format_real(e.summary.mean_return)
                          << " success_rate=" << eubrl::format_real(e.summary.success_rate)
                          << " steps=" << eubrl::format_real(e.summary.mean_steps_to_solve)
                          << "\n";
            }
            return 0;
        }
        if (theory_cmd->parsed()) {
            const auto reports = eubrl::run_checks(check_name);
            nlohmann::json out = nlohmann::json::array();
            bool all_passed = true;
            for (const auto& r : reports) {
                out.push_back(eubrl::report_to_json(r));
                all_passed = all_passed && r.passed;
                std::cout << (r.passed ? "[pass] " : "[FAIL] ") << r.name << "\n";
            }
            if (!theory_out.empty()) {
                std::ofstream f(theory_out);
                f << out.dump(2) << "\n";
            } else {
                std::cout << out.dump(2) << "\n";
            }
            return all_passed ? 0 : 1;
        }
        if (report_cmd->parsed()) {
            eubrl::write_report(in_dir, out_dir.empty() ? in_dir : out_dir);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
