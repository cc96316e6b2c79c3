#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "eubrl/agents.hpp"
#include "eubrl/harness.hpp"
#include "eubrl/theory.hpp"

namespace py = pybind11;
using namespace eubrl;

namespace {

ExperimentConfig config_from_json_str(const std::string& text) {
    return parse_experiment_config(nlohmann::json::parse(text));
}

py::dict summary_to_dict(const MetricsSummary& s) {
    py::dict d;
    d["num_runs"] = s.num_runs;
    d["num_failed"] = s.num_failed;
    d["mean_return"] = s.mean_return;
    d["se_return"] = s.se_return;
    d["success_rate"] = s.success_rate;
    d["mean_steps_to_solve"] = s.mean_steps_to_solve;
    if (s.mean_episodes_to_solve) d["mean_episodes_to_solve"] = *s.mean_episodes_to_solve;
    return d;
}

}  // namespace

PYBIND11_MODULE(eubrl, m) {
    m.doc() = "Tabular Bayesian RL with epistemically guided rewards";

    py::class_<TabularMdp>(m, "TabularMdp")
        .def(py::init<int, int, Real>(), py::arg("num_states"), py::arg("num_actions"),
             py::arg("gamma"))
        .def_readonly("num_states", &TabularMdp::num_states)
        .def_readonly("num_actions", &TabularMdp::num_actions)
        .def_readwrite("gamma", &TabularMdp::gamma)
        .def("set_prob", [](TabularMdp& m_, int s, int a, int s2, Real v) { m_.prob(s, a, s2) = v; })
        .def("prob", [](const TabularMdp& m_, int s, int a, int s2) { return m_.prob(s, a, s2); })
        .def("set_reward", [](TabularMdp& m_, int s, int a, Real v) { m_.reward(s, a) = v; })
        .def("reward", [](const TabularMdp& m_, int s, int a) { return m_.reward(s, a); })
        .def("validate", &TabularMdp::validate);

    m.def(
        "value_iteration",
        [](const TabularMdp& mdp, Real tol, int max_iters) {
            PlanResult r = value_iteration(mdp, tol, max_iters);
            return py::make_tuple(r.value, r.policy, r.iterations, r.residual);
        },
        py::arg("mdp"), py::arg("tol") = 1e-6, py::arg("max_iters") = 200000);
    m.def(
        "policy_evaluation",
        [](const TabularMdp& mdp, const Policy& pi, Real tol) {
            return policy_evaluation(mdp, pi, tol);
        },
        py::arg("mdp"), py::arg("policy"), py::arg("tol") = 1e-6);
    m.def("bellman_residual", &bellman_residual, py::arg("mdp"), py::arg("value"));
    m.def("eubrl_reward", &eubrl_reward, py::arg("r_b"), py::arg("e_total"), py::arg("p_u"));

    py::enum_<UncertaintyMode>(m, "UncertaintyMode")
        .value("variance", UncertaintyMode::variance)
        .value("mutual_information", UncertaintyMode::mutual_information)
        .value("count_based", UncertaintyMode::count_based);
    py::enum_<RewardModelKind>(m, "RewardModelKind")
        .value("normal_gamma", RewardModelKind::normal_gamma)
        .value("normal", RewardModelKind::normal)
        .value("beta_bernoulli", RewardModelKind::beta_bernoulli);

    py::class_<BeliefConfig>(m, "BeliefConfig")
        .def(py::init<>())
        .def_readwrite("alpha", &BeliefConfig::alpha)
        .def_readwrite("tied", &BeliefConfig::tied)
        .def_readwrite("reward_model", &BeliefConfig::reward_model)
        .def_readwrite("mu0", &BeliefConfig::mu0)
        .def_readwrite("lambda0", &BeliefConfig::lambda0)
        .def_readwrite("ng_alpha0", &BeliefConfig::ng_alpha0)
        .def_readwrite("ng_beta0", &BeliefConfig::ng_beta0)
        .def_readwrite("tau0", &BeliefConfig::tau0)
        .def_readwrite("tau", &BeliefConfig::tau)
        .def_readwrite("beta_a0", &BeliefConfig::beta_a0)
        .def_readwrite("beta_b0", &BeliefConfig::beta_b0)
        .def_readwrite("mode", &BeliefConfig::mode)
        .def_readwrite("eta", &BeliefConfig::eta);

    py::class_<BeliefState>(m, "BeliefState")
        .def(py::init<int, int, BeliefConfig>(), py::arg("num_states"), py::arg("num_actions"),
             py::arg("config"))
        .def("update", &BeliefState::update)
        .def("predictive_transition", &BeliefState::predictive_transition)
        .def("predictive_reward_mean", &BeliefState::predictive_reward_mean)
        .def("epistemic_transition", &BeliefState::epistemic_transition)
        .def("mutual_info_transition", &BeliefState::mutual_info_transition)
        .def("epistemic_reward", &BeliefState::epistemic_reward)
        .def("epistemic_total", &BeliefState::epistemic_total)
        .def("p_uncertain", &BeliefState::p_uncertain)
        .def("e_max", &BeliefState::e_max)
        .def("visit_count", &BeliefState::visit_count);

    py::class_<EnvSpec>(m, "EnvSpec")
        .def(py::init([](const std::string& kind, int size, int loops, bool stochastic) {
                 nlohmann::json j = {{"kind", kind},
                                     {"size", size},
                                     {"loops", loops},
                                     {"stochastic", stochastic}};
                 nlohmann::json cfg = {{"env", j}, {"agent", {{"kind", "mean_mdp"}}}};
                 return parse_experiment_config(cfg).env;
             }),
             py::arg("kind"), py::arg("size") = 5, py::arg("loops") = 2,
             py::arg("stochastic") = false)
        .def_property_readonly("num_states", &EnvSpec::num_states)
        .def_property_readonly("num_actions", &EnvSpec::num_actions)
        .def_property_readonly("start_state", &EnvSpec::start_state);

    py::class_<StepResult>(m, "StepResult")
        .def_readonly("next_state", &StepResult::next_state)
        .def_readonly("reward", &StepResult::reward)
        .def_readonly("terminated", &StepResult::terminated)
        .def_readonly("episode_boundary", &StepResult::episode_boundary);

    py::class_<EnvInstance>(m, "EnvInstance")
        .def(py::init<EnvSpec, uint64_t>(), py::arg("spec"), py::arg("seed"))
        .def("step", &EnvInstance::step)
        .def("reset", &EnvInstance::reset)
        .def_property_readonly("state", &EnvInstance::state);

    m.def("ground_truth_mdp", &ground_truth_mdp, py::arg("spec"), py::arg("gamma"));
    m.def("optimal_policy_and_value", &optimal_policy_and_value, py::arg("spec"),
          py::arg("gamma"));

    m.def(
        "run_single",
        [](const std::string& config_json, uint64_t seed) {
            const ExperimentConfig cfg = config_from_json_str(config_json);
            const RunRecord rec = run_single(cfg, seed);
            py::dict d;
            d["seed"] = rec.seed;
            d["return"] = rec.cumulative_return;
            d["steps"] = rec.steps_taken;
            d["episodes"] = rec.episodes;
            d["success"] = rec.success;
            d["solve_step"] = rec.solve_step;
            d["halt_reason"] = rec.halt_reason;
            return d;
        },
        py::arg("config_json"), py::arg("seed"));
    m.def(
        "run_experiment",
        [](const std::string& config_json) {
            return summary_to_dict(run_experiment(config_from_json_str(config_json)));
        },
        py::arg("config_json"));
    m.def(
        "theory_check",
        [](const std::string& name) {
            nlohmann::json out = nlohmann::json::array();
            for (const auto& r : run_checks(name)) out.push_back(report_to_json(r));
            return out.dump();
        },
        py::arg("name"));
}
