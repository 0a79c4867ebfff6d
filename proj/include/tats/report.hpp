#pragma once

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tats/engine.hpp"
#include "tats/metrics.hpp"
#include "tats/montecarlo.hpp"
#include "tats/theory.hpp"

namespace tats {

using nlohmann::ordered_json;

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string format_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string{}; }

inline ordered_json to_json(const EvalReport& r) {
    ordered_json j;
    j["TDA"] = r.tda;
    j["MSE"] = r.mse;
    j["MAE"] = r.mae;
    j["MAPE"] = r.mape ? ordered_json(*r.mape) : ordered_json(nullptr);
    j["n_steps"] = r.n_steps;
    j["Diff"] = r.diff ? ordered_json(*r.diff) : ordered_json(nullptr);
    j["R-Diff"] = r.r_diff ? ordered_json(*r.r_diff) : ordered_json(nullptr);
    return j;
}

inline ordered_json to_json(const ScenarioTally& t) {
    ordered_json j;
    for (auto s : {Scenario::S1, Scenario::S2, Scenario::S3, Scenario::S4, Scenario::Undefined})
        j[to_string(s)] = t[s];
    return j;
}

inline ordered_json to_json(const TheoryEstimate& e) {
    ordered_json j;
    j["P(D^B)"] = e.p_db;
    j["P(D^T)"] = e.p_dt;
    j["abs_gap"] = e.abs_gap;
    j["expected_loss_change"] = e.expected_loss_change;
    j["lower_bound"] = e.lower_bound;
    j["condition_holds"] = e.condition_holds;
    j["n_steps"] = e.n_steps;
    return j;
}

inline ordered_json to_json(const mc::SimConfig& c) {
    ordered_json j;
    j["n_steps"] = c.n_steps;
    j["n_trials"] = c.n_trials;
    j["drift"] = c.drift;
    j["volatility"] = c.volatility;
    j["p_dt"] = c.p_dt;
    j["p_db"] = c.p_db;
    j["error_scale"] = c.error_scale;
    j["alpha"] = c.alpha;
    j["seed"] = c.seed;
    return j;
}

inline ordered_json to_json(const mc::SimulationReport& r, bool include_trials = true) {
    ordered_json j;
    j["config"] = to_json(r.config);
    ordered_json agg;
    agg["mean_reduction"] = r.mean_reduction;
    agg["standard_error"] = r.standard_error;
    agg["fraction_positive"] = r.fraction_positive;
    agg["realized_p_db"] = r.realized_p_db;
    agg["realized_p_dt"] = r.realized_p_dt;
    agg["realized_abs_gap"] = r.realized_abs_gap;
    agg["lower_bound"] = r.lower_bound;
    agg["mean_excess_over_bound"] = r.mean_excess_over_bound;
    agg["excess_standard_error"] = r.excess_standard_error;
    agg["accuracy_condition"] = r.realized_p_db > r.realized_p_dt;
    agg["mean_reduction_positive"] = r.mean_reduction > 0.0;
    agg["reduction_at_least_bound_minus_3se"] = r.mean_reduction >= r.lower_bound - 3.0 * r.standard_error;
    j["aggregate"] = agg;
    j["scenarios"] = to_json(r.tally);
    ordered_json checks = ordered_json::array();
    for (const auto& c : mc::scenario_frequency_check(r)) {
        checks.push_back({{"scenario", to_string(c.scenario)},
                          {"observed", c.observed},
                          {"expected", c.expected},
                          {"three_sigma", c.three_sigma},
                          {"within", c.within()}});
    }
    j["scenario_frequency_check"] = checks;
    if (include_trials) {
        ordered_json trials = ordered_json::array();
        for (const auto& t : r.trials) {
            trials.push_back({{"mse_base", t.mse_base},
                              {"mse_tats", t.mse_tats},
                              {"reduction", t.reduction},
                              {"p_db", t.p_db},
                              {"p_dt", t.p_dt},
                              {"abs_gap", t.abs_gap},
                              {"lower_bound", t.lower_bound}});
        }
        j["trials"] = trials;
    }
    return j;
}

inline constexpr const char kResultsHeader[] = "model,split,alpha,TDA,MSE,MAE,MAPE,Diff,R-Diff";

inline std::string results_row(const std::string& model, const std::string& split, std::optional<double> alpha,
                               const EvalReport& r) {
    std::ostringstream os;
    os << model << ',' << split << ',' << format_real(alpha) << ',' << format_real(r.tda) << ','
       << format_real(r.mse) << ',' << format_real(r.mae) << ',' << format_real(r.mape) << ','
       << format_real(r.diff) << ',' << format_real(r.r_diff);
    return os.str();
}

inline std::string results_csv(const std::string& base_model, const std::string& tats_model, const std::string& split,
                               const SweepResult& sweep) {
    std::ostringstream os;
    os << kResultsHeader << '\n';
    os << results_row(base_model, split, std::nullopt, sweep.base) << '\n';
    for (const auto& row : sweep.rows) os << results_row(tats_model, split, row.alpha, row.report) << '\n';
    return os.str();
}

}  // namespace tats
