#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tats/commands.hpp"

namespace {

struct ExperimentFlags {
    std::string config;
    std::vector<std::string> overrides;
    std::optional<std::string> output;
    std::optional<std::string> alphas;
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 1;
};

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f) {
    cmd->add_option("-c,--config", f.config, "experiment manifest (key = value lines)")->required();
    cmd->add_option("-s,--set", f.overrides, "override a manifest key, e.g. --set classifier=knn");
    cmd->add_option("-o,--output", f.output, "output directory (default: manifest 'output' or $TATS_OUTPUT_DIR)");
    cmd->add_option("--alphas", f.alphas, "comma-separated alpha list");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("-j,--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
}

tats::RunConfig resolve_config(const ExperimentFlags& f) {
    tats::RunConfig cfg = tats::load_config(f.config);
    for (const auto& o : f.overrides) tats::apply_override(cfg, o);
    if (f.alphas) tats::apply_setting(cfg, "alphas", *f.alphas);
    if (f.seed) cfg.seed = *f.seed;
    if (f.output) {
        cfg.output = *f.output;
    } else if (cfg.output.empty()) {
        if (const char* env = std::getenv("TATS_OUTPUT_DIR")) cfg.output = env;
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trend-adjusted one-step forecasting experiments"};
    app.require_subcommand(1);

    ExperimentFlags run_flags, sweep_flags;
    auto* run = app.add_subcommand("run", "fit, sweep alpha, and write report.json / results.csv / plots");
    add_experiment_flags(run, run_flags);
    auto* sweep = app.add_subcommand("sweep", "alpha sweep only; writes sweep.csv");
    add_experiment_flags(sweep, sweep_flags);

    tats::mc::SimConfig sim;
    std::string sim_output;
    std::size_t sim_jobs = 1;
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo check of the error-reduction condition");
    simulate->add_option("--n-steps", sim.n_steps, "forecast steps per trial")->capture_default_str();
    simulate->add_option("--n-trials", sim.n_trials, "number of trials")->capture_default_str();
    simulate->add_option("--drift", sim.drift, "random-walk drift")->capture_default_str();
    simulate->add_option("--volatility", sim.volatility, "random-walk volatility")->capture_default_str();
    simulate->add_option("--p-dt", sim.p_dt, "forecaster directional accuracy")->capture_default_str();
    simulate->add_option("--p-db", sim.p_db, "trend predictor accuracy")->capture_default_str();
    simulate->add_option("--error-scale", sim.error_scale, "forecast move as a multiple of |dy|")->capture_default_str();
    simulate->add_option("--alpha", sim.alpha, "adjustment step")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "random seed")->capture_default_str();
    simulate->add_option("-o,--output", sim_output, "write simulation.json and simulation.csv here");
    simulate->add_option("-j,--jobs", sim_jobs, "worker threads")->check(CLI::PositiveNumber);

    std::string actuals, column = "actual", forecasts;
    double gamma = 0.0;
    auto* metrics = app.add_subcommand("metrics", "TDA, MSE, MAE, MAPE and trend-aware loss for a forecast file");
    metrics->add_option("--actuals", actuals, "CSV with the actual series")->required();
    metrics->add_option("--column", column, "actual value column")->capture_default_str();
    metrics->add_option("--forecasts", forecasts, "CSV with time_index,forecast")->required();
    metrics->add_option("--gamma", gamma, "trend-aware loss penalty per wrong-direction step")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? tats::cli::kOk : tats::cli::kUsage;
    }

    try {
        if (*run) return tats::cli::cmd_run(resolve_config(run_flags), run_flags.jobs, std::cout);
        if (*sweep) return tats::cli::cmd_sweep(resolve_config(sweep_flags), sweep_flags.jobs, std::cout);
        if (*simulate) return tats::cli::cmd_simulate(sim, sim_output, sim_jobs, std::cout);
        if (*metrics) return tats::cli::cmd_metrics(actuals, column, forecasts, gamma, std::cout);
    } catch (const tats::ConfigError& e) {
        std::cerr << "tats: usage error: " << e.what() << '\n';
        return tats::cli::kUsage;
    } catch (const tats::NumericError& e) {
        std::cerr << "tats: numeric failure: " << e.what() << '\n';
        return tats::cli::kNumericError;
    } catch (const std::exception& e) {
        std::cerr << "tats: data error: " << e.what() << '\n';
        return tats::cli::kDataError;
    }
    return tats::cli::kUsage;
}
