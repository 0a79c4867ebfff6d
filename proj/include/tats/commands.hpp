#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tats/classifiers.hpp"
#include "tats/config.hpp"
#include "tats/core.hpp"
#include "tats/engine.hpp"
#include "tats/ingest.hpp"
#include "tats/metrics.hpp"
#include "tats/montecarlo.hpp"
#include "tats/report.hpp"
#include "tats/svg.hpp"
#include "tats/theory.hpp"

namespace tats::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericError = 3 };

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

/// Everything a run produces before it is written out.
struct Experiment {
    RunConfig config;
    TatsConfig tats;
    std::unique_ptr<TatsPipeline> pipeline;
    SweepResult sweep;
    std::optional<TheoryEstimate> theory;
    std::string theory_error;
    std::optional<TuningResult> tuning;
    std::optional<double> classifier_train_accuracy;
    std::optional<double> classifier_test_accuracy;
    std::string base_name;
    std::string tats_name;
};

inline Experiment prepare(const RunConfig& cfg, std::size_t jobs = 1) {
    validate(cfg);
    Experiment ex;
    ex.config = cfg;
    ex.tats = to_tats_config(cfg);

    Dataset ds = load_csv(cfg.data, cfg.target, cfg.exogenous, cfg.label_column);
    const std::size_t n_train = chronological_split(ds.target, cfg.train_fraction).train.size();

    TatsPipeline::Sources sources;
    if (cfg.forecaster.kind == ForecasterKind::External)
        sources.external_forecasts =
            std::make_shared<const AlignedForecasts>(load_external_forecasts(cfg.forecaster.external_path, ds.target));
    if (cfg.classifier.kind == PredictorKind::External)
        sources.external_directions = std::make_shared<const AlignedDirections>(
            load_external_directions(cfg.classifier.external_path, ds.target));

    if (cfg.tune && is_feature_based(cfg.classifier.kind)) {
        Dataset train_ds{ds.target.slice(0, n_train), {}};
        for (const auto& [name, s] : ds.exogenous) train_ds.exogenous.emplace_back(name, s.slice(0, n_train));
        ex.tuning = tune(default_grid(ex.tats.trend_predictor), build_features(train_ds, cfg.features), cfg.cv_folds);
        ex.tats.trend_predictor = ex.tuning->best;
    }

    ex.pipeline = std::make_unique<TatsPipeline>(ex.tats, std::move(ds), n_train, sources);
    ex.sweep = sweep_alpha(*ex.pipeline, cfg.alphas, jobs);

    try {
        ex.theory = estimate_theory(*ex.pipeline, cfg.theory_split);
    } catch (const DataError& e) {
        ex.theory_error = e.what();
    }

    const auto& p = *ex.pipeline;
    if (p.predictor()) {
        const auto& fm = p.training_features();
        std::vector<TrendDirection> pred;
        for (const auto& row : fm.rows) pred.push_back(predict_direction(*p.predictor(), row));
        ex.classifier_train_accuracy = classification_accuracy(pred, fm.labels);
    }
    {
        const auto y = p.dataset().target.values();
        std::vector<TrendDirection> pred, truth;
        for (std::size_t t = p.test_range().first; t <= p.test_range().last; ++t) {
            const auto actual = strict(direction_of(y[t] - y[t - 1]));
            if (!actual) continue;
            pred.push_back(p.test_directions()[t - p.test_range().first]);
            truth.push_back(*actual);
        }
        if (!truth.empty()) ex.classifier_test_accuracy = classification_accuracy(pred, truth);
    }

    ex.base_name = name(ex.tats.value_forecaster);
    ex.tats_name = "TATS(" + ex.base_name + "+" + name(ex.tats.trend_predictor) + ")";
    return ex;
}

inline ordered_json report_json(const Experiment& ex) {
    const auto& cfg = ex.config;
    const auto& p = *ex.pipeline;
    ordered_json j;

    ordered_json data;
    data["path"] = cfg.data.generic_string();
    data["target"] = cfg.target;
    data["exogenous"] = cfg.exogenous;
    data["n"] = p.dataset().size();
    data["n_train"] = p.n_train();
    data["n_test"] = p.dataset().size() - p.n_train();
    data["train_fraction"] = cfg.train_fraction;
    j["data"] = data;

    ordered_json fc;
    fc["name"] = ex.base_name;
    fc["refit_each_step"] = ex.tats.value_forecaster.refit_each_step;
    if (p.forecaster().ar) {
        fc["intercept"] = p.forecaster().ar->intercept;
        fc["coefficients"] = p.forecaster().ar->coefficients;
        fc["degenerate"] = p.forecaster().ar->degenerate;
    }
    if (ex.tats.value_forecaster.kind == ForecasterKind::Drift) fc["drift"] = p.forecaster().drift;
    j["forecaster"] = fc;

    ordered_json cl;
    cl["name"] = name(ex.tats.trend_predictor);
    cl["n_lags"] = ex.tats.features.n_lags;
    cl["include_exogenous"] = ex.tats.features.include_exogenous;
    cl["exogenous_lags"] = ex.tats.features.exogenous_lags;
    if (p.predictor()) {
        cl["training_rows"] = p.training_features().size();
        cl["flat_rows_dropped"] = p.training_features().flat_dropped;
    }
    cl["train_accuracy"] = ex.classifier_train_accuracy ? ordered_json(*ex.classifier_train_accuracy) : ordered_json();
    cl["test_accuracy"] = ex.classifier_test_accuracy ? ordered_json(*ex.classifier_test_accuracy) : ordered_json();
    if (ex.tuning) {
        ordered_json grid = ordered_json::array();
        for (const auto& [spec, score] : ex.tuning->scores) grid.push_back({{"candidate", name(spec)}, {"cv_accuracy", score}});
        cl["tuning"] = {{"folds", cfg.cv_folds}, {"grid", grid}, {"selected", name(ex.tuning->best)}};
    }
    j["classifier"] = cl;

    const auto base_points = p.run(cfg.alphas.front()).base_points();
    ordered_json base = to_json(ex.sweep.base);
    base["trend_aware_loss"] = trend_aware_loss(base_points, {cfg.gamma});
    j["base"] = {{"model", ex.base_name}, {"split", "test"}, {"report", base}};

    ordered_json rows = ordered_json::array();
    for (const auto& row : ex.sweep.rows) {
        ordered_json r = to_json(row.report);
        r["trend_aware_loss"] = trend_aware_loss(p.run(row.alpha).adjusted_points(), {cfg.gamma});
        rows.push_back({{"model", ex.tats_name}, {"alpha", row.alpha}, {"report", r}, {"scenarios", to_json(row.tally)}});
    }
    j["tats"] = rows;
    j["gamma"] = cfg.gamma;

    j["theory_split"] = cfg.theory_split == TheorySplit::Train ? "train" : "test";
    if (ex.theory) {
        j["theory"] = to_json(*ex.theory);
    } else {
        j["theory"] = nullptr;
        j["theory_error"] = ex.theory_error;
    }
    j["seed"] = cfg.seed;
    return j;
}

inline std::string trace_csv(const Experiment& ex) {
    const auto& p = *ex.pipeline;
    std::vector<ForecastTrace> traces;
    for (double a : ex.config.alphas) traces.push_back(p.run(a));
    std::ostringstream os;
    os << "time_index";
    if (p.dataset().target.has_labels()) os << ",label";
    os << ",y_prev,y_true,y_hat,c_hat";
    for (double a : ex.config.alphas) os << ",y_adj@" << format_real(a) << ",scenario@" << format_real(a);
    os << '\n';
    for (std::size_t k = 0; k < traces.front().size(); ++k) {
        const auto& s = traces.front().steps[k];
        os << s.t;
        if (p.dataset().target.has_labels()) os << ',' << p.dataset().target.labels()[s.t];
        os << ',' << format_real(s.y_prev) << ',' << format_real(s.y_true) << ',' << format_real(s.y_hat) << ','
           << static_cast<int>(s.c_hat);
        for (const auto& tr : traces) os << ',' << format_real(tr.steps[k].y_adj) << ',' << to_string(tr.steps[k].scenario);
        os << '\n';
    }
    return os.str();
}

inline void write_plots(const Experiment& ex, const std::filesystem::path& dir) {
    const auto& p = *ex.pipeline;
    // Forecast chart uses the alpha with the lowest test MSE.
    const auto best = std::min_element(ex.sweep.rows.begin(), ex.sweep.rows.end(),
                                       [](const SweepRow& a, const SweepRow& b) { return a.report.mse < b.report.mse; });
    const auto trace = p.run(best->alpha);
    svg::Line actual{"actual", "#222222", {}, {}}, base{ex.base_name, "#1f77b4", {}, {}},
        adjusted{"TATS alpha=" + format_real(best->alpha), "#d62728", {}, {}};
    for (const auto& s : trace.steps) {
        const auto t = static_cast<double>(s.t);
        actual.x.push_back(t);
        actual.y.push_back(s.y_true);
        base.x.push_back(t);
        base.y.push_back(s.y_hat);
        adjusted.x.push_back(t);
        adjusted.y.push_back(s.y_adj);
    }
    write_file(dir / "forecast.svg",
               svg::line_chart("Test split: actual vs forecasts", "time index", ex.config.target, {actual, base, adjusted}));

    svg::Line tats_mse{ex.tats_name, "#d62728", {}, {}, true};
    svg::Line base_mse{ex.base_name, "#1f77b4", {}, {}};
    for (const auto& row : ex.sweep.rows) {
        tats_mse.x.push_back(row.alpha);
        tats_mse.y.push_back(row.report.mse);
        base_mse.x.push_back(row.alpha);
        base_mse.y.push_back(ex.sweep.base.mse);
    }
    const bool log_x = std::all_of(ex.sweep.rows.begin(), ex.sweep.rows.end(), [](const SweepRow& r) { return r.alpha > 0; }) &&
                       ex.sweep.rows.size() > 1;
    write_file(dir / "mse_alpha.svg", svg::line_chart("Test MSE vs alpha", "alpha", "MSE", {tats_mse, base_mse}, log_x));
}

inline std::string summary_table(const Experiment& ex) {
    std::ostringstream os;
    os << std::left << std::setw(36) << "model" << std::setw(8) << "alpha" << std::setw(14) << "TDA" << std::setw(14)
       << "MSE" << std::setw(14) << "MAE" << std::setw(14) << "MAPE" << std::setw(16) << "Diff" << "R-Diff\n";
    auto line = [&](const std::string& model, const std::string& alpha, const EvalReport& r) {
        os << std::left << std::setw(36) << model << std::setw(8) << alpha << std::setw(14) << format_real(r.tda)
           << std::setw(14) << format_real(r.mse) << std::setw(14) << format_real(r.mae) << std::setw(14)
           << format_real(r.mape) << std::setw(16) << format_real(r.diff) << format_real(r.r_diff) << '\n';
    };
    line(ex.base_name, "-", ex.sweep.base);
    for (const auto& row : ex.sweep.rows) line(ex.tats_name, format_real(row.alpha), row.report);
    return os.str();
}

/// Writes report.json, results.csv, trace.csv and (optionally) SVG plots.
inline int cmd_run(const RunConfig& cfg, std::size_t jobs, std::ostream& out) {
    const Experiment ex = prepare(cfg, jobs);
    ensure_directory(cfg.output);
    write_file(cfg.output / "report.json", report_json(ex).dump(2) + "\n");
    write_file(cfg.output / "results.csv", results_csv(ex.base_name, ex.tats_name, "test", ex.sweep));
    write_file(cfg.output / "trace.csv", trace_csv(ex));
    if (cfg.plots) write_plots(ex, cfg.output);
    out << summary_table(ex);
    if (ex.theory)
        out << "theory (" << (cfg.theory_split == TheorySplit::Train ? "train" : "test")
            << "): P(D^B)=" << format_real(ex.theory->p_db) << " P(D^T)=" << format_real(ex.theory->p_dt)
            << " lower bound=" << format_real(ex.theory->lower_bound) << '\n';
    out << "wrote " << (cfg.output / "report.json").string() << '\n';
    return kOk;
}

/// Alpha sweep only: prints the table and writes sweep.csv.
inline int cmd_sweep(const RunConfig& cfg, std::size_t jobs, std::ostream& out) {
    if (cfg.alphas.empty()) throw ConfigError("alpha list is empty");
    const Experiment ex = prepare(cfg, jobs);
    ensure_directory(cfg.output);
    write_file(cfg.output / "sweep.csv", results_csv(ex.base_name, ex.tats_name, "test", ex.sweep));
    out << summary_table(ex);
    return kOk;
}

inline int cmd_simulate(const mc::SimConfig& sim, const std::filesystem::path& output, std::size_t jobs,
                        std::ostream& out) {
    const auto rep = mc::simulate_reduction(sim, jobs);
    const auto j = to_json(rep);
    if (!output.empty()) {
        ensure_directory(output);
        write_file(output / "simulation.json", j.dump(2) + "\n");
        std::ostringstream csv;
        csv << "trial,mse_base,mse_tats,reduction,p_db,p_dt,abs_gap,lower_bound\n";
        for (std::size_t i = 0; i < rep.trials.size(); ++i) {
            const auto& t = rep.trials[i];
            csv << i << ',' << format_real(t.mse_base) << ',' << format_real(t.mse_tats) << ','
                << format_real(t.reduction) << ',' << format_real(t.p_db) << ',' << format_real(t.p_dt) << ','
                << format_real(t.abs_gap) << ',' << format_real(t.lower_bound) << '\n';
        }
        write_file(output / "simulation.csv", csv.str());
    }
    out << j["aggregate"].dump(2) << '\n';
    return kOk;
}

struct MetricsResult {
    EvalReport report;            // MSE/MAE/MAPE over all rows; TDA over rows with a predecessor
    std::size_t n_direction_steps = 0;
    double trend_aware_loss = 0.0;
};

/// Metrics for an actuals CSV (column `actual_column`, row order = time index)
/// and a forecast CSV (time_index, forecast).
inline MetricsResult compute_metrics(const std::filesystem::path& actuals, const std::string& actual_column,
                                     const std::filesystem::path& forecasts, double gamma) {
    const Dataset ds = load_csv(actuals, actual_column);
    const AlignedForecasts f = load_external_forecasts(forecasts, ds.target, true);
    std::vector<ForecastPoint> all, directional;
    for (const auto& [t, value] : f.by_index) {
        ForecastPoint p;
        if (t > 0) p.previous = ds.target[t - 1];
        p.actual = ds.target[t];
        p.forecast = value;
        all.push_back(p);
        if (p.previous) directional.push_back(p);
    }
    MetricsResult r;
    r.report.mse = mse(all);
    r.report.mae = mae(all);
    try {
        r.report.mape = mape(all);
    } catch (const NumericError&) {
        r.report.mape = std::nullopt;
    }
    r.report.n_steps = all.size();
    if (!directional.empty()) r.report.tda = td_accuracy(directional);
    r.n_direction_steps = directional.size();
    r.trend_aware_loss = trend_aware_loss(all, {gamma});
    return r;
}

inline int cmd_metrics(const std::filesystem::path& actuals, const std::string& actual_column,
                       const std::filesystem::path& forecasts, double gamma, std::ostream& out) {
    const auto r = compute_metrics(actuals, actual_column, forecasts, gamma);
    ordered_json j = to_json(r.report);
    j.erase("Diff");
    j.erase("R-Diff");
    j["n_direction_steps"] = r.n_direction_steps;
    j["gamma"] = gamma;
    j["trend_aware_loss"] = r.trend_aware_loss;
    out << j.dump(2) << '\n';
    return kOk;
}

}  // namespace tats::cli
