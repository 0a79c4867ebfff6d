#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tats/classifiers.hpp"
#include "tats/core.hpp"
#include "tats/engine.hpp"
#include "tats/forecasters.hpp"
#include "tats/ingest.hpp"
#include "tats/theory.hpp"

namespace tats {

/// Experiment manifest: flat `key = value` lines, `#` starts a comment.
/// Relative paths resolve against the manifest's directory.
struct RunConfig {
    std::filesystem::path data;
    std::string target;
    std::vector<std::string> exogenous;
    std::optional<std::string> label_column;
    double train_fraction = 0.7;
    ValueForecasterSpec forecaster = ValueForecasterSpec::ar(2);
    TrendPredictorSpec classifier = TrendPredictorSpec::logistic();
    bool tune = false;
    std::size_t cv_folds = 5;
    FeatureOptions features{2, true, 1};
    std::vector<double> alphas{0.1, 1, 2, 5, 10, 20};
    std::uint64_t seed = 42;
    TheorySplit theory_split = TheorySplit::Train;
    double gamma = 0.0;
    std::filesystem::path output;
    bool plots = true;
};

namespace config_detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double to_real(const std::string& key, const std::string& v) {
    const auto r = csv::parse_real(v);
    if (!r) throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    return *r;
}

inline std::uint64_t to_count(const std::string& key, const std::string& v) {
    const auto r = csv::parse_int(v);
    if (!r || *r < 0) throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
    return static_cast<std::uint64_t>(*r);
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
    std::filesystem::path p(v);
    return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace config_detail

/// Applies one `key = value` setting. Unknown keys are errors.
inline void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& raw_value,
                          const std::filesystem::path& base_dir = {}) {
    using namespace config_detail;
    const std::string key = trim(raw_key);
    const std::string v = trim(raw_value);
    if (key == "data") {
        c.data = resolve(base_dir, v);
    } else if (key == "target") {
        c.target = v;
    } else if (key == "exogenous") {
        c.exogenous = split_list(v);
    } else if (key == "label_column") {
        c.label_column = v.empty() ? std::nullopt : std::optional<std::string>(v);
    } else if (key == "train_fraction") {
        c.train_fraction = to_real(key, v);
    } else if (key == "forecaster") {
        if (v == "naive") c.forecaster.kind = ForecasterKind::Naive;
        else if (v == "drift") c.forecaster.kind = ForecasterKind::Drift;
        else if (v == "ar") c.forecaster.kind = ForecasterKind::AR;
        else if (v == "ses") c.forecaster.kind = ForecasterKind::SES;
        else if (v == "external") c.forecaster.kind = ForecasterKind::External;
        else throw ConfigError("unknown forecaster '" + v + "' (naive, drift, ar, ses, external)");
    } else if (key == "ar_order") {
        c.forecaster.ar_order = to_count(key, v);
    } else if (key == "ses_smoothing") {
        c.forecaster.ses_smoothing = to_real(key, v);
    } else if (key == "forecast_file") {
        c.forecaster.external_path = resolve(base_dir, v);
    } else if (key == "refit") {
        c.forecaster.refit_each_step = to_bool(key, v);
    } else if (key == "classifier") {
        if (v == "majority") c.classifier.kind = PredictorKind::Majority;
        else if (v == "logistic") c.classifier.kind = PredictorKind::Logistic;
        else if (v == "gnb" || v == "gaussian_nb") c.classifier.kind = PredictorKind::GaussianNB;
        else if (v == "knn") c.classifier.kind = PredictorKind::KNN;
        else if (v == "oracle") c.classifier.kind = PredictorKind::Oracle;
        else if (v == "external") c.classifier.kind = PredictorKind::External;
        else if (v == "echo") c.classifier.kind = PredictorKind::Echo;
        else throw ConfigError("unknown classifier '" + v + "' (majority, logistic, gnb, knn, oracle, external, echo)");
    } else if (key == "learning_rate") {
        c.classifier.learning_rate = to_real(key, v);
    } else if (key == "iterations") {
        c.classifier.iterations = to_count(key, v);
    } else if (key == "knn_k") {
        c.classifier.knn_k = to_count(key, v);
    } else if (key == "knn_standardize") {
        c.classifier.knn_standardize = to_bool(key, v);
    } else if (key == "oracle_accuracy") {
        c.classifier.oracle_accuracy = to_real(key, v);
    } else if (key == "direction_file") {
        c.classifier.external_path = resolve(base_dir, v);
    } else if (key == "tune") {
        c.tune = to_bool(key, v);
    } else if (key == "cv_folds") {
        c.cv_folds = to_count(key, v);
    } else if (key == "n_lags") {
        c.features.n_lags = to_count(key, v);
    } else if (key == "include_exogenous") {
        c.features.include_exogenous = to_bool(key, v);
    } else if (key == "exogenous_lags") {
        c.features.exogenous_lags = to_count(key, v);
    } else if (key == "alphas") {
        c.alphas.clear();
        for (const auto& a : split_list(v)) c.alphas.push_back(to_real(key, a));
    } else if (key == "seed") {
        c.seed = to_count(key, v);
    } else if (key == "theory_split") {
        if (v == "train") c.theory_split = TheorySplit::Train;
        else if (v == "test") c.theory_split = TheorySplit::Test;
        else throw ConfigError("theory_split must be 'train' or 'test'");
    } else if (key == "gamma") {
        c.gamma = to_real(key, v);
    } else if (key == "output") {
        c.output = resolve(base_dir, v);
    } else if (key == "plots") {
        c.plots = to_bool(key, v);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

/// Applies a `key=value` override string.
inline void apply_override(RunConfig& c, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form key=value");
    apply_setting(c, assignment.substr(0, eq), assignment.substr(eq + 1));
}

inline RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
    RunConfig c;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (config_detail::trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        try {
            apply_setting(c, line.substr(0, eq), line.substr(eq + 1), base_dir);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config '" + path.string() + "'");
    return parse_config(in, path.parent_path());
}

/// Full validation before any work starts.
inline void validate(const RunConfig& c) {
    if (c.data.empty()) throw ConfigError("config needs 'data'");
    if (c.target.empty()) throw ConfigError("config needs 'target'");
    if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0))
        throw ConfigError("train_fraction must lie strictly between 0 and 1");
    if (c.alphas.empty()) throw ConfigError("alpha list is empty");
    for (double a : c.alphas) require_positive_alpha(a);
    if (c.cv_folds == 0) throw ConfigError("cv_folds must be positive");
    if (!(c.gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
    if (c.output.empty()) throw ConfigError("no output directory (set 'output', --output or TATS_OUTPUT_DIR)");
    TatsConfig tc{c.alphas.front(), c.forecaster, c.classifier, c.features};
    validate(tc);
}

inline TatsConfig to_tats_config(const RunConfig& c) {
    TatsConfig tc{c.alphas.front(), c.forecaster, c.classifier, c.features};
    tc.trend_predictor.seed = c.seed;
    return tc;
}

}  // namespace tats
