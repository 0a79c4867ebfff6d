#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tats/classifiers.hpp"
#include "tats/core.hpp"
#include "tats/forecasters.hpp"
#include "tats/ingest.hpp"
#include "tats/metrics.hpp"

namespace tats {

/// 1 when the forecast's implied move and the predicted direction do not
/// conflict: (y_hat - y_prev) * c_hat >= 0. A flat forecast always agrees.
constexpr int indicator(double y_hat, double y_prev, TrendDirection c_hat) noexcept {
    return (y_hat - y_prev) * as_real(c_hat) >= 0.0 ? 1 : 0;
}

inline void require_positive_alpha(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw ConfigError("alpha must be a positive finite value, got " + std::to_string(alpha));
}

/// Keeps y_hat when it agrees with c_hat; otherwise steps alpha from y_prev
/// in the predicted direction.
inline double adjust(double y_hat, TrendDirection c_hat, double y_prev, double alpha) {
    require_positive_alpha(alpha);
    return indicator(y_hat, y_prev, c_hat) == 1 ? y_hat : y_prev + as_real(c_hat) * alpha;
}

enum class Scenario { S1, S2, S3, S4, Undefined };

inline const char* to_string(Scenario s) noexcept {
    switch (s) {
    case Scenario::S1: return "S1";
    case Scenario::S2: return "S2";
    case Scenario::S3: return "S3";
    case Scenario::S4: return "S4";
    case Scenario::Undefined: break;
    }
    return "Undefined";
}

// S1: both right. S2: forecaster right, predictor wrong. S3: both wrong.
// S4: forecaster wrong, predictor right. Flat actual or flat forecast move: Undefined.
inline Scenario classify_scenario(double y_prev, double y_true, double y_hat, TrendDirection c_hat) noexcept {
    const auto actual = strict(direction_of(y_true - y_prev));
    const auto implied = strict(direction_of(y_hat - y_prev));
    if (!actual || !implied) return Scenario::Undefined;
    const bool vf_right = *implied == *actual;
    const bool tp_right = c_hat == *actual;
    if (vf_right) return tp_right ? Scenario::S1 : Scenario::S2;
    return tp_right ? Scenario::S4 : Scenario::S3;
}

struct ForecastStep {
    std::size_t t = 0;
    double y_prev = 0.0;
    double y_true = 0.0;
    double y_hat = 0.0;
    TrendDirection c_hat = TrendDirection::Up;
    int indicator = 1;
    double y_adj = 0.0;
    double loss_base = 0.0;
    double loss_adj = 0.0;
    Scenario scenario = Scenario::Undefined;
};

inline ForecastStep make_step(std::size_t t, double y_prev, double y_true, double y_hat, TrendDirection c_hat,
                              double alpha) {
    ForecastStep s;
    s.t = t;
    s.y_prev = y_prev;
    s.y_true = y_true;
    s.y_hat = y_hat;
    s.c_hat = c_hat;
    s.indicator = indicator(y_hat, y_prev, c_hat);
    s.y_adj = adjust(y_hat, c_hat, y_prev, alpha);
    s.loss_base = (y_hat - y_true) * (y_hat - y_true);
    s.loss_adj = (s.y_adj - y_true) * (s.y_adj - y_true);
    s.scenario = classify_scenario(y_prev, y_true, y_hat, c_hat);
    return s;
}

struct ScenarioTally {
    std::array<std::size_t, 5> counts{};  // S1..S4, Undefined

    std::size_t& operator[](Scenario s) { return counts[static_cast<std::size_t>(s)]; }
    std::size_t operator[](Scenario s) const { return counts[static_cast<std::size_t>(s)]; }
    std::size_t total() const {
        std::size_t n = 0;
        for (auto c : counts) n += c;
        return n;
    }
};

struct ForecastTrace {
    std::vector<ForecastStep> steps;

    std::size_t size() const noexcept { return steps.size(); }

    ScenarioTally tally() const {
        ScenarioTally t;
        for (const auto& s : steps) ++t[s.scenario];
        return t;
    }

    /// The unadjusted forecaster over the same steps.
    std::vector<ForecastPoint> base_points() const {
        std::vector<ForecastPoint> out;
        out.reserve(steps.size());
        for (const auto& s : steps) out.push_back({s.y_prev, s.y_true, s.y_hat});
        return out;
    }

    std::vector<ForecastPoint> adjusted_points() const {
        std::vector<ForecastPoint> out;
        out.reserve(steps.size());
        for (const auto& s : steps) out.push_back({s.y_prev, s.y_true, s.y_adj});
        return out;
    }
};

/// Pure adjustment over t = first .. first + forecasts.size() - 1 of a full series.
inline ForecastTrace build_trace(std::span<const double> series, std::size_t first, std::span<const double> forecasts,
                                 std::span<const TrendDirection> directions, double alpha) {
    require_positive_alpha(alpha);
    if (first == 0) throw DataError("the first evaluated step needs a previous value (index >= 1)");
    if (forecasts.size() != directions.size()) throw DataError("forecasts and directions are misaligned");
    if (first + forecasts.size() > series.size()) throw DataError("forecasts run past the end of the series");
    ForecastTrace trace;
    trace.steps.reserve(forecasts.size());
    for (std::size_t k = 0; k < forecasts.size(); ++k) {
        const std::size_t t = first + k;
        trace.steps.push_back(make_step(t, series[t - 1], series[t], forecasts[k], directions[k], alpha));
    }
    return trace;
}

struct TatsConfig {
    double alpha = 1.0;
    ValueForecasterSpec value_forecaster;
    TrendPredictorSpec trend_predictor;
    FeatureOptions features;  // n_lags defaults to 2
};

inline void validate(const TatsConfig& c) {
    require_positive_alpha(c.alpha);
    validate(c.value_forecaster);
    validate(c.trend_predictor);
    if (c.features.n_lags == 0) throw ConfigError("n_lags must be positive");
}

/// Inclusive range of time indices of the full series.
struct IndexRange {
    std::size_t first = 0;
    std::size_t last = 0;
    std::size_t size() const noexcept { return last - first + 1; }
};

/// Both sub-models fitted once on the training prefix; forecasts and
/// directions for the test split are computed once and reused for every alpha.
class TatsPipeline {
public:
    struct Sources {
        std::shared_ptr<const AlignedForecasts> external_forecasts;
        std::shared_ptr<const AlignedDirections> external_directions;
    };

    TatsPipeline(TatsConfig config, Dataset dataset, std::size_t n_train, Sources sources = {})
        : config_(std::move(config)), dataset_(std::move(dataset)), n_train_(n_train), sources_(std::move(sources)) {
        validate(config_);
        const std::size_t n = dataset_.size();
        if (n_train_ < 2 || n_train_ >= n)
            throw DataError("train split must hold at least 2 values and leave a nonempty test split");
        const auto series = dataset_.target.values();
        if (config_.value_forecaster.kind == ForecasterKind::External && !sources_.external_forecasts)
            throw ConfigError("external forecaster configured without forecasts");
        forecaster_ = fit_forecaster(config_.value_forecaster, series.first(n_train_), sources_.external_forecasts);
        if (forecaster_.required_history() > n_train_)
            throw DataError("training split too short for " + name(config_.value_forecaster));

        const auto& tp = config_.trend_predictor;
        if (is_feature_based(tp.kind)) {
            if (first_feature_time(config_.features) + 1 > n_train_)
                throw DataError("training split too short for the classifier lags");
            const Dataset train_ds = train_dataset();
            training_features_ = build_features(train_ds, config_.features);
            predictor_ = fit_classifier(tp, training_features_);
        } else if (tp.kind == PredictorKind::External && !sources_.external_directions) {
            throw ConfigError("external trend predictor configured without directions");
        }

        test_range_ = IndexRange{n_train_, n - 1};
        test_forecasts_ = forecasts(test_range_);
        test_directions_ = directions(test_range_, test_forecasts_, 1);
    }

    const TatsConfig& config() const noexcept { return config_; }
    const Dataset& dataset() const noexcept { return dataset_; }
    std::size_t n_train() const noexcept { return n_train_; }
    const FittedForecaster& forecaster() const noexcept { return forecaster_; }
    const std::optional<TrendPredictor>& predictor() const noexcept { return predictor_; }
    const FeatureMatrix& training_features() const noexcept { return training_features_; }
    IndexRange test_range() const noexcept { return test_range_; }
    const std::vector<double>& test_forecasts() const noexcept { return test_forecasts_; }
    const std::vector<TrendDirection>& test_directions() const noexcept { return test_directions_; }

    /// Earliest training index at which both sub-models can produce output.
    std::size_t first_train_step() const {
        std::size_t first = std::max<std::size_t>(1, forecaster_.required_history());
        if (is_feature_based(config_.trend_predictor.kind))
            first = std::max(first, first_feature_time(config_.features) + 1);
        if (first >= n_train_) throw DataError("training split too short for in-sample evaluation");
        return first;
    }

    IndexRange train_range() const { return IndexRange{first_train_step(), n_train_ - 1}; }

    /// One-step forecasts from true history, parameters frozen.
    std::vector<double> forecasts(IndexRange r) const {
        return forecast_range(forecaster_, dataset_.target.values(), r.first, r.last);
    }

    /// Predicted direction for each t in r. Feature-based predictors see the
    /// row for t-1; the oracle draws from its own sub-seeded stream.
    std::vector<TrendDirection> directions(IndexRange r, std::span<const double> forecasts_in_range,
                                           std::uint64_t stream_id) const {
        const auto& tp = config_.trend_predictor;
        const auto y = dataset_.target.values();
        std::vector<TrendDirection> out;
        out.reserve(r.size());
        std::optional<OracleStream> oracle;
        if (tp.kind == PredictorKind::Oracle) oracle.emplace(tp.oracle_accuracy, sub_seed(tp.seed, stream_id));
        for (std::size_t t = r.first; t <= r.last; ++t) {
            switch (tp.kind) {
            case PredictorKind::Oracle: {
                // A flat actual move has no truth; Up is used but a draw is still consumed.
                const auto truth = strict(direction_of(y[t] - y[t - 1])).value_or(TrendDirection::Up);
                out.push_back((*oracle)(truth));
                break;
            }
            case PredictorKind::Echo: {
                const double yhat = forecasts_in_range[t - r.first];
                out.push_back(strict(direction_of(yhat - y[t - 1])).value_or(TrendDirection::Up));
                break;
            }
            case PredictorKind::External: out.push_back(sources_.external_directions->at(t)); break;
            default: out.push_back(predict_direction(*predictor_, feature_row(dataset_, t - 1, config_.features)));
            }
        }
        return out;
    }

    /// The TATS trace over the test split for one alpha; base_points() of the
    /// result is the paired unadjusted trace.
    ForecastTrace run(double alpha) const {
        return build_trace(dataset_.target.values(), test_range_.first, test_forecasts_, test_directions_, alpha);
    }

    ForecastTrace run() const { return run(config_.alpha); }

private:
    Dataset train_dataset() const {
        Dataset ds{dataset_.target.slice(0, n_train_), {}};
        for (const auto& [name, s] : dataset_.exogenous) ds.exogenous.emplace_back(name, s.slice(0, n_train_));
        return ds;
    }

    TatsConfig config_;
    Dataset dataset_;
    std::size_t n_train_;
    Sources sources_;
    FittedForecaster forecaster_;
    std::optional<TrendPredictor> predictor_;
    FeatureMatrix training_features_;
    IndexRange test_range_;
    std::vector<double> test_forecasts_;
    std::vector<TrendDirection> test_directions_;
};

inline Dataset concatenate(const TimeSeries& train, const TimeSeries& test) {
    std::vector<double> v(train.values().begin(), train.values().end());
    v.insert(v.end(), test.values().begin(), test.values().end());
    std::vector<std::string> labels;
    if (train.has_labels() && test.has_labels()) {
        labels = train.labels();
        labels.insert(labels.end(), test.labels().begin(), test.labels().end());
    }
    return Dataset{TimeSeries(std::move(v), std::move(labels)), {}};
}

/// Fits both sub-models on train and returns the TATS trace over test.
inline ForecastTrace run_tats(const TatsConfig& config, const TimeSeries& train, const TimeSeries& test,
                              TatsPipeline::Sources sources = {}) {
    return TatsPipeline(config, concatenate(train, test), train.size(), std::move(sources)).run();
}

struct SweepRow {
    double alpha = 0.0;
    EvalReport report;  // diff / r_diff relative to the base forecaster
    ScenarioTally tally;
};

struct SweepResult {
    EvalReport base;
    std::vector<SweepRow> rows;  // input alpha order
};

/// One TATS evaluation per alpha with the pipeline's shared fits. Rows are
/// computed on up to `jobs` threads and returned in input order.
inline SweepResult sweep_alpha(const TatsPipeline& pipeline, std::span<const double> alphas, std::size_t jobs = 1) {
    if (alphas.empty()) throw ConfigError("alpha list is empty");
    for (double a : alphas) require_positive_alpha(a);
    SweepResult result;
    const auto base_points = pipeline.run(alphas.front()).base_points();
    result.base = evaluate(base_points);
    result.rows.resize(alphas.size());

    auto work = [&](std::size_t i) {
        const ForecastTrace trace = pipeline.run(alphas[i]);
        SweepRow row{alphas[i], evaluate(trace.adjusted_points()), trace.tally()};
        if (result.base.mse > 0.0) attach_diff(result.base, row.report);
        result.rows[i] = std::move(row);
    };
    parallel_for(alphas.size(), jobs, work);
    return result;
}

inline SweepResult sweep_alpha(const TatsConfig& config, std::span<const double> alphas, const TimeSeries& train,
                               const TimeSeries& test, TatsPipeline::Sources sources = {}) {
    return sweep_alpha(TatsPipeline(config, concatenate(train, test), train.size(), std::move(sources)), alphas);
}

}  // namespace tats
