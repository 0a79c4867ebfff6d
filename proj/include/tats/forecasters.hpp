#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tats/core.hpp"
#include "tats/ingest.hpp"

namespace tats {

enum class ForecasterKind { Naive, Drift, AR, SES, External };

struct ValueForecasterSpec {
    ForecasterKind kind = ForecasterKind::AR;
    std::size_t ar_order = 2;
    double ses_smoothing = 0.5;
    std::filesystem::path external_path;
    bool refit_each_step = false;

    static ValueForecasterSpec of(ForecasterKind k) {
        ValueForecasterSpec s;
        s.kind = k;
        return s;
    }
    static ValueForecasterSpec naive() { return of(ForecasterKind::Naive); }
    static ValueForecasterSpec drift() { return of(ForecasterKind::Drift); }
    static ValueForecasterSpec ar(std::size_t p) {
        auto s = of(ForecasterKind::AR);
        s.ar_order = p;
        return s;
    }
    static ValueForecasterSpec ses(double lambda) {
        auto s = of(ForecasterKind::SES);
        s.ses_smoothing = lambda;
        return s;
    }
    static ValueForecasterSpec external(std::filesystem::path path) {
        auto s = of(ForecasterKind::External);
        s.external_path = std::move(path);
        return s;
    }
};

inline void validate(const ValueForecasterSpec& spec) {
    switch (spec.kind) {
    case ForecasterKind::AR:
        if (spec.ar_order == 0) throw ConfigError("AR order must be positive");
        break;
    case ForecasterKind::SES:
        if (!(spec.ses_smoothing > 0.0 && spec.ses_smoothing <= 1.0))
            throw ConfigError("SES smoothing must lie in (0, 1]");
        break;
    case ForecasterKind::External:
        if (spec.external_path.empty()) throw ConfigError("external forecaster needs a forecast file");
        break;
    default: break;
    }
}

inline std::string name(const ValueForecasterSpec& spec) {
    std::ostringstream os;
    switch (spec.kind) {
    case ForecasterKind::Naive: os << "Naive"; break;
    case ForecasterKind::Drift: os << "Drift"; break;
    case ForecasterKind::AR: os << "AR(" << spec.ar_order << ")"; break;
    case ForecasterKind::SES: os << "SES(" << spec.ses_smoothing << ")"; break;
    case ForecasterKind::External: os << "External"; break;
    }
    return os.str();
}

/// y_t = intercept + sum_i coefficients[i-1] * y_{t-i}
struct ARModel {
    std::vector<double> coefficients;
    double intercept = 0.0;
    bool degenerate = false;  // ridge fallback was used

    std::size_t order() const noexcept { return coefficients.size(); }

    double predict(std::span<const double> history) const {
        const std::size_t p = order();
        if (history.size() < p)
            throw DataError("AR(" + std::to_string(p) + ") needs " + std::to_string(p) + " past values, got " +
                            std::to_string(history.size()));
        double y = intercept;
        for (std::size_t i = 0; i < p; ++i) y += coefficients[i] * history[history.size() - 1 - i];
        return y;
    }
};

inline constexpr double kRidgePenalty = 1e-8;

/// Ordinary least squares with intercept over rows t = p .. n-1. Falls back to
/// ridge (penalty 1e-8) when the design matrix is rank deficient.
inline ARModel fit_ar(std::span<const double> train, std::size_t p) {
    if (p == 0) throw ConfigError("AR order must be positive");
    if (train.size() < p + 2)
        throw DataError("series too short for AR(" + std::to_string(p) + "): need at least " + std::to_string(p + 2) +
                        " values, got " + std::to_string(train.size()));
    const auto rows = static_cast<Eigen::Index>(train.size() - p);
    const auto cols = static_cast<Eigen::Index>(p + 1);
    Eigen::MatrixXd x(rows, cols);
    Eigen::VectorXd y(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t t = p + static_cast<std::size_t>(r);
        x(r, 0) = 1.0;
        for (std::size_t i = 1; i <= p; ++i) x(r, static_cast<Eigen::Index>(i)) = train[t - i];
        y(r) = train[t];
    }

    Eigen::VectorXd beta;
    bool degenerate = false;
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() == cols) {
        beta = qr.solve(y);
    } else {
        degenerate = true;
        const Eigen::MatrixXd gram =
            x.transpose() * x + kRidgePenalty * Eigen::MatrixXd::Identity(cols, cols);
        beta = gram.ldlt().solve(x.transpose() * y);
    }
    if (!beta.allFinite()) throw NumericError("AR fit is singular even after ridge fallback");

    ARModel model;
    model.intercept = beta(0);
    model.coefficients.assign(beta.data() + 1, beta.data() + cols);
    model.degenerate = degenerate;
    return model;
}

inline ARModel fit_ar(const TimeSeries& train, std::size_t p) { return fit_ar(train.values(), p); }

/// A value forecaster with parameters frozen at fit time.
struct FittedForecaster {
    ValueForecasterSpec spec;
    std::optional<ARModel> ar;
    double drift = 0.0;
    std::shared_ptr<const AlignedForecasts> external;

    /// Past values needed before the first forecast.
    std::size_t required_history() const {
        switch (spec.kind) {
        case ForecasterKind::AR: return spec.ar_order;
        default: return 1;
        }
    }
};

inline double mean_diff(std::span<const double> v) {
    if (v.size() < 2) throw DataError("series too short: drift needs at least 2 values");
    return (v.back() - v.front()) / static_cast<double>(v.size() - 1);
}

inline FittedForecaster fit_forecaster(const ValueForecasterSpec& spec, std::span<const double> train,
                                       std::shared_ptr<const AlignedForecasts> external = nullptr) {
    validate(spec);
    FittedForecaster f{spec, std::nullopt, 0.0, std::move(external)};
    switch (spec.kind) {
    case ForecasterKind::Naive: break;
    case ForecasterKind::Drift: f.drift = mean_diff(train); break;
    case ForecasterKind::AR: f.ar = fit_ar(train, spec.ar_order); break;
    case ForecasterKind::SES: break;
    case ForecasterKind::External:
        if (!f.external) throw ConfigError("external forecaster fitted without loaded forecasts");
        break;
    }
    return f;
}

inline double ses_level(std::span<const double> history, double lambda) {
    double level = history.front();
    for (std::size_t i = 1; i < history.size(); ++i) level = lambda * history[i] + (1.0 - lambda) * level;
    return level;
}

/// Forecast of y_t from history = y_0 .. y_{t-1} (the full prefix; t is its length).
inline double forecast_one(const FittedForecaster& model, std::span<const double> history) {
    if (history.size() < model.required_history())
        throw DataError("insufficient history: " + name(model.spec) + " needs " +
                        std::to_string(model.required_history()) + " values, got " + std::to_string(history.size()));
    double y = 0.0;
    switch (model.spec.kind) {
    case ForecasterKind::Naive: y = history.back(); break;
    case ForecasterKind::Drift: y = history.back() + model.drift; break;
    case ForecasterKind::AR: y = model.ar->predict(history); break;
    case ForecasterKind::SES: y = ses_level(history, model.spec.ses_smoothing); break;
    case ForecasterKind::External: y = model.external->at(history.size()); break;
    }
    if (!std::isfinite(y)) throw NumericError(name(model.spec) + " produced a non-finite forecast");
    return y;
}

/// One-step forecasts for t = first .. last (inclusive) of the full series,
/// each from the true history y_0 .. y_{t-1}. With refit_each_step the model
/// is refitted on that history first; otherwise parameters stay frozen.
inline std::vector<double> forecast_range(const FittedForecaster& model, std::span<const double> series,
                                          std::size_t first, std::size_t last) {
    if (last >= series.size() || first > last) throw DataError("forecast range out of bounds");
    std::vector<double> out;
    out.reserve(last - first + 1);
    const bool refit = model.spec.refit_each_step &&
                       (model.spec.kind == ForecasterKind::AR || model.spec.kind == ForecasterKind::Drift);
    const bool incremental_ses = model.spec.kind == ForecasterKind::SES && first >= 1;
    double level = 0.0;
    if (incremental_ses) level = ses_level(series.first(first), model.spec.ses_smoothing);
    for (std::size_t t = first; t <= last; ++t) {
        const auto history = series.first(t);
        if (refit) {
            out.push_back(forecast_one(fit_forecaster(model.spec, history, model.external), history));
        } else if (incremental_ses) {
            if (t > first) level = model.spec.ses_smoothing * series[t - 1] + (1.0 - model.spec.ses_smoothing) * level;
            out.push_back(level);
        } else {
            out.push_back(forecast_one(model, history));
        }
    }
    return out;
}

/// Walk-forward one-step forecasts over the test split; actual test values
/// are revealed one at a time. Forecasts are indexed like test.
inline std::vector<double> walk_forward_forecasts(const FittedForecaster& model, const TimeSeries& train,
                                                  const TimeSeries& test) {
    std::vector<double> full(train.values().begin(), train.values().end());
    full.insert(full.end(), test.values().begin(), test.values().end());
    return forecast_range(model, full, train.size(), full.size() - 1);
}

inline std::vector<double> walk_forward_forecasts(const ValueForecasterSpec& spec, const TimeSeries& train,
                                                  const TimeSeries& test,
                                                  std::shared_ptr<const AlignedForecasts> external = nullptr) {
    return walk_forward_forecasts(fit_forecaster(spec, train.values(), std::move(external)), train, test);
}

}  // namespace tats
