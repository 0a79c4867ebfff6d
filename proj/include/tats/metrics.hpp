#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tats/core.hpp"

namespace tats {

/// One evaluated forecast. previous is y_{t-1}; it is absent for the first
/// observation of a series, which still counts towards error metrics.
struct ForecastPoint {
    std::optional<double> previous;
    double actual = 0.0;
    double forecast = 0.0;
};

struct EvalReport {
    double tda = 0.0;
    double mse = 0.0;
    double mae = 0.0;
    std::optional<double> mape;  // percent; absent when an actual is zero
    std::size_t n_steps = 0;
    std::optional<double> diff;
    std::optional<double> r_diff;
};

namespace detail {
inline void require_nonempty(std::span<const ForecastPoint> points, const char* what) {
    if (points.empty()) throw DataError(std::string(what) + " of an empty trace");
}
}  // namespace detail

/// Fraction of steps whose forecast moves strictly in the same direction as
/// the actual value, relative to y_{t-1}. Zero products count as misses.
inline double td_accuracy(std::span<const ForecastPoint> points) {
    detail::require_nonempty(points, "TD accuracy");
    std::size_t hits = 0;
    for (const auto& p : points) {
        if (!p.previous) throw DataError("TD accuracy needs the previous value at every step");
        if ((p.forecast - *p.previous) * (p.actual - *p.previous) > 0.0) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(points.size());
}

inline double mse(std::span<const ForecastPoint> points) {
    detail::require_nonempty(points, "MSE");
    CompensatedSum s;
    for (const auto& p : points) s.add((p.forecast - p.actual) * (p.forecast - p.actual));
    return s.value() / static_cast<double>(points.size());
}

inline double mae(std::span<const ForecastPoint> points) {
    detail::require_nonempty(points, "MAE");
    CompensatedSum s;
    for (const auto& p : points) s.add(std::abs(p.forecast - p.actual));
    return s.value() / static_cast<double>(points.size());
}

/// Mean absolute percentage error in percent.
inline double mape(std::span<const ForecastPoint> points) {
    detail::require_nonempty(points, "MAPE");
    CompensatedSum s;
    for (const auto& p : points) {
        if (p.actual == 0.0) throw NumericError("MAPE undefined at zero actual");
        s.add(std::abs(p.forecast - p.actual) / std::abs(p.actual));
    }
    return 100.0 * s.value() / static_cast<double>(points.size());
}

inline EvalReport evaluate(std::span<const ForecastPoint> points) {
    EvalReport r;
    r.tda = td_accuracy(points);
    r.mse = mse(points);
    r.mae = mae(points);
    try {
        r.mape = mape(points);
    } catch (const NumericError&) {
        r.mape = std::nullopt;
    }
    r.n_steps = points.size();
    return r;
}

struct DiffResult {
    double diff = 0.0;
    double r_diff = 0.0;
};

/// Improvement of candidate over base: diff = base.mse - candidate.mse, r_diff = diff / base.mse.
inline DiffResult diff_rdiff(const EvalReport& base, const EvalReport& candidate) {
    if (!(base.mse > 0.0)) throw NumericError("R-Diff undefined: base MSE is zero");
    if (base.n_steps != candidate.n_steps)
        throw DataError("Diff needs reports over the same steps (" + std::to_string(base.n_steps) + " vs " +
                        std::to_string(candidate.n_steps) + ")");
    const double d = base.mse - candidate.mse;
    return {d, d / base.mse};
}

inline void attach_diff(const EvalReport& base, EvalReport& candidate) {
    const auto [d, r] = diff_rdiff(base, candidate);
    candidate.diff = d;
    candidate.r_diff = r;
}

struct TrendAwareLossConfig {
    double gamma = 0.0;  // penalty per wrong-direction step
};

/// Sum of squared errors plus gamma for every step that moves against the
/// actual direction. Steps without a previous value or with a zero product
/// are not penalised.
inline double trend_aware_loss(std::span<const ForecastPoint> points, TrendAwareLossConfig config) {
    detail::require_nonempty(points, "trend-aware loss");
    if (!(config.gamma >= 0.0)) throw ConfigError("trend-aware loss gamma must be non-negative");
    CompensatedSum sse;
    std::size_t wrong = 0;
    for (const auto& p : points) {
        sse.add((p.forecast - p.actual) * (p.forecast - p.actual));
        if (p.previous && (p.forecast - *p.previous) * (p.actual - *p.previous) < 0.0) ++wrong;
    }
    return sse.value() + config.gamma * static_cast<double>(wrong);
}

/// Builds points for t = first .. first + forecasts.size() - 1 of a full series.
inline std::vector<ForecastPoint> points_from(std::span<const double> series, std::size_t first,
                                              std::span<const double> forecasts) {
    if (first + forecasts.size() > series.size()) throw DataError("forecasts run past the end of the series");
    std::vector<ForecastPoint> out;
    out.reserve(forecasts.size());
    for (std::size_t k = 0; k < forecasts.size(); ++k) {
        const std::size_t t = first + k;
        ForecastPoint p;
        if (t > 0) p.previous = series[t - 1];
        p.actual = series[t];
        p.forecast = forecasts[k];
        out.push_back(p);
    }
    return out;
}

}  // namespace tats
