#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tats/core.hpp"
#include "tats/engine.hpp"
#include "tats/metrics.hpp"

namespace tats {

/// p_db: probability the trend predictor is right. p_dt: probability the
/// value forecaster's implied direction is right. abs_gap: E|l_t - (dy_t)^2|.
struct TheoryEstimate {
    double p_db = 0.0;
    double p_dt = 0.0;
    double abs_gap = 0.0;
    double expected_loss_change = 0.0;
    double lower_bound = 0.0;
    bool condition_holds = false;
    std::size_t n_steps = 0;
};

namespace detail {
inline void require_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0, 1]");
}
inline void require_gap(double gap) {
    if (!(gap >= 0.0) || !std::isfinite(gap)) throw ConfigError("absolute loss gap must be finite and non-negative");
}
}  // namespace detail

/// Joint probabilities of S1..S4 when predictor and forecaster correctness
/// are independent.
inline std::array<double, 4> scenario_probabilities(double p_db, double p_dt) {
    detail::require_probability(p_db, "P(D^B)");
    detail::require_probability(p_dt, "P(D^T)");
    return {p_db * p_dt, (1.0 - p_db) * p_dt, (1.0 - p_db) * (1.0 - p_dt), p_db * (1.0 - p_dt)};
}

/// Mean of |l_t - (y_t - y_{t-1})^2| over the base forecaster's steps.
inline double abs_gap_from_trace(std::span<const ForecastPoint> base) {
    if (base.empty()) throw DataError("absolute loss gap of an empty trace");
    CompensatedSum s;
    for (const auto& p : base) {
        if (!p.previous) throw DataError("absolute loss gap needs the previous value at every step");
        const double loss = (p.forecast - p.actual) * (p.forecast - p.actual);
        const double naive = (p.actual - *p.previous) * (p.actual - *p.previous);
        s.add(std::abs(loss - naive));
    }
    return s.value() / static_cast<double>(base.size());
}

/// gap * (P(S4) - P(S2)): S4 steps gain the gap, S2 steps (worst case) lose it.
inline double expected_loss_change(double abs_gap, double p_db, double p_dt) {
    detail::require_gap(abs_gap);
    const auto p = scenario_probabilities(p_db, p_dt);
    return abs_gap * (p[3] - p[1]);
}

inline double lower_bound(double abs_gap, double p_db, double p_dt) {
    detail::require_gap(abs_gap);
    detail::require_probability(p_db, "P(D^B)");
    detail::require_probability(p_dt, "P(D^T)");
    return abs_gap * (p_db - p_dt);
}

inline TheoryEstimate make_estimate(double abs_gap, double p_db, double p_dt, std::size_t n_steps = 0) {
    TheoryEstimate e;
    e.p_db = p_db;
    e.p_dt = p_dt;
    e.abs_gap = abs_gap;
    e.expected_loss_change = expected_loss_change(abs_gap, p_db, p_dt);
    e.lower_bound = lower_bound(abs_gap, p_db, p_dt);
    e.condition_holds = p_db > p_dt;
    e.n_steps = n_steps;
    return e;
}

/// Estimates from a base trace and the predicted directions on the same
/// steps. P(D^T) is the TD accuracy of the base trace; P(D^B) is the
/// predictor's accuracy over the steps whose actual move is not flat.
inline TheoryEstimate estimate_theory(std::span<const ForecastPoint> base, std::span<const TrendDirection> directions) {
    if (base.size() != directions.size()) throw DataError("directions and base trace are misaligned");
    const double p_dt = td_accuracy(base);
    std::vector<TrendDirection> predicted, truth;
    for (std::size_t i = 0; i < base.size(); ++i) {
        const auto actual = strict(direction_of(base[i].actual - *base[i].previous));
        if (!actual) continue;
        predicted.push_back(directions[i]);
        truth.push_back(*actual);
    }
    if (truth.empty()) throw DataError("no step with a strict actual direction; P(D^B) undefined");
    const double p_db = classification_accuracy(predicted, truth);
    return make_estimate(abs_gap_from_trace(base), p_db, p_dt, base.size());
}

enum class TheorySplit { Train, Test };

/// Theory quantities for a fitted pipeline on its training steps (in-sample
/// one-step forecasts and predictions) or on its test steps.
inline TheoryEstimate estimate_theory(const TatsPipeline& pipeline, TheorySplit split) {
    if (split == TheorySplit::Test) {
        const auto trace = pipeline.run(1.0);
        return estimate_theory(trace.base_points(), pipeline.test_directions());
    }
    const IndexRange r = pipeline.train_range();
    const auto forecasts = pipeline.forecasts(r);
    const auto directions = pipeline.directions(r, forecasts, 0);
    const auto points = points_from(pipeline.dataset().target.values(), r.first, forecasts);
    return estimate_theory(points, directions);
}

}  // namespace tats
