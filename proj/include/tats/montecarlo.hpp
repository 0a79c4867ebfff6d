#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "tats/classifiers.hpp"
#include "tats/core.hpp"
#include "tats/engine.hpp"
#include "tats/metrics.hpp"
#include "tats/theory.hpp"

namespace tats::mc {

struct SimConfig {
    std::size_t n_steps = 2000;  // forecast steps per trial (walk has n_steps + 1 values)
    std::size_t n_trials = 200;
    double drift = 0.0;
    double volatility = 1.0;
    double p_dt = 0.52;
    double p_db = 0.75;
    double error_scale = 0.5;  // u: |forecast move| = u * |actual move|
    double alpha = 1e-6;
    std::uint64_t seed = 20240611;
};

inline void validate(const SimConfig& c) {
    if (c.n_steps < 10) throw ConfigError("n_steps must be at least 10");
    if (c.n_trials == 0) throw ConfigError("n_trials must be positive");
    if (!(c.volatility > 0.0) || !std::isfinite(c.volatility)) throw ConfigError("volatility must be positive");
    if (!std::isfinite(c.drift)) throw ConfigError("drift must be finite");
    if (!(c.p_dt > 0.0 && c.p_dt < 1.0)) throw ConfigError("p_dt must lie strictly inside (0, 1)");
    if (!(c.p_db > 0.0 && c.p_db < 1.0)) throw ConfigError("p_db must lie strictly inside (0, 1)");
    if (!(c.error_scale > 0.0 && c.error_scale < 2.0)) throw ConfigError("error scale must lie in (0, 2)");
    require_positive_alpha(c.alpha);
}

/// y_0 = 100, y_t = y_{t-1} + drift + volatility * z_t with z_t ~ N(0, 1).
inline TimeSeries gen_random_walk(std::size_t n, double drift, double volatility, std::uint64_t seed) {
    if (n < 2) throw ConfigError("random walk needs at least 2 values");
    if (!(volatility > 0.0)) throw ConfigError("volatility must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> y(n);
    y[0] = 100.0;
    for (std::size_t t = 1; t < n; ++t) y[t] = y[t - 1] + drift + volatility * z(rng);
    return TimeSeries(std::move(y));
}

/// Forecasts for t = 1 .. n-1 that move u * |dy_t| from y_{t-1}, in the
/// actual direction with probability p_dt and against it otherwise.
inline std::vector<double> synthetic_forecaster(const TimeSeries& series, double p_dt, double u, std::uint64_t seed) {
    if (!(p_dt >= 0.0 && p_dt <= 1.0)) throw ConfigError("p_dt must lie in [0, 1]");
    if (!(u > 0.0 && u < 2.0)) throw ConfigError("error scale must lie in (0, 2)");
    std::mt19937_64 rng(seed);
    std::vector<double> out;
    out.reserve(series.size() - 1);
    for (std::size_t t = 1; t < series.size(); ++t) {
        const double dy = series[t] - series[t - 1];
        if (dy == 0.0)
            throw DataError("zero delta at t=" + std::to_string(t) + "; regenerate the series with another seed");
        const double sign = dy > 0.0 ? 1.0 : -1.0;
        const bool right = static_cast<double>(rng() >> 11) * 0x1.0p-53 < p_dt;
        out.push_back(series[t - 1] + (right ? sign : -sign) * u * std::abs(dy));
    }
    return out;
}

struct TrialResult {
    double mse_base = 0.0;
    double mse_tats = 0.0;
    double reduction = 0.0;  // mse_base - mse_tats
    double p_db = 0.0;
    double p_dt = 0.0;
    double abs_gap = 0.0;
    double lower_bound = 0.0;
    ScenarioTally tally;
};

struct SimulationReport {
    SimConfig config;
    std::vector<TrialResult> trials;
    double mean_reduction = 0.0;
    double standard_error = 0.0;
    double fraction_positive = 0.0;
    double realized_p_db = 0.0;  // pooled over trials
    double realized_p_dt = 0.0;
    double realized_abs_gap = 0.0;
    double lower_bound = 0.0;                // from the pooled realized quantities
    double mean_excess_over_bound = 0.0;     // mean over trials of (reduction - trial bound)
    double excess_standard_error = 0.0;
    ScenarioTally tally;                     // pooled
};

/// Runs one trial: walk, synthetic forecaster and oracle use independent sub-seeds.
inline TrialResult run_trial(const SimConfig& c, std::size_t trial) {
    const std::uint64_t base = sub_seed(c.seed, trial);
    std::uint64_t walk_seed = sub_seed(base, 0);
    TimeSeries walk = gen_random_walk(c.n_steps + 1, c.drift, c.volatility, walk_seed);
    for (std::uint64_t attempt = 1; [&] {
             const auto d = diff(walk);
             return std::find(d.begin(), d.end(), 0.0) != d.end();
         }();
         ++attempt) {
        walk_seed = sub_seed(base, 100 + attempt);
        walk = gen_random_walk(c.n_steps + 1, c.drift, c.volatility, walk_seed);
    }
    const auto forecasts = synthetic_forecaster(walk, c.p_dt, c.error_scale, sub_seed(base, 1));
    OracleStream oracle(c.p_db, sub_seed(base, 2));
    std::vector<TrendDirection> directions;
    directions.reserve(c.n_steps);
    for (std::size_t t = 1; t < walk.size(); ++t)
        directions.push_back(oracle(*strict(direction_of(walk[t] - walk[t - 1]))));

    const ForecastTrace trace = build_trace(walk.values(), 1, forecasts, directions, c.alpha);
    const auto base_pts = trace.base_points();
    const TheoryEstimate est = estimate_theory(base_pts, directions);
    TrialResult r;
    r.mse_base = mse(base_pts);
    r.mse_tats = mse(trace.adjusted_points());
    r.reduction = r.mse_base - r.mse_tats;
    r.p_db = est.p_db;
    r.p_dt = est.p_dt;
    r.abs_gap = est.abs_gap;
    r.lower_bound = est.lower_bound;
    r.tally = trace.tally();
    return r;
}

namespace detail {
inline std::pair<double, double> mean_and_se(std::span<const double> v) {
    CompensatedSum s;
    for (double x : v) s.add(x);
    const double mean = s.value() / static_cast<double>(v.size());
    if (v.size() < 2) return {mean, 0.0};
    CompensatedSum sq;
    for (double x : v) sq.add((x - mean) * (x - mean));
    const double sd = std::sqrt(sq.value() / static_cast<double>(v.size() - 1));
    return {mean, sd / std::sqrt(static_cast<double>(v.size()))};
}
}  // namespace detail

/// Monte-Carlo check of the error-reduction condition and its lower bound.
/// Trials may run on several threads; aggregation is in trial order, so the
/// report does not depend on `jobs`.
inline SimulationReport simulate_reduction(const SimConfig& config, std::size_t jobs = 1) {
    validate(config);
    SimulationReport rep;
    rep.config = config;
    rep.trials.resize(config.n_trials);
    parallel_for(config.n_trials, jobs, [&](std::size_t i) { rep.trials[i] = run_trial(config, i); });

    std::vector<double> reductions, excess;
    CompensatedSum p_db, p_dt, gap;
    std::size_t positive = 0;
    for (const auto& t : rep.trials) {
        reductions.push_back(t.reduction);
        excess.push_back(t.reduction - t.lower_bound);
        p_db.add(t.p_db);
        p_dt.add(t.p_dt);
        gap.add(t.abs_gap);
        if (t.reduction > 0.0) ++positive;
        for (std::size_t k = 0; k < t.tally.counts.size(); ++k) rep.tally.counts[k] += t.tally.counts[k];
    }
    const auto n = static_cast<double>(config.n_trials);
    std::tie(rep.mean_reduction, rep.standard_error) = detail::mean_and_se(reductions);
    std::tie(rep.mean_excess_over_bound, rep.excess_standard_error) = detail::mean_and_se(excess);
    rep.fraction_positive = static_cast<double>(positive) / n;
    rep.realized_p_db = p_db.value() / n;
    rep.realized_p_dt = p_dt.value() / n;
    rep.realized_abs_gap = gap.value() / n;
    rep.lower_bound = lower_bound(rep.realized_abs_gap, rep.realized_p_db, rep.realized_p_dt);
    return rep;
}

struct ScenarioCheck {
    Scenario scenario = Scenario::S1;
    double observed = 0.0;   // pooled frequency
    double expected = 0.0;   // product of pooled realized accuracies
    double three_sigma = 0.0;
    bool within() const { return std::abs(observed - expected) <= three_sigma; }
};

/// Compares pooled scenario frequencies with the independence products of the
/// pooled realized accuracies, using 3-sigma multinomial cell bounds.
inline std::array<ScenarioCheck, 4> scenario_frequency_check(const SimulationReport& rep) {
    const auto expected = scenario_probabilities(rep.realized_p_db, rep.realized_p_dt);
    const auto n = static_cast<double>(rep.tally.total());
    std::array<ScenarioCheck, 4> out;
    for (std::size_t k = 0; k < 4; ++k) {
        const auto s = static_cast<Scenario>(k);
        out[k].scenario = s;
        out[k].observed = static_cast<double>(rep.tally[s]) / n;
        out[k].expected = expected[k];
        out[k].three_sigma = 3.0 * std::sqrt(expected[k] * (1.0 - expected[k]) / n);
    }
    return out;
}

}  // namespace tats::mc
