#include <gtest/gtest.h>

#include "tats/montecarlo.hpp"

using namespace tats;

TEST(RandomWalk, DeterministicAndStartsAt100) {
    const auto a = mc::gen_random_walk(500, 0.0, 1.0, 9), b = mc::gen_random_walk(500, 0.0, 1.0, 9);
    EXPECT_EQ(a.values()[0], 100.0);
    EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
    const auto c = mc::gen_random_walk(500, 0.0, 1.0, 10);
    EXPECT_NE(a.back(), c.back());
}

TEST(RandomWalk, DriftShiftsEveryStep) {
    const auto flat = mc::gen_random_walk(100, 0.0, 1.0, 3), drifted = mc::gen_random_walk(100, 0.5, 1.0, 3);
    for (std::size_t t = 0; t < 100; ++t) EXPECT_NEAR(drifted[t] - flat[t], 0.5 * static_cast<double>(t), 1e-9);
}

TEST(RandomWalk, Errors) {
    EXPECT_THROW(mc::gen_random_walk(1, 0.0, 1.0, 1), ConfigError);
    EXPECT_THROW(mc::gen_random_walk(10, 0.0, 0.0, 1), ConfigError);
}

TEST(SyntheticForecaster, HitsTargetAccuracyAndScale) {
    const auto y = mc::gen_random_walk(20001, 0.0, 1.0, 4);
    const auto f = mc::synthetic_forecaster(y, 0.52, 0.5, 5);
    std::size_t hits = 0;
    for (std::size_t t = 1; t < y.size(); ++t) {
        const double dy = y[t] - y[t - 1], move = f[t - 1] - y[t - 1];
        EXPECT_NEAR(std::abs(move), 0.5 * std::abs(dy), 1e-9);
        if (move * dy > 0) ++hits;
    }
    EXPECT_NEAR(hits / 20000.0, 0.52, 0.015);
}

TEST(SyntheticForecaster, ZeroDeltaIsAnError) {
    EXPECT_THROW(mc::synthetic_forecaster(TimeSeries({1, 2, 2, 3}), 0.5, 0.5, 1), DataError);
}

TEST(Trial, S4HelpsS2Hurts) {
    mc::SimConfig c;
    c.n_steps = 500;
    const auto r = mc::run_trial(c, 0);
    EXPECT_EQ(r.tally.total(), 500u);
    EXPECT_EQ(r.tally[Scenario::Undefined], 0u);
    EXPECT_NEAR(r.reduction, r.mse_base - r.mse_tats, 1e-12);
    EXPECT_EQ(mc::run_trial(c, 0).mse_tats, r.mse_tats);
}

TEST(Simulation, ParallelMatchesSerialAndConditionHolds) {
    mc::SimConfig c;
    c.n_steps = 400;
    c.n_trials = 30;
    const auto serial = mc::simulate_reduction(c, 1), parallel = mc::simulate_reduction(c, 4);
    EXPECT_EQ(serial.mean_reduction, parallel.mean_reduction);
    EXPECT_GT(serial.mean_reduction, 0.0);
    EXPECT_GT(serial.realized_p_db, serial.realized_p_dt);
}

TEST(Simulation, ConfigValidation) {
    mc::SimConfig c;
    c.p_db = 1.0;
    EXPECT_THROW(mc::simulate_reduction(c), ConfigError);
    c = {};
    c.error_scale = 2.0;
    EXPECT_THROW(mc::simulate_reduction(c), ConfigError);
    c = {};
    c.n_trials = 0;
    EXPECT_THROW(mc::simulate_reduction(c), ConfigError);
}
