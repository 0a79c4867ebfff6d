#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "tats/forecasters.hpp"

using namespace tats;

namespace {

// Normal equations solved by Gaussian elimination with partial pivoting;
// returns [intercept, phi_1, ..., phi_p].
std::vector<double> ols_oracle(const std::vector<double>& y, std::size_t p) {
    const std::size_t m = p + 1;
    std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
    for (std::size_t t = p; t < y.size(); ++t) {
        std::vector<double> x{1.0};
        for (std::size_t i = 1; i <= p; ++i) x.push_back(y[t - i]);
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t c = 0; c < m; ++c) a[r][c] += x[r] * x[c];
            a[r][m] += x[r] * y[t];
        }
    }
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        for (std::size_t r = col + 1; r < m; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::vector<double> beta(m);
    for (std::size_t r = m; r-- > 0;) {
        double s = a[r][m];
        for (std::size_t c = r + 1; c < m; ++c) s -= a[r][c] * beta[c];
        beta[r] = s / a[r][r];
    }
    return beta;
}

std::vector<double> ar_series(std::size_t n, double c, std::vector<double> phi, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> e(0.0, sigma);
    std::vector<double> y(phi.size(), 0.0);
    while (y.size() < n) {
        double v = c;
        for (std::size_t i = 0; i < phi.size(); ++i) v += phi[i] * y[y.size() - 1 - i];
        y.push_back(v + e(rng));
    }
    return y;
}

}  // namespace

TEST(FitAR, MatchesIndependentNormalEquations) {
    for (std::size_t p : {1u, 2u, 3u}) {
        const auto y = ar_series(400, 0.3, {0.5, -0.2, 0.1}, 1.0, 100 + p);
        const auto model = fit_ar(y, p);
        const auto beta = ols_oracle(y, p);
        EXPECT_NEAR(model.intercept, beta[0], 1e-8);
        for (std::size_t i = 0; i < p; ++i) EXPECT_NEAR(model.coefficients[i], beta[i + 1], 1e-8);
        EXPECT_FALSE(model.degenerate);
    }
}

TEST(FitAR, ResidualsOrthogonalToRegressors) {
    const auto y = ar_series(500, 1.0, {0.4, 0.3}, 0.5, 9);
    const auto m = fit_ar(y, 2);
    double s0 = 0, s1 = 0, s2 = 0;
    for (std::size_t t = 2; t < y.size(); ++t) {
        const double r = y[t] - m.predict(std::span<const double>(y).first(t));
        s0 += r;
        s1 += r * y[t - 1];
        s2 += r * y[t - 2];
    }
    EXPECT_NEAR(s0, 0.0, 1e-6);
    EXPECT_NEAR(s1, 0.0, 1e-6);
    EXPECT_NEAR(s2, 0.0, 1e-6);
}

TEST(FitAR, RecoversAR1) {
    const auto y = ar_series(1000, 0.0, {0.6}, 0.1, 42);
    const auto m = fit_ar(y, 1);
    EXPECT_GE(m.coefficients[0], 0.5);
    EXPECT_LE(m.coefficients[0], 0.7);
}

TEST(FitAR, NoiselessExact) {
    std::vector<double> shifted(60);
    shifted[0] = 1.0;
    shifted[1] = -2.0;
    for (std::size_t t = 2; t < shifted.size(); ++t) shifted[t] = 0.5 + 0.7 * shifted[t - 1] - 0.25 * shifted[t - 2];
    const auto m = fit_ar(shifted, 2);
    EXPECT_NEAR(m.intercept, 0.5, 1e-9);
    EXPECT_NEAR(m.coefficients[0], 0.7, 1e-9);
    EXPECT_NEAR(m.coefficients[1], -0.25, 1e-9);
}

TEST(FitAR, ConstantSeriesIsDegenerateButFinite) {
    const std::vector<double> y(20, 3.0);
    const auto m = fit_ar(y, 2);
    EXPECT_TRUE(m.degenerate);
    EXPECT_NEAR(m.predict(y), 3.0, 1e-6);
}

TEST(FitAR, Errors) {
    EXPECT_THROW(fit_ar(std::vector<double>{1, 2, 3}, 2), DataError);
    EXPECT_THROW(fit_ar(std::vector<double>{1, 2, 3, 4}, 0), ConfigError);
    EXPECT_THROW(fit_ar(std::vector<double>{1, 2, 3, 4}, 1).predict(std::vector<double>{}), DataError);
}

TEST(Forecasters, NaiveWalkForward) {
    const TimeSeries train({7, 5}), test({9, 7, 8});
    EXPECT_EQ(walk_forward_forecasts(ValueForecasterSpec::naive(), train, test), (std::vector<double>{5, 9, 7}));
}

TEST(Forecasters, DriftUsesTrainingMeanStep) {
    const TimeSeries train({1, 3, 5, 7}), test({8, 10});
    EXPECT_EQ(walk_forward_forecasts(ValueForecasterSpec::drift(), train, test), (std::vector<double>{9, 10}));
}

TEST(Forecasters, AR2FirstStepByHand) {
    const std::vector<double> y{1, 2, 4, 3, 5, 4, 6, 5, 7, 6, 8, 7};
    const TimeSeries train(std::vector<double>(y.begin(), y.begin() + 10));
    const TimeSeries test(std::vector<double>(y.begin() + 10, y.end()));
    const auto beta = ols_oracle(std::vector<double>(y.begin(), y.begin() + 10), 2);
    const auto fc = walk_forward_forecasts(ValueForecasterSpec::ar(2), train, test);
    EXPECT_NEAR(fc[0], beta[0] + beta[1] * 6 + beta[2] * 7, 1e-9);
    EXPECT_NEAR(fc[1], beta[0] + beta[1] * 8 + beta[2] * 6, 1e-9);
}

TEST(Forecasters, SesIncrementalMatchesDirect) {
    const auto y = tats::testing::random_walk(40, 3);
    const auto f = fit_forecaster(ValueForecasterSpec::ses(0.3), std::span<const double>(y).first(20));
    const auto range = forecast_range(f, y, 20, 39);
    for (std::size_t t = 20; t < 40; ++t)
        EXPECT_NEAR(range[t - 20], ses_level(std::span<const double>(y).first(t), 0.3), 1e-12);
}

TEST(Forecasters, RefitEachStepDiffersFromFrozen) {
    const auto y = tats::testing::random_walk(80, 4);
    auto spec = ValueForecasterSpec::ar(1);
    const TimeSeries train(std::vector<double>(y.begin(), y.begin() + 40));
    const TimeSeries test(std::vector<double>(y.begin() + 40, y.end()));
    const auto frozen = walk_forward_forecasts(spec, train, test);
    spec.refit_each_step = true;
    const auto refit = walk_forward_forecasts(spec, train, test);
    EXPECT_EQ(frozen[0], refit[0]);
    EXPECT_NE(frozen.back(), refit.back());
}

TEST(Forecasters, ExternalLookup) {
    auto ext = std::make_shared<AlignedForecasts>();
    ext->by_index = {{2, 10.0}, {3, 11.0}};
    const auto f = fit_forecaster(ValueForecasterSpec::external("x.csv"), std::vector<double>{1, 2}, ext);
    EXPECT_EQ(forecast_range(f, std::vector<double>{1, 2, 3, 4}, 2, 3), (std::vector<double>{10.0, 11.0}));
    EXPECT_THROW(forecast_range(f, std::vector<double>{1, 2, 3, 4, 5}, 2, 4), DataError);
}

TEST(Forecasters, SpecValidation) {
    EXPECT_THROW(validate(ValueForecasterSpec::ses(1.5)), ConfigError);
    EXPECT_THROW(validate(ValueForecasterSpec::ar(0)), ConfigError);
    EXPECT_EQ(name(ValueForecasterSpec::ar(3)), "AR(3)");
}
