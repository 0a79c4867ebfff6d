#include <gtest/gtest.h>

#include <random>

#include "tats/classifiers.hpp"

using namespace tats;

namespace {

// Two Gaussian blobs: Up around (+2, +2), Down around (-2, -2).
FeatureMatrix blobs(std::size_t n, std::uint64_t seed, double spread = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, spread);
    FeatureMatrix fm;
    for (std::size_t i = 0; i < n; ++i) {
        const bool up = i % 2 == 0;
        const double c = up ? 2.0 : -2.0;
        fm.rows.push_back({c + z(rng), c + z(rng)});
        fm.labels.push_back(up ? TrendDirection::Up : TrendDirection::Down);
        fm.row_time_index.push_back(i);
    }
    return fm;
}

double accuracy_on(const TrendPredictor& p, const FeatureMatrix& fm) {
    std::vector<TrendDirection> pred;
    for (const auto& r : fm.rows) pred.push_back(predict_direction(p, r));
    return classification_accuracy(pred, fm.labels);
}

}  // namespace

TEST(Logistic, SeparatesBlobs) {
    const auto train = blobs(400, 1), test = blobs(400, 2);
    const auto p = fit_classifier(TrendPredictorSpec::logistic(), train);
    EXPECT_GE(accuracy_on(p, test), 0.95);
}

TEST(Logistic, LossIsMonotone) {
    const auto p = fit_classifier(TrendPredictorSpec::logistic(0.1, 300), blobs(200, 3, 2.5));
    const auto& loss = std::get<LogisticModel>(p.model).loss_history;
    ASSERT_GE(loss.size(), 2u);
    for (std::size_t i = 1; i < loss.size(); ++i) EXPECT_LE(loss[i], loss[i - 1] + 1e-12);
}

TEST(Logistic, UninformativeFeaturesTieGoesUp) {
    FeatureMatrix fm;
    fm.rows = {{1.0}, {1.0}, {1.0}, {1.0}};
    fm.labels = {TrendDirection::Up, TrendDirection::Down, TrendDirection::Down, TrendDirection::Up};
    const auto p = fit_classifier(TrendPredictorSpec::logistic(), fm);
    EXPECT_DOUBLE_EQ(score(p, std::vector<double>{1.0}), 0.5);
    EXPECT_EQ(predict_direction(p, std::vector<double>{1.0}), TrendDirection::Up);
    EXPECT_THROW(validate(TrendPredictorSpec::logistic(0.1, 0)), ConfigError);
}

TEST(Logistic, SingleClassIsAnError) {
    FeatureMatrix fm;
    fm.rows = {{1.0}, {2.0}, {3.0}};
    fm.labels = {TrendDirection::Up, TrendDirection::Up, TrendDirection::Up};
    EXPECT_THROW(fit_classifier(TrendPredictorSpec::logistic(), fm), DataError);
    EXPECT_THROW(fit_classifier(TrendPredictorSpec::gaussian_nb(), fm), DataError);
    EXPECT_NO_THROW(fit_classifier(TrendPredictorSpec::majority(), fm));
}

TEST(Classifiers, InputErrors) {
    EXPECT_THROW(fit_classifier(TrendPredictorSpec::logistic(), FeatureMatrix{}), DataError);
    FeatureMatrix bad;
    bad.rows = {{1.0}, {std::nan("")}};
    bad.labels = {TrendDirection::Up, TrendDirection::Down};
    EXPECT_THROW(fit_classifier(TrendPredictorSpec::knn(1), bad), DataError);
    EXPECT_THROW(fit_classifier(TrendPredictorSpec::oracle(0.7, 1), blobs(10, 1)), ConfigError);
    const auto p = fit_classifier(TrendPredictorSpec::knn(1), blobs(10, 1));
    EXPECT_THROW(score(p, std::vector<double>{1.0}), DataError);
}

TEST(GaussianNB, SeparatesBlobs) {
    const auto p = fit_classifier(TrendPredictorSpec::gaussian_nb(), blobs(300, 5));
    EXPECT_GE(accuracy_on(p, blobs(300, 6)), 0.95);
}

TEST(KNN, OneNeighbourMemorises) {
    const auto train = blobs(50, 7, 3.0);
    const auto p = fit_classifier(TrendPredictorSpec::knn(1), train);
    EXPECT_EQ(accuracy_on(p, train), 1.0);
}

TEST(KNN, DistanceTiesGoToEarlierRow) {
    FeatureMatrix fm;
    fm.rows = {{1.0}, {-1.0}};
    fm.labels = {TrendDirection::Down, TrendDirection::Up};
    EXPECT_EQ(predict_direction(fit_classifier(TrendPredictorSpec::knn(1), fm), std::vector<double>{0.0}),
              TrendDirection::Down);
    EXPECT_EQ(predict_direction(fit_classifier(TrendPredictorSpec::knn(2), fm), std::vector<double>{0.0}),
              TrendDirection::Up);  // split vote
}

TEST(Majority, PicksMostCommonLabel) {
    FeatureMatrix fm;
    fm.rows = {{0.0}, {0.0}, {0.0}};
    fm.labels = {TrendDirection::Down, TrendDirection::Down, TrendDirection::Up};
    EXPECT_EQ(predict_direction(fit_classifier(TrendPredictorSpec::majority(), fm), std::vector<double>{9.0}),
              TrendDirection::Down);
}

TEST(Oracle, HitsTargetAccuracy) {
    OracleStream s(0.75, 123);
    std::mt19937_64 truth_rng(9);
    std::size_t hits = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto truth = truth_rng() & 1 ? TrendDirection::Up : TrendDirection::Down;
        if (oracle_predict(truth, s) == truth) ++hits;
    }
    EXPECT_NEAR(hits / 10000.0, 0.75, 0.015);
    EXPECT_THROW(OracleStream(1.5, 1), ConfigError);
}

TEST(Oracle, SeedDeterminism) {
    OracleStream a(0.6, 5), b(0.6, 5);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a(TrendDirection::Up), b(TrendDirection::Up));
}

TEST(CrossValidation, ScoresAndTuning) {
    const auto fm = blobs(120, 8);
    EXPECT_GE(cross_validate(TrendPredictorSpec::knn(3), fm, 5), 0.9);
    const auto r = tune(default_grid(TrendPredictorSpec::knn(5)), fm, 5);
    EXPECT_EQ(r.scores.size(), 6u);
    EXPECT_GE(r.best_score, 0.9);
    EXPECT_THROW(cross_validate(TrendPredictorSpec::knn(3), blobs(4, 1), 5), DataError);
}

TEST(Accuracy, LengthMismatch) {
    const std::vector<TrendDirection> a{TrendDirection::Up}, b{TrendDirection::Up, TrendDirection::Down};
    EXPECT_THROW(classification_accuracy(a, b), DataError);
}
