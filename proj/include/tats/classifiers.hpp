#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "tats/core.hpp"
#include "tats/ingest.hpp"

namespace tats {

/// Feature-based kinds are fitted on a FeatureMatrix. Oracle, External and
/// Echo are direction sources resolved by the pipeline instead.
enum class PredictorKind { Majority, Logistic, GaussianNB, KNN, Oracle, External, Echo };

struct TrendPredictorSpec {
    PredictorKind kind = PredictorKind::Logistic;
    double learning_rate = 0.1;
    std::size_t iterations = 1000;
    std::size_t knn_k = 5;
    bool knn_standardize = false;
    double oracle_accuracy = 0.75;
    std::uint64_t seed = 0;
    std::filesystem::path external_path;

    static TrendPredictorSpec of(PredictorKind k) {
        TrendPredictorSpec s;
        s.kind = k;
        return s;
    }
    static TrendPredictorSpec majority() { return of(PredictorKind::Majority); }
    static TrendPredictorSpec logistic(double lr = 0.1, std::size_t iters = 1000) {
        auto s = of(PredictorKind::Logistic);
        s.learning_rate = lr;
        s.iterations = iters;
        return s;
    }
    static TrendPredictorSpec gaussian_nb() { return of(PredictorKind::GaussianNB); }
    static TrendPredictorSpec knn(std::size_t k) {
        auto s = of(PredictorKind::KNN);
        s.knn_k = k;
        return s;
    }
    static TrendPredictorSpec oracle(double p, std::uint64_t seed) {
        auto s = of(PredictorKind::Oracle);
        s.oracle_accuracy = p;
        s.seed = seed;
        return s;
    }
    static TrendPredictorSpec echo() { return of(PredictorKind::Echo); }
    static TrendPredictorSpec external(std::filesystem::path path) {
        auto s = of(PredictorKind::External);
        s.external_path = std::move(path);
        return s;
    }
};

inline bool is_feature_based(PredictorKind k) {
    return k == PredictorKind::Majority || k == PredictorKind::Logistic || k == PredictorKind::GaussianNB ||
           k == PredictorKind::KNN;
}

inline void validate(const TrendPredictorSpec& spec) {
    switch (spec.kind) {
    case PredictorKind::Logistic:
        if (!(spec.learning_rate > 0.0) || !std::isfinite(spec.learning_rate))
            throw ConfigError("logistic learning rate must be positive");
        if (spec.iterations == 0) throw ConfigError("logistic iterations must be positive");
        break;
    case PredictorKind::KNN:
        if (spec.knn_k == 0) throw ConfigError("KNN k must be positive");
        break;
    case PredictorKind::Oracle:
        if (!(spec.oracle_accuracy >= 0.0 && spec.oracle_accuracy <= 1.0))
            throw ConfigError("oracle accuracy must lie in [0, 1]");
        break;
    case PredictorKind::External:
        if (spec.external_path.empty()) throw ConfigError("external trend predictor needs a direction file");
        break;
    default: break;
    }
}

inline std::string name(const TrendPredictorSpec& spec) {
    std::ostringstream os;
    switch (spec.kind) {
    case PredictorKind::Majority: os << "Majority"; break;
    case PredictorKind::Logistic: os << "Logistic"; break;
    case PredictorKind::GaussianNB: os << "GaussianNB"; break;
    case PredictorKind::KNN: os << "KNN(" << spec.knn_k << ")"; break;
    case PredictorKind::Oracle: os << "Oracle(" << spec.oracle_accuracy << ")"; break;
    case PredictorKind::External: os << "External"; break;
    case PredictorKind::Echo: os << "Echo"; break;
    }
    return os.str();
}

// Per-feature affine map to zero mean / unit variance, from training rows only.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const std::vector<std::vector<double>>& rows) {
        const std::size_t d = rows.front().size();
        Standardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
        const auto n = static_cast<double>(rows.size());
        for (std::size_t j = 0; j < d; ++j) {
            CompensatedSum sum;
            for (const auto& r : rows) sum.add(r[j]);
            s.mean[j] = sum.value() / n;
            CompensatedSum sq;
            for (const auto& r : rows) sq.add((r[j] - s.mean[j]) * (r[j] - s.mean[j]));
            const double sd = std::sqrt(sq.value() / n);
            s.scale[j] = sd > 1e-12 ? sd : 1.0;
        }
        return s;
    }

    std::vector<double> apply(std::span<const double> row) const {
        std::vector<double> z(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) z[j] = (row[j] - mean[j]) / scale[j];
        return z;
    }
};

struct MajorityModel {
    TrendDirection label = TrendDirection::Up;
};

struct LogisticModel {
    Standardizer standardizer;
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<double> loss_history;  // mean log-loss before each update, then final
};

struct GaussianNBModel {
    static constexpr double kVarianceFloor = 1e-9;
    double log_prior_up = 0.0;
    double log_prior_down = 0.0;
    std::vector<double> mean_up, var_up, mean_down, var_down;
};

struct KNNModel {
    std::size_t k = 1;
    std::optional<Standardizer> standardizer;
    std::vector<std::vector<double>> rows;
    std::vector<TrendDirection> labels;
};

using PredictorModel = std::variant<MajorityModel, LogisticModel, GaussianNBModel, KNNModel>;

struct TrendPredictor {
    TrendPredictorSpec spec;
    std::size_t dimension = 0;
    PredictorModel model;
};

namespace detail {

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double logistic_loss(const std::vector<std::vector<double>>& z, const std::vector<double>& y,
                            const std::vector<double>& w, double b) {
    CompensatedSum loss;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double s = dot(w, z[i]) + b;
        // y log(1+e^-s) + (1-y) log(1+e^s)
        loss.add(y[i] > 0.5 ? softplus(-s) : softplus(s));
    }
    return loss.value() / static_cast<double>(z.size());
}

inline LogisticModel fit_logistic(const FeatureMatrix& fm, double lr, std::size_t iterations) {
    LogisticModel m;
    m.standardizer = Standardizer::fit(fm.rows);
    std::vector<std::vector<double>> z;
    z.reserve(fm.size());
    for (const auto& r : fm.rows) z.push_back(m.standardizer.apply(r));
    std::vector<double> y(fm.size());
    for (std::size_t i = 0; i < fm.size(); ++i) y[i] = fm.labels[i] == TrendDirection::Up ? 1.0 : 0.0;

    const std::size_t d = fm.dimension();
    const auto n = static_cast<double>(fm.size());
    m.weights.assign(d, 0.0);
    m.loss_history.reserve(iterations + 1);
    std::vector<double> grad(d);
    for (std::size_t it = 0; it < iterations; ++it) {
        m.loss_history.push_back(logistic_loss(z, y, m.weights, m.bias));
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double r = sigmoid(dot(m.weights, z[i]) + m.bias) - y[i];
            for (std::size_t j = 0; j < d; ++j) grad[j] += r * z[i][j];
            grad_b += r;
        }
        for (std::size_t j = 0; j < d; ++j) m.weights[j] -= lr * grad[j] / n;
        m.bias -= lr * grad_b / n;
    }
    m.loss_history.push_back(logistic_loss(z, y, m.weights, m.bias));
    return m;
}

inline GaussianNBModel fit_gnb(const FeatureMatrix& fm) {
    const std::size_t d = fm.dimension();
    GaussianNBModel m;
    m.mean_up.assign(d, 0.0);
    m.mean_down.assign(d, 0.0);
    m.var_up.assign(d, 0.0);
    m.var_down.assign(d, 0.0);
    std::size_t n_up = 0;
    for (std::size_t i = 0; i < fm.size(); ++i) {
        auto& mean = fm.labels[i] == TrendDirection::Up ? m.mean_up : m.mean_down;
        if (fm.labels[i] == TrendDirection::Up) ++n_up;
        for (std::size_t j = 0; j < d; ++j) mean[j] += fm.rows[i][j];
    }
    const std::size_t n_down = fm.size() - n_up;
    for (std::size_t j = 0; j < d; ++j) {
        m.mean_up[j] /= static_cast<double>(n_up);
        m.mean_down[j] /= static_cast<double>(n_down);
    }
    for (std::size_t i = 0; i < fm.size(); ++i) {
        const bool up = fm.labels[i] == TrendDirection::Up;
        auto& var = up ? m.var_up : m.var_down;
        const auto& mean = up ? m.mean_up : m.mean_down;
        for (std::size_t j = 0; j < d; ++j) var[j] += (fm.rows[i][j] - mean[j]) * (fm.rows[i][j] - mean[j]);
    }
    for (std::size_t j = 0; j < d; ++j) {
        m.var_up[j] = std::max(m.var_up[j] / static_cast<double>(n_up), GaussianNBModel::kVarianceFloor);
        m.var_down[j] = std::max(m.var_down[j] / static_cast<double>(n_down), GaussianNBModel::kVarianceFloor);
    }
    const auto n = static_cast<double>(fm.size());
    m.log_prior_up = std::log(static_cast<double>(n_up) / n);
    m.log_prior_down = std::log(static_cast<double>(n_down) / n);
    return m;
}

inline double gaussian_log_likelihood(std::span<const double> x, const std::vector<double>& mean,
                                      const std::vector<double>& var) {
    constexpr double log_2pi = 1.8378770664093453;
    double ll = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j)
        ll -= 0.5 * (log_2pi + std::log(var[j]) + (x[j] - mean[j]) * (x[j] - mean[j]) / var[j]);
    return ll;
}

inline void require_two_classes(const FeatureMatrix& fm, const TrendPredictorSpec& spec) {
    const bool has_up = std::find(fm.labels.begin(), fm.labels.end(), TrendDirection::Up) != fm.labels.end();
    const bool has_down = std::find(fm.labels.begin(), fm.labels.end(), TrendDirection::Down) != fm.labels.end();
    if (!has_up || !has_down)
        throw DataError(name(spec) + " cannot be trained on a single class");
}

}  // namespace detail

inline TrendPredictor fit_classifier(const TrendPredictorSpec& spec, const FeatureMatrix& fm) {
    validate(spec);
    if (!is_feature_based(spec.kind))
        throw ConfigError(name(spec) + " is not trained on features");
    if (fm.size() == 0) throw DataError("cannot train " + name(spec) + " on an empty feature matrix");
    const std::size_t d = fm.dimension();
    for (std::size_t i = 0; i < fm.size(); ++i) {
        if (fm.rows[i].size() != d) throw DataError("feature rows have inconsistent dimension");
        for (double v : fm.rows[i])
            if (!std::isfinite(v)) throw DataError("non-finite feature in row " + std::to_string(i));
    }
    if (fm.labels.size() != fm.size()) throw DataError("feature rows and labels differ in length");

    TrendPredictor p{spec, d, MajorityModel{}};
    switch (spec.kind) {
    case PredictorKind::Majority: {
        const auto ups = std::count(fm.labels.begin(), fm.labels.end(), TrendDirection::Up);
        const auto downs = static_cast<std::ptrdiff_t>(fm.size()) - ups;
        p.model = MajorityModel{ups >= downs ? TrendDirection::Up : TrendDirection::Down};
        break;
    }
    case PredictorKind::Logistic:
        if (fm.size() < 2) throw DataError("Logistic needs at least 2 training rows");
        detail::require_two_classes(fm, spec);
        p.model = detail::fit_logistic(fm, spec.learning_rate, spec.iterations);
        break;
    case PredictorKind::GaussianNB:
        if (fm.size() < 2) throw DataError("GaussianNB needs at least 2 training rows");
        detail::require_two_classes(fm, spec);
        p.model = detail::fit_gnb(fm);
        break;
    case PredictorKind::KNN: {
        KNNModel m;
        m.k = std::min(spec.knn_k, fm.size());
        m.labels = fm.labels;
        if (spec.knn_standardize) {
            m.standardizer = Standardizer::fit(fm.rows);
            for (const auto& r : fm.rows) m.rows.push_back(m.standardizer->apply(r));
        } else {
            m.rows = fm.rows;
        }
        p.model = std::move(m);
        break;
    }
    default: break;
    }
    return p;
}

/// Probability-like score of Up in [0, 1].
inline double score(const TrendPredictor& p, std::span<const double> row) {
    if (row.size() != p.dimension)
        throw DataError("feature dimension mismatch: expected " + std::to_string(p.dimension) + ", got " +
                        std::to_string(row.size()));
    struct Visitor {
        std::span<const double> row;
        double operator()(const MajorityModel& m) const { return m.label == TrendDirection::Up ? 1.0 : 0.0; }
        double operator()(const LogisticModel& m) const {
            const auto z = m.standardizer.apply(row);
            return detail::sigmoid(detail::dot(m.weights, z) + m.bias);
        }
        double operator()(const GaussianNBModel& m) const {
            const double up = m.log_prior_up + detail::gaussian_log_likelihood(row, m.mean_up, m.var_up);
            const double down = m.log_prior_down + detail::gaussian_log_likelihood(row, m.mean_down, m.var_down);
            return detail::sigmoid(up - down);
        }
        double operator()(const KNNModel& m) const {
            std::vector<double> x(row.begin(), row.end());
            if (m.standardizer) x = m.standardizer->apply(row);
            std::vector<std::pair<double, std::size_t>> dist;
            dist.reserve(m.rows.size());
            for (std::size_t i = 0; i < m.rows.size(); ++i) {
                double d2 = 0.0;
                for (std::size_t j = 0; j < x.size(); ++j) d2 += (x[j] - m.rows[i][j]) * (x[j] - m.rows[i][j]);
                dist.emplace_back(d2, i);
            }
            // Distance ties resolve to the earlier training row.
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(m.k), dist.end());
            std::size_t ups = 0;
            for (std::size_t i = 0; i < m.k; ++i)
                if (m.labels[dist[i].second] == TrendDirection::Up) ++ups;
            return static_cast<double>(ups) / static_cast<double>(m.k);
        }
    };
    return std::visit(Visitor{row}, p.model);
}

inline constexpr double kDecisionThreshold = 0.5;

/// score >= 0.5 is Up, so exact ties (zero logistic weights, split KNN votes) go Up.
inline TrendDirection predict_direction(const TrendPredictor& p, std::span<const double> row) {
    return score(p, row) >= kDecisionThreshold ? TrendDirection::Up : TrendDirection::Down;
}

/// Seeded stream for the synthetic classifier: agrees with the truth with
/// probability p_B, independently per call.
class OracleStream {
public:
    OracleStream(double accuracy, std::uint64_t seed) : accuracy_(accuracy), rng_(seed) {
        if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw ConfigError("oracle accuracy must lie in [0, 1]");
    }

    TrendDirection operator()(TrendDirection truth) { return uniform() < accuracy_ ? truth : negate(truth); }

    double accuracy() const noexcept { return accuracy_; }

private:
    // 53 random bits in [0, 1); independent of the standard library's distributions.
    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    double accuracy_;
    std::mt19937_64 rng_;
};

inline TrendDirection oracle_predict(TrendDirection truth, OracleStream& stream) { return stream(truth); }

inline double classification_accuracy(std::span<const TrendDirection> predictions,
                                      std::span<const TrendDirection> truths) {
    if (predictions.empty() || predictions.size() != truths.size())
        throw DataError("classification accuracy needs equal, nonzero lengths");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] == truths[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

/// Forward-chaining cross-validation: the rows are cut into folds + 1
/// contiguous blocks and fold k trains on blocks [0, k) and scores block k.
/// Folds whose training part cannot fit the model are skipped.
inline double cross_validate(const TrendPredictorSpec& spec, const FeatureMatrix& fm, std::size_t folds = 5) {
    if (folds == 0) throw ConfigError("cross-validation needs at least one fold");
    const std::size_t blocks = folds + 1;
    if (fm.size() < blocks) throw DataError("too few rows for " + std::to_string(folds) + "-fold cross-validation");
    auto block_start = [&](std::size_t b) { return b * fm.size() / blocks; };
    CompensatedSum acc;
    std::size_t used = 0;
    for (std::size_t k = 1; k <= folds; ++k) {
        FeatureMatrix train;
        for (std::size_t i = 0; i < block_start(k); ++i) {
            train.rows.push_back(fm.rows[i]);
            train.labels.push_back(fm.labels[i]);
            train.row_time_index.push_back(fm.row_time_index.empty() ? i : fm.row_time_index[i]);
        }
        TrendPredictor model;
        try {
            model = fit_classifier(spec, train);
        } catch (const DataError&) {
            continue;
        }
        std::vector<TrendDirection> pred, truth;
        for (std::size_t i = block_start(k); i < block_start(k + 1); ++i) {
            pred.push_back(predict_direction(model, fm.rows[i]));
            truth.push_back(fm.labels[i]);
        }
        acc.add(classification_accuracy(pred, truth));
        ++used;
    }
    if (used == 0) throw DataError("no cross-validation fold could be trained for " + name(spec));
    return acc.value() / static_cast<double>(used);
}

struct TuningResult {
    TrendPredictorSpec best;
    double best_score = 0.0;
    std::vector<std::pair<TrendPredictorSpec, double>> scores;
};

/// Default hyperparameter grid for a kind: k for KNN, step size for Logistic.
inline std::vector<TrendPredictorSpec> default_grid(const TrendPredictorSpec& base) {
    std::vector<TrendPredictorSpec> grid;
    if (base.kind == PredictorKind::KNN) {
        for (std::size_t k : {1, 3, 5, 7, 9, 11}) {
            auto s = base;
            s.knn_k = k;
            grid.push_back(s);
        }
    } else if (base.kind == PredictorKind::Logistic) {
        for (double lr : {0.01, 0.03, 0.1, 0.3, 1.0}) {
            auto s = base;
            s.learning_rate = lr;
            grid.push_back(s);
        }
    } else {
        grid.push_back(base);
    }
    return grid;
}

/// Picks the candidate with the best cross-validated accuracy; ties keep the earlier candidate.
inline TuningResult tune(const std::vector<TrendPredictorSpec>& candidates, const FeatureMatrix& fm,
                         std::size_t folds = 5) {
    if (candidates.empty()) throw ConfigError("empty hyperparameter grid");
    TuningResult result{candidates.front(), -1.0, {}};
    for (const auto& c : candidates) {
        const double s = cross_validate(c, fm, folds);
        result.scores.emplace_back(c, s);
        if (s > result.best_score) {
            result.best_score = s;
            result.best = c;
        }
    }
    return result;
}

}  // namespace tats
