#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace tats {

// Error categories map one-to-one onto the CLI exit codes (1, 2, 3).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Direction of a one-step move. Encoded exactly as +1 / -1.
enum class TrendDirection : int { Up = 1, Down = -1 };

/// Result of reading the sign of a delta. Flat is not a TrendDirection;
/// every caller decides what a zero move means for it.
enum class Sign : int { Down = -1, Flat = 0, Up = 1 };

constexpr double as_real(TrendDirection d) noexcept { return static_cast<int>(d); }

constexpr TrendDirection negate(TrendDirection d) noexcept {
    return d == TrendDirection::Up ? TrendDirection::Down : TrendDirection::Up;
}

constexpr Sign direction_of(double delta) noexcept {
    if (delta > 0.0) return Sign::Up;
    if (delta < 0.0) return Sign::Down;
    return Sign::Flat;
}

constexpr std::optional<TrendDirection> strict(Sign s) noexcept {
    switch (s) {
    case Sign::Up: return TrendDirection::Up;
    case Sign::Down: return TrendDirection::Down;
    case Sign::Flat: break;
    }
    return std::nullopt;
}

constexpr bool matches(Sign s, TrendDirection d) noexcept {
    return static_cast<int>(s) == static_cast<int>(d);
}

inline const char* to_string(TrendDirection d) noexcept {
    return d == TrendDirection::Up ? "up" : "down";
}

/// Ordered, finite observations with optional strictly increasing labels
/// (dates or row ids). Immutable after construction.
class TimeSeries {
public:
    explicit TimeSeries(std::vector<double> values, std::vector<std::string> labels = {})
        : values_(std::move(values)), labels_(std::move(labels)) {
        if (values_.empty()) throw DataError("time series must contain at least one value");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i]))
                throw DataError("time series value at index " + std::to_string(i) + " is not finite");
        }
        if (!labels_.empty()) {
            if (labels_.size() != values_.size())
                throw DataError("time series labels and values differ in length");
            for (std::size_t i = 1; i < labels_.size(); ++i) {
                if (!(labels_[i - 1] < labels_[i]))
                    throw DataError("time series labels are not strictly increasing at index " +
                                    std::to_string(i) + " ('" + labels_[i] + "')");
            }
        }
    }

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double front() const { return values_.front(); }
    double back() const { return values_.back(); }
    std::span<const double> values() const noexcept { return values_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    bool has_labels() const noexcept { return !labels_.empty(); }

    /// Contiguous sub-series [first, first + count).
    TimeSeries slice(std::size_t first, std::size_t count) const {
        if (first + count > values_.size() || count == 0)
            throw DataError("time series slice out of range");
        std::vector<double> v(values_.begin() + first, values_.begin() + first + count);
        std::vector<std::string> l;
        if (!labels_.empty()) l.assign(labels_.begin() + first, labels_.begin() + first + count);
        return TimeSeries(std::move(v), std::move(l));
    }

private:
    std::vector<double> values_;
    std::vector<std::string> labels_;
};

inline std::vector<double> diff(std::span<const double> values) {
    if (values.size() < 2) throw DataError("series too short: differencing needs at least 2 values");
    std::vector<double> out(values.size() - 1);
    for (std::size_t k = 0; k + 1 < values.size(); ++k) out[k] = values[k + 1] - values[k];
    return out;
}

inline std::vector<double> diff(const TimeSeries& series) { return diff(series.values()); }

struct Split {
    TimeSeries train;
    TimeSeries test;
};

/// First floor(fraction * n) observations train, the rest test. No shuffling.
inline Split chronological_split(const TimeSeries& series, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("train fraction must lie strictly between 0 and 1");
    const std::size_t n = series.size();
    if (n < 2) throw DataError("series too short to split (" + std::to_string(n) + " values)");
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train >= n)
        throw DataError("train fraction " + std::to_string(train_fraction) + " leaves an empty split for n=" +
                        std::to_string(n));
    return Split{series.slice(0, n_train), series.slice(n_train, n - n_train)};
}

/// Derives an independent stream seed (splitmix64 finaliser over seed and stream id).
constexpr std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Calls fn(i) for i in [0, n) on up to `jobs` threads (strided assignment).
/// The first exception thrown by any task is rethrown after all threads join.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr first_error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(jobs);
        for (std::size_t w = 0; w < jobs; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < n; i += jobs) fn(i);
                } catch (...) {
                    const std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            });
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            carry_ += (sum_ - t) + x;
        else
            carry_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

}  // namespace tats
