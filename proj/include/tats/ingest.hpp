#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tats/core.hpp"

namespace tats {

namespace csv {

// Splits one line on commas, honoring double-quoted fields ("" escapes a quote).
inline std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::optional<double> parse_real(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based file line of each row

    std::size_t column(const std::string& name, const std::filesystem::path& path) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw DataError(path.string() + ": missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
};

inline Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    Table table;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto fields = split_line(line);
        for (auto& f : fields) f = std::string(trim(f));
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size())
            throw DataError(path.string() + ": line " + std::to_string(line_no) + " has " +
                            std::to_string(fields.size()) + " fields, header has " +
                            std::to_string(table.header.size()));
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(line_no);
    }
    if (!have_header) throw DataError(path.string() + ": empty file (header row required)");
    return table;
}

}  // namespace csv

/// Target series plus exogenous columns aligned to the same rows.
struct Dataset {
    TimeSeries target;
    std::vector<std::pair<std::string, TimeSeries>> exogenous;  // declared column order

    std::size_t size() const noexcept { return target.size(); }
};

inline void validate(const Dataset& ds) {
    std::set<std::string> seen;
    for (const auto& [name, series] : ds.exogenous) {
        if (name.empty()) throw DataError("exogenous column name is empty");
        if (!seen.insert(name).second) throw DataError("duplicate exogenous column '" + name + "'");
        if (series.size() != ds.target.size())
            throw DataError("exogenous column '" + name + "' length differs from target");
    }
}

inline Dataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                        const std::vector<std::string>& exogenous_columns = {},
                        const std::optional<std::string>& label_column = std::nullopt) {
    const csv::Table table = csv::read(path);
    if (table.rows.empty()) throw DataError(path.string() + ": no data rows");

    auto numeric_column = [&](const std::string& name) {
        const std::size_t col = table.column(name, path);
        std::vector<double> values;
        values.reserve(table.rows.size());
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const auto v = csv::parse_real(table.rows[r][col]);
            if (!v)
                throw DataError(path.string() + ": row " + std::to_string(r + 1) + " (line " +
                                std::to_string(table.line_numbers[r]) + "), column '" + name +
                                "': non-numeric value '" + table.rows[r][col] + "'");
            values.push_back(*v);
        }
        return values;
    };

    std::vector<std::string> labels;
    if (label_column) {
        const std::size_t col = table.column(*label_column, path);
        for (const auto& row : table.rows) labels.push_back(row[col]);
    }

    Dataset ds{TimeSeries(numeric_column(target_column), labels), {}};
    for (const auto& name : exogenous_columns) {
        ds.exogenous.emplace_back(name, TimeSeries(numeric_column(name), labels));
    }
    validate(ds);
    return ds;
}

struct FeatureOptions {
    std::size_t n_lags = 2;
    bool include_exogenous = false;
    std::size_t exogenous_lags = 1;  // 1 = value at t only
};

/// Classifier training data: row k describes time row_time_index[k] and is
/// labelled with the direction of the following step.
struct FeatureMatrix {
    std::vector<std::vector<double>> rows;
    std::vector<TrendDirection> labels;
    std::vector<std::size_t> row_time_index;
    std::size_t flat_dropped = 0;

    std::size_t size() const noexcept { return rows.size(); }
    std::size_t dimension() const noexcept { return rows.empty() ? 0 : rows.front().size(); }
};

/// Earliest time index for which a feature row can be formed.
inline std::size_t first_feature_time(const FeatureOptions& opt) {
    const std::size_t exo = opt.include_exogenous ? opt.exogenous_lags : 1;
    return std::max(opt.n_lags, exo) - 1;
}

/// [y_t, y_{t-1}, ..., y_{t-n_lags+1}] then each exogenous column's
/// [x_t, ..., x_{t-exogenous_lags+1}] in declared order.
inline std::vector<double> feature_row(const Dataset& ds, std::size_t t, const FeatureOptions& opt) {
    if (opt.n_lags == 0) throw ConfigError("n_lags must be positive");
    if (opt.include_exogenous && opt.exogenous_lags == 0) throw ConfigError("exogenous_lags must be positive");
    if (t >= ds.size() || t < first_feature_time(opt))
        throw DataError("no feature row available for time index " + std::to_string(t));
    std::vector<double> row;
    row.reserve(opt.n_lags + (opt.include_exogenous ? ds.exogenous.size() * opt.exogenous_lags : 0));
    for (std::size_t i = 0; i < opt.n_lags; ++i) row.push_back(ds.target[t - i]);
    if (opt.include_exogenous) {
        for (const auto& [name, series] : ds.exogenous)
            for (std::size_t i = 0; i < opt.exogenous_lags; ++i) row.push_back(series[t - i]);
    }
    return row;
}

/// Rows for every t in [first_feature_time, last_time] whose next step is not
/// flat. last_time defaults to n - 2 (the last row with a known label).
inline FeatureMatrix build_features(const Dataset& ds, const FeatureOptions& opt,
                                    std::optional<std::size_t> last_time = std::nullopt) {
    if (opt.n_lags == 0) throw ConfigError("n_lags must be positive");
    const std::size_t n = ds.size();
    if (n <= opt.n_lags + 1)
        throw DataError("series too short for " + std::to_string(opt.n_lags) + " lags (" + std::to_string(n) +
                        " values)");
    const std::size_t last = last_time ? std::min(*last_time, n - 2) : n - 2;
    FeatureMatrix fm;
    for (std::size_t t = first_feature_time(opt); t <= last; ++t) {
        const auto dir = strict(direction_of(ds.target[t + 1] - ds.target[t]));
        if (!dir) {
            ++fm.flat_dropped;
            continue;
        }
        fm.rows.push_back(feature_row(ds, t, opt));
        fm.labels.push_back(*dir);
        fm.row_time_index.push_back(t);
    }
    return fm;
}

inline FeatureMatrix build_features(const Dataset& ds, std::size_t n_lags, bool include_exogenous) {
    return build_features(ds, FeatureOptions{n_lags, include_exogenous, 1});
}

/// One external value per time index of the full series.
struct AlignedForecasts {
    std::map<std::size_t, double> by_index;

    double at(std::size_t t) const {
        const auto it = by_index.find(t);
        if (it == by_index.end())
            throw DataError("no external forecast for time index " + std::to_string(t));
        return it->second;
    }
    bool contains(std::size_t t) const { return by_index.contains(t); }
};

struct AlignedDirections {
    std::map<std::size_t, TrendDirection> by_index;

    TrendDirection at(std::size_t t) const {
        const auto it = by_index.find(t);
        if (it == by_index.end())
            throw DataError("no external direction for time index " + std::to_string(t));
        return it->second;
    }
};

namespace detail {

template <typename Value, typename Parse>
std::map<std::size_t, Value> load_indexed(const std::filesystem::path& path, const std::string& value_column,
                                          std::size_t first_valid, std::size_t series_size, const char* what,
                                          Parse parse) {
    const csv::Table table = csv::read(path);
    if (table.rows.empty()) throw DataError(path.string() + ": no " + std::string(what) + "s");
    const std::size_t idx_col = table.column("time_index", path);
    const std::size_t val_col = table.column(value_column, path);
    std::map<std::size_t, Value> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string where = path.string() + ": line " + std::to_string(table.line_numbers[r]);
        const auto idx = csv::parse_int(table.rows[r][idx_col]);
        if (!idx) throw DataError(where + ": bad time_index '" + table.rows[r][idx_col] + "'");
        if (*idx < static_cast<long long>(first_valid) || *idx >= static_cast<long long>(series_size))
            throw DataError(where + ": time_index " + std::to_string(*idx) + " outside the series range [" +
                            std::to_string(first_valid) + ", " + std::to_string(series_size - 1) + "]");
        const std::optional<Value> v = parse(table.rows[r][val_col]);
        if (!v) throw DataError(where + ": bad " + std::string(what) + " '" + table.rows[r][val_col] + "'");
        if (!out.emplace(static_cast<std::size_t>(*idx), *v).second)
            throw DataError(where + ": duplicate time_index " + std::to_string(*idx));
    }
    return out;
}

}  // namespace detail

/// Reads (time_index, forecast) rows. Indices refer to the full series and must
/// be evaluable, i.e. in [1, n-1]; allow_first admits index 0 for pure error
/// metrics where no previous value is needed.
inline AlignedForecasts load_external_forecasts(const std::filesystem::path& path, const TimeSeries& series,
                                                bool allow_first = false) {
    return AlignedForecasts{detail::load_indexed<double>(path, "forecast", allow_first ? 0 : 1, series.size(),
                                                         "forecast", csv::parse_real)};
}

/// Reads (time_index, direction) rows with direction in {+1, -1}.
inline AlignedDirections load_external_directions(const std::filesystem::path& path, const TimeSeries& series) {
    auto parse = [](std::string_view s) -> std::optional<TrendDirection> {
        const auto v = csv::parse_int(s);
        if (v == 1) return TrendDirection::Up;
        if (v == -1) return TrendDirection::Down;
        return std::nullopt;
    };
    return AlignedDirections{
        detail::load_indexed<TrendDirection>(path, "direction", 1, series.size(), "direction", parse)};
}

}  // namespace tats
