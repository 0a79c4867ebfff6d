#include <gtest/gtest.h>

#include "support.hpp"
#include "tats/ingest.hpp"

using namespace tats;
using tats::testing::scratch_dir;
using tats::testing::write_text;

namespace {
Dataset series_only(std::vector<double> y) { return Dataset{TimeSeries(std::move(y)), {}}; }
}  // namespace

TEST(Csv, SplitsQuotedFields) {
    EXPECT_EQ(csv::split_line("a,\"b,c\",d"), (std::vector<std::string>{"a", "b,c", "d"}));
    EXPECT_EQ(csv::split_line("\"x\"\"y\",1"), (std::vector<std::string>{"x\"y", "1"}));
    EXPECT_TRUE(csv::parse_real(" 1.5 ").has_value());
    EXPECT_FALSE(csv::parse_real("abc").has_value());
    EXPECT_FALSE(csv::parse_real("inf").has_value());
}

TEST(LoadCsv, ReadsTargetAndExogenous) {
    const auto dir = scratch_dir("ingest_ok");
    const auto path = write_text(dir / "d.csv", "date,y,x\n2020-01-01,1,10\n2020-01-02,2,11\n2020-01-03,4,12\n");
    const auto ds = load_csv(path, "y", {"x"}, std::string("date"));
    EXPECT_EQ(ds.size(), 3u);
    EXPECT_EQ(ds.target[2], 4.0);
    ASSERT_EQ(ds.exogenous.size(), 1u);
    EXPECT_EQ(ds.exogenous[0].second[1], 11.0);
    EXPECT_EQ(ds.target.labels()[0], "2020-01-01");
}

TEST(LoadCsv, ReportsBadCellWithRow) {
    const auto dir = scratch_dir("ingest_bad");
    const auto path = write_text(dir / "d.csv", "y\n1\n2\nabc\n");
    try {
        load_csv(path, "y");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("abc"), std::string::npos);
    }
}

TEST(LoadCsv, MissingColumnAndFile) {
    const auto dir = scratch_dir("ingest_missing");
    const auto path = write_text(dir / "d.csv", "y\n1\n2\n");
    EXPECT_THROW(load_csv(path, "z"), DataError);
    EXPECT_THROW(load_csv(dir / "nope.csv", "y"), DataError);
    const auto ragged = write_text(dir / "r.csv", "y,x\n1,2\n3\n");
    EXPECT_THROW(load_csv(ragged, "y"), DataError);
}

TEST(Features, WorkedExample) {
    const auto fm = build_features(series_only({7, 5, 9, 7, 8}), 2, false);
    ASSERT_EQ(fm.size(), 3u);
    EXPECT_EQ(fm.rows[0], (std::vector<double>{5, 7}));
    EXPECT_EQ(fm.rows[1], (std::vector<double>{9, 5}));
    EXPECT_EQ(fm.rows[2], (std::vector<double>{7, 9}));
    EXPECT_EQ(fm.labels, (std::vector<TrendDirection>{TrendDirection::Up, TrendDirection::Down, TrendDirection::Up}));
    EXPECT_EQ(fm.row_time_index, (std::vector<std::size_t>{1, 2, 3}));
}

TEST(Features, ConstantSeriesDropsEverything) {
    const auto fm = build_features(series_only({3, 3, 3, 3, 3, 3}), 2, false);
    EXPECT_EQ(fm.size(), 0u);
    EXPECT_EQ(fm.flat_dropped, 4u);
}

TEST(Features, LabelsAreNextStepDirection) {
    const auto y = tats::testing::random_walk(60, 5);
    const auto fm = build_features(series_only(y), 3, false);
    for (std::size_t k = 0; k < fm.size(); ++k) {
        const std::size_t t = fm.row_time_index[k];
        EXPECT_EQ(fm.labels[k], y[t + 1] > y[t] ? TrendDirection::Up : TrendDirection::Down);
        EXPECT_EQ(fm.rows[k].front(), y[t]);
        EXPECT_EQ(fm.rows[k].back(), y[t - 2]);
    }
}

TEST(Features, ExogenousLags) {
    Dataset ds{TimeSeries({1, 2, 4, 3, 5}), {{"x", TimeSeries({10, 20, 30, 40, 50})}}};
    const auto fm = build_features(ds, FeatureOptions{1, true, 2});
    ASSERT_EQ(fm.size(), 3u);
    EXPECT_EQ(fm.rows[0], (std::vector<double>{2, 20, 10}));
    EXPECT_EQ(fm.row_time_index.front(), 1u);
}

TEST(Features, TooShort) {
    EXPECT_THROW(build_features(series_only({1, 2, 3}), 2, false), DataError);
    EXPECT_THROW(build_features(series_only({1, 2, 3, 4}), 0, false), ConfigError);
}

TEST(ExternalForecasts, AlignsByIndex) {
    const auto dir = scratch_dir("ingest_ext");
    const TimeSeries s({1, 2, 3, 4});
    const auto f = load_external_forecasts(write_text(dir / "f.csv", "time_index,forecast\n3,4.5\n1,2.5\n"), s);
    EXPECT_EQ(f.at(1), 2.5);
    EXPECT_EQ(f.at(3), 4.5);
    EXPECT_THROW(f.at(2), DataError);
}

TEST(ExternalForecasts, Errors) {
    const auto dir = scratch_dir("ingest_ext_err");
    const TimeSeries s({1, 2, 3, 4});
    try {
        load_external_forecasts(write_text(dir / "dup.csv", "time_index,forecast\n2,1\n2,3\n"), s);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find('2'), std::string::npos);
    }
    EXPECT_THROW(load_external_forecasts(write_text(dir / "oob.csv", "time_index,forecast\n4,1\n"), s), DataError);
    EXPECT_THROW(load_external_forecasts(write_text(dir / "zero.csv", "time_index,forecast\n0,1\n"), s), DataError);
    EXPECT_NO_THROW(load_external_forecasts(dir / "zero.csv", s, true));
    EXPECT_THROW(load_external_forecasts(write_text(dir / "empty.csv", "time_index,forecast\n"), s), DataError);
}

TEST(ExternalDirections, ParsesSigns) {
    const auto dir = scratch_dir("ingest_dir");
    const TimeSeries s({1, 2, 3});
    const auto d = load_external_directions(write_text(dir / "d.csv", "time_index,direction\n1,1\n2,-1\n"), s);
    EXPECT_EQ(d.at(1), TrendDirection::Up);
    EXPECT_EQ(d.at(2), TrendDirection::Down);
    EXPECT_THROW(load_external_directions(write_text(dir / "bad.csv", "time_index,direction\n1,0\n"), s), DataError);
}
