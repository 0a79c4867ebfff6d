#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include <sys/wait.h>

#include "support.hpp"
#include "tats/commands.hpp"

using namespace tats;
using tats::testing::read_text;
using tats::testing::scratch_dir;
using tats::testing::source_dir;
using tats::testing::write_text;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(TATS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string gold_config(const std::filesystem::path& out) {
    return "data = " + (source_dir() / "data/gold_style.csv").string() +
           "\ntarget = gold\nexogenous = usd_eur, sp500\nlabel_column = date\nalphas = 0.5, 2\noutput = " +
           out.string() + "\nplots = false\n";
}

}  // namespace

TEST(Config, ParsesKeysAndResolvesPaths) {
    std::istringstream in("# comment\ndata = prices.csv\ntarget = y  # trailing\nforecaster = ses\n"
                          "ses_smoothing = 0.3\nclassifier = knn\nknn_k = 7\nalphas = 1, 2.5\ntheory_split = test\n");
    const auto c = parse_config(in, "/tmp/exp");
    EXPECT_EQ(c.data, std::filesystem::path("/tmp/exp/prices.csv"));
    EXPECT_EQ(c.target, "y");
    EXPECT_EQ(c.forecaster.kind, ForecasterKind::SES);
    EXPECT_EQ(c.forecaster.ses_smoothing, 0.3);
    EXPECT_EQ(c.classifier.kind, PredictorKind::KNN);
    EXPECT_EQ(c.classifier.knn_k, 7u);
    EXPECT_EQ(c.alphas, (std::vector<double>{1, 2.5}));
    EXPECT_EQ(c.theory_split, TheorySplit::Test);
}

TEST(Config, Errors) {
    std::istringstream unknown("colour = blue\n");
    EXPECT_THROW(parse_config(unknown), ConfigError);
    std::istringstream no_eq("data\n");
    EXPECT_THROW(parse_config(no_eq), ConfigError);
    RunConfig c;
    EXPECT_THROW(apply_override(c, "knn_k"), ConfigError);
    EXPECT_THROW(apply_override(c, "knn_k=-1"), ConfigError);
    apply_override(c, "classifier=gnb");
    EXPECT_EQ(c.classifier.kind, PredictorKind::GaussianNB);
    c.data = "x.csv";
    c.target = "y";
    c.output = "out";
    c.alphas.clear();
    EXPECT_THROW(validate(c), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/exp.conf"), DataError);
}

TEST(Run, WritesDeterministicArtifacts) {
    const auto dir = scratch_dir("cli_run");
    std::istringstream in(gold_config(dir / "a"));
    auto cfg = parse_config(in);
    std::ostringstream sink;
    ASSERT_EQ(cli::cmd_run(cfg, 1, sink), cli::kOk);
    cfg.output = dir / "b";
    ASSERT_EQ(cli::cmd_run(cfg, 3, sink), cli::kOk);
    for (const char* f : {"report.json", "results.csv", "trace.csv"})
        EXPECT_EQ(read_text(dir / "a" / f), read_text(dir / "b" / f)) << f;
    const auto results = read_text(dir / "a/results.csv");
    EXPECT_EQ(results.substr(0, results.find('\n')), "model,split,alpha,TDA,MSE,MAE,MAPE,Diff,R-Diff");
    EXPECT_EQ(std::count(results.begin(), results.end(), '\n'), 4);
    const auto report = nlohmann::json::parse(read_text(dir / "a/report.json"));
    EXPECT_EQ(report["tats"].size(), 2u);
    EXPECT_TRUE(report["theory"].is_object());
}

TEST(Metrics, ExampleFixture) {
    const auto d = source_dir() / "data/example1";
    const auto m1 = cli::compute_metrics(d / "series.csv", "actual", d / "model1.csv", 10.0);
    const auto m2 = cli::compute_metrics(d / "series.csv", "actual", d / "model2.csv", 10.0);
    EXPECT_EQ(m1.report.mse, 8.0);
    EXPECT_EQ(m2.report.mse, 8.0);
    EXPECT_EQ(m1.report.tda, 1.0);
    EXPECT_EQ(m2.report.tda, 0.25);
    EXPECT_EQ(m1.trend_aware_loss, 40.0);
    EXPECT_EQ(m2.trend_aware_loss, 70.0);
}

TEST(ExitCodes, Mapping) {
    const auto dir = scratch_dir("cli_exit");
    const auto good = write_text(dir / "good.conf", gold_config(dir / "out"));
    EXPECT_EQ(run_cli("run -c " + good.string()), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "out/results.csv"));
    EXPECT_EQ(run_cli("sweep -c " + good.string() + " -o " + (dir / "sw").string()), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "sw/sweep.csv"));

    const auto missing = write_text(dir / "missing.conf", "data = nope.csv\ntarget = gold\noutput = o\n");
    EXPECT_EQ(run_cli("run -c " + missing.string()), 2);
    EXPECT_EQ(run_cli("run -c " + good.string() + " --set alphas="), 1);
    EXPECT_EQ(run_cli("run -c " + good.string() + " --set colour=blue"), 1);
    EXPECT_EQ(run_cli("frobnicate"), 1);
    EXPECT_EQ(run_cli("simulate --n-steps 100 --n-trials 3 -o " + (dir / "sim").string()), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "sim/simulation.json"));
    EXPECT_EQ(run_cli("simulate --p-db 1.5"), 1);

    const auto e = source_dir() / "data/example1";
    EXPECT_EQ(run_cli("metrics --actuals " + (e / "series.csv").string() + " --forecasts " +
                      (e / "model1.csv").string() + " --gamma 10"),
              0);
    const auto zeros = write_text(dir / "zeros.csv", "actual\n1\n1\n1\n1\n1\n");
    const auto flat_conf = write_text(dir / "flat.conf", "data = " + zeros.string() +
                                                             "\ntarget = actual\nforecaster = naive\n"
                                                             "classifier = majority\ntrain_fraction = 0.6\n"
                                                             "output = " + (dir / "flat").string() + "\n");
    EXPECT_EQ(run_cli("run -c " + flat_conf.string()), 2);  // no direction to learn
}
