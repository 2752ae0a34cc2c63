#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include "twopoint/cli.hpp"

using namespace twopoint;
namespace fs = std::filesystem;

namespace {

std::string src(const std::string& rel) { return std::string(TWOPOINT_SOURCE_DIR) + "/" + rel; }

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("twopoint_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string dir(const std::string& sub = "") const { return (dir_ / sub).string(); }

  std::string write_scenario(const std::string& text) {
    fs::create_directories(dir_ / "in");
    const auto path = dir_ / "in" / "case.scenario";
    std::ofstream(path) << text;
    return path.string();
  }

  fs::path dir_;
};

std::string slurp(const std::string& path) { return read_text_file(path); }

int count(const std::string& text, const std::string& needle) {
  int n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

}  // namespace

TEST_F(CliTest, RunWritesOutputs) {
  const auto r = cli({"run", "--scenario", src("figures/fig3_k05.scenario"), "--out", dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir("fig3_k05.csv")));
  EXPECT_TRUE(fs::exists(dir("fig3_k05.metrics.txt")));
  EXPECT_TRUE(fs::exists(dir("fig3_k05.svg")));
  EXPECT_NE(r.out.find("status = completed"), std::string::npos);

  std::ifstream csv(dir("fig3_k05.csv"));
  const auto rows = read_run_csv(csv);
  ASSERT_EQ(rows.size(), 1001u);
  double prev = 0.0;
  for (const auto& row : rows) {
    EXPECT_GE(-row.lateral_original, prev - 1e-12);
    prev = -row.lateral_original;
  }
  // The slow mode exp(-k v t) still leaves more than 1% of the offset at t = 10 s.
  const double left = 3.5 + rows.back().lateral_original;
  EXPECT_GT(left, 0.01 * 3.5);
  EXPECT_LT(left, 0.02 * 3.5);
}

TEST_F(CliTest, FasterGainReachesLaneWithinOnePercent) {
  const auto r = cli({"run", "--scenario", src("figures/fig3_k10.scenario"), "--out", dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream m(dir("fig3_k10.metrics.txt"));
  const auto metrics = read_metrics(m);
  EXPECT_NEAR(-std::stod(metrics.at("final_lateral")), 3.5, 0.01 * 3.5);
}

TEST_F(CliTest, CsvRoundTripsMetrics) {
  for (const char* name : {"fig3_k15", "abort", "corner_two_point"}) {
    const auto r =
        cli({"run", "--scenario", src(std::string("figures/") + name + ".scenario"), "--out", dir()});
    ASSERT_EQ(r.code, 0) << name << r.err;
    std::ifstream csv(dir(std::string(name) + ".csv"));
    std::ifstream txt(dir(std::string(name) + ".metrics.txt"));
    const auto m = compute_metrics(read_run_csv(csv), std::string(name).find("corner") == 0);
    const auto written = read_metrics(txt);
    auto near = [&](const char* key, double v) {
      EXPECT_NEAR(std::stod(written.at(key)), v, 1e-9) << name << " " << key;
    };
    near("peak_abs_dtheta", m.peak_abs_dtheta);
    near("peak_abs_dtheta_dot", m.peak_abs_dtheta_dot);
    near("final_lateral", m.final_lateral);
    near("settle_time", m.settle_time);
    near("saturation_fraction", m.saturation_fraction);
    near("lateral_rate_sign_changes", m.lateral_rate_sign_changes);
    if (m.kappa_e) near("kappa_e", *m.kappa_e);
    if (m.steady_lateral) near("steady_lateral", *m.steady_lateral);
  }
}

TEST_F(CliTest, OverrideChangesRun) {
  const auto base = cli({"run", "--scenario", src("figures/fig3_k05.scenario"), "--out", dir("a")});
  const auto hi = cli({"run", "--scenario", src("figures/fig3_k05.scenario"), "--set",
                       "planner.k=1.5", "--out", dir("b")});
  ASSERT_EQ(base.code, 0);
  ASSERT_EQ(hi.code, 0);
  const auto ref = cli({"run", "--scenario", src("figures/fig3_k15.scenario"), "--out", dir("c")});
  EXPECT_NE(base.out, hi.out);
  EXPECT_EQ(hi.out, ref.out);
}

TEST_F(CliTest, MissingKeyExitsTwoWithoutOutputs) {
  std::string text = slurp(src("figures/fig3_k05.scenario"));
  text.erase(text.find("lambda = 1\n"), 11);
  const auto r = cli({"run", "--scenario", write_scenario(text), "--out", dir("out")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("planner.lambda"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir("out")));
}

TEST_F(CliTest, ParseErrorExitsOne) {
  const auto r = cli({"run", "--scenario", write_scenario("[sim]\nnonsense\n"), "--out", dir("o")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir("o")));
  EXPECT_EQ(cli({"run", "--scenario", dir("nope.scenario")}).code, 1);
  EXPECT_EQ(cli({"run"}).code, 1);
  EXPECT_EQ(cli({"launch"}).code, 1);
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST_F(CliTest, RunFailureExitsThree) {
  const auto r = cli({"run", "--scenario", src("figures/fig3_k05.scenario"), "--set",
                      "track.segment.0.length_m=12", "--out", dir()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("track_end"), std::string::npos) << r.err;
  EXPECT_TRUE(fs::exists(dir("fig3_k05.csv")));  // partial record kept
}

TEST_F(CliTest, SweepSingletonMatchesRun) {
  const auto run_r = cli({"run", "--scenario", src("figures/fig3_k05.scenario"), "--out", dir("r")});
  const auto sw = cli({"sweep", "--scenario", src("figures/fig3_k05.scenario"), "--grid",
                       "planner.k=0.5", "--out", dir("s")});
  ASSERT_EQ(sw.code, 0) << sw.err;
  std::ifstream m(dir("r/fig3_k05.metrics.txt"));
  const auto metrics = read_metrics(m);
  std::istringstream table(slurp(dir("s/sweep.csv")));
  std::string header, row;
  std::getline(table, header);
  std::getline(table, row);
  const auto h = detail::split(header, ',');
  const auto f = detail::split(row, ',');
  ASSERT_EQ(h.size(), f.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i] == "planner.k" || h[i] == "reason" || h[i] == "status" || h[i] == "settled") continue;
    if (!metrics.count(h[i])) continue;
    EXPECT_EQ(f[i], metrics.at(h[i])) << h[i];
  }
}

TEST_F(CliTest, SweepGridAndValidation) {
  const auto sw = cli({"sweep", "--scenario", src("figures/fig3_k05.scenario"), "--grid",
                       "planner.k=0.5,1.0", "--grid", "planner.lambda=1:2:2", "--out", dir()});
  ASSERT_EQ(sw.code, 0) << sw.err;
  EXPECT_EQ(count(sw.out, "\n"), 5);
  EXPECT_EQ(cli({"sweep", "--scenario", src("figures/fig3_k05.scenario"), "--grid",
                 "planner.k=0.5,0.5", "--out", dir("d")})
                .code,
            2);
  EXPECT_FALSE(fs::exists(dir("d")));
  EXPECT_EQ(cli({"sweep", "--scenario", src("figures/fig3_k05.scenario"), "--grid",
                 "planner.lambda=-1,1", "--out", dir("v")})
                .code,
            2);
  EXPECT_FALSE(fs::exists(dir("v")));
  EXPECT_EQ(cli({"sweep", "--scenario", src("figures/fig3_k05.scenario"), "--grid",
                 "planner.k=abc"})
                .code,
            1);
  EXPECT_EQ(cli({"sweep", "--scenario", src("figures/fig3_k05.scenario")}).code, 1);
}

TEST_F(CliTest, FeasibilityFixture) {
  const auto r = cli({"feasibility", "--v", "1", "--W", "3.5", "--kappa0", "0.01", "--C1", "0.3",
                      "--C2", "0.3", "--C3", "1", "--alpha", "0.5", "--out", dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir("feasible_set.csv")), slurp(src("tests/fixtures/feasible_set.csv")));
  EXPECT_NE(r.out.find("abort_c1 "), std::string::npos);
  EXPECT_NE(r.out.find(" pass\n"), std::string::npos);
}

TEST_F(CliTest, FeasibilityRelaxedAndEmpty) {
  const std::vector<std::string> base = {"feasibility", "--v", "1", "--W", "3.5", "--kappa0",
                                         "0.01", "--C1", "10", "--C2", "10", "--C3", "10"};
  EXPECT_EQ(cli(base).code, 0);
  auto low = base;
  low.insert(low.end(), {"--grid", "gamma=0.05:0.6:12"});
  const auto r = cli(low);
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.out.find("feasible 0 of"), std::string::npos);
  auto bad = base;
  bad[2] = "-1";
  EXPECT_EQ(cli(bad).code, 1);
  auto bad_axis = base;
  bad_axis.insert(bad_axis.end(), {"--grid", "beta=0:1:3"});
  EXPECT_EQ(cli(bad_axis).code, 1);
  EXPECT_EQ(cli({"feasibility", "--v", "1"}).code, 1);
}

TEST_F(CliTest, FiguresDeterministic) {
  const auto a = cli({"figures", "--out", dir("a")});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = cli({"figures", "--out", dir("b")});
  ASSERT_EQ(b.code, 0) << b.err;
  const std::pair<const char*, int> expect[] = {{"fig3.svg", 3}, {"fig4.svg", 3}, {"corner.svg", 2}};
  for (const auto& [name, series] : expect) {
    const auto sa = slurp(dir(std::string("a/") + name));
    EXPECT_EQ(sa, slurp(dir(std::string("b/") + name))) << name;
    EXPECT_EQ(count(sa, "class=\"series\""), series) << name;
    EXPECT_EQ(sa.rfind("<svg", 0), 0u);
  }
  const auto fig3 = slurp(dir("a/fig3.svg"));
  for (const char* label : {"k = 0.5", "k = 1.0", "k = 1.5"}) {
    EXPECT_EQ(count(fig3, std::string("data-label=\"") + label + "\""), 1) << label;
  }
}
