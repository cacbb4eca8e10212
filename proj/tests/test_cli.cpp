#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "limits_sd/calibration.hpp"
#include "limits_sd/report.hpp"

namespace fs = std::filesystem;
using namespace limits_sd;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("limits_sd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" LIMITS_SD_CLI "\" " + args + " >\"" + (dir_ / "stdout").string() + "\" 2>\"" +
                            (dir_ / "stderr").string() + "\"";
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.out = slurp(dir_ / "stdout");
    o.err = slurp(dir_ / "stderr");
    return o;
  }

  std::string out(const std::string& sub) const { return (dir_ / sub).string(); }

  fs::path dir_;
};

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::stringstream ss(text);
  std::string l;
  while (std::getline(ss, l)) v.push_back(l);
  return v;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> v;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) v.push_back(f);
  if (!line.empty() && line.back() == ',') v.push_back("");
  return v;
}

}  // namespace

TEST_F(Cli, ValidateShippedCorpus) {
  EXPECT_EQ(run("validate \"" LIMITS_SD_SOURCE_DIR "/corpus/world3-03.sdm\"").code, 0);
}

TEST_F(Cli, ValidateDuplicateNamesBothLines) {
  spit(dir_ / "dup.sdm", "const a = 1\nconst b = 2\nconst a = 3\n");
  const Outcome o = run("validate " + out("dup.sdm"));
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("lines 1, 3"), std::string::npos) << o.err;
}

TEST_F(Cli, ValidateLoopPrintsCyclePath) {
  spit(dir_ / "loop.sdm", "const k = 1\naux a = b + k\naux b = c\naux c = a\n");
  const Outcome o = run("validate " + out("loop.sdm"));
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("a -> b -> c -> a"), std::string::npos) << o.err;
}

TEST_F(Cli, RunBauWrites401RowsWithConsistentColumns) {
  const Outcome o = run("--out " + out("r") + " --quiet run bau");
  ASSERT_EQ(o.code, 0) << o.err;
  const std::string csv = slurp(dir_ / "r" / "bau.csv");
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  const auto rows = lines(csv);
  ASSERT_EQ(rows.size(), 402u);
  const std::size_t cols = fields(rows[0]).size();
  EXPECT_EQ(cols, run_scenario("bau").series.size() + 1);
  for (const auto& r : rows) ASSERT_EQ(fields(r).size(), cols);
  EXPECT_EQ(fields(rows[1])[0], "1900");
  EXPECT_EQ(fields(rows.back())[0], "2100");
  EXPECT_TRUE(fs::exists(dir_ / "r" / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir_ / "r" / "bau.warnings.log"));
}

TEST_F(Cli, CsvValuesRoundTripExactly) {
  ASSERT_EQ(run("--out " + out("r") + " --quiet run bau").code, 0);
  const auto rows = lines(slurp(dir_ / "r" / "bau.csv"));
  const auto header = fields(rows[0]);
  const RunResult r = run_scenario("bau");
  const auto row = fields(rows[241]);  // 2020
  for (std::size_t c = 1; c < header.size(); ++c) {
    EXPECT_EQ(*parse_number(row[c]), r.at(header[c])[240]) << header[c];
  }
}

TEST_F(Cli, RunWithQuarterStep) {
  ASSERT_EQ(run("--out " + out("q") + " --quiet run bau --dt 0.25").code, 0);
  EXPECT_EQ(lines(slurp(dir_ / "q" / "bau.csv")).size(), 802u);
}

TEST_F(Cli, RunAiAugmentedHasPathwayColumnAfterActivation) {
  ASSERT_EQ(run("--out " + out("a") + " --quiet run ai_augmented").code, 0);
  const auto rows = lines(slurp(dir_ / "a" / "ai_augmented.csv"));
  const auto header = fields(rows[0]);
  const auto col = std::find(header.begin(), header.end(), kPollutionGenerationAi) - header.begin();
  ASSERT_LT(static_cast<std::size_t>(col), header.size());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = fields(rows[i]);
    const double t = *parse_number(f[0]);
    const double v = *parse_number(f[col]);
    if (t < 2020) {
      EXPECT_EQ(v, 0.0) << t;
    } else {
      EXPECT_GT(v, 0.0) << t;
    }
  }
}

TEST_F(Cli, RuntimeErrorExitsTwoWithTimeAndElement) {
  spit(dir_ / "bad.sdm", "const a = 1\naux r = a / (time - 1901)\n");
  const Outcome o = run("--seed-corpus " + out("bad.sdm") + " --out " + out("b") + " run bau");
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("element 'r'"), std::string::npos) << o.err;
  EXPECT_NE(o.err.find("t=1901"), std::string::npos) << o.err;
}

TEST_F(Cli, EnvironmentOverridesCorpus) {
  spit(dir_ / "tiny.sdm", "const a = 1\naux b = a * time\n");
  const Outcome o = run("--out " + out("e") + " --quiet run bau", "LIMITS_SD_CORPUS=" + out("tiny.sdm"));
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(lines(slurp(dir_ / "e" / "bau.csv"))[0], "time,a,b");
}

TEST_F(Cli, UnknownScenarioAndUsageErrorsExitTwo) {
  EXPECT_EQ(run("run nosuch").code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
}

TEST_F(Cli, CompareAgainstItselfIsAllZero) {
  ASSERT_EQ(run("--out " + out("c") + " --quiet compare bau bau").code, 0);
  const auto rows = lines(slurp(dir_ / "c" / "bau_vs_bau.csv"));
  ASSERT_EQ(rows[0], "variable,year,base,other,pct_delta");
  ASSERT_EQ(rows.size(), 11u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(fields(rows[i])[4], "0") << rows[i];
}

TEST_F(Cli, CompareUnknownVariableExitsTwo) {
  EXPECT_EQ(run("--out " + out("u") + " compare bau bau --var no_such_thing").code, 2);
}

TEST_F(Cli, CompareReportsResidueAndOvershootFromTheRuns) {
  const Outcome o = run("--out " + out("c") +
                        " compare bau ai_augmented --var persistent_pollution --var human_ecological_footprint "
                        "--window 2020:2070");
  ASSERT_EQ(o.code, 0) << o.err;
  const RunResult b = run_scenario("bau"), a = run_scenario("ai_augmented");
  const auto pp = compare_runs(b, a, world3::kPersistentPollution, kBenchmarkYears, YearWindow{2020, 2070});
  const auto hef = compare_runs(b, a, world3::kHumanEcologicalFootprint, kBenchmarkYears, YearWindow{2020, 2070});
  EXPECT_NE(o.out.find("residue delta pct (final sample): " + format_number(*pp.residue_delta_2100)),
            std::string::npos);
  EXPECT_NE(o.out.find("cumulative overshoot pct 2020:2070: " + format_number(*hef.cumulative_overshoot_pct)),
            std::string::npos);
  const std::string svg = slurp(dir_ / "c" / "persistent_pollution.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find(">1900</text>"), std::string::npos);
  EXPECT_NE(svg.find(">2050</text>"), std::string::npos);
  EXPECT_NE(svg.find(">2100</text>"), std::string::npos);
  EXPECT_NE(svg.find(">ai_augmented</text>"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "c" / "human_ecological_footprint.svg"));
}

TEST_F(Cli, OutputsAreByteIdenticalAcrossRuns) {
  ASSERT_EQ(run("--out " + out("x") + " --quiet compare bau ai_augmented --window 2020:2070").code, 0);
  ASSERT_EQ(run("--out " + out("y") + " --quiet compare bau ai_augmented --window 2020:2070").code, 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "x")) {
    EXPECT_EQ(slurp(e.path()), slurp(dir_ / "y" / e.path().filename())) << e.path();
    ++files;
  }
  EXPECT_EQ(files, 6u);
  const std::string manifest = slurp(dir_ / "x" / "manifest.json");
  EXPECT_NE(manifest.find(checksum_hex(world3_corpus_checksum())), std::string::npos);
}

TEST_F(Cli, ZeroBudgetCalibrationExitsThreeAndEchoesStart) {
  const Outcome o = run("--out " + out("z") + " --quiet calibrate --budget 0");
  EXPECT_EQ(o.code, 3);
  const std::string preset = slurp(dir_ / "z" / "ai-params.preset");
  EXPECT_EQ(parse_ai_preset(preset), default_start_params());
  EXPECT_NE(preset.find("FLAG"), std::string::npos);
  EXPECT_NE(slurp(dir_ / "z" / "calibration_report.txt").find("footprint validation"), std::string::npos);
}

TEST_F(Cli, CalibrationRoundTripThroughFiles) {
  AiParams q = default_start_params();
  q.carbon_coeff_initial = 8e-3;
  q.ewaste_coeff_initial = 2.5e-3;
  q.carbon_decline_rate = 0.03;
  q.ewaste_decline_rate = 0.01;
  q.coeff_floor = 0.3;
  CalibrationTarget t = published_pollution_target();
  const auto achieved = CalibrationProblem(t).achieved(q);
  for (std::size_t i = 0; i < achieved.size(); ++i) t.target_pct[i] = *achieved[i];
  spit(dir_ / "targets.txt", format_targets(t));
  const Outcome o =
      run("--out " + out("rt") + " --quiet calibrate --targets " + out("targets.txt") + " --budget 500 --tol 0.1");
  EXPECT_EQ(o.code, 0) << o.err << slurp(dir_ / "rt" / "calibration_report.txt");
  EXPECT_NO_THROW(parse_ai_preset(slurp(dir_ / "rt" / "ai-params.preset")));
}
