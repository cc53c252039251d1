#include "mlsdc/cli/config.hpp"
#include "mlsdc/cli/presets.hpp"
#include "mlsdc/cli/report.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace mlsdc::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Shell {
  int status;
  std::string out;
};

Shell run_cli(const std::string& args) {
  const std::string cmd = std::string(MLSDC_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mlsdc_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Presets, HeatFig1cParameters) {
  const StudyConfig& c = find_preset("heat-fig1c");
  EXPECT_EQ(c.method, "MLSDC");
  EXPECT_EQ(c.N_h, 255);
  EXPECT_EQ(c.N_H, 127);
  EXPECT_EQ(c.p, 8);
  EXPECT_EQ(c.M, 5);
  EXPECT_EQ(c.guess, "spread");
  EXPECT_EQ(c.problem.nu, 0.1);
  EXPECT_EQ(c.problem.kappa, 4);
}

TEST(Presets, AllenCahnGoodAlias) {
  const StudyConfig& c = find_preset("allencahn-fig2-good");
  EXPECT_EQ(c.N_h, 128);
  EXPECT_EQ(c.N_H, 64);
  EXPECT_EQ(c.p, 8);
  EXPECT_EQ(c.M, 3);
  EXPECT_EQ(c.problem.eps, 0.2);
  EXPECT_EQ(c.guess, "spread");
}

TEST(Presets, AllValidateAndRoundTrip) {
  int heat = 0;
  for (const auto& [name, c] : presets()) {
    EXPECT_NO_THROW(c.validate()) << name;
    EXPECT_EQ(config_from_json(to_json(c)), c) << name;
    if (name.rfind("heat-", 0) == 0) ++heat;
  }
  EXPECT_EQ(heat, 6);
  EXPECT_THROW(find_preset("nope"), ConfigError);
}

TEST(Config, MissingProblemIdNamesKey) {
  try {
    parse_config_text(R"({"schema_version": 1, "dt": [0.1, 0.05, 0.025]})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("problem.id"), std::string::npos);
  }
  try {
    parse_config_text(R"({"schema_version": 1, "problem": {}, "dt": [0.1]})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("problem.id"), std::string::npos);
  }
}

TEST(Config, UnknownKeysRejectedWithPath) {
  try {
    parse_config_text(R"({"schema_version": 1, "problem": {"id": "zero", "colour": 1}, "dt": [0.1]})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("problem.colour"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config_text(R"({"schema_version": 1, "problem": {"id": "zero"}, "dt": [0.1], "extra": 0})"),
               ConfigError);
}

TEST(Config, CrossFieldValidation) {
  StudyConfig c = find_preset("heat-fig1c");
  c.p = 5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = find_preset("heat-fig1c");
  c.N_H = 100;
  EXPECT_THROW(c.validate(), ConfigError);
  c = find_preset("heat-fig1a");
  c.dt = {0.1, 0.2};
  EXPECT_THROW(c.validate(), ConfigError);
  c = find_preset("auzinger-fig3a");
  c.dt = {0.3};
  EXPECT_THROW(c.validate(), ConfigError);  // t_end not a multiple
  EXPECT_THROW(parse_config_text("{ not json"), ConfigError);
}

TEST(Report, SummaryConfigReproducesRun) {
  StudyConfig c;
  c.name = "zero-roundtrip";
  c.problem.id = "zero";
  c.problem.dim = 2;
  c.dt = {0.1, 0.05, 0.025};
  c.k_max = 2;
  c.timing = false;
  const fs::path dir = scratch("roundtrip");
  const RunOutcome a = run_and_write(c, {dir / "a", 1, false});
  const auto summary = nlohmann::ordered_json::parse(slurp(a.summary_path));
  const StudyConfig back = config_from_json(summary.at("config"));
  EXPECT_EQ(back, c);
  const RunOutcome b = run_and_write(back, {dir / "b", 1, false});
  EXPECT_EQ(slurp(a.csv_path), slurp(b.csv_path));
}

TEST(Report, CsvHeaderAndNanFormatting) {
  StudyConfig c;
  c.name = "z";
  c.problem.id = "zero";
  c.dt = {0.1, 0.05, 0.025};
  c.k_max = 1;
  c.timing = false;
  const auto r = mlsdc::run_convergence_study(c.to_setup());
  const std::string csv = format_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kCsvHeader);
  EXPECT_NE(csv.find("nan"), std::string::npos);  // k = 0 has no contraction slope
}

TEST(Cli, ListShowsPresetsAndNotes) {
  const Shell s = run_cli("list");
  ASSERT_EQ(s.status, 0) << s.out;
  for (const char* p : {"heat-fig1a", "heat-fig1f", "allencahn-fig2-good", "auzinger-fig3c"})
    EXPECT_NE(s.out.find(p), std::string::npos) << p;
  EXPECT_NE(s.out.find("random initial guess"), std::string::npos);
  EXPECT_NE(s.out.find("λ=-0.75, ρ=3"), std::string::npos);
  EXPECT_NE(s.out.find("M_h=8"), std::string::npos);
}

TEST(Cli, ZeroProblemConfigRuns) {
  const fs::path dir = scratch("zero");
  {
    std::ofstream cfg(dir / "zero.json");
    cfg << R"({"schema_version": 1, "name": "zero-run", "problem": {"id": "zero", "dim": 3},
              "method": "MLSDC", "collocation": {"M": 3, "M_H": 2}, "p": 2,
              "dt": [0.1, 0.05, 0.025], "k_max": 2, "timing": false})";
  }
  const Shell s = run_cli("run --config " + (dir / "zero.json").string() + " --out " + dir.string());
  ASSERT_EQ(s.status, 0) << s.out;
  const std::string csv = slurp(dir / "zero-run.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    EXPECT_NE(line.find(",0.000000e+00,0.000000e+00,0.000000e+00,"), std::string::npos) << line;
  }
  EXPECT_EQ(rows, 9);
  EXPECT_TRUE(fs::exists(dir / "zero-run_plot.py"));
}

TEST(Cli, BadInputsGiveConfigErrorStatus) {
  EXPECT_EQ(run_cli("run no-such-preset --out /tmp").status, 2);
  const fs::path dir = scratch("bad");
  {
    std::ofstream cfg(dir / "bad.json");
    cfg << R"({"schema_version": 1, "dt": [0.1]})";
  }
  const Shell s = run_cli("run --config " + (dir / "bad.json").string() + " --out " + dir.string());
  EXPECT_EQ(s.status, 2);
  EXPECT_NE(s.out.find("problem.id"), std::string::npos);
}

TEST(Cli, RerunIsByteIdentical) {
  const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
  const Shell s1 = run_cli("run heat-fig1c --no-timing --no-plot --jobs 2 --out " + a.string());
  const Shell s2 = run_cli("run heat-fig1c --no-timing --no-plot --out " + b.string());
  ASSERT_EQ(s1.status, 0) << s1.out;
  ASSERT_EQ(s2.status, 0) << s2.out;
  EXPECT_EQ(slurp(a / "heat-fig1c.csv"), slurp(b / "heat-fig1c.csv"));
  EXPECT_EQ(slurp(a / "heat-fig1c.summary.json"), slurp(b / "heat-fig1c.summary.json"));
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const fs::path dir = scratch("env");
  const std::string cmd = "MLSDC_OUT_DIR=" + dir.string() + " " + std::string(MLSDC_CLI_PATH) +
                          " run heat-fig1a --dt-list 0.05,0.025,0.0125 --no-timing > /dev/null 2>&1";
  ASSERT_NE(std::system(cmd.c_str()), -1);
  EXPECT_TRUE(fs::exists(dir / "heat-fig1a.csv"));
}
