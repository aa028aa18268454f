#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "nldeco/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run_cli(const std::string& args) {
  const std::string command = std::string(NLDECO_CLI_PATH) + " " + args + " 2>&1";
  Outcome outcome;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return outcome;
  char buffer[4096];
  while (const auto n = std::fread(buffer, 1, sizeof(buffer), pipe)) outcome.out.append(buffer, n);
  const int status = pclose(pipe);
  outcome.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return outcome;
}

std::string config(const char* name) { return (fs::path(NLDECO_CONFIG_DIR) / name).string(); }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("nldeco_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const auto path = dir_ / name;
    std::ofstream(path) << text;
    return path.string();
  }

  fs::path dir_;
};

TEST_F(Cli, SimulateIsByteReproducible) {
  const auto first = dir_ / "a";
  const auto second = dir_ / "b";
  ASSERT_EQ(run_cli("simulate --quiet --config " + config("simulate.json") + " --out " + first.string()).code, 0);
  ASSERT_EQ(run_cli("simulate --quiet --config " + config("simulate.json") + " --out " + second.string()).code, 0);
  const auto csv = slurp(first / "headline.csv");
  EXPECT_EQ(csv.rfind("t,p_down\n0,1\n", 0), 0u);
  EXPECT_EQ(csv, slurp(second / "headline.csv"));
  EXPECT_EQ(slurp(first / "headline.meta.json"), slurp(second / "headline.meta.json"));
  const auto meta = nldeco::Json::parse(slurp(first / "headline.meta.json"));
  EXPECT_TRUE(meta.contains("library_version"));
  EXPECT_EQ(meta["config"]["model"]["d"], -0.15);
}

TEST_F(Cli, BundledTraceMatchesSimulation) {
  ASSERT_EQ(run_cli("simulate --quiet --config " + config("simulate.json") + " --out " + dir_.string()).code, 0);
  EXPECT_EQ(slurp(dir_ / "headline.csv"), slurp(fs::path(NLDECO_CONFIG_DIR) / "traces" / "headline.csv"));
}

TEST_F(Cli, FitBundledTrace) {
  const auto result = run_cli("fit --config " + config("fit.json") + " --out " + dir_.string());
  ASSERT_EQ(result.code, 0) << result.out;
  const auto fit = nldeco::Json::parse(slurp(dir_ / "headline.fit.json"));
  EXPECT_NEAR(fit["nu_hat"].get<double>(), 0.7, 0.02);
  EXPECT_NEAR(fit["gamma0_hat"].get<double>(), 0.1, 0.002);
  EXPECT_TRUE(fit["converged"].get<bool>());
  EXPECT_EQ(slurp(dir_ / "headline.residuals.csv").rfind("n,p_n,rate,stderr,power_law_rate,relative_residual\n", 0),
            0u);
}

TEST_F(Cli, SweepRecoversExponents) {
  const auto result = run_cli("sweep --quiet --config " + config("sweep.json") + " --out " + dir_.string());
  ASSERT_EQ(result.code, 0) << result.out;
  std::istringstream summary(slurp(dir_ / "exponent_sweep.sweep.csv"));
  std::string line;
  std::getline(summary, line);
  const double expected[] = {0.5, 0.7, 1.0, 1.5};
  int row = 0;
  while (std::getline(summary, line)) {
    ASSERT_LT(row, 4);
    std::vector<std::string> fields;
    std::stringstream cells(line);
    for (std::string cell; std::getline(cells, cell, ',');) fields.push_back(cell);
    ASSERT_GE(fields.size(), 3u) << line;
    EXPECT_NEAR(std::stod(fields[1]), expected[row], 0.02) << line;
    ++row;
  }
  EXPECT_EQ(row, 4);
}

TEST_F(Cli, OracleCheckPasses) {
  const auto result = run_cli("oracle-check --config " + config("oracle_check.json") + " --out " + dir_.string());
  EXPECT_EQ(result.code, 0) << result.out;
  EXPECT_EQ(result.out.find("FAIL"), std::string::npos);
  const auto report = nldeco::Json::parse(slurp(dir_ / "two_mode.oracle.json"));
  ASSERT_TRUE(report.is_array());
  for (const auto& entry : report) EXPECT_TRUE(entry["pass"].get<bool>()) << entry.dump();
}

TEST_F(Cli, ReproduceNist) {
  const auto result = run_cli("reproduce-nist --out " + dir_.string());
  ASSERT_EQ(result.code, 0) << result.out;
  EXPECT_NE(result.out.find("reproduce-nist: d=-0.15"), std::string::npos) << result.out;
  EXPECT_NE(result.out.find("within_0.02=true"), std::string::npos) << result.out;
}

TEST_F(Cli, ValidationErrorsExitOne) {
  const auto bad = write("bad.json", R"({"model": {"g": 1, "d": -0.6, "gamma0": 0.1},
    "spectral": {"family": "paper_flat"}, "distribution": {"kind": "fock", "n0": 0},
    "time_grid": {"stop": 10, "count": 10}})");
  const auto result = run_cli("simulate --config " + bad + " --out " + dir_.string());
  EXPECT_EQ(result.code, 1);
  EXPECT_NE(result.out.find("model.d"), std::string::npos) << result.out;
  EXPECT_EQ(run_cli("simulate --out " + dir_.string()).code, 1);
  EXPECT_EQ(run_cli("bogus --config " + bad).code, 1);
  EXPECT_EQ(run_cli("simulate --config " + (dir_ / "missing.json").string()).code, 1);
}

TEST_F(Cli, DivergentKernelIsValidationError) {
  const auto warm = write("warm.json", R"({"model": {"g": 1, "d": 0, "gamma0": 0.1, "beta": 1.0},
    "spectral": {"family": "paper_flat"}, "distribution": {"kind": "fock", "n0": 0},
    "time_grid": {"stop": 10, "count": 10}})");
  EXPECT_EQ(run_cli("simulate --config " + warm + " --out " + dir_.string()).code, 1);
}

TEST_F(Cli, NumericalFailureExitsTwo) {
  const auto tight = write("tight.json", R"({"model": {"g": 1, "d": 0, "beta": 1.0},
    "spectral": {"family": "ohmic", "alpha": 0.1, "omega_c": 5},
    "distribution": {"kind": "fock", "n0": 0},
    "time_grid": {"start": 1, "stop": 10, "count": 4},
    "quadrature": {"max_intervals": 2}})");
  const auto result = run_cli("simulate --config " + tight + " --out " + dir_.string());
  EXPECT_EQ(result.code, 2) << result.out;
  EXPECT_NE(result.out.find("\"numerical\""), std::string::npos) << result.out;
}

TEST_F(Cli, OhmicThermalConfigRuns) {
  const auto result = run_cli("simulate --quiet --config " + config("ohmic_thermal.json") + " --out " + dir_.string());
  EXPECT_EQ(result.code, 0) << result.out;
  EXPECT_TRUE(fs::exists(dir_ / "ohmic_thermal.csv"));
}

}  // namespace
