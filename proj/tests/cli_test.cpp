#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "coopstab/cli.hpp"
#include "coopstab/experiment.hpp"

using namespace coopstab;
namespace fs = std::filesystem;

namespace {

struct Captured {
  int code;
  std::string out;
  std::string err;
};

Captured run(std::vector<std::string> args) {
  args.insert(args.begin(), "coopstab");
  std::ostringstream out, err;
  auto* o = std::cout.rdbuf(out.rdbuf());
  auto* e = std::cerr.rdbuf(err.rdbuf());
  const int code = run_cli(args);
  std::cout.rdbuf(o);
  std::cerr.rdbuf(e);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("coopstab_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_config(const fs::path& dir, const nlohmann::json& c) {
  const auto path = dir / "config.json";
  std::ofstream(path) << c.dump(2);
  return path.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, UnknownSubcommandIsUsageError) {
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"simulate"}).code, kExitUsage);
}

TEST(Cli, ValidateSignal) {
  EXPECT_EQ(run({"validate-signal", "--period", "6", "--tau-d", "3", "--n0", "1"}).code, kExitOk);
  EXPECT_EQ(run({"validate-signal", "--period", "6", "--tau-d", "4", "--n0", "1"}).code, kExitValidation);
}

TEST(Cli, MissingControllerNamesField) {
  const auto dir = scratch("missing");
  auto c = benchmark_config_json();
  c.erase("controller");
  const auto r = run({"simulate", "--config", write_config(dir, c)});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("controller"), std::string::npos) << r.err;
}

TEST(Cli, UnreadableConfig) {
  EXPECT_EQ(run({"simulate", "-c", "/nonexistent/config.json"}).code, kExitConfig);
}

TEST(Cli, BenchmarkWritesOutputs) {
  const auto dir = scratch("bench");
  const auto r = run({"benchmark", "--out", (dir / "run1").string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  const auto report = nlohmann::json::parse(slurp(dir / "run1" / "report.json"));
  EXPECT_TRUE(report.at("converged").get<bool>());
  const std::string csv = slurp(dir / "run1" / "trajectory.csv");
  EXPECT_EQ(csv.rfind("t,sigma,Z1_1", 0), 0u);
}

TEST(Cli, SimulateIsByteDeterministic) {
  const auto dir = scratch("det");
  auto c = benchmark_config_json();
  c["sim"]["t_end"] = 3.0;
  c["sim"]["converge_after"] = 100.0;
  c["lyapunov"] = {{"mu0_samples", 100}};
  const std::string path = write_config(dir, c);
  run({"simulate", "-c", path, "--out", (dir / "a").string()});
  run({"simulate", "-c", path, "--out", (dir / "b").string()});
  EXPECT_EQ(slurp(dir / "a" / "trajectory.csv"), slurp(dir / "b" / "trajectory.csv"));
}

TEST(Cli, AdtViolationExitsTwo) {
  const auto dir = scratch("adt");
  auto c = benchmark_config_json();
  c["switching"]["tau_d"] = 4.0;
  EXPECT_EQ(run({"simulate", "-c", write_config(dir, c), "--out", dir.string()}).code, kExitValidation);
}

TEST(Cli, BlowUpExitsThree) {
  const auto dir = scratch("blow");
  const nlohmann::json agent = {{"model", "linear_scalar"}, {"params", {{"a", 1.0}, {"g", 0.0}, {"h", 50.0}}}, {"d", nlohmann::json::array()}};
  auto c = benchmark_config_json();
  c["agents"] = {agent, agent, agent};
  c["initial_state"] = {{"Z", {{0.0}, {0.0}, {0.0}}}, {"e", {1.0, 1.0, 1.0}}};
  c["controller"] = {{"mode", "manual"}, {"k", 0.01}, {"omega", {1.0}}};
  c["sim"]["t_end"] = 10.0;
  EXPECT_EQ(run({"simulate", "-c", write_config(dir, c), "--out", dir.string()}).code, kExitBlowUp);
}

TEST(Cli, VerifyAndSynthesize) {
  const auto dir = scratch("verify");
  auto c = benchmark_config_json();
  c["lyapunov"] = {{"step", 0.25}};
  const std::string path = write_config(dir, c);
  EXPECT_EQ(run({"verify", "-c", path}).code, kExitOk);
  const auto s = run({"synthesize", "-c", path});
  EXPECT_EQ(s.code, kExitOk);
  EXPECT_EQ(nlohmann::json::parse(s.out).at("gain").at("mode").get<std::string>(), "manual");
}

TEST(Cli, RegulateDemo) {
  const auto dir = scratch("reg");
  const auto r = run({"regulate", "--out", dir.string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(nlohmann::json::parse(slurp(dir / "report.json")).at("success").get<bool>());
}
