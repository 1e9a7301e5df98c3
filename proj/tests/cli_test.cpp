#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "bohm/scenarios.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result sh(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + BOHMSIM_PATH + std::string(" ") + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

nlohmann::json report(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "report.json")); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("bohmsim_cli_" + std::to_string(::getpid()) + "_" +
                                         ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path dir(const std::string& name) const { return root_ / name; }
  std::string out(const std::string& name) const { return " -o " + dir(name).string(); }

  fs::path root_;
};

// Small free-Gaussian run used where the numbers do not matter.
const std::string kSmall = "run -s free_gaussian --nsteps 200 -n 300";

TEST_F(Cli, VersionAndList) {
  const auto v = sh("version");
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(v.out, "bohmsim 0.1.0\n");
  const auto a = sh("list");
  const auto b = sh("list");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("two_slit "), std::string::npos);
  EXPECT_NE(a.out.find("measurement "), std::string::npos);
  EXPECT_NE(a.out.find("free_gaussian "), std::string::npos);
  EXPECT_NE(a.out.find("harmonic "), std::string::npos);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 4);
}

TEST_F(Cli, UnknownScenarioExitsTwoAndWritesNothing) {
  EXPECT_EQ(sh("run --scenario no_such_thing" + out("x")).code, 2);
  EXPECT_FALSE(fs::exists(dir("x")));
}

TEST_F(Cli, ConfigErrorsExitTwoBeforeAnyOutput) {
  const std::vector<std::string> bad{
      "run",                                                   // no scenario
      "run -s free_gaussian -p colour=3",                      // unknown parameter
      "run -s free_gaussian -p points=abc",                    // wrong type
      "run -s free_gaussian --check born",                     // check not available here
      "run -s free_gaussian --check equivariance --check equivariance",
      "run -s free_gaussian --nsteps 10 --stride 3",           // stride must divide nsteps
      "run -s free_gaussian --dt 0",
      "run -s free_gaussian -n 0",
      "run -s free_gaussian -p sigma0=0.01",                   // unresolved width
      "run -s two_slit -p initial=uniform --check equivariance",
      "run -s two_slit -p initial=sideways",
      "run -s measurement -p p1=1.5",
      "run -s free_gaussian --no-such-flag",
      "run --config /nonexistent/config.json",
  };
  for (const auto& args : bad) {
    EXPECT_EQ(sh(args + out("bad")).code, 2) << args;
    EXPECT_FALSE(fs::exists(dir("bad"))) << args;
  }
  EXPECT_EQ(sh(kSmall + out("bad"), "BOHM_WORKERS=0").code, 2);
  EXPECT_EQ(sh(kSmall + out("bad"), "BOHM_WORKERS=two").code, 2);
  EXPECT_FALSE(fs::exists(dir("bad")));

  std::ofstream(dir("typo.json")) << R"({"scenario": "free_gaussian", "nstep": 10})";
  EXPECT_EQ(sh("run --config " + dir("typo.json").string() + out("bad")).code, 2);
  std::ofstream(dir("broken.json")) << R"({"scenario": )";
  EXPECT_EQ(sh("run --config " + dir("broken.json").string() + out("bad")).code, 2);
  EXPECT_FALSE(fs::exists(dir("bad")));
}

TEST_F(Cli, FreeGaussianEquivariancePasses) {
  const auto r = sh("run --scenario free_gaussian --check equivariance" + out("fg"));
  EXPECT_EQ(r.code, 0);
  const auto rep = report(dir("fg"));
  EXPECT_TRUE(rep["checks"]["equivariance"]["pass"].get<bool>());
  EXPECT_LE(rep["checks"]["equivariance"]["statistic"].get<double>(), 0.03);
  EXPECT_DOUBLE_EQ(rep["checks"]["equivariance"]["threshold"].get<double>(), 0.03);
  EXPECT_DOUBLE_EQ(rep["checks"]["equivariance"]["margin"].get<double>(), 0.0137);
  EXPECT_TRUE(rep["pass"].get<bool>());
  EXPECT_EQ(rep["config"]["ensemble"]["n"], 10000);
  EXPECT_EQ(rep["config"]["nsteps"], 2000);
}

TEST_F(Cli, SameSeedGivesIdenticalTrajectories) {
  ASSERT_EQ(sh(kSmall + " --seed 7" + out("a")).code, 0);
  ASSERT_EQ(sh(kSmall + " --seed 7" + out("b")).code, 0);
  ASSERT_EQ(sh(kSmall + " --seed 8" + out("c")).code, 0);
  EXPECT_EQ(slurp(dir("a") / "trajectories.csv"), slurp(dir("b") / "trajectories.csv"));
  EXPECT_EQ(slurp(dir("a") / "report.json"), slurp(dir("b") / "report.json"));
  EXPECT_NE(slurp(dir("a") / "trajectories.csv"), slurp(dir("c") / "trajectories.csv"));
  EXPECT_EQ(report(dir("a"))["seed"], 7);
}

TEST_F(Cli, OutputsIndependentOfWorkerCount) {
  const std::string args = "run -s measurement -n 400 --check born --check equivariance";
  ASSERT_EQ(sh(args + out("one"), "BOHM_WORKERS=1").code, 0);
  ASSERT_EQ(sh(args + out("many"), "BOHM_WORKERS=5").code, 0);
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(dir("one"))) names.insert(e.path().filename().string());
  EXPECT_EQ(names.size(), 5u);  // trajectories, three densities, report
  for (const auto& name : names) EXPECT_EQ(slurp(dir("one") / name), slurp(dir("many") / name)) << name;
}

TEST_F(Cli, CsvHeadersAndRoundTripDigits) {
  ASSERT_EQ(sh(kSmall + out("fg")).code, 0);
  EXPECT_EQ(first_line(dir("fg") / "trajectories.csv"), "sample_id,t,x");
  EXPECT_EQ(first_line(dir("fg") / "density_0.csv"), "x,rho");
  EXPECT_TRUE(fs::exists(dir("fg") / "density_0.2.csv"));
  // Density values parse back to the exact doubles.
  const auto rho = bohm::density(bohm::free_gaussian().psi0);
  std::ifstream in(dir("fg") / "density_0.csv");
  std::string line;
  std::getline(in, line);
  std::size_t i = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    ASSERT_LT(i, rho.values.size());
    EXPECT_EQ(std::strtod(line.c_str() + comma + 1, nullptr), rho.values[i]) << line;
    ++i;
  }
  EXPECT_EQ(i, rho.values.size());

  ASSERT_EQ(sh("run -s measurement -n 50" + out("m")).code, 0);
  EXPECT_EQ(first_line(dir("m") / "trajectories.csv"), "sample_id,t,x,y");
  EXPECT_EQ(first_line(dir("m") / "density_0.5.csv"), "x,y,rho");
}

TEST_F(Cli, TrajectoryCapAndHistograms) {
  ASSERT_EQ(sh(kSmall + " --trajectory-cap 7" + out("fg")).code, 0);
  std::ifstream in(dir("fg") / "trajectories.csv");
  std::string line;
  std::getline(in, line);
  std::set<std::string> ids;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ids.insert(line.substr(0, line.find(',')));
    ++rows;
  }
  EXPECT_EQ(ids.size(), 7u);
  EXPECT_EQ(rows, 7u * 201u);
  const auto rep = report(dir("fg"));
  EXPECT_EQ(rep["outputs"]["trajectory_count"], 7);
  ASSERT_EQ(rep["histograms"].size(), 2u);
  const auto& h = rep["histograms"][1];
  EXPECT_EQ(h["edges"].size(), 51u);
  double mass = 0.0;
  for (std::size_t k = 0; k < 50; ++k) {
    mass += h["density"][k].get<double>() * (h["edges"][k + 1].get<double>() - h["edges"][k].get<double>());
  }
  EXPECT_NEAR(mass, 1.0, 1e-12);
  EXPECT_EQ(rep["outputs"]["densities"].size(), 5u);
}

TEST_F(Cli, ConfigFileWithFlagOverridesAndReportReplay) {
  std::ofstream(dir("cfg.json")) << R"({
    "scenario": {"name": "free_gaussian", "params": {"sigma0": 1.5}},
    "nsteps": 100, "ensemble": {"n": 200, "seed": 3},
    "checks": ["continuity"], "output_dir": ")"
                                 << dir("from_file").string() << R"("})";
  ASSERT_EQ(sh("run --config " + dir("cfg.json").string() + " --seed 11").code, 0);
  const auto rep = report(dir("from_file"));
  EXPECT_EQ(rep["seed"], 11);
  EXPECT_EQ(rep["config"]["scenario"]["params"]["sigma0"], 1.5);
  EXPECT_EQ(rep["config"]["nsteps"], 100);
  EXPECT_TRUE(rep["checks"]["continuity"]["pass"].get<bool>());
  // The echoed parameters reproduce the run exactly.
  ASSERT_EQ(sh("run --config " + (dir("from_file") / "report.json").string() + out("replay")).code, 0);
  for (const auto& e : fs::directory_iterator(dir("from_file"))) {
    EXPECT_EQ(slurp(e.path()), slurp(dir("replay") / e.path().filename())) << e.path();
  }
}

TEST_F(Cli, FailingCheckExitsOne) {
  // After 0.01 time units the two packets have not yet overlapped.
  const auto r = sh("run -s two_slit --nsteps 40 --stride 4 -n 100 --check fringes --check no_crossing" + out("ts"));
  EXPECT_EQ(r.code, 1);
  const auto rep = report(dir("ts"));
  EXPECT_FALSE(rep["checks"]["fringes"]["pass"].get<bool>());
  EXPECT_EQ(rep["checks"]["fringes"]["maxima"], 2);
  EXPECT_TRUE(rep["checks"]["no_crossing"]["pass"].get<bool>());
  EXPECT_FALSE(rep["pass"].get<bool>());
}

}  // namespace
