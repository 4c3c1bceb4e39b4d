#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "biofilm/cli.hpp"
#include "oracles.hpp"

using namespace biofilm;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "biofilm_cli");
  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Data rows (non-comment lines after the header), split on commas.
std::vector<std::vector<std::string>> rows(const fs::path &p) {
  std::ifstream in(p);
  std::string line;
  std::vector<std::vector<std::string>> out;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) continue;
    if (!header) {
      header = true;
      continue;
    }
    out.push_back(cli::split(line, ','));
  }
  return out;
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("biofilm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  fs::path dir;
};

} // namespace

TEST_F(CliTest, BvpLinearMatchesClosedForm) {
  const auto r = run({"bvp", "--h", "1", "--rate", "linear:1", "--n", "1024", "--out_dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const oracle::LinearBvp ex(1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
  const auto data = rows(dir / "bvp_profile.csv");
  ASSERT_EQ(data.size(), 1025u);
  for (const auto &row : data) {
    const double y = std::stod(row[0]), u = std::stod(row[1]);
    EXPECT_NEAR(u, ex.u(y), 1e-6) << "y = " << y;
  }
}

TEST_F(CliTest, TinyHeightGivesBulk) {
  const auto r = run({"bvp", "--h", "1e-6", "--out_dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto &row : rows(dir / "bvp_profile.csv")) EXPECT_NEAR(std::stod(row[1]), 1.0, 1e-5);
}

TEST_F(CliTest, ConfigErrorsExitOne) {
  EXPECT_EQ(run({"bvp", "--rate", "tanh:abc", "--out_dir", dir.string()}).code, 1);
  EXPECT_EQ(run({"bvp", "--rate", "sqrt:2", "--out_dir", dir.string()}).code, 1);
  EXPECT_EQ(run({"bvp", "--kappa", "-1", "--out_dir", dir.string()}).code, 1);
  EXPECT_EQ(run({"bvp", "--scheme", "rk4", "--out_dir", dir.string()}).code, 1);
  EXPECT_EQ(run({"bvp", "--bogus", "1"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  const fs::path cfg = dir / "bad.toml";
  std::ofstream(cfg) << "kappa = 1\nnot_a_key = 3\n";
  EXPECT_EQ(run({"bvp", "--config", cfg.string(), "--out_dir", dir.string()}).code, 1);
  EXPECT_FALSE(fs::exists(dir / "bvp_profile.csv"));
}

TEST_F(CliTest, ConfigEchoRoundTrips) {
  const auto a = run({"bvp", "--h", "0.7", "--rate", "monod:1.5:0.3", "--kappa", "0.8", "--n", "64", "--out_dir",
                      dir.string(), "--tag", "first"});
  ASSERT_EQ(a.code, 0) << a.err;
  const std::string first = slurp(dir / "first_profile.csv");
  // Rebuild the config file from the echoed header.
  std::istringstream lines(first);
  std::ofstream cfg(dir / "echo.toml");
  std::string line;
  std::getline(lines, line); // command line
  while (std::getline(lines, line) && line.rfind("# ", 0) == 0) cfg << line.substr(2) << "\n";
  cfg.close();
  const auto b = run({"bvp", "--config", (dir / "echo.toml").string(), "--out_dir", dir.string(), "--tag", "second"});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(first, slurp(dir / "second_profile.csv"));
  EXPECT_EQ(slurp(dir / "first_summary.csv"), slurp(dir / "second_summary.csv"));
}

TEST_F(CliTest, RepeatedRunsAreBitIdentical) {
  const std::vector<std::string> args{"quasisteady", "--h0", "2", "--t_end", "3", "--n", "64", "--out_dir",
                                      dir.string()};
  ASSERT_EQ(run(args).code, 0);
  const std::string first = slurp(dir / "quasisteady_trajectory.csv");
  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(first, slurp(dir / "quasisteady_trajectory.csv"));
}

TEST_F(CliTest, QuasiSteadyReportsExtinction) {
  const auto r = run({"quasisteady", "--growth", "affine:1:2", "--h0", "1", "--t_end", "80", "--n", "128",
                      "--out_dir", dir.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("status: extinct"), std::string::npos) << r.out;
  EXPECT_NE(slurp(dir / "quasisteady_trajectory.csv").find("# status: extinct"), std::string::npos);
}

TEST_F(CliTest, EvolveWritesTrajectoryAndProfiles) {
  const auto r = run({"evolve", "--h0", "1.5", "--t_end", "0.5", "--n", "32", "--output_interval", "0.1",
                      "--profiles", "--profile_stride", "1", "--scheme", "cn-ab2", "--out_dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(rows(dir / "evolve_trajectory.csv").size(), 6u);
  EXPECT_EQ(rows(dir / "evolve_profiles.csv").size(), 6u * 33u);
}

TEST_F(CliTest, EquilibriumExitCodes) {
  const auto none = run({"equilibrium", "--growth", "affine:1:2", "--out_dir", dir.string()});
  EXPECT_EQ(none.code, 3);
  EXPECT_NE(none.out.find("no-equilibrium"), std::string::npos);
  const auto found = run({"equilibrium", "--out_dir", dir.string()});
  ASSERT_EQ(found.code, 0) << found.err;
  const auto data = rows(dir / "equilibrium_equilibrium.csv");
  ASSERT_EQ(data.size(), 1u);
  const double he = std::stod(data[0][1]), delta = std::stod(data[0][8]);
  EXPECT_EQ(data[0][4], "1");
  EXPECT_LE(delta, 1e-8 * he);
}

TEST_F(CliTest, VerifySelectedCheck) {
  const auto r = run({"verify", "small_h", "--out_dir", dir.string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "verify_verify.csv"));
  EXPECT_EQ(run({"verify", "nonsense", "--out_dir", dir.string()}).code, 1);
}

TEST_F(CliTest, SweepIsIndependentOfJobCount) {
  const std::vector<std::string> base{"sweep", "--sweep_param", "b", "--sweep_values", "0.3,0.5,0.8,2",
                                      "--out_dir", dir.string()};
  auto args1 = base, args2 = base;
  args1.insert(args1.end(), {"--jobs", "1", "--tag", "one"});
  args2.insert(args2.end(), {"--jobs", "2", "--tag", "two"});
  ASSERT_EQ(run(args1).code, 0);
  ASSERT_EQ(run(args2).code, 0);
  const auto a = rows(dir / "one_sweep.csv"), b = rows(dir / "two_sweep.csv");
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 4u);
  EXPECT_EQ(a[3][1], "no-equilibrium");
  EXPECT_EQ(run({"sweep", "--sweep_param", "zeta", "--sweep_values", "1", "--out_dir", dir.string()}).code, 1);
}

TEST_F(CliTest, OutDirFromEnvironment) {
  ::setenv("BIOFILM_OUT_DIR", dir.string().c_str(), 1);
  const auto r = run({"bvp", "--n", "16"});
  ::unsetenv("BIOFILM_OUT_DIR");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "bvp_summary.csv"));
}

TEST(CliParse, RateAndGrowthSpecs) {
  EXPECT_EQ(cli::parse_rate("tanh:2").spec(), RateModel::tanh(2.0).spec());
  EXPECT_EQ(cli::parse_rate("monod:1:0.5").spec(), RateModel::monod(1.0, 0.5).spec());
  EXPECT_EQ(cli::parse_growth("affine:1:0.5").spec(), "affine:1:0.5");
  EXPECT_EQ(cli::parse_growth("const:-1").spec(), "const:-1");
  EXPECT_THROW(cli::parse_rate("tanh"), InvalidInput);
  EXPECT_THROW(cli::parse_rate("table:0/0,1"), InvalidInput);
  EXPECT_THROW(cli::parse_number("1.5x", "t"), InvalidInput);
}

TEST_F(CliTest, SweepConfigFileRoundTrips) {
  const fs::path cfg = dir / "sweep.toml";
  std::ofstream(cfg) << "sweep_param = \"h\"\nsweep_values = [0.5, 1, 2]\nsweep_task = \"bvp\"\nn = 64\n";
  ASSERT_EQ(run({"sweep", "--config", cfg.string(), "--out_dir", dir.string(), "--tag", "a"}).code, 0);
  const std::string first = slurp(dir / "a_sweep.csv");
  EXPECT_NE(first.find("# sweep_values = [0.5, 1, 2]"), std::string::npos);
  EXPECT_EQ(rows(dir / "a_sweep.csv").size(), 3u);
}
