#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "commands.hpp"
#include "config.hpp"

namespace sontag::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  Result r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / fmt_name(info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static std::string fmt_name(const std::string& test) { return "sontag_cli_" + test; }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  static std::string read(const std::string& file) {
    std::ifstream in(file);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

double field(const std::string& text, const std::string& key) {
  const std::regex re("(^|\\n)" + key + " = ([^\\n ]+)");
  std::smatch m;
  if (!std::regex_search(text, m, re)) return std::nan("");
  return std::stod(m[2]);
}

bool has_line(const std::string& text, const std::string& line) {
  return ("\n" + text).find("\n" + line + "\n") != std::string::npos;
}

TEST_F(CliTest, SynthesizePendulumDefaults) {
  const Result r = invoke({"synthesize", "--out", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT(field(r.out, "are_residual"), 1e-8);
  EXPECT_TRUE(has_line(r.out, "closed_loop_hurwitz = true"));
  EXPECT_TRUE(fs::exists(path("o/effective_config.yaml")));
}

TEST_F(CliTest, SynthesizeDoubleIntegratorGain) {
  const std::string cfg = write("di.yaml",
                                "system:\n  type: lti\n  A: [[0, 1], [0, 0]]\n  B: [[0], [1]]\n");
  const Result r = invoke({"synthesize", "--config", cfg, "--out", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::regex re("\\nK = \\[([^,]+), ([^\\]]+)\\]");
  std::smatch m;
  ASSERT_TRUE(std::regex_search(r.out, m, re)) << r.out;
  EXPECT_NEAR(std::stod(m[1]), 1.0, 1e-9);
  EXPECT_NEAR(std::stod(m[2]), std::sqrt(3.0), 1e-9);
}

TEST_F(CliTest, UnstabilizableExitsWithThree) {
  const std::string cfg = write(
      "bad.yaml", "system:\n  type: lti\n  A: [[1, 0], [0, 1]]\n  B: [[0], [0]]\n");
  for (const char* cmd : {"synthesize", "simulate", "sweep", "roa"}) {
    const Result r = invoke({cmd, "--config", cfg, "--out", path("o")});
    EXPECT_EQ(r.code, 3) << cmd;
    EXPECT_NE(r.err.find("not stabilizable"), std::string::npos) << r.err;
  }
}

TEST_F(CliTest, ConfigErrorsExitWithTwo) {
  const std::string unknown = write("u.yaml", "system:\n  type: pendulum\n  masss: 2\n");
  Result r = invoke({"synthesize", "--config", unknown, "--out", path("o")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("masss"), std::string::npos) << r.err;

  const std::string malformed = write("m.yaml", "sim:\n  h: [0.01\n");
  r = invoke({"simulate", "--config", malformed, "--out", path("o")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line"), std::string::npos) << r.err;

  const std::string weights = write("w.yaml", "weights:\n  Q: [[1, 2], [2, 1]]\n");
  r = invoke({"synthesize", "--config", weights, "--out", path("o")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;

  const std::string mass = write("p.yaml", "system:\n  mass: -1\n");
  EXPECT_EQ(invoke({"synthesize", "--config", mass, "--out", path("o")}).code, 2);
  const std::string step = write("h.yaml", "sim:\n  h: 0\n");
  EXPECT_EQ(invoke({"simulate", "--config", step, "--out", path("o")}).code, 2);

  EXPECT_EQ(invoke({"synthesize", "--config", path("missing.yaml")}).code, 2);
  EXPECT_EQ(invoke({"simulate", "--design", "v", "--out", path("o")}).code, 2);
  EXPECT_EQ(invoke({"simulate", "--bogus"}).code, 2);
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"simulate", "--theta0-deg", "abc"}).code, 2);
}

TEST_F(CliTest, SimulateReportsOutcomes) {
  Result r = invoke({"simulate", "--design", "iv", "--theta0-deg", "25", "--out", path("a")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(has_line(r.out, "stabilized = true"));

  r = invoke({"simulate", "--design", "i", "--theta0-deg", "67", "--out", path("b")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(has_line(r.out, "stabilized = true"));
  EXPECT_LT(field(r.out, "max_decay_mismatch"), 5e-3);

  r = invoke({"simulate", "--design", "iv", "--theta0-deg", "67", "--out", path("c")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(has_line(r.out, "stabilized = false"));
}

TEST_F(CliTest, SimulateFromEquilibrium) {
  const Result r = invoke({"simulate", "--design", "i", "--theta0-deg", "0", "--out", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "J_quadratic"), 0.0);
  std::ifstream csv(path("o/trajectory.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "t,x1,x2,u1,V,lambda,flags");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    std::istringstream fields(line);
    std::string t;
    std::string x1;
    std::string x2;
    std::getline(fields, t, ',');
    std::getline(fields, x1, ',');
    std::getline(fields, x2, ',');
    EXPECT_EQ(std::stod(x1), 0.0);
    EXPECT_EQ(std::stod(x2), 0.0);
  }
  EXPECT_EQ(rows, 1501);
}

TEST_F(CliTest, SweepSummary) {
  const std::string cfg = write("s.yaml", "sweep:\n  n_angles: 12\n  theta_max_deg: 88\n");
  const Result r = invoke({"sweep", "--config", cfg, "--out", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "rows"), 12.0);
  std::ifstream csv(path("o/sweep.csv"));
  std::string header;
  std::string first;
  std::getline(csv, header);
  std::getline(csv, first);
  EXPECT_EQ(first, "0,0,0,0,1,1,1,1,1");
  EXPECT_GE(field(r.out, "first_lqr_failure_sontag_stable_deg"), 60.0);
}

TEST_F(CliTest, RoaPendulumAndLti) {
  Result r = invoke({"roa", "--out", path("p")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(has_line(r.out, "subset_holds = true"));
  EXPECT_GE(field(r.out, "C_sontag"), field(r.out, "C_lqr"));
  EXPECT_EQ(field(r.out, "grid_points"), 101.0 * 101.0);

  const std::string lti = write(
      "lti.yaml",
      "system:\n  type: lti\n  A: [[0, 1], [0, 0]]\n  B: [[0], [1]]\nroa:\n  lower: [-2, -2]\n"
      "  upper: [2, 2]\n  points: [41, 41]\n  C: 1\n");
  r = invoke({"roa", "--config", lti, "--out", path("l")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "members_lqr"), field(r.out, "members_sontag"));
  EXPECT_GT(field(r.out, "members_lqr"), 0.0);

  const std::string zero = write("z.yaml", "roa:\n  C: 0\n");
  r = invoke({"roa", "--config", zero, "--out", path("z")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "members_lqr"), 0.0);
  EXPECT_EQ(field(r.out, "members_sontag"), 0.0);
  EXPECT_TRUE(has_line(r.out, "subset_holds = true"));
}

TEST_F(CliTest, EffectiveConfigRoundTripsBitIdentically) {
  const std::string base = write(
      "base.yaml",
      "system:\n  mass: 0.7\n  length: 1.3\nsim:\n  N: 400\nsweep:\n  n_angles: 7\n"
      "roa:\n  points: [31, 31]\n");
  struct Case {
    std::vector<std::string> extra;
    std::string output;
  };
  const std::vector<Case> cases{
      {{"simulate", "--design", "ii", "--theta0-deg", "33.3", "--zoh", "--seed", "7"},
       "trajectory.csv"},
      {{"simulate", "--design", "iii", "--theta0-deg", "12.345678901234567"}, "trajectory.csv"},
      {{"sweep"}, "sweep.csv"},
      {{"roa"}, "roa.csv"},
  };
  int i = 0;
  for (const Case& c : cases) {
    const std::string first = path("first" + std::to_string(i));
    const std::string second = path("second" + std::to_string(i));
    ++i;
    std::vector<std::string> args = c.extra;
    args.insert(args.end(), {"--config", base, "--out", first});
    ASSERT_EQ(invoke(args).code, 0);
    const std::string effective = first + "/effective_config.yaml";
    ASSERT_EQ(invoke({c.extra.front(), "--config", effective, "--out", second}).code, 0);
    EXPECT_EQ(read(first + "/" + c.output), read(second + "/" + c.output)) << c.output;
    EXPECT_EQ(read(effective), read(second + "/effective_config.yaml"));
  }
}

TEST_F(CliTest, SeedIsRecorded) {
  ASSERT_EQ(invoke({"synthesize", "--seed", "1234", "--out", path("o")}).code, 0);
  EXPECT_NE(read(path("o/effective_config.yaml")).find("seed: 1234"), std::string::npos);
}

TEST_F(CliTest, RepeatedSweepsAreIdentical) {
  const std::string cfg = write("s.yaml", "sweep:\n  n_angles: 9\n  threads: 2\n");
  ASSERT_EQ(invoke({"sweep", "--config", cfg, "--seed", "5", "--out", path("a")}).code, 0);
  ASSERT_EQ(invoke({"sweep", "--config", cfg, "--seed", "5", "--out", path("b")}).code, 0);
  EXPECT_EQ(read(path("a/sweep.csv")), read(path("b/sweep.csv")));
}

TEST(ConfigParse, DefaultsAndOverrides) {
  const RunConfig d = parse_config("");
  EXPECT_EQ(d.sim.step, 0.01);
  EXPECT_EQ(d.sim.steps, 1500);
  EXPECT_EQ(d.sweep.n_angles, 1000);
  EXPECT_EQ(d.q, Matrix::Identity(2, 2));
  EXPECT_EQ(d.r, Matrix::Identity(1, 1));
  EXPECT_FALSE(d.roa.level.has_value());

  const RunConfig lti = parse_config(
      "system:\n  type: lti\n  A: [[0, 1, 0], [0, 0, 1], [0, 0, 0]]\n  B: [[0, 0], [0, 1], [1, 0]]\n");
  EXPECT_EQ(lti.q, Matrix::Identity(3, 3));
  EXPECT_EQ(lti.r, Matrix::Identity(2, 2));
  EXPECT_EQ(lti.sim.x0.size(), 3);
  EXPECT_EQ(lti.roa.grid.points_per_axis.size(), 3u);

  const RunConfig emitted = parse_config(emit_config(lti));
  EXPECT_EQ(emit_config(emitted), emit_config(lti));
}

}  // namespace
}  // namespace sontag::cli
