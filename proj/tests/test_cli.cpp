#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "recourse/cli.hpp"
#include "recourse/json_util.hpp"
#include "test_util.hpp"

namespace recourse {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "recourse");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    dir_ = new std::filesystem::path(testing::scratch_dir("cli"));
    const auto r = run({"train", "--data", "synthetic:linearly_separable", "--model", "linear", "--seed", "1", "-o",
                        path("linear.json")});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() { delete dir_; }
  static std::string path(const std::string& name) { return (*dir_ / name).string(); }
  static inline std::filesystem::path* dir_ = nullptr;
};

TEST_F(CliTest, TrainPrintsAccuracy) {
  const auto r = run({"train", "--data", "synthetic:linearly_separable", "--model", "linear", "--seed", "1", "-o",
                      path("again.json")});
  ASSERT_EQ(r.code, 0);
  const auto pos = r.out.find("accuracy=");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_GE(std::stod(r.out.substr(pos + 9)), 0.95);
  EXPECT_EQ(read_file(path("again.json")), read_file(path("linear.json")));
}

TEST_F(CliTest, GenerateEvaluateAndPlot) {
  const auto g = run({"generate", "--data", "synthetic:linearly_separable", "--model", path("linear.json"),
                      "--generator", "generic", "--count", "3", "--seed", "2", "-o", path("ex.json")});
  ASSERT_EQ(g.code, 0) << g.err;
  const auto doc = nlohmann::json::parse(read_file(path("ex.json")));
  ASSERT_EQ(doc["explanations"].size(), 3u);
  for (const auto& e : doc["explanations"]) EXPECT_TRUE(e["valid"].get<bool>());

  const auto ev = run({"evaluate", "--data", "synthetic:linearly_separable", "--model", path("linear.json"),
                       "--explanations", path("ex.json"), "--measure", "distance_mad", "-o", path("report.csv")});
  ASSERT_EQ(ev.code, 0) << ev.err;
  const auto csv = read_file(path("report.csv"));
  EXPECT_NE(csv.substr(0, csv.find('\n')).find("distance_mad"), std::string::npos);

  const auto p = run({"plot", "--data", "synthetic:linearly_separable", "--model", path("linear.json"),
                      "--explanations", path("ex.json"), "--grid", "20", "-o", path("plot")});
  ASSERT_EQ(p.code, 0) << p.err;
  const auto grid = read_file(path("plot_grid.csv"));
  EXPECT_EQ(std::count(grid.begin(), grid.end(), '\n'), 401);
  EXPECT_NE(read_file(path("plot.svg")).find("<polyline"), std::string::npos);
}

TEST_F(CliTest, DiceWritesFiveCounterfactuals) {
  const auto g = run({"generate", "--data", "synthetic:linearly_separable", "--model", path("linear.json"),
                      "--generator", "dice", "--num-counterfactuals", "5", "--index", "1", "--target", "1", "-o",
                      path("dice.json")});
  ASSERT_NE(g.code, 2) << g.err;
  const auto doc = nlohmann::json::parse(read_file(path("dice.json")));
  EXPECT_EQ(doc["explanations"][0]["counterfactuals"].size(), 5u);
}

TEST_F(CliTest, MutabilityFlagKeepsFeatureFixed) {
  const auto g = run({"generate", "--data", "synthetic:linearly_separable", "--model", path("linear.json"),
                      "--mutability", "none,both", "--count", "4", "--max-iter", "200", "-o", path("mut.json")});
  ASSERT_NE(g.code, 2) << g.err;
  const auto doc = nlohmann::json::parse(read_file(path("mut.json")));
  for (const auto& e : doc["explanations"]) {
    const double x0 = e["factual"][0].get<double>();
    for (const auto& step : e["path"]) {
      for (const auto& row : step) EXPECT_EQ(row[0].get<double>(), x0);
    }
  }
}

TEST_F(CliTest, InvalidExplanationExitsOne) {
  const auto g = run({"generate", "--data", "synthetic:linearly_separable", "--model", path("linear.json"),
                      "--mutability", "none,none", "--count", "1", "--max-iter", "5", "-o", path("stuck.json")});
  EXPECT_EQ(g.code, kExitSearchFailed);
}

TEST_F(CliTest, BenchmarkIsByteIdentical) {
  const std::vector<std::string> args = {"benchmark", "--data", "synthetic:linearly_separable:300", "--model",
                                         path("linear.json"), "--generator", "generic", "--generator",
                                         "growing_spheres", "--samples", "5", "--seed", "4"};
  auto a = args, b = args;
  a.insert(a.end(), {"-o", path("b1")});
  b.insert(b.end(), {"-o", path("b2"), "--threads", "3"});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  EXPECT_EQ(read_file(path("b1.csv")), read_file(path("b2.csv")));
  const auto summary = read_file(path("b1_tradeoff.csv"));
  EXPECT_NE(summary.find("generic"), std::string::npos);
  EXPECT_NE(summary.find("growing_spheres"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(path("b1.json")));
}

TEST_F(CliTest, ErrorsExitTwo) {
  EXPECT_EQ(run({"train", "--data", path("missing.csv"), "--target-column", "y", "-o", path("x.json")}).code,
            kExitUsage);
  EXPECT_FALSE(std::filesystem::exists(path("x.json")));
  EXPECT_EQ(run({"generate", "--data", "synthetic:linearly_separable", "--model", path("nope.json")}).code, kExitUsage);
  EXPECT_EQ(run({"generate", "--data", "synthetic:spirals", "--model", path("linear.json")}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"train", "--epochs", "many"}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);

  write_file_atomic(path("empty.json"), R"({"explanations": []})");
  EXPECT_EQ(run({"evaluate", "--data", "synthetic:linearly_separable", "--model", path("linear.json"),
                 "--explanations", path("empty.json")})
                .code,
            kExitUsage);
  const auto bad = run({"generate", "--data", "synthetic:linearly_separable", "--model", path("linear.json"),
                        "--mutability", "none", "-o", path("y.json")});
  EXPECT_EQ(bad.code, kExitUsage);
  EXPECT_NE(bad.err.find("mutability"), std::string::npos);
}

TEST_F(CliTest, SeedFallsBackToEnvironment) {
  const std::vector<std::string> base = {"generate", "--data", "synthetic:linearly_separable", "--model",
                                         path("linear.json"), "--count", "2"};
  auto with_flag = base;
  with_flag.insert(with_flag.end(), {"--seed", "17", "-o", path("s1.json")});
  ASSERT_EQ(run(with_flag).code, 0);
  ::setenv("RECOURSE_SEED", "17", 1);
  auto with_env = base;
  with_env.insert(with_env.end(), {"-o", path("s2.json")});
  const int code = run(with_env).code;
  ::unsetenv("RECOURSE_SEED");
  ASSERT_EQ(code, 0);
  EXPECT_EQ(read_file(path("s1.json")), read_file(path("s2.json")));
}

}  // namespace
}  // namespace recourse
