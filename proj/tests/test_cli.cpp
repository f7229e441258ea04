#include "hkcg/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

namespace hkcg {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hkcg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  const Result r = run({"sample", "--no-such-flag", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({"sample", "--grid", "abc"}).code, 2);
}

TEST_F(Cli, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, 0); }

TEST_F(Cli, AliasingIsPreconditionError) {
  const Result r = run({"sample", "--modes", "33", "--grid", "64", "--out", path("s")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("aliasing"), std::string::npos);
  EXPECT_NE(r.err.find("2*M_max"), std::string::npos);
  EXPECT_EQ(run({"sample", "--grid", "48", "--out", path("s")}).code, 1);
  EXPECT_EQ(run({"sample", "--steps", "0", "--out", path("s")}).code, 1);
  EXPECT_EQ(run({"verify", "--check", "nonsense"}).code, 1);
}

TEST_F(Cli, VerifyDriftIsDeterministic) {
  const Result a = run({"verify", "--check", "drift", "--seed", "7"});
  const Result b = run({"verify", "--check", "drift", "--seed", "7"});
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_EQ(j[0]["name"], "drift");
  EXPECT_TRUE(j[0]["pass"].get<bool>());
}

TEST_F(Cli, EnsembleEqualsConcatenatedSamples) {
  const std::vector<std::string> common{"--grid", "16", "--modes", "4", "--steps", "8", "--seed", "7"};
  auto with = [&](std::vector<std::string> head) {
    head.insert(head.end(), common.begin(), common.end());
    return head;
  };
  ASSERT_EQ(run(with({"ensemble", "--samples", "4", "--out", path("ens")})).code, 0);
  std::string joined;
  for (int i = 0; i < 4; ++i) {
    const std::string out = path("s" + std::to_string(i));
    ASSERT_EQ(run(with({"sample", "--stream", std::to_string(i), "--out", out})).code, 0);
    joined += slurp(out + ".f64le");
  }
  EXPECT_EQ(slurp(path("ens.f64le")), joined);
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  {
    std::ofstream cfg(path("cfg.json"));
    cfg << R"({"grid": 16, "modes": 4, "steps": 5, "seed": 3, "samples": 2})";
  }
  ASSERT_EQ(run({"ensemble", "--config", path("cfg.json"), "--seed", "9", "--out", path("e")}).code, 0);
  const auto m = nlohmann::json::parse(slurp(path("e.json")));
  EXPECT_EQ(m["P"], 16);
  EXPECT_EQ(m["M_max"], 4);
  EXPECT_EQ(m["n_steps"], 5);
  EXPECT_EQ(m["n_samples"], 2);
  EXPECT_EQ(m["seed"], 9);
  {
    std::ofstream cfg(path("bad.json"));
    cfg << R"({"gird": 16})";
  }
  const Result r = run({"ensemble", "--config", path("bad.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("gird"), std::string::npos);
}

TEST_F(Cli, ExtendWritesLatticeAndCentral) {
  {
    std::ofstream cfg(path("cfg.json"));
    cfg << R"({"grid": 8, "modes": 2, "steps": 2, "samples": 3,
              "lattice": [2, 0, 0, 0, 1, 0, 0, 0, 1]})";
  }
  ASSERT_EQ(run({"extend", "--config", path("cfg.json"), "--out", path("x")}).code, 0);
  const auto m = nlohmann::json::parse(slurp(path("x.json")));
  EXPECT_EQ(m["lattice"].size(), 9u);
  ASSERT_EQ(m["central"].size(), 3u);
  for (const auto& z : m["central"])
    for (double c : z) {
      EXPECT_GE(c, 0.0);
      EXPECT_LT(c, 1.0);
    }
  {
    std::ofstream cfg(path("bad.json"));
    cfg << R"({"grid": 8, "modes": 2, "lattice": [1, 2, 2, 4, 0, 0, 0, 0, 0]})";
  }
  EXPECT_EQ(run({"extend", "--config", path("bad.json"), "--out", path("y")}).code, 1);
}

TEST_F(Cli, CocycleOnFieldFiles) {
  const int p_axis = 16;
  nlohmann::json eta, eta1;
  std::vector<double> a, b;
  for (int p = 0; p < p_axis; ++p) {
    const double x = 2.0 * 3.141592653589793 * p / p_axis;
    for (double v : {std::cos(x), 0.0, 0.0}) a.push_back(v);
    for (double v : {std::sin(x), 0.0, 0.0}) b.push_back(v);
  }
  for (auto* j : {&eta, &eta1}) {
    (*j)["dim"] = 1;
    (*j)["grid"] = p_axis;
    (*j)["group_n"] = 2;
  }
  eta["values"] = a;
  eta1["values"] = b;
  std::ofstream(path("eta.json")) << eta.dump();
  std::ofstream(path("eta1.json")) << eta1.dump();
  const Result r = run({"cocycle", "--eta", path("eta.json"), "--eta1", path("eta1.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  // kappa(T_1, T_1) / 2 = -1 for SU(2).
  EXPECT_NEAR(j["coords"][0].get<double>(), -1.0, 1e-12);
  EXPECT_EQ(run({"cocycle", "--eta", path("eta.json")}).code, 2);
  EXPECT_EQ(run({"cocycle", "--eta", path("eta.json"), "--eta1", path("missing.json")}).code, 1);
}

TEST_F(Cli, VerifyReportWrittenToOut) {
  const Result r = run({"verify", "--check", "cocycle", "--out", path("r.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(slurp(path("r.json")), r.out);
}

}  // namespace
}  // namespace hkcg
