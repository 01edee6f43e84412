#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rggloc/run.hpp"

using namespace rggloc;
namespace fs = std::filesystem;

namespace {

class RunTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rggloc_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_config(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  int run(const std::string& cmd, const std::string& config, const std::string& out, std::string* err = nullptr,
          std::optional<std::uint64_t> seed = std::nullopt) {
    CommandOptions o;
    o.out_dir = (dir_ / out).string();
    o.seed = seed;
    o.quiet = true;
    std::ostringstream so, se;
    const int code = run_command(cmd, config, o, so, se);
    if (err) *err = se.str();
    return code;
  }

  nlohmann::json read_json(const fs::path& p) {
    std::ifstream is(p);
    return nlohmann::json::parse(is);
  }

  fs::path dir_;
};

const char* kReference = R"({"model": {"n": 150, "r": 0.1, "d": 2, "norm": "L2"}, "grid": {"s": 5},
                            "sampler": {"replicas": 20}})";

}  // namespace

TEST(ParseConfig, RejectsEmptyAndMalformedDocuments) {
  EXPECT_THROW(parse_run_config("{}"), ConfigError);
  EXPECT_THROW(parse_run_config("not json"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"model": {"n": 10, "d": 2, "norm": "L2"}, "grid": {"s": 5}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"model": {"n": 10, "r": 0.1, "p_target": 1, "d": 2, "norm": "L2"},
                                    "grid": {"s": 5}})"),
               ConfigError);
  EXPECT_THROW(parse_run_config(R"({"model": {"n": 10, "r": 0.1, "d": 2, "norm": "L2", "radius": 1},
                                    "grid": {"s": 5}})"),
               ConfigError);
  EXPECT_THROW(parse_run_config(R"({"model": {"n": 10, "r": 0.1, "d": 2, "norm": "L7"}, "grid": {"s": 5}})"),
               ConfigError);
  EXPECT_THROW(parse_run_config(R"({"model": {"n": 10, "r": 0.1, "d": 2, "norm": "L2"}, "grid": {"s": 2.5}})"),
               ConfigError);
}

TEST(ParseConfig, FillsDefaults) {
  const RunConfig c = parse_run_config(kReference);
  EXPECT_EQ(c.n, 150.0);
  EXPECT_EQ(*c.r, 0.1);
  EXPECT_EQ(c.s, 5);
  EXPECT_EQ(c.replicas, 20u);
  EXPECT_EQ(c.method, "planted");
  EXPECT_EQ(c.seed, 1u);
  EXPECT_NEAR(c.params().r, 0.1, 0.0);
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_F(RunTest, EmptyConfigExitsWithConfigError) {
  std::string err;
  EXPECT_EQ(run("grid-info", write_config("empty.json", "{}"), "out", &err), kExitConfigError);
  EXPECT_NE(err.find("config"), std::string::npos);
  EXPECT_EQ(run("grid-info", (dir_ / "missing.json").string(), "out"), kExitConfigError);
  EXPECT_EQ(run("no-such-command", write_config("c.json", kReference), "out"), kExitConfigError);
}

TEST_F(RunTest, GridInfoReferenceValues) {
  ASSERT_EQ(run("grid-info", write_config("c.json", kReference), "out"), kExitOk);
  const auto j = read_json(dir_ / "out" / "grid_info.json");
  EXPECT_NEAR(j["derived"]["mu"].get<double>(), 353.429, 5e-4);
  EXPECT_EQ(j["derived"]["m"].get<int>(), 50);
  EXPECT_NEAR(j["derived"]["D"].get<double>(), 0.06, 1e-15);
  const auto m = read_json(dir_ / "out" / "manifest.json");
  EXPECT_EQ(m["schema"], "manifest.v1");
  ASSERT_EQ(m["files"].size(), 1u);
  EXPECT_EQ(m["files"][0]["sha256"], sha256_file((dir_ / "out" / "grid_info.json").string()));
}

TEST_F(RunTest, GridInfoLinfCliqueAndNeighbourhood) {
  const auto cfg = write_config("c.json", R"({"model": {"n": 400, "r": 0.15, "d": 2, "norm": "Linf"}, "grid": {"s": 3}})");
  ASSERT_EQ(run("grid-info", cfg, "out"), kExitOk);
  const auto j = read_json(dir_ / "out" / "grid_info.json");
  EXPECT_EQ(j["derived"]["tau_s"].get<int>(), 16);
  EXPECT_EQ(j["derived"]["nbhd_size"].get<int>(), 49);
}

TEST_F(RunTest, TooCoarseGridIsAConfigError) {
  std::string err;
  const auto cfg = write_config("c.json", R"({"model": {"n": 100, "r": 0.45, "d": 1, "norm": "L2"}, "grid": {"s": 3}})");
  EXPECT_EQ(run("grid-info", cfg, "out", &err), kExitConfigError);
  EXPECT_NE(err.find("coarse"), std::string::npos);
}

TEST_F(RunTest, PreconditionsCheckedBeforeSampling) {
  const auto cfg = write_config("c.json", R"({"model": {"n": 150, "r": 0.1, "d": 2, "norm": "L2"}, "grid": {"s": 5},
                                             "sampler": {"replicas": 20}, "conditioning": {"eps_tilde": 1.5}})");
  EXPECT_EQ(run("condition", cfg, "out"), kExitConfigError);
  EXPECT_FALSE(fs::exists(dir_ / "out"));
  // Importance sampling needs at least 100 replicas.
  EXPECT_EQ(run("tail", write_config("d.json", kReference), "out2"), kExitConfigError);
}

TEST_F(RunTest, SameSeedSameChecksums) {
  const auto cfg = write_config("c.json", kReference);
  ASSERT_EQ(run("simulate", cfg, "a", nullptr, 9), kExitOk);
  ASSERT_EQ(run("simulate", cfg, "b", nullptr, 9), kExitOk);
  ASSERT_EQ(run("simulate", cfg, "c", nullptr, 10), kExitOk);
  const auto a = read_json(dir_ / "a" / "manifest.json")["files"];
  const auto b = read_json(dir_ / "b" / "manifest.json")["files"];
  const auto c = read_json(dir_ / "c" / "manifest.json")["files"];
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i]["sha256"], b[i]["sha256"]) << a[i]["path"];
  }
  EXPECT_NE(a, c);
}

TEST_F(RunTest, ConditionAndExtractWriteTheirArtifacts) {
  const auto cfg = write_config("c.json", R"({"model": {"n": 100000, "p_target": 1, "d": 1, "norm": "Linf"},
                                             "grid": {"s": 5}, "sampler": {"replicas": 20, "store": 2}})");
  ASSERT_EQ(run("condition", cfg, "cond"), kExitOk);
  EXPECT_TRUE(fs::exists(dir_ / "cond" / "condition_profiles.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "cond" / "configs" / "cells_1.csv"));
  const auto summary = read_json(dir_ / "cond" / "condition_summary.json");
  EXPECT_GE(summary["thm2_pass_rate"].get<double>(), 0.9);

  CommandOptions o;
  o.out_dir = (dir_ / "ext").string();
  o.input = (dir_ / "cond" / "configs" / "cells_0.csv").string();
  o.quiet = true;
  std::ostringstream so, se;
  ASSERT_EQ(run_command("extract", cfg, o, so, se), kExitOk) << se.str();
  const auto rep = read_json(dir_ / "ext" / "extract_report.json");
  EXPECT_EQ(rep["cells"]["status"], "ok");
  EXPECT_TRUE(fs::exists(dir_ / "ext" / "heatmap.svg"));
}

TEST_F(RunTest, TailWritesTheConvergenceTable) {
  const auto cfg = write_config("c.json", R"({"model": {"n": 1000, "p_target": 1, "d": 1, "norm": "Linf"},
                                             "grid": {"s": 5}, "sampler": {"replicas": 100, "n_sweep": [1000, 3000]}})");
  ASSERT_EQ(run("tail", cfg, "tail"), kExitOk);
  std::ifstream is(dir_ / "tail" / "ldp_convergence.csv");
  std::string line;
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 3);
  const auto est = read_json(dir_ / "tail" / "tail_estimates.json");
  ASSERT_EQ(est.size(), 2u);
  EXPECT_EQ(est[0]["schema"], "tail_estimate.v1");
  EXPECT_TRUE(fs::exists(dir_ / "tail" / "ldp_trend.svg"));
}
