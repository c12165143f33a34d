#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lutkan/artifact_io.hpp"
#include "lutkan/sweep.hpp"

using namespace lutkan;
namespace fs = std::filesystem;

namespace {

std::string slurp_text(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepConfig tiny_config() {
  SweepConfig c;
  c.Ls = {8};
  c.schemes = {Scheme::Symmetric};
  c.boundary_modes = {BoundaryMode::Closed};
  c.oob_policies = {OobPolicy::ClipX};
  c.seeds = {0, 1};
  c.n_samples = 128;
  c.in_dim = 3;
  c.out_dim = 2;
  c.segments = 4;
  c.degree = 3;
  c.with_speed = false;
  return c;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_sweep_config(R"({
    "Ls": [16, 32],
    "schemes": ["asymmetric"],
    "boundary_modes": ["half_open"],
    "oob_policies": ["zero_spline", "clip_x"],
    "seeds": [5],
    "n_samples": 99,
    "param_dtype": "f16",
    "with_speed": false
  })");
  REQUIRE_EQ(c.Ls.size(), 2);
  CHECK_EQ(c.Ls[1], 32);
  REQUIRE_EQ(c.schemes.size(), 1);
  CHECK(c.schemes[0] == Scheme::Asymmetric);
  CHECK(c.param_dtype == ParamDtype::F16);
  CHECK_EQ(c.n_samples, 99);
  CHECK_FALSE(c.with_speed);
  CHECK_EQ(c.in_dim, 10);  // untouched keys keep their defaults

  CHECK_THROWS_AS(parse_sweep_config(R"({"L": [16]})"), ConfigError);       // unknown key
  CHECK_THROWS_AS(parse_sweep_config(R"({"Ls": []})"), ConfigError);        // empty axis
  CHECK_THROWS_AS(parse_sweep_config(R"({"schemes": ["x"]})"), ConfigError);
  CHECK_THROWS_AS(parse_sweep_config("[1,2]"), ConfigError);
}

TEST_CASE("sweep runs, resumes, and collects") {
  const auto root = fs::temp_directory_path() / "lutkan_test_sweep" / "runs";
  const auto tables = fs::temp_directory_path() / "lutkan_test_sweep" / "tables";
  fs::remove_all(root.parent_path());

  const auto cfg = tiny_config();
  std::ostringstream log;
  const auto s1 = run_sweep(cfg, root, &log);
  CHECK_EQ(s1.n_total, 2);
  CHECK_EQ(s1.n_run, 2);
  CHECK_EQ(s1.n_skipped, 0);
  CHECK_EQ(s1.n_failed, 0);

  const auto cell = root / "L8_symmetric_closed_clip_x";
  for (int seed : {0, 1}) {
    const auto d = cell / ("seed" + std::to_string(seed));
    CHECK(fs::exists(d / "config.json"));
    CHECK(fs::exists(d / "artifact.lut"));
    CHECK(fs::exists(d / "manifest.json"));
    CHECK(fs::exists(d / "report.json"));
    CHECK_FALSE(fs::exists(d / "bench_scalar.json"));  // speed was off
    CHECK_EQ(read_report_kind(d / "report.json"), "eval");
    const auto r = load_eval_report(d / "report.json");
    CHECK_EQ(r.seed, static_cast<std::uint64_t>(seed));
    CHECK_EQ(r.n_samples, 128);
    CHECK_GT(r.mae_inrange, 0.0);
    const auto a = load_artifact(d / "artifact.lut");
    CHECK_EQ(a.L, 8);
    CHECK_EQ(a.in_dim, 3);
  }

  // a second run only skips
  const auto s2 = run_sweep(cfg, root, nullptr);
  CHECK_EQ(s2.n_total, 2);
  CHECK_EQ(s2.n_run, 0);
  CHECK_EQ(s2.n_skipped, 2);

  collect_results(root, tables);
  for (const char* name : {"accuracy.csv", "oob_matrix.csv", "memory.csv", "speed_scalar.csv",
                           "speed_optimized.csv"}) {
    CHECK(fs::exists(tables / name));
  }
  const auto acc = slurp_text(tables / "accuracy.csv");
  CHECK(acc.find("L,scheme,boundary_mode,oob_policy,n_seeds") == 0);
  CHECK(acc.find("8,symmetric,closed,clip_x,2,") != std::string::npos);
  // closed + clipped inputs: the OOB columns have no data
  const auto oob = slurp_text(tables / "oob_matrix.csv");
  CHECK(oob.find("8,symmetric,closed,clip_x,2,0,,,,,,,,") != std::string::npos);
  // speed was not run: rows exist with empty metrics
  const auto spd = slurp_text(tables / "speed_optimized.csv");
  CHECK(spd.find("8,symmetric,closed,clip_x,0,,,,,,,") != std::string::npos);

  // collection is idempotent byte for byte
  collect_results(root, tables);
  CHECK_EQ(slurp_text(tables / "accuracy.csv"), acc);
  CHECK_EQ(slurp_text(tables / "oob_matrix.csv"), oob);

  fs::remove_all(root.parent_path());
}

TEST_CASE("a broken cell fails alone") {
  const auto root = fs::temp_directory_path() / "lutkan_test_sweep_fail" / "runs";
  const auto tables = fs::temp_directory_path() / "lutkan_test_sweep_fail" / "tables";
  fs::remove_all(root.parent_path());

  auto cfg = tiny_config();
  cfg.Ls = {1, 8};  // L = 1 cannot compile
  cfg.seeds = {0};
  std::ostringstream log;
  const auto s = run_sweep(cfg, root, &log);
  CHECK_EQ(s.n_total, 2);
  CHECK_EQ(s.n_run, 1);
  CHECK_EQ(s.n_failed, 1);

  const auto bad = root / "L1_symmetric_closed_clip_x" / "seed0" / "report.json";
  REQUIRE(fs::exists(bad));
  CHECK_EQ(read_report_kind(bad), "error");
  const auto good = root / "L8_symmetric_closed_clip_x" / "seed0" / "report.json";
  CHECK_EQ(read_report_kind(good), "eval");

  // the collector keeps going and only tabulates the healthy cell
  collect_results(root, tables);
  const auto acc = slurp_text(tables / "accuracy.csv");
  CHECK(acc.find("8,symmetric,") != std::string::npos);
  CHECK_EQ(acc.find("1,symmetric,"), std::string::npos);

  fs::remove_all(root.parent_path());
}

TEST_CASE("speed-enabled sweep writes bench reports") {
  const auto root = fs::temp_directory_path() / "lutkan_test_sweep_speed" / "runs";
  fs::remove_all(root.parent_path());

  auto cfg = tiny_config();
  cfg.seeds = {0};
  cfg.with_speed = true;
  cfg.bench_batch = 64;
  cfg.bench_warmup_iters = 1;
  cfg.bench_timed_iters = 3;
  const auto s = run_sweep(cfg, root, nullptr);
  CHECK_EQ(s.n_run, 1);

  const auto d = root / "L8_symmetric_closed_clip_x" / "seed0";
  for (const char* name : {"bench_scalar.json", "bench_optimized.json"}) {
    REQUIRE(fs::exists(d / name));
    const auto b = load_bench_report(d / name);
    CHECK_EQ(b.batch, 64);
    CHECK_EQ(b.timed_iters, 3);
    CHECK_GT(b.speedup, 0.0);
    CHECK_GT(b.lut_ms_mean, 0.0);
  }
  CHECK(load_bench_report(d / "bench_scalar.json").tier == Tier::Scalar);
  CHECK(load_bench_report(d / "bench_optimized.json").tier == Tier::Optimized);

  const auto tables = root.parent_path() / "tables";
  collect_results(root, tables);
  const auto spd = slurp_text(tables / "speed_scalar.csv");
  CHECK(spd.find("8,symmetric,closed,clip_x,1,") != std::string::npos);

  fs::remove_all(root.parent_path());
}
