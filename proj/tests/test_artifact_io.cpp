#include <doctest.h>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "detail/zip.hpp"
#include "lutkan/artifact_io.hpp"
#include "lutkan/compiler.hpp"
#include "lutkan/model_gen.hpp"

using namespace lutkan;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir() {
  const auto d = fs::temp_directory_path() / "lutkan_test_io";
  fs::create_directories(d);
  return d;
}

std::vector<std::uint8_t> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

LutLayerArtifact sample_artifact(Scheme scheme, ValueRepr repr, ParamDtype pd, BoundaryMode bm,
                                 OobPolicy op, std::uint64_t seed = 3) {
  QuantConfig cfg;
  cfg.samples_per_segment = 16;
  cfg.scheme = scheme;
  cfg.dtype = scheme == Scheme::Symmetric ? Dtype::Int8 : Dtype::Uint8;
  cfg.value_repr = repr;
  cfg.param_dtype = pd;
  return compile_layer(gen_layer(seed, 3, 2, 4, 3), cfg, {bm, op});
}

// Unpack a saved artifact, let the caller rewrite the manifest, repack.
void edit_manifest(const fs::path& src, const fs::path& dst, void (*mutate)(json&)) {
  auto entries = detail::zip_unpack(slurp(src));
  for (auto& e : entries) {
    if (e.name != "manifest.json") continue;
    json j = json::parse(std::string(e.data.begin(), e.data.end()));
    mutate(j);
    const std::string text = j.dump();
    e.data.assign(text.begin(), text.end());
  }
  spit(dst, detail::zip_pack(entries));
}

}  // namespace

TEST_CASE("save then load restores every stored field") {
  const auto dir = scratch_dir();
  int n = 0;
  for (auto scheme : {Scheme::Symmetric, Scheme::Asymmetric})
    for (auto repr : {ValueRepr::Phi, ValueRepr::SplineComponent})
      for (auto pd : {ParamDtype::F32, ParamDtype::F16})
        for (auto bm : {BoundaryMode::HalfOpen, BoundaryMode::Closed}) {
          const auto a = sample_artifact(scheme, repr, pd, bm, OobPolicy::ZeroSpline);
          const auto path = dir / ("rt" + std::to_string(n++) + ".lut");
          save_artifact(a, path);
          const auto b = load_artifact(path);
          CHECK_EQ(b.format_version, a.format_version);
          CHECK_EQ(b.in_dim, a.in_dim);
          CHECK_EQ(b.out_dim, a.out_dim);
          CHECK_EQ(b.L, a.L);
          CHECK(b.value_repr == a.value_repr);
          CHECK(b.scheme == a.scheme);
          CHECK(b.dtype == a.dtype);
          CHECK(b.param_dtype == a.param_dtype);
          CHECK(b.oob.boundary_mode == a.oob.boundary_mode);
          CHECK(b.oob.oob_policy == a.oob.oob_policy);
          CHECK_EQ(b.base_kind, a.base_kind);
          CHECK(b.knots == a.knots);
          CHECK(b.q_table == a.q_table);
          CHECK(b.scale == a.scale);
          CHECK(b.y_min == a.y_min);
          CHECK(b.edge_base_scale == a.edge_base_scale);
          CHECK(b.edge_spline_scale == a.edge_spline_scale);
          CHECK(b.edge_out_scale == a.edge_out_scale);
          CHECK(b.knots_f64 == a.knots_f64);
        }
}

TEST_CASE("saving is deterministic and drops debug tables") {
  const auto dir = scratch_dir();
  QuantConfig cfg;
  cfg.samples_per_segment = 8;
  const auto layer = gen_layer(5, 2, 2, 3, 2);
  const auto dbg = compile_layer_debug_float(layer, cfg, OobConfig{});
  save_artifact(dbg, dir / "a1.lut");
  save_artifact(dbg, dir / "a2.lut");
  CHECK(slurp(dir / "a1.lut") == slurp(dir / "a2.lut"));
  const auto back = load_artifact(dir / "a1.lut");
  CHECK(back.float_table.empty());
  CHECK(back.q_table == dbg.q_table);
}

TEST_CASE("manifest declares dims, enums, and blob shapes") {
  const auto a = sample_artifact(Scheme::Asymmetric, ValueRepr::SplineComponent, ParamDtype::F16,
                                 BoundaryMode::HalfOpen, OobPolicy::ClipX);
  const json j = json::parse(artifact_manifest_json(a));
  CHECK_EQ(j.at("format_version"), "lutkan/1");
  CHECK_EQ(j.at("in_dim"), 3);
  CHECK_EQ(j.at("out_dim"), 2);
  CHECK_EQ(j.at("segments"), 4);
  CHECK_EQ(j.at("L"), 16);
  CHECK_EQ(j.at("scheme"), "asymmetric");
  CHECK_EQ(j.at("dtype"), "uint8");
  CHECK_EQ(j.at("value_repr"), "spline_component");
  CHECK_EQ(j.at("param_dtype"), "f16");
  CHECK_EQ(j.at("boundary_mode"), "half_open");
  CHECK_EQ(j.at("oob_policy"), "clip_x");
  CHECK_EQ(j.at("base_kind"), "silu");
  const auto& q = j.at("blobs").at("q_table");
  CHECK_EQ(q.at("dtype"), "uint8");
  CHECK_EQ(q.at("shape"), json({6, 4, 16}));
  CHECK_EQ(j.at("blobs").at("scale").at("dtype"), "f16");

  const auto phi = sample_artifact(Scheme::Symmetric, ValueRepr::Phi, ParamDtype::F32,
                                   BoundaryMode::Closed, OobPolicy::ClipX);
  const json pj = json::parse(artifact_manifest_json(phi));
  CHECK_FALSE(pj.contains("base_kind"));
  CHECK_FALSE(pj.at("blobs").contains("edge_out_scale"));
}

TEST_CASE("archive stores one raw blob per array with exact byte counts") {
  const auto dir = scratch_dir();
  const auto a = sample_artifact(Scheme::Symmetric, ValueRepr::SplineComponent, ParamDtype::F32,
                                 BoundaryMode::Closed, OobPolicy::ClipX);
  save_artifact(a, dir / "blob.lut");
  const auto entries = detail::zip_unpack(slurp(dir / "blob.lut"));
  REQUIRE_EQ(entries[0].name, "manifest.json");  // manifest first, blobs sorted
  std::size_t q_bytes = 0, scale_bytes = 0;
  for (const auto& e : entries) {
    if (e.name == "q_table.bin") q_bytes = e.data.size();
    if (e.name == "scale.bin") scale_bytes = e.data.size();
  }
  CHECK_EQ(q_bytes, 6u * 4u * 16u);
  CHECK_EQ(scale_bytes, 6u * 4u * 4u);
}

TEST_CASE("truncated archives raise typed errors") {
  const auto dir = scratch_dir();
  const auto a = sample_artifact(Scheme::Symmetric, ValueRepr::Phi, ParamDtype::F32,
                                 BoundaryMode::Closed, OobPolicy::ClipX);
  const auto path = dir / "trunc.lut";
  save_artifact(a, path);
  const auto bytes = slurp(path);
  for (std::size_t len : {std::size_t(0), std::size_t(1), std::size_t(4), std::size_t(22),
                          bytes.size() / 3, bytes.size() / 2, bytes.size() - 1}) {
    spit(dir / "cut.lut", {bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(len)});
    CHECK_THROWS_AS(load_artifact(dir / "cut.lut"), IoError);
  }
  spit(dir / "junk.lut", {'h', 'e', 'l', 'l', 'o', '!'});
  CHECK_THROWS_AS(load_artifact(dir / "junk.lut"), CorruptArchiveError);
  CHECK_THROWS_AS(load_artifact(dir / "no_such_file.lut"), IoError);
}

TEST_CASE("bit flips are either caught or harmless, never fatal") {
  const auto dir = scratch_dir();
  const auto a = sample_artifact(Scheme::Asymmetric, ValueRepr::SplineComponent, ParamDtype::F32,
                                 BoundaryMode::HalfOpen, OobPolicy::ZeroSpline);
  const auto path = dir / "flip.lut";
  save_artifact(a, path);
  const auto clean = slurp(path);
  int caught = 0;
  for (std::size_t off = 0; off < clean.size(); off += 7) {
    auto bytes = clean;
    bytes[off] ^= 0x40;
    spit(dir / "flipped.lut", bytes);
    try {
      (void)load_artifact(dir / "flipped.lut");
    } catch (const Error&) {
      ++caught;  // every library failure is a typed error
    }
  }
  CHECK_GT(caught, 0);  // the checksums actually fire
}

TEST_CASE("manifest corruption maps to specific error types") {
  const auto dir = scratch_dir();
  const auto a = sample_artifact(Scheme::Symmetric, ValueRepr::SplineComponent, ParamDtype::F32,
                                 BoundaryMode::Closed, OobPolicy::ClipX);
  const auto src = dir / "base.lut";
  const auto bad = dir / "bad.lut";
  save_artifact(a, src);

  edit_manifest(src, bad, [](json& j) { j["format_version"] = "lutkan/999"; });
  CHECK_THROWS_AS(load_artifact(bad), VersionError);

  edit_manifest(src, bad, [](json& j) { j.erase("segments"); });
  CHECK_THROWS_AS(load_artifact(bad), MissingKeyError);

  edit_manifest(src, bad, [](json& j) { j.erase("blobs"); });
  CHECK_THROWS_AS(load_artifact(bad), MissingKeyError);

  edit_manifest(src, bad, [](json& j) { j["scheme"] = "sideways"; });
  CHECK_THROWS_AS(load_artifact(bad), EnumError);

  edit_manifest(src, bad, [](json& j) { j["boundary_mode"] = "open"; });
  CHECK_THROWS_AS(load_artifact(bad), EnumError);

  edit_manifest(src, bad, [](json& j) { j["blobs"]["q_table"]["shape"] = {1, 2, 3}; });
  CHECK_THROWS_AS(load_artifact(bad), ShapeError);

  edit_manifest(src, bad, [](json& j) { j["L"] = 99; });
  CHECK_THROWS_AS(load_artifact(bad), ShapeError);

  edit_manifest(src, bad, [](json& j) { j["dtype"] = "uint8"; });  // breaks the scheme pairing
  CHECK_THROWS_AS(load_artifact(bad), Error);

  // dropping a blob entry entirely
  auto entries = detail::zip_unpack(slurp(src));
  std::vector<detail::ZipEntry> kept;
  for (auto& e : entries)
    if (e.name != "scale.bin") kept.push_back(std::move(e));
  spit(bad, detail::zip_pack(kept));
  CHECK_THROWS_AS(load_artifact(bad), MissingKeyError);
}

TEST_CASE("eval report round trip") {
  const auto dir = scratch_dir();
  EvalReport r;
  r.quant.samples_per_segment = 32;
  r.quant.scheme = Scheme::Asymmetric;
  r.quant.dtype = Dtype::Uint8;
  r.oob = {BoundaryMode::HalfOpen, OobPolicy::ZeroSpline};
  r.seed = 42;
  r.n_samples = 1000;
  r.mae_inrange = 1.5e-4;
  r.maxabs_inrange = 9e-4;
  r.mae_oob = 0.02;
  r.maxabs_oob = 0.09;
  r.oob_any_frac = 0.125;
  r.n_inrange_evals = 900;
  r.n_oob_evals = 100;
  r.n_boundary_evals = 0;
  r.memory.q_table_bytes = 2048;
  r.memory.total_bytes = 4096;

  const auto path = dir / "eval.json";
  save_eval_report(r, path);
  CHECK_EQ(read_report_kind(path), "eval");
  const auto back = load_eval_report(path);
  CHECK_EQ(back.seed, 42);
  CHECK_EQ(back.n_samples, 1000);
  CHECK_EQ(back.mae_inrange, r.mae_inrange);
  CHECK_EQ(back.oob_any_frac, r.oob_any_frac);
  REQUIRE(back.mae_oob.has_value());
  CHECK_EQ(*back.mae_oob, 0.02);
  CHECK(back.quant.scheme == Scheme::Asymmetric);
  CHECK(back.oob.oob_policy == OobPolicy::ZeroSpline);
  CHECK_EQ(back.memory.q_table_bytes, 2048);

  // absent OOB metrics stay absent, not zero
  r.mae_oob.reset();
  r.maxabs_oob.reset();
  save_eval_report(r, path);
  const auto no_oob = load_eval_report(path);
  CHECK_FALSE(no_oob.mae_oob.has_value());
  CHECK_FALSE(no_oob.maxabs_oob.has_value());
  const json j = json::parse(std::string((std::stringstream() << std::ifstream(path).rdbuf()).str()));
  CHECK_FALSE(j.at("metrics").contains("mae_oob"));
}

TEST_CASE("bench report round trip") {
  const auto dir = scratch_dir();
  BenchReport r;
  r.quant.samples_per_segment = 64;
  r.tier = Tier::Scalar;
  r.mode = BenchMode::ColdStart;
  r.seed = 7;
  r.batch = 1024;
  r.warmup_iters = 50;
  r.timed_iters = 200;
  r.inner_repeats = 4;
  r.threads = 1;
  r.spline_ms_mean = 2.5;
  r.spline_ms_std = 0.1;
  r.spline_ms_median = 2.4;
  r.lut_ms_mean = 0.5;
  r.lut_ms_std = 0.05;
  r.lut_ms_median = 0.48;
  r.spline_ms_per_sample = 2.5 / 1024;
  r.lut_ms_per_sample = 0.5 / 1024;
  r.speedup = 5.0;
  r.speedup_median = 5.2;

  const auto path = dir / "bench.json";
  save_bench_report(r, path);
  CHECK_EQ(read_report_kind(path), "bench");
  const auto back = load_bench_report(path);
  CHECK(back.tier == Tier::Scalar);
  CHECK(back.mode == BenchMode::ColdStart);
  CHECK_EQ(back.batch, 1024);
  CHECK_EQ(back.inner_repeats, 4);
  CHECK_EQ(back.speedup, 5.0);
  CHECK_EQ(back.speedup_median, 5.2);
  CHECK_EQ(back.lut_ms_mean, 0.5);

  CHECK_THROWS_AS(load_eval_report(path), IoError);  // wrong kind

  std::ofstream(dir / "err.json") << "{\"kind\": \"error\", \"message\": \"boom\"}";
  CHECK_EQ(read_report_kind(dir / "err.json"), "error");
  std::ofstream(dir / "notjson.json") << "][";
  CHECK_THROWS_AS(read_report_kind(dir / "notjson.json"), IoError);
}
