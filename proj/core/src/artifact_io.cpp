#include "lutkan/artifact_io.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "detail/zip.hpp"
#include "lutkan/float16.hpp"

namespace lutkan {

namespace {

using nlohmann::json;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const void* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::uint8_t> encode_f32(const std::vector<float>& v) {
  std::vector<std::uint8_t> out(v.size() * 4);
  for (std::size_t i = 0; i < v.size(); i++) {
    std::uint32_t bits;
    std::memcpy(&bits, &v[i], 4);
    for (int b = 0; b < 4; b++) out[i * 4 + b] = static_cast<std::uint8_t>((bits >> (8 * b)) & 0xff);
  }
  return out;
}

std::vector<float> decode_f32(const std::vector<std::uint8_t>& bytes) {
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); i++) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; b++) bits |= static_cast<std::uint32_t>(bytes[i * 4 + b]) << (8 * b);
    std::memcpy(&out[i], &bits, 4);
  }
  return out;
}

std::vector<std::uint8_t> encode_f16(const std::vector<float>& v) {
  std::vector<std::uint8_t> out(v.size() * 2);
  for (std::size_t i = 0; i < v.size(); i++) {
    const std::uint16_t bits = f32_to_f16_bits(v[i]);
    out[i * 2] = static_cast<std::uint8_t>(bits & 0xff);
    out[i * 2 + 1] = static_cast<std::uint8_t>(bits >> 8);
  }
  return out;
}

std::vector<float> decode_f16(const std::vector<std::uint8_t>& bytes) {
  std::vector<float> out(bytes.size() / 2);
  for (std::size_t i = 0; i < out.size(); i++) {
    const std::uint16_t bits =
        static_cast<std::uint16_t>(bytes[i * 2] | (bytes[i * 2 + 1] << 8));
    out[i] = f16_bits_to_f32(bits);
  }
  return out;
}

struct BlobSpec {
  std::string name;
  std::string dtype;
  std::vector<std::size_t> shape;
};

std::vector<BlobSpec> blob_specs(const LutLayerArtifact& a, std::size_t K) {
  const std::size_t E = static_cast<std::size_t>(a.edge_count());
  const std::size_t L = static_cast<std::size_t>(a.L);
  const std::string qdtype = to_string(a.dtype);
  const std::string pdtype = to_string(a.param_dtype);
  std::vector<BlobSpec> specs = {
      {"knots", "f32", {K + 1}},
      {"q_table", qdtype, {E, K, L}},
      {"scale", pdtype, {E, K}},
      {"y_min", pdtype, {E, K}},
  };
  if (a.value_repr == ValueRepr::SplineComponent) {
    specs.push_back({"edge_base_scale", "f32", {E}});
    specs.push_back({"edge_spline_scale", "f32", {E}});
    specs.push_back({"edge_out_scale", "f32", {E}});
  }
  return specs;
}

std::vector<std::uint8_t> encode_blob(const LutLayerArtifact& a, const BlobSpec& spec) {
  const bool f16 = a.param_dtype == ParamDtype::F16;
  if (spec.name == "knots") return encode_f32(a.knots);
  if (spec.name == "q_table") return a.q_table;
  if (spec.name == "scale") return f16 ? encode_f16(a.scale) : encode_f32(a.scale);
  if (spec.name == "y_min") return f16 ? encode_f16(a.y_min) : encode_f32(a.y_min);
  if (spec.name == "edge_base_scale") return encode_f32(a.edge_base_scale);
  if (spec.name == "edge_spline_scale") return encode_f32(a.edge_spline_scale);
  if (spec.name == "edge_out_scale") return encode_f32(a.edge_out_scale);
  throw Error("unknown blob name: " + spec.name);
}

json manifest_json(const LutLayerArtifact& a) {
  json j;
  j["format_version"] = a.format_version;
  j["in_dim"] = a.in_dim;
  j["out_dim"] = a.out_dim;
  j["segments"] = a.segment_count();
  j["L"] = a.L;
  j["value_repr"] = to_string(a.value_repr);
  j["interp"] = to_string(a.interp);
  j["scheme"] = to_string(a.scheme);
  j["dtype"] = to_string(a.dtype);
  j["param_dtype"] = to_string(a.param_dtype);
  j["boundary_mode"] = to_string(a.oob.boundary_mode);
  j["oob_policy"] = to_string(a.oob.oob_policy);
  if (a.value_repr == ValueRepr::SplineComponent) j["base_kind"] = a.base_kind;
  json blobs = json::object();
  for (const auto& spec : blob_specs(a, static_cast<std::size_t>(a.segment_count()))) {
    json b;
    b["dtype"] = spec.dtype;
    b["shape"] = spec.shape;
    blobs[spec.name] = std::move(b);
  }
  j["blobs"] = std::move(blobs);
  return j;
}

const json& require_key(const json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw MissingKeyError("missing key \"" + key + "\" in " + where);
  return *it;
}

std::string require_string(const json& j, const std::string& key, const std::string& where) {
  const json& v = require_key(j, key, where);
  if (!v.is_string()) throw ShapeError("key \"" + key + "\" in " + where + " must be a string");
  return v.get<std::string>();
}

int require_int(const json& j, const std::string& key, const std::string& where) {
  const json& v = require_key(j, key, where);
  if (!v.is_number_integer()) throw ShapeError("key \"" + key + "\" in " + where + " must be an integer");
  return v.get<int>();
}

template <typename Parse>
auto parse_enum(const Parse& parse, const json& j, const std::string& key, const std::string& where) {
  const std::string s = require_string(j, key, where);
  try {
    return parse(s);
  } catch (const ConfigError&) {
    throw EnumError("unknown value \"" + s + "\" for field \"" + key + "\"");
  }
}

}  // namespace

std::string artifact_manifest_json(const LutLayerArtifact& a) {
  return manifest_json(a).dump(2);
}

void save_artifact(const LutLayerArtifact& artifact, const std::filesystem::path& path) {
  LutLayerArtifact copy = artifact;  // finalize validates without mutating the caller's view
  copy.finalize();

  std::vector<detail::ZipEntry> entries;
  const std::string manifest = manifest_json(copy).dump(2);
  entries.push_back({"manifest.json", std::vector<std::uint8_t>(manifest.begin(), manifest.end())});
  for (const auto& spec : blob_specs(copy, static_cast<std::size_t>(copy.segment_count())))
    entries.push_back({spec.name + ".bin", encode_blob(copy, spec)});

  const std::vector<std::uint8_t> bytes = detail::zip_pack(entries);
  write_file(path, bytes.data(), bytes.size());
}

LutLayerArtifact load_artifact(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  const std::vector<detail::ZipEntry> entries = detail::zip_unpack(bytes);

  const detail::ZipEntry* manifest_entry = nullptr;
  for (const auto& e : entries)
    if (e.name == "manifest.json") manifest_entry = &e;
  if (!manifest_entry) throw MissingKeyError("archive has no manifest.json");

  json j = json::parse(manifest_entry->data.begin(), manifest_entry->data.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw CorruptBlobError("manifest.json is not a JSON object");

  const std::string version = require_string(j, "format_version", "manifest");
  if (version != kFormatVersion)
    throw VersionError("unknown format_version \"" + version + "\"");

  LutLayerArtifact a;
  a.format_version = version;
  a.in_dim = require_int(j, "in_dim", "manifest");
  a.out_dim = require_int(j, "out_dim", "manifest");
  a.L = require_int(j, "L", "manifest");
  a.value_repr = parse_enum(
      [](const std::string& s) { return parse_value_repr(s); }, j, "value_repr", "manifest");
  a.interp = parse_enum([](const std::string& s) { return parse_interp(s); }, j, "interp", "manifest");
  a.scheme = parse_enum([](const std::string& s) { return parse_scheme(s); }, j, "scheme", "manifest");
  a.dtype = parse_enum([](const std::string& s) { return parse_dtype(s); }, j, "dtype", "manifest");
  a.param_dtype = parse_enum(
      [](const std::string& s) { return parse_param_dtype(s); }, j, "param_dtype", "manifest");
  a.oob.boundary_mode = parse_enum(
      [](const std::string& s) { return parse_boundary_mode(s); }, j, "boundary_mode", "manifest");
  a.oob.oob_policy = parse_enum(
      [](const std::string& s) { return parse_oob_policy(s); }, j, "oob_policy", "manifest");
  a.base_kind = a.value_repr == ValueRepr::SplineComponent
                    ? require_string(j, "base_kind", "manifest")
                    : "";

  const int segments = require_int(j, "segments", "manifest");
  if (segments < 1) throw ShapeError("manifest declares a non-positive segment count");

  const json& blobs = require_key(j, "blobs", "manifest");
  if (!blobs.is_object()) throw ShapeError("manifest \"blobs\" must be an object");

  // Expected blob set is fully determined by the metadata; verify the
  // manifest's declarations against it, then the bytes against both.
  for (const auto& spec : blob_specs(a, static_cast<std::size_t>(segments))) {
    const json& decl = require_key(blobs, spec.name, "manifest blobs");
    const std::string dtype = require_string(decl, "dtype", "blob \"" + spec.name + "\"");
    if (dtype != spec.dtype)
      throw ShapeError("blob \"" + spec.name + "\" declares dtype " + dtype + ", expected " +
                       spec.dtype);
    const json& shape = require_key(decl, "shape", "blob \"" + spec.name + "\"");
    if (!shape.is_array() || shape.size() != spec.shape.size())
      throw ShapeError("blob \"" + spec.name + "\" shape rank mismatch");
    std::size_t count = 1;
    for (std::size_t i = 0; i < spec.shape.size(); i++) {
      if (!shape[i].is_number_integer() || shape[i].get<std::int64_t>() < 0)
        throw ShapeError("blob \"" + spec.name + "\" shape must hold non-negative integers");
      const std::size_t dim = shape[i].get<std::size_t>();
      if (dim != spec.shape[i])
        throw ShapeError("blob \"" + spec.name + "\" shape does not match layer dims");
      count *= dim;
    }

    const detail::ZipEntry* entry = nullptr;
    for (const auto& e : entries)
      if (e.name == spec.name + ".bin") entry = &e;
    if (!entry) throw MissingKeyError("archive has no entry \"" + spec.name + ".bin\"");

    const std::size_t unit = spec.dtype == "f32" ? 4 : spec.dtype == "f16" ? 2 : 1;
    if (entry->data.size() != count * unit)
      throw ShapeError("blob \"" + spec.name + "\" has " + std::to_string(entry->data.size()) +
                       " bytes, expected " + std::to_string(count * unit));

    if (spec.name == "knots") {
      a.knots = decode_f32(entry->data);
    } else if (spec.name == "q_table") {
      a.q_table = entry->data;
    } else if (spec.name == "scale") {
      a.scale = spec.dtype == "f16" ? decode_f16(entry->data) : decode_f32(entry->data);
    } else if (spec.name == "y_min") {
      a.y_min = spec.dtype == "f16" ? decode_f16(entry->data) : decode_f32(entry->data);
    } else if (spec.name == "edge_base_scale") {
      a.edge_base_scale = decode_f32(entry->data);
    } else if (spec.name == "edge_spline_scale") {
      a.edge_spline_scale = decode_f32(entry->data);
    } else if (spec.name == "edge_out_scale") {
      a.edge_out_scale = decode_f32(entry->data);
    }
  }

  a.finalize();
  return a;
}

namespace {

json quant_to_json(const QuantConfig& q) {
  json j;
  j["L"] = q.samples_per_segment;
  j["scheme"] = to_string(q.scheme);
  j["dtype"] = to_string(q.dtype);
  j["value_repr"] = to_string(q.value_repr);
  j["interp"] = to_string(q.interp);
  j["param_dtype"] = to_string(q.param_dtype);
  return j;
}

QuantConfig quant_from_json(const json& j, const std::string& where) {
  QuantConfig q;
  q.samples_per_segment = require_int(j, "L", where);
  q.scheme = parse_enum([](const std::string& s) { return parse_scheme(s); }, j, "scheme", where);
  q.dtype = parse_enum([](const std::string& s) { return parse_dtype(s); }, j, "dtype", where);
  q.value_repr = parse_enum(
      [](const std::string& s) { return parse_value_repr(s); }, j, "value_repr", where);
  q.interp = parse_enum([](const std::string& s) { return parse_interp(s); }, j, "interp", where);
  q.param_dtype = parse_enum(
      [](const std::string& s) { return parse_param_dtype(s); }, j, "param_dtype", where);
  return q;
}

json oob_to_json(const OobConfig& o) {
  json j;
  j["boundary_mode"] = to_string(o.boundary_mode);
  j["oob_policy"] = to_string(o.oob_policy);
  return j;
}

OobConfig oob_from_json(const json& j, const std::string& where) {
  OobConfig o;
  o.boundary_mode = parse_enum(
      [](const std::string& s) { return parse_boundary_mode(s); }, j, "boundary_mode", where);
  o.oob_policy = parse_enum(
      [](const std::string& s) { return parse_oob_policy(s); }, j, "oob_policy", where);
  return o;
}

json memory_to_json(const MemoryBreakdown& m) {
  json j;
  j["q_table_bytes"] = m.q_table_bytes;
  j["scale_bytes"] = m.scale_bytes;
  j["y_min_bytes"] = m.y_min_bytes;
  j["knots_bytes"] = m.knots_bytes;
  j["edge_scalar_bytes"] = m.edge_scalar_bytes;
  j["total_bytes"] = m.total_bytes;
  j["float_model_bytes"] = m.float_model_bytes;
  j["overhead_ratio"] = m.overhead_ratio;
  return j;
}

MemoryBreakdown memory_from_json(const json& j) {
  MemoryBreakdown m;
  m.q_table_bytes = j.value("q_table_bytes", 0ull);
  m.scale_bytes = j.value("scale_bytes", 0ull);
  m.y_min_bytes = j.value("y_min_bytes", 0ull);
  m.knots_bytes = j.value("knots_bytes", 0ull);
  m.edge_scalar_bytes = j.value("edge_scalar_bytes", 0ull);
  m.total_bytes = j.value("total_bytes", 0ull);
  m.float_model_bytes = j.value("float_model_bytes", 0ull);
  m.overhead_ratio = j.value("overhead_ratio", 0.0);
  return m;
}

json load_report_json(const std::filesystem::path& path, const char* expect_kind) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  json j = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw CorruptBlobError("report is not a JSON object");
  const std::string kind = require_string(j, "kind", "report");
  if (kind != expect_kind)
    throw ShapeError("report kind is \"" + kind + "\", expected \"" + expect_kind + "\"");
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, text.data(), text.size());
}

}  // namespace

void save_eval_report(const EvalReport& r, const std::filesystem::path& path) {
  json j;
  j["kind"] = "eval";
  j["seed"] = r.seed;
  j["n_samples"] = r.n_samples;
  j["quant"] = quant_to_json(r.quant);
  j["oob"] = oob_to_json(r.oob);
  json m;
  m["mae_inrange"] = r.mae_inrange;
  m["maxabs_inrange"] = r.maxabs_inrange;
  if (r.mae_oob) m["mae_oob"] = *r.mae_oob;
  if (r.maxabs_oob) m["maxabs_oob"] = *r.maxabs_oob;
  m["oob_any_frac"] = r.oob_any_frac;
  m["n_inrange_evals"] = r.n_inrange_evals;
  m["n_oob_evals"] = r.n_oob_evals;
  m["n_boundary_evals"] = r.n_boundary_evals;
  j["metrics"] = std::move(m);
  j["memory"] = memory_to_json(r.memory);
  write_text(path, j.dump(2));
}

EvalReport load_eval_report(const std::filesystem::path& path) {
  const json j = load_report_json(path, "eval");
  EvalReport r;
  r.seed = require_key(j, "seed", "report").get<std::uint64_t>();
  r.n_samples = require_key(j, "n_samples", "report").get<std::size_t>();
  r.quant = quant_from_json(require_key(j, "quant", "report"), "report quant");
  r.oob = oob_from_json(require_key(j, "oob", "report"), "report oob");
  const json& m = require_key(j, "metrics", "report");
  r.mae_inrange = require_key(m, "mae_inrange", "metrics").get<double>();
  r.maxabs_inrange = require_key(m, "maxabs_inrange", "metrics").get<double>();
  if (m.contains("mae_oob")) r.mae_oob = m["mae_oob"].get<double>();
  if (m.contains("maxabs_oob")) r.maxabs_oob = m["maxabs_oob"].get<double>();
  r.oob_any_frac = require_key(m, "oob_any_frac", "metrics").get<double>();
  r.n_inrange_evals = m.value("n_inrange_evals", 0ull);
  r.n_oob_evals = m.value("n_oob_evals", 0ull);
  r.n_boundary_evals = m.value("n_boundary_evals", 0ull);
  if (j.contains("memory")) r.memory = memory_from_json(j["memory"]);
  return r;
}

void save_bench_report(const BenchReport& r, const std::filesystem::path& path) {
  json j;
  j["kind"] = "bench";
  j["seed"] = r.seed;
  j["tier"] = to_string(r.tier);
  j["mode"] = to_string(r.mode);
  j["batch"] = r.batch;
  j["warmup_iters"] = r.warmup_iters;
  j["timed_iters"] = r.timed_iters;
  j["inner_repeats"] = r.inner_repeats;
  j["threads"] = r.threads;
  j["quant"] = quant_to_json(r.quant);
  j["oob"] = oob_to_json(r.oob);
  json t;
  t["spline_ms_mean"] = r.spline_ms_mean;
  t["spline_ms_std"] = r.spline_ms_std;
  t["spline_ms_median"] = r.spline_ms_median;
  t["lut_ms_mean"] = r.lut_ms_mean;
  t["lut_ms_std"] = r.lut_ms_std;
  t["lut_ms_median"] = r.lut_ms_median;
  t["spline_ms_per_sample"] = r.spline_ms_per_sample;
  t["lut_ms_per_sample"] = r.lut_ms_per_sample;
  t["speedup"] = r.speedup;
  t["speedup_median"] = r.speedup_median;
  j["timing"] = std::move(t);
  j["memory"] = memory_to_json(r.memory);
  write_text(path, j.dump(2));
}

BenchReport load_bench_report(const std::filesystem::path& path) {
  const json j = load_report_json(path, "bench");
  BenchReport r;
  r.seed = require_key(j, "seed", "report").get<std::uint64_t>();
  r.tier = parse_enum([](const std::string& s) { return parse_tier(s); }, j, "tier", "report");
  r.mode = parse_enum([](const std::string& s) { return parse_bench_mode(s); }, j, "mode", "report");
  r.batch = require_key(j, "batch", "report").get<std::size_t>();
  r.warmup_iters = j.value("warmup_iters", 0);
  r.timed_iters = j.value("timed_iters", 0);
  r.inner_repeats = j.value("inner_repeats", 1);
  r.threads = j.value("threads", 1);
  r.quant = quant_from_json(require_key(j, "quant", "report"), "report quant");
  r.oob = oob_from_json(require_key(j, "oob", "report"), "report oob");
  const json& t = require_key(j, "timing", "report");
  r.spline_ms_mean = require_key(t, "spline_ms_mean", "timing").get<double>();
  r.spline_ms_std = t.value("spline_ms_std", 0.0);
  r.spline_ms_median = t.value("spline_ms_median", 0.0);
  r.lut_ms_mean = require_key(t, "lut_ms_mean", "timing").get<double>();
  r.lut_ms_std = t.value("lut_ms_std", 0.0);
  r.lut_ms_median = t.value("lut_ms_median", 0.0);
  r.spline_ms_per_sample = t.value("spline_ms_per_sample", 0.0);
  r.lut_ms_per_sample = t.value("lut_ms_per_sample", 0.0);
  r.speedup = require_key(t, "speedup", "timing").get<double>();
  r.speedup_median = t.value("speedup_median", 0.0);
  if (j.contains("memory")) r.memory = memory_from_json(j["memory"]);
  return r;
}

std::string read_report_kind(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  json j = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw CorruptBlobError("report is not a JSON object");
  return require_string(j, "kind", "report");
}

}  // namespace lutkan
