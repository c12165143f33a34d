// lutkan: compile spline layers to quantized lookup tables and measure them.
//
// Subcommands: gen, compile, eval, bench, sweep, collect. Every subcommand
// accepts --config <file.json>; keys in that file fill in options the
// command line leaves unset (explicit flags always win). Usage mistakes exit
// with CLI11's codes; runtime failures print one JSON line to stderr
// ({"error": <kind>, "message": ...}) and exit 1.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lutkan/artifact_io.hpp"
#include "lutkan/bench.hpp"
#include "lutkan/compiler.hpp"
#include "lutkan/model_gen.hpp"
#include "lutkan/model_json.hpp"
#include "lutkan/sweep.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lutkan;

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const EnumError*>(&e)) return "enum";
  if (dynamic_cast<const VersionError*>(&e)) return "version";
  if (dynamic_cast<const ShapeError*>(&e)) return "shape";
  if (dynamic_cast<const MissingKeyError*>(&e)) return "missing_key";
  if (dynamic_cast<const CorruptBlobError*>(&e)) return "corrupt_blob";
  if (dynamic_cast<const CorruptArchiveError*>(&e)) return "corrupt_archive";
  if (dynamic_cast<const IoError*>(&e)) return "io";
  if (dynamic_cast<const UnsupportedBaseError*>(&e)) return "unsupported_base";
  if (dynamic_cast<const NonFiniteError*>(&e)) return "non_finite";
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const Error*>(&e)) return "error";
  return "internal";
}

json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("config file is not a JSON object");
  return j;
}

// Config value applies only when the flag was not given on the command line.
template <typename T>
void cfg_fill(const json& cfg, const char* key, const CLI::Option* opt, T& value) {
  if (opt->count() == 0 && cfg.contains(key)) value = cfg[key].get<T>();
}

// --threads beats LUTKAN_NUM_THREADS beats the default of 1.
int resolve_threads(const CLI::Option* flag_opt, int flag_value) {
  if (flag_opt->count() > 0) return flag_value;
  if (const char* env = std::getenv("LUTKAN_NUM_THREADS")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("LUTKAN_NUM_THREADS is not an integer: \"") + env + "\"");
    }
  }
  return flag_value;
}

struct GenArgs {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  int in_dim = 10;
  int out_dim = 8;
  int segments = 8;
  int degree = 3;
};

int run_gen(GenArgs& a, const json& cfg, CLI::App* cmd) {
  cfg_fill(cfg, "seed", cmd->get_option("--seed"), a.seed);
  cfg_fill(cfg, "in_dim", cmd->get_option("--in-dim"), a.in_dim);
  cfg_fill(cfg, "out_dim", cmd->get_option("--out-dim"), a.out_dim);
  cfg_fill(cfg, "segments", cmd->get_option("--segments"), a.segments);
  cfg_fill(cfg, "degree", cmd->get_option("--degree"), a.degree);

  const KanLayerSpec layer = gen_layer(a.seed, a.in_dim, a.out_dim, a.segments, a.degree);
  save_model_json(layer, a.out);
  std::cout << "wrote " << a.out << " (edges=" << layer.edge_count()
            << ", basis=" << layer.grid().basis_count() << ")\n";
  return 0;
}

struct CompileArgs {
  std::string config_path;
  std::string model;
  std::string out;
  int L = 64;
  std::string scheme = "symmetric";
  std::string dtype;  // empty: derived from scheme
  std::string value_repr = "spline_component";
  std::string param_dtype = "f32";
  std::string boundary_mode = "closed";
  std::string oob_policy = "clip_x";
};

int run_compile(CompileArgs& a, const json& cfg, CLI::App* cmd) {
  cfg_fill(cfg, "L", cmd->get_option("--L"), a.L);
  cfg_fill(cfg, "scheme", cmd->get_option("--scheme"), a.scheme);
  cfg_fill(cfg, "dtype", cmd->get_option("--dtype"), a.dtype);
  cfg_fill(cfg, "value_repr", cmd->get_option("--value-repr"), a.value_repr);
  cfg_fill(cfg, "param_dtype", cmd->get_option("--param-dtype"), a.param_dtype);
  cfg_fill(cfg, "boundary_mode", cmd->get_option("--boundary-mode"), a.boundary_mode);
  cfg_fill(cfg, "oob_policy", cmd->get_option("--oob-policy"), a.oob_policy);

  QuantConfig q;
  q.samples_per_segment = a.L;
  q.scheme = parse_scheme(a.scheme);
  q.dtype = a.dtype.empty()
                ? (q.scheme == Scheme::Symmetric ? Dtype::Int8 : Dtype::Uint8)
                : parse_dtype(a.dtype);
  q.value_repr = parse_value_repr(a.value_repr);
  q.param_dtype = parse_param_dtype(a.param_dtype);
  OobConfig oob;
  oob.boundary_mode = parse_boundary_mode(a.boundary_mode);
  oob.oob_policy = parse_oob_policy(a.oob_policy);

  const KanLayerSpec layer = load_model_json(a.model);
  const LutLayerArtifact artifact = compile_layer(layer, q, oob);
  save_artifact(artifact, a.out);
  const MemoryBreakdown mem = memory_breakdown(artifact, layer);
  std::cout << "wrote " << a.out << " (table=" << mem.q_table_bytes
            << " bytes, total=" << mem.total_bytes << " bytes)\n";
  return 0;
}

struct EvalArgs {
  std::string config_path;
  std::string model;
  std::string artifact;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t n_samples = 4096;
  bool no_clip = false;
};

int run_eval(EvalArgs& a, const json& cfg, CLI::App* cmd) {
  cfg_fill(cfg, "seed", cmd->get_option("--seed"), a.seed);
  cfg_fill(cfg, "n_samples", cmd->get_option("--n-samples"), a.n_samples);
  cfg_fill(cfg, "no_clip", cmd->get_option("--no-clip"), a.no_clip);

  const KanLayerSpec layer = load_model_json(a.model);
  const LutLayerArtifact artifact = load_artifact(a.artifact);
  const Matrix X = gen_inputs(a.seed, a.n_samples, static_cast<std::size_t>(layer.in_dim()),
                              layer.grid().t0(), layer.grid().tK(), !a.no_clip);
  EvalReport r = eval_accuracy(layer, artifact, X);
  r.seed = a.seed;
  save_eval_report(r, a.out);
  std::cout << "wrote " << a.out << " (mae_inrange=" << r.mae_inrange
            << ", oob_any_frac=" << r.oob_any_frac << ")\n";
  return 0;
}

struct BenchArgs {
  std::string config_path;
  std::string model;
  std::string artifact;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t batch = 1024;
  int warmup = 50;
  int timed = 200;
  std::string tier = "optimized";
  std::string mode = "steady";
  int threads = 1;
  bool no_clip = false;
};

int run_bench(BenchArgs& a, const json& cfg, CLI::App* cmd) {
  cfg_fill(cfg, "seed", cmd->get_option("--seed"), a.seed);
  cfg_fill(cfg, "batch", cmd->get_option("--batch"), a.batch);
  cfg_fill(cfg, "warmup_iters", cmd->get_option("--warmup"), a.warmup);
  cfg_fill(cfg, "timed_iters", cmd->get_option("--timed"), a.timed);
  cfg_fill(cfg, "tier", cmd->get_option("--tier"), a.tier);
  cfg_fill(cfg, "mode", cmd->get_option("--mode"), a.mode);
  cfg_fill(cfg, "threads", cmd->get_option("--threads"), a.threads);
  cfg_fill(cfg, "no_clip", cmd->get_option("--no-clip"), a.no_clip);

  const KanLayerSpec layer = load_model_json(a.model);
  const Matrix X = gen_inputs(a.seed, a.batch, static_cast<std::size_t>(layer.in_dim()),
                              layer.grid().t0(), layer.grid().tK(), !a.no_clip);
  BenchOptions opts;
  opts.warmup_iters = a.warmup;
  opts.timed_iters = a.timed;
  opts.tier = parse_tier(a.tier);
  opts.mode = parse_bench_mode(a.mode);
  opts.threads = resolve_threads(cmd->get_option("--threads"), a.threads);
  opts.seed = a.seed;
  const BenchReport r = run_honest_bench(layer, a.artifact, X, opts);
  save_bench_report(r, a.out);
  std::cout << "wrote " << a.out << " (speedup=" << r.speedup
            << ", spline_ms=" << r.spline_ms_mean << ", lut_ms=" << r.lut_ms_mean << ")\n";
  return 0;
}

struct SweepArgs {
  std::string config_path;
  std::string root;
  bool no_speed = false;
  std::size_t n_samples = 0;
  int bench_warmup = -1;
  int bench_timed = -1;
  std::size_t bench_batch = 0;
};

int run_sweep_cmd(SweepArgs& a, CLI::App* cmd) {
  SweepConfig cfg;
  if (!a.config_path.empty()) cfg = load_sweep_config(a.config_path);
  if (cmd->get_option("--no-speed")->count() > 0 && a.no_speed) cfg.with_speed = false;
  if (cmd->get_option("--n-samples")->count() > 0) cfg.n_samples = a.n_samples;
  if (cmd->get_option("--bench-warmup")->count() > 0) cfg.bench_warmup_iters = a.bench_warmup;
  if (cmd->get_option("--bench-timed")->count() > 0) cfg.bench_timed_iters = a.bench_timed;
  if (cmd->get_option("--bench-batch")->count() > 0) cfg.bench_batch = a.bench_batch;

  const SweepSummary s = run_sweep(cfg, a.root, &std::cout);
  std::cout << "sweep: total=" << s.n_total << " run=" << s.n_run << " skipped=" << s.n_skipped
            << " failed=" << s.n_failed << "\n";
  return s.n_failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized lookup-table compiler and runtime for spline layers"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a random layer model JSON");
  gen_cmd->add_option("--config", gen.config_path, "JSON config file");
  gen_cmd->add_option("--out", gen.out, "Output model JSON path")->required();
  gen_cmd->add_option("--seed", gen.seed, "PRNG seed");
  gen_cmd->add_option("--in-dim", gen.in_dim, "Input dimension");
  gen_cmd->add_option("--out-dim", gen.out_dim, "Output dimension");
  gen_cmd->add_option("--segments", gen.segments, "Segment count K");
  gen_cmd->add_option("--degree", gen.degree, "Spline degree");

  CompileArgs comp;
  CLI::App* comp_cmd = app.add_subcommand("compile", "Compile a model into a table artifact");
  comp_cmd->add_option("--config", comp.config_path, "JSON config file");
  comp_cmd->add_option("--model", comp.model, "Model JSON path")->required();
  comp_cmd->add_option("--out", comp.out, "Output artifact path")->required();
  comp_cmd->add_option("--L", comp.L, "Samples per segment");
  comp_cmd->add_option("--scheme", comp.scheme, "Quantization scheme (symmetric|asymmetric)");
  comp_cmd->add_option("--dtype", comp.dtype, "Code dtype (int8|uint8); default follows scheme");
  comp_cmd->add_option("--value-repr", comp.value_repr, "Table contents (phi|spline_component)");
  comp_cmd->add_option("--param-dtype", comp.param_dtype, "Dequant parameter storage (f32|f16)");
  comp_cmd->add_option("--boundary-mode", comp.boundary_mode, "Domain edge (half_open|closed)");
  comp_cmd->add_option("--oob-policy", comp.oob_policy, "OOB handling (clip_x|zero_spline)");

  EvalArgs ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Measure table accuracy against the model");
  eval_cmd->add_option("--config", ev.config_path, "JSON config file");
  eval_cmd->add_option("--model", ev.model, "Model JSON path")->required();
  eval_cmd->add_option("--artifact", ev.artifact, "Artifact path")->required();
  eval_cmd->add_option("--out", ev.out, "Output report path")->required();
  eval_cmd->add_option("--seed", ev.seed, "Input PRNG seed");
  eval_cmd->add_option("--n-samples", ev.n_samples, "Evaluation sample count");
  eval_cmd->add_flag("--no-clip", ev.no_clip, "Do not clip inputs into the layer domain");

  BenchArgs be;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Time the float layer against its tables");
  bench_cmd->add_option("--config", be.config_path, "JSON config file");
  bench_cmd->add_option("--model", be.model, "Model JSON path")->required();
  bench_cmd->add_option("--artifact", be.artifact, "Artifact path")->required();
  bench_cmd->add_option("--out", be.out, "Output report path")->required();
  bench_cmd->add_option("--seed", be.seed, "Input PRNG seed");
  bench_cmd->add_option("--batch", be.batch, "Batch size");
  bench_cmd->add_option("--warmup", be.warmup, "Warmup iterations");
  bench_cmd->add_option("--timed", be.timed, "Timed iterations");
  bench_cmd->add_option("--tier", be.tier, "Kernel tier for both sides (scalar|optimized)");
  bench_cmd->add_option("--mode", be.mode, "steady|cold_start");
  bench_cmd->add_option("--threads", be.threads,
                        "Worker threads (must be 1; beats LUTKAN_NUM_THREADS)");
  bench_cmd->add_flag("--no-clip", be.no_clip, "Do not clip inputs into the layer domain");

  SweepArgs sw;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run the full configuration grid");
  sweep_cmd->add_option("--config", sw.config_path, "Sweep config JSON");
  sweep_cmd->add_option("--root", sw.root, "Sweep output directory")->required();
  sweep_cmd->add_flag("--no-speed", sw.no_speed, "Skip the per-cell timing runs");
  sweep_cmd->add_option("--n-samples", sw.n_samples, "Evaluation sample count per cell");
  sweep_cmd->add_option("--bench-warmup", sw.bench_warmup, "Warmup iterations per timing run");
  sweep_cmd->add_option("--bench-timed", sw.bench_timed, "Timed iterations per timing run");
  sweep_cmd->add_option("--bench-batch", sw.bench_batch, "Batch size per timing run");

  struct {
    std::string root;
    std::string out;
  } co;
  CLI::App* collect_cmd = app.add_subcommand("collect", "Aggregate sweep reports into CSVs");
  collect_cmd->add_option("--root", co.root, "Sweep output directory")->required();
  collect_cmd->add_option("--out", co.out, "CSV output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    json cfg = json::object();
    if (gen_cmd->parsed() && !gen.config_path.empty()) cfg = load_config_file(gen.config_path);
    if (comp_cmd->parsed() && !comp.config_path.empty()) cfg = load_config_file(comp.config_path);
    if (eval_cmd->parsed() && !ev.config_path.empty()) cfg = load_config_file(ev.config_path);
    if (bench_cmd->parsed() && !be.config_path.empty()) cfg = load_config_file(be.config_path);

    if (gen_cmd->parsed()) return run_gen(gen, cfg, gen_cmd);
    if (comp_cmd->parsed()) return run_compile(comp, cfg, comp_cmd);
    if (eval_cmd->parsed()) return run_eval(ev, cfg, eval_cmd);
    if (bench_cmd->parsed()) return run_bench(be, cfg, bench_cmd);
    if (sweep_cmd->parsed()) return run_sweep_cmd(sw, sweep_cmd);
    if (collect_cmd->parsed()) {
      collect_results(co.root, co.out);
      std::cout << "wrote CSVs to " << co.out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    json err;
    err["error"] = error_kind(e);
    err["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
