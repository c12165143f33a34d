#include "lutkan/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

#include "lutkan/artifact_io.hpp"
#include "lutkan/bench.hpp"
#include "lutkan/compiler.hpp"
#include "lutkan/model_gen.hpp"

namespace lutkan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kInputSeedSalt = 0x5eed5eed5eed5eedull;

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write file: " + tmp.string());
    out << text;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string cell_dir_name(int L, Scheme scheme, BoundaryMode boundary, OobPolicy policy) {
  return "L" + std::to_string(L) + "_" + to_string(scheme) + "_" + to_string(boundary) + "_" +
         to_string(policy);
}

json cell_config_json(const SweepConfig& cfg, int L, Scheme scheme, BoundaryMode boundary,
                      OobPolicy policy, std::uint64_t seed) {
  json j;
  j["L"] = L;
  j["scheme"] = to_string(scheme);
  j["boundary_mode"] = to_string(boundary);
  j["oob_policy"] = to_string(policy);
  j["dtype"] = to_string(scheme == Scheme::Symmetric ? Dtype::Int8 : Dtype::Uint8);
  j["value_repr"] = to_string(cfg.value_repr);
  j["param_dtype"] = to_string(cfg.param_dtype);
  j["seed"] = seed;
  j["input_seed"] = seed ^ kInputSeedSalt;
  j["n_samples"] = cfg.n_samples;
  j["in_dim"] = cfg.in_dim;
  j["out_dim"] = cfg.out_dim;
  j["segments"] = cfg.segments;
  j["degree"] = cfg.degree;
  j["with_speed"] = cfg.with_speed;
  j["bench_batch"] = cfg.bench_batch;
  j["bench_warmup_iters"] = cfg.bench_warmup_iters;
  j["bench_timed_iters"] = cfg.bench_timed_iters;
  return j;
}

void run_cell(const SweepConfig& cfg, const fs::path& dir, int L, Scheme scheme,
              BoundaryMode boundary, OobPolicy policy, std::uint64_t seed) {
  const KanLayerSpec layer = gen_layer(seed, cfg.in_dim, cfg.out_dim, cfg.segments, cfg.degree);

  QuantConfig q;
  q.samples_per_segment = L;
  q.scheme = scheme;
  q.dtype = scheme == Scheme::Symmetric ? Dtype::Int8 : Dtype::Uint8;
  q.value_repr = cfg.value_repr;
  q.param_dtype = cfg.param_dtype;
  const OobConfig oob{boundary, policy};

  const LutLayerArtifact artifact = compile_layer(layer, q, oob);

  const fs::path artifact_path = dir / "artifact.lut";
  save_artifact(artifact, fs::path(artifact_path.string() + ".tmp"));
  fs::rename(fs::path(artifact_path.string() + ".tmp"), artifact_path);
  write_text_atomic(dir / "manifest.json", artifact_manifest_json(artifact));
  write_text_atomic(dir / "config.json",
                    cell_config_json(cfg, L, scheme, boundary, policy, seed).dump(2));

  const std::uint64_t input_seed = seed ^ kInputSeedSalt;
  const double lo = layer.grid().t0();
  const double hi = layer.grid().tK();
  const Matrix X = gen_inputs(input_seed, cfg.n_samples, static_cast<std::size_t>(cfg.in_dim), lo,
                              hi, true);

  EvalReport report = eval_accuracy(layer, artifact, X);
  report.seed = seed;

  if (cfg.with_speed) {
    const Matrix Xb =
        gen_inputs(input_seed, cfg.bench_batch, static_cast<std::size_t>(cfg.in_dim), lo, hi, true);
    for (Tier tier : {Tier::Scalar, Tier::Optimized}) {
      BenchOptions opts;
      opts.warmup_iters = cfg.bench_warmup_iters;
      opts.timed_iters = cfg.bench_timed_iters;
      opts.tier = tier;
      opts.mode = BenchMode::Steady;
      opts.seed = seed;
      const BenchReport bench = run_honest_bench(layer, artifact_path, Xb, opts);
      const fs::path bench_path = dir / ("bench_" + to_string(tier) + ".json");
      save_bench_report(bench, fs::path(bench_path.string() + ".tmp"));
      fs::rename(fs::path(bench_path.string() + ".tmp"), bench_path);
    }
  }

  // Written last: its presence is the cell's completion marker.
  const fs::path report_path = dir / "report.json";
  save_eval_report(report, fs::path(report_path.string() + ".tmp"));
  fs::rename(fs::path(report_path.string() + ".tmp"), report_path);
}

}  // namespace

SweepConfig parse_sweep_config(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ConfigError("sweep config is not a JSON object");

  static const std::set<std::string> known = {
      "Ls",         "schemes",     "boundary_modes",     "oob_policies",
      "seeds",      "n_samples",   "value_repr",         "param_dtype",
      "in_dim",     "out_dim",     "segments",           "degree",
      "with_speed", "bench_batch", "bench_warmup_iters", "bench_timed_iters"};
  for (const auto& item : j.items())
    if (!known.count(item.key())) throw ConfigError("unknown sweep config key: " + item.key());

  SweepConfig cfg;
  if (j.contains("Ls")) cfg.Ls = j["Ls"].get<std::vector<int>>();
  if (j.contains("schemes")) {
    cfg.schemes.clear();
    for (const auto& s : j["schemes"]) cfg.schemes.push_back(parse_scheme(s.get<std::string>()));
  }
  if (j.contains("boundary_modes")) {
    cfg.boundary_modes.clear();
    for (const auto& s : j["boundary_modes"])
      cfg.boundary_modes.push_back(parse_boundary_mode(s.get<std::string>()));
  }
  if (j.contains("oob_policies")) {
    cfg.oob_policies.clear();
    for (const auto& s : j["oob_policies"])
      cfg.oob_policies.push_back(parse_oob_policy(s.get<std::string>()));
  }
  if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("n_samples")) cfg.n_samples = j["n_samples"].get<std::size_t>();
  if (j.contains("value_repr")) cfg.value_repr = parse_value_repr(j["value_repr"].get<std::string>());
  if (j.contains("param_dtype"))
    cfg.param_dtype = parse_param_dtype(j["param_dtype"].get<std::string>());
  if (j.contains("in_dim")) cfg.in_dim = j["in_dim"].get<int>();
  if (j.contains("out_dim")) cfg.out_dim = j["out_dim"].get<int>();
  if (j.contains("segments")) cfg.segments = j["segments"].get<int>();
  if (j.contains("degree")) cfg.degree = j["degree"].get<int>();
  if (j.contains("with_speed")) cfg.with_speed = j["with_speed"].get<bool>();
  if (j.contains("bench_batch")) cfg.bench_batch = j["bench_batch"].get<std::size_t>();
  if (j.contains("bench_warmup_iters")) cfg.bench_warmup_iters = j["bench_warmup_iters"].get<int>();
  if (j.contains("bench_timed_iters")) cfg.bench_timed_iters = j["bench_timed_iters"].get<int>();

  if (cfg.Ls.empty() || cfg.schemes.empty() || cfg.boundary_modes.empty() ||
      cfg.oob_policies.empty() || cfg.seeds.empty())
    throw ConfigError("sweep config has an empty axis");
  return cfg;
}

SweepConfig load_sweep_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_sweep_config(text);
}

SweepSummary run_sweep(const SweepConfig& cfg, const fs::path& root, std::ostream* log) {
  fs::create_directories(root);
  SweepSummary sum;
  for (int L : cfg.Ls)
    for (Scheme scheme : cfg.schemes)
      for (BoundaryMode boundary : cfg.boundary_modes)
        for (OobPolicy policy : cfg.oob_policies)
          for (std::uint64_t seed : cfg.seeds) {
            sum.n_total++;
            const fs::path dir =
                root / cell_dir_name(L, scheme, boundary, policy) / ("seed" + std::to_string(seed));
            if (fs::exists(dir / "report.json")) {
              sum.n_skipped++;
              continue;
            }
            fs::create_directories(dir);
            try {
              run_cell(cfg, dir, L, scheme, boundary, policy, seed);
              sum.n_run++;
              if (log) *log << "ok   " << dir.string() << "\n";
            } catch (const std::exception& e) {
              json ej;
              ej["kind"] = "error";
              ej["message"] = e.what();
              ej["seed"] = seed;
              ej["cell"] = {{"L", L},
                            {"scheme", to_string(scheme)},
                            {"boundary_mode", to_string(boundary)},
                            {"oob_policy", to_string(policy)}};
              write_text_atomic(dir / "report.json", ej.dump(2));
              sum.n_failed++;
              if (log) *log << "FAIL " << dir.string() << ": " << e.what() << "\n";
            }
          }
  return sum;
}

namespace {

struct CellKey {
  int L = 0;
  std::string scheme;
  std::string boundary;
  std::string policy;

  bool operator<(const CellKey& o) const {
    return std::tie(L, scheme, boundary, policy) < std::tie(o.L, o.scheme, o.boundary, o.policy);
  }
};

struct CellAgg {
  std::vector<double> mae_inrange, maxabs_inrange;
  std::vector<double> oob_any_frac;
  std::vector<double> mae_oob, maxabs_oob;
  bool have_memory = false;
  MemoryBreakdown memory;
  std::vector<double> speedup_scalar, speedup_median_scalar;
  std::vector<double> spline_ps_scalar, lut_ps_scalar;
  std::vector<double> speedup_opt, speedup_median_opt;
  std::vector<double> spline_ps_opt, lut_ps_opt;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct Agg {
  std::size_t n = 0;
  double mean = 0.0, stdev = 0.0, min = 0.0, max = 0.0;
};

Agg aggregate(const std::vector<double>& xs) {
  Agg a;
  a.n = xs.size();
  if (xs.empty()) return a;
  double sum = 0.0;
  a.min = xs[0];
  a.max = xs[0];
  for (double x : xs) {
    sum += x;
    a.min = std::min(a.min, x);
    a.max = std::max(a.max, x);
  }
  a.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - a.mean) * (x - a.mean);
  a.stdev = std::sqrt(ss / static_cast<double>(xs.size()));
  return a;
}

// mean,std,min,max columns; all empty when there is no data.
void append_agg(std::string& row, const Agg& a) {
  if (a.n == 0) {
    row += ",,,,";
    return;
  }
  row += "," + fmt(a.mean) + "," + fmt(a.stdev) + "," + fmt(a.min) + "," + fmt(a.max);
}

std::string key_prefix(const CellKey& k) {
  return std::to_string(k.L) + "," + k.scheme + "," + k.boundary + "," + k.policy;
}

}  // namespace

void collect_results(const fs::path& root, const fs::path& out_dir) {
  std::map<CellKey, CellAgg> cells;

  if (fs::exists(root))
    for (const auto& cell_entry : fs::directory_iterator(root)) {
      if (!cell_entry.is_directory()) continue;
      for (const auto& seed_entry : fs::directory_iterator(cell_entry.path())) {
        if (!seed_entry.is_directory()) continue;
        const fs::path dir = seed_entry.path();
        const fs::path config_path = dir / "config.json";
        const fs::path report_path = dir / "report.json";
        if (!fs::exists(config_path) || !fs::exists(report_path)) continue;

        CellKey key;
        try {
          std::ifstream in(config_path, std::ios::binary);
          json cj = json::parse(in, nullptr, false);
          if (cj.is_discarded() || !cj.is_object()) continue;
          key.L = cj.at("L").get<int>();
          key.scheme = cj.at("scheme").get<std::string>();
          key.boundary = cj.at("boundary_mode").get<std::string>();
          key.policy = cj.at("oob_policy").get<std::string>();
        } catch (const std::exception&) {
          continue;
        }

        try {
          if (read_report_kind(report_path) != "eval") continue;
          const EvalReport r = load_eval_report(report_path);
          CellAgg& agg = cells[key];
          agg.mae_inrange.push_back(r.mae_inrange);
          agg.maxabs_inrange.push_back(r.maxabs_inrange);
          agg.oob_any_frac.push_back(r.oob_any_frac);
          if (r.mae_oob) agg.mae_oob.push_back(*r.mae_oob);
          if (r.maxabs_oob) agg.maxabs_oob.push_back(*r.maxabs_oob);
          if (!agg.have_memory) {
            agg.memory = r.memory;
            agg.have_memory = true;
          }
          for (Tier tier : {Tier::Scalar, Tier::Optimized}) {
            const fs::path bench_path = dir / ("bench_" + to_string(tier) + ".json");
            if (!fs::exists(bench_path)) continue;
            const BenchReport b = load_bench_report(bench_path);
            const bool scalar = tier == Tier::Scalar;
            (scalar ? agg.speedup_scalar : agg.speedup_opt).push_back(b.speedup);
            (scalar ? agg.speedup_median_scalar : agg.speedup_median_opt)
                .push_back(b.speedup_median);
            (scalar ? agg.spline_ps_scalar : agg.spline_ps_opt).push_back(b.spline_ms_per_sample);
            (scalar ? agg.lut_ps_scalar : agg.lut_ps_opt).push_back(b.lut_ms_per_sample);
          }
        } catch (const std::exception&) {
          continue;
        }
      }
    }

  fs::create_directories(out_dir);

  {
    std::string csv =
        "L,scheme,boundary_mode,oob_policy,n_seeds"
        ",mae_inrange_mean,mae_inrange_std,mae_inrange_min,mae_inrange_max"
        ",maxabs_inrange_mean,maxabs_inrange_std,maxabs_inrange_min,maxabs_inrange_max\n";
    for (const auto& [key, agg] : cells) {
      std::string row = key_prefix(key) + "," + std::to_string(agg.mae_inrange.size());
      append_agg(row, aggregate(agg.mae_inrange));
      append_agg(row, aggregate(agg.maxabs_inrange));
      csv += row + "\n";
    }
    write_text_atomic(out_dir / "accuracy.csv", csv);
  }

  {
    std::string csv =
        "L,scheme,boundary_mode,oob_policy,n_seeds,oob_any_frac_mean"
        ",mae_oob_mean,mae_oob_std,mae_oob_min,mae_oob_max"
        ",maxabs_oob_mean,maxabs_oob_std,maxabs_oob_min,maxabs_oob_max\n";
    for (const auto& [key, agg] : cells) {
      std::string row = key_prefix(key) + "," + std::to_string(agg.oob_any_frac.size()) + "," +
                        fmt(aggregate(agg.oob_any_frac).mean);
      append_agg(row, aggregate(agg.mae_oob));
      append_agg(row, aggregate(agg.maxabs_oob));
      csv += row + "\n";
    }
    write_text_atomic(out_dir / "oob_matrix.csv", csv);
  }

  {
    std::string csv =
        "L,scheme,boundary_mode,oob_policy"
        ",q_table_bytes,scale_bytes,y_min_bytes,knots_bytes,edge_scalar_bytes,total_bytes"
        ",float_model_bytes,q_table_frac,overhead_ratio\n";
    for (const auto& [key, agg] : cells) {
      std::string row = key_prefix(key);
      if (agg.have_memory) {
        const MemoryBreakdown& m = agg.memory;
        row += "," + std::to_string(m.q_table_bytes) + "," + std::to_string(m.scale_bytes) + "," +
               std::to_string(m.y_min_bytes) + "," + std::to_string(m.knots_bytes) + "," +
               std::to_string(m.edge_scalar_bytes) + "," + std::to_string(m.total_bytes) + "," +
               std::to_string(m.float_model_bytes) + "," + fmt(m.q_table_frac()) + "," +
               fmt(m.overhead_ratio);
      } else {
        row += ",,,,,,,,,";
      }
      csv += row + "\n";
    }
    write_text_atomic(out_dir / "memory.csv", csv);
  }

  for (Tier tier : {Tier::Scalar, Tier::Optimized}) {
    const bool scalar = tier == Tier::Scalar;
    std::string csv =
        "L,scheme,boundary_mode,oob_policy,n_seeds"
        ",speedup_mean,speedup_std,speedup_min,speedup_max"
        ",speedup_median_mean,spline_ms_per_sample_mean,lut_ms_per_sample_mean\n";
    for (const auto& [key, agg] : cells) {
      const auto& speedup = scalar ? agg.speedup_scalar : agg.speedup_opt;
      const auto& speedup_med = scalar ? agg.speedup_median_scalar : agg.speedup_median_opt;
      const auto& spline_ps = scalar ? agg.spline_ps_scalar : agg.spline_ps_opt;
      const auto& lut_ps = scalar ? agg.lut_ps_scalar : agg.lut_ps_opt;
      std::string row = key_prefix(key) + "," + std::to_string(speedup.size());
      append_agg(row, aggregate(speedup));
      if (speedup.empty()) {
        row += ",,,";
      } else {
        row += "," + fmt(aggregate(speedup_med).mean) + "," + fmt(aggregate(spline_ps).mean) +
               "," + fmt(aggregate(lut_ps).mean);
      }
      csv += row + "\n";
    }
    write_text_atomic(out_dir / (scalar ? "speed_scalar.csv" : "speed_optimized.csv"), csv);
  }
}

}  // namespace lutkan
