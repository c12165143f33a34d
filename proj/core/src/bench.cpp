#include "lutkan/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <vector>

#include "lutkan/artifact_io.hpp"

namespace lutkan {

namespace {

inline void do_not_optimize(const void* p) {
  asm volatile("" : : "g"(p) : "memory");
}

using Clock = std::chrono::steady_clock;

template <typename F>
double region_ms(F&& fn, int repeats) {
  const auto t0 = Clock::now();
  for (int r = 0; r < repeats; r++) fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

// Smallest repeat count whose region comfortably exceeds the 1 us floor.
template <typename F>
int calibrate_repeats(F&& fn) {
  int repeats = 1;
  while (repeats < (1 << 20)) {
    if (region_ms(fn, repeats) >= 2e-3) break;
    repeats *= 4;
  }
  return repeats;
}

struct Stats {
  double mean = 0.0;
  double stdev = 0.0;
  double median = 0.0;
};

Stats summarize(std::vector<double> xs) {
  Stats s;
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.stdev = std::sqrt(ss / n);
  std::sort(xs.begin(), xs.end());
  const std::size_t mid = xs.size() / 2;
  s.median = xs.size() % 2 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]);
  return s;
}

template <typename F>
std::vector<double> run_side(F&& fn, int warmup, int timed, int repeats) {
  for (int i = 0; i < warmup; i++) fn();
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(timed));
  for (int i = 0; i < timed; i++) samples.push_back(region_ms(fn, repeats) / repeats);
  return samples;
}

}  // namespace

BenchReport run_honest_bench(const KanLayerSpec& layer, const std::filesystem::path& artifact_path,
                             const Matrix& X, const BenchOptions& opts) {
  if (opts.threads != 1)
    throw ConfigError("benchmark requires threads == 1, got " + std::to_string(opts.threads));
  if (opts.timed_iters < 1) throw ConfigError("timed_iters must be at least 1");
  if (opts.warmup_iters < 0) throw ConfigError("warmup_iters must be non-negative");
  if (X.rows == 0) throw DimensionError("benchmark input batch is empty");
  if (X.cols != static_cast<std::size_t>(layer.in_dim()))
    throw DimensionError("benchmark input has " + std::to_string(X.cols) + " columns, layer takes " +
                         std::to_string(layer.in_dim()));

  LutLayerArtifact artifact = load_artifact(artifact_path);
  if (artifact.in_dim != layer.in_dim() || artifact.out_dim != layer.out_dim())
    throw DimensionError("artifact shape does not match the layer");

  const Tier tier = opts.tier;
  auto spline_fn = [&] {
    const Matrix Y = layer_forward_batch(layer, X, tier);
    do_not_optimize(Y.data.data());
  };
  auto lut_steady_fn = [&] {
    const auto [Y, stats] = lut_layer_forward_batch(artifact, X, tier);
    do_not_optimize(Y.data.data());
    do_not_optimize(&stats);
  };
  auto lut_cold_fn = [&] {
    const LutLayerArtifact fresh = load_artifact(artifact_path);
    const auto [Y, stats] = lut_layer_forward_batch(fresh, X, tier);
    do_not_optimize(Y.data.data());
    do_not_optimize(&stats);
  };

  // One repeat count for both sides so every sample means the same thing.
  int repeats = calibrate_repeats(spline_fn);
  if (opts.mode == BenchMode::ColdStart) {
    repeats = std::max(repeats, calibrate_repeats(lut_cold_fn));
  } else {
    repeats = std::max(repeats, calibrate_repeats(lut_steady_fn));
  }

  const std::vector<double> spline_samples =
      run_side(spline_fn, opts.warmup_iters, opts.timed_iters, repeats);
  const std::vector<double> lut_samples =
      opts.mode == BenchMode::ColdStart
          ? run_side(lut_cold_fn, opts.warmup_iters, opts.timed_iters, repeats)
          : run_side(lut_steady_fn, opts.warmup_iters, opts.timed_iters, repeats);

  const Stats ss = summarize(spline_samples);
  const Stats ls = summarize(lut_samples);

  BenchReport r;
  r.quant.samples_per_segment = artifact.L;
  r.quant.scheme = artifact.scheme;
  r.quant.dtype = artifact.dtype;
  r.quant.value_repr = artifact.value_repr;
  r.quant.interp = artifact.interp;
  r.quant.param_dtype = artifact.param_dtype;
  r.oob = artifact.oob;
  r.tier = tier;
  r.mode = opts.mode;
  r.seed = opts.seed;
  r.batch = X.rows;
  r.warmup_iters = opts.warmup_iters;
  r.timed_iters = opts.timed_iters;
  r.inner_repeats = repeats;
  r.threads = opts.threads;
  r.spline_ms_mean = ss.mean;
  r.spline_ms_std = ss.stdev;
  r.spline_ms_median = ss.median;
  r.lut_ms_mean = ls.mean;
  r.lut_ms_std = ls.stdev;
  r.lut_ms_median = ls.median;
  r.spline_ms_per_sample = ss.mean / static_cast<double>(X.rows);
  r.lut_ms_per_sample = ls.mean / static_cast<double>(X.rows);
  r.speedup = ls.mean > 0.0 ? ss.mean / ls.mean : 0.0;
  r.speedup_median = ls.median > 0.0 ? ss.median / ls.median : 0.0;
  r.memory = memory_breakdown(artifact, layer);
  return r;
}

}  // namespace lutkan
