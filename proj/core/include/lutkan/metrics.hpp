#pragma once

#include <cstdint>
#include <optional>

#include "lutkan/compiler.hpp"
#include "lutkan/runtime.hpp"
#include "lutkan/spline.hpp"

namespace lutkan {

// Exact byte accounting for one artifact next to its float model.
// q_table_bytes is E*K*L exactly; scale/y_min are E*K entries at the
// parameter width; knots are (K+1) f32; edge_scalar_bytes covers the three
// per-edge gain arrays of spline_component artifacts. float_model_bytes is
// 4 bytes per float parameter of the source layer (coefficients plus the
// three gains per edge).
struct MemoryBreakdown {
  std::size_t q_table_bytes = 0;
  std::size_t scale_bytes = 0;
  std::size_t y_min_bytes = 0;
  std::size_t knots_bytes = 0;
  std::size_t edge_scalar_bytes = 0;
  std::size_t total_bytes = 0;
  std::size_t float_model_bytes = 0;
  double overhead_ratio = 0.0;

  double q_table_frac() const {
    return total_bytes == 0 ? 0.0
                            : static_cast<double>(q_table_bytes) / static_cast<double>(total_bytes);
  }
};

MemoryBreakdown memory_breakdown(const LutLayerArtifact& artifact, const KanLayerSpec& layer);

// Edge-level accuracy of the tables against the spline reference.
//
// Every (sample, input, edge) evaluation contributes one absolute error
// |lut_eval_phi - eval_edge_phi|. Bucketing: an evaluation is "in range"
// when its input lies strictly inside the table domain (t_0 <= x < t_K,
// the same predicate whatever the boundary mode, so the in-range numbers of
// different configurations are directly comparable); it is "oob" when the
// artifact's own In(x) mask says so. Under closed mode an input exactly at
// t_K is in neither bucket and is counted in n_boundary_evals instead.
// OOB fields are absent (not zero) when the OOB bucket is empty.
// oob_any_frac is the fraction of samples with at least one masked input.
struct EvalReport {
  QuantConfig quant;
  OobConfig oob;
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;

  double mae_inrange = 0.0;
  double maxabs_inrange = 0.0;
  std::optional<double> mae_oob;
  std::optional<double> maxabs_oob;
  double oob_any_frac = 0.0;
  std::size_t n_inrange_evals = 0;
  std::size_t n_oob_evals = 0;
  std::size_t n_boundary_evals = 0;

  MemoryBreakdown memory;
};

EvalReport eval_accuracy(const KanLayerSpec& layer, const LutLayerArtifact& artifact,
                         const Matrix& X);

// Same-tier timing of the spline layer against its tables. Per-iteration
// wall times (batch forward, divided by inner_repeats) feed the mean,
// population std, and median. cold_start mode reloads the artifact from
// disk inside every timed iteration; steady loads once outside.
struct BenchReport {
  QuantConfig quant;
  OobConfig oob;
  Tier tier = Tier::Optimized;
  BenchMode mode = BenchMode::Steady;
  std::uint64_t seed = 0;
  std::size_t batch = 0;
  int warmup_iters = 0;
  int timed_iters = 0;
  int inner_repeats = 1;
  int threads = 1;

  double spline_ms_mean = 0.0;
  double spline_ms_std = 0.0;
  double spline_ms_median = 0.0;
  double lut_ms_mean = 0.0;
  double lut_ms_std = 0.0;
  double lut_ms_median = 0.0;
  double spline_ms_per_sample = 0.0;
  double lut_ms_per_sample = 0.0;
  double speedup = 0.0;         // spline_ms_mean / lut_ms_mean
  double speedup_median = 0.0;  // spline_ms_median / lut_ms_median

  MemoryBreakdown memory;
};

}  // namespace lutkan
