#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "lutkan/types.hpp"

namespace lutkan {

// Grid of (L, scheme, boundary_mode, oob_policy) cells, each repeated over
// `seeds` with an independently generated layer. dtype is derived from the
// scheme (symmetric -> int8, asymmetric -> uint8). with_speed additionally
// times every cell at both tiers, which dominates the sweep's runtime.
struct SweepConfig {
  std::vector<int> Ls = {16, 32, 64, 128};
  std::vector<Scheme> schemes = {Scheme::Symmetric, Scheme::Asymmetric};
  std::vector<BoundaryMode> boundary_modes = {BoundaryMode::HalfOpen, BoundaryMode::Closed};
  std::vector<OobPolicy> oob_policies = {OobPolicy::ClipX, OobPolicy::ZeroSpline};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::size_t n_samples = 4096;
  ValueRepr value_repr = ValueRepr::SplineComponent;
  ParamDtype param_dtype = ParamDtype::F32;
  int in_dim = 10;
  int out_dim = 8;
  int segments = 8;
  int degree = 3;
  bool with_speed = true;
  std::size_t bench_batch = 1024;
  int bench_warmup_iters = 50;
  int bench_timed_iters = 200;
};

// Reads a JSON object whose keys mirror the struct fields ("Ls", "schemes",
// "boundary_modes", "oob_policies", "seeds", "n_samples", "value_repr",
// "param_dtype", "in_dim", "out_dim", "segments", "degree", "with_speed",
// "bench_batch", "bench_warmup_iters", "bench_timed_iters"). Missing keys
// keep their defaults; unknown keys are rejected.
SweepConfig parse_sweep_config(const std::string& json_text);
SweepConfig load_sweep_config(const std::filesystem::path& path);

struct SweepSummary {
  std::size_t n_total = 0;
  std::size_t n_run = 0;
  std::size_t n_skipped = 0;
  std::size_t n_failed = 0;
};

// Runs every (cell, seed) under root/L{L}_{scheme}_{boundary}_{policy}/seed{N}/.
// Each directory gets config.json, artifact.lut, manifest.json, optional
// bench_scalar.json and bench_optimized.json, and finally report.json; every
// file lands via write-to-temp-then-rename, and report.json is written last
// so its presence marks the cell complete. Existing report.json => the cell
// is skipped, making reruns resume where they left off. A failing cell
// writes {"kind": "error", ...} as its report.json and the sweep moves on.
// Evaluation inputs are standard normal draws clipped into the layer domain,
// seeded with seed ^ 0x5eed5eed5eed5eed.
SweepSummary run_sweep(const SweepConfig& config, const std::filesystem::path& root,
                       std::ostream* log = nullptr);

// Aggregates the per-seed reports under root into CSVs in out_dir:
// accuracy.csv, oob_matrix.csv, memory.csv, speed_scalar.csv,
// speed_optimized.csv. Rows are grouped per cell (seeds collapse to
// mean/std/min/max, population std), sorted by (L, scheme, boundary_mode,
// oob_policy), and formatted deterministically, so rerunning collection
// rewrites identical bytes. Cells whose every seed failed produce no rows;
// fields with no data (e.g. OOB error under a closed boundary, or speed
// when the sweep ran without it) are left empty.
void collect_results(const std::filesystem::path& root, const std::filesystem::path& out_dir);

}  // namespace lutkan
