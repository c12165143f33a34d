#pragma once

#include <cstdint>
#include <filesystem>

#include "lutkan/metrics.hpp"

namespace lutkan {

// warmup/timed counts follow the measurement protocol: 50 discarded
// iterations, then 200 per-iteration wall-time samples per side. threads
// must be 1; anything else is rejected rather than silently serialized.
struct BenchOptions {
  int warmup_iters = 50;
  int timed_iters = 200;
  Tier tier = Tier::Optimized;
  BenchMode mode = BenchMode::Steady;
  int threads = 1;
  std::uint64_t seed = 0;
};

// Times the float layer against the compiled tables at the same tier, one
// batch forward per iteration. If a single forward is under 1 us the region
// is scaled by inner repeats (recorded in the report) so the clock is never
// read across a sub-microsecond span. mode = cold_start moves the artifact
// load from setup into every timed LUT iteration; the spline side is
// unaffected. The batch size is X's row count.
BenchReport run_honest_bench(const KanLayerSpec& layer, const std::filesystem::path& artifact_path,
                             const Matrix& X, const BenchOptions& opts);

}  // namespace lutkan
