#pragma once

#include <cstdint>

#include "lutkan/rng.hpp"
#include "lutkan/spline.hpp"

namespace lutkan {

// One synthetic layer. Breakpoints are K+1 uniform points over [-1, 1];
// spline coefficients ~ N(0, 0.1); base/spline/out scales ~ U(0.5, 1.5).
// Draw order: edges row-major, per edge all coefficients then the three
// scales. Same seed always yields the same layer.
KanLayerSpec gen_layer(std::uint64_t seed, int in_dim, int out_dim, int segments, int degree);

// The d=10, m=8, K=8, degree=3 shape used by the sweep (E=80, R=11).
KanLayerSpec gen_sanity_layer(std::uint64_t seed);

// n x dim of i.i.d. standard normal draws, row-major. With clip=true each
// value is clamped into [lo, hi], which places an atom of probability at
// each bound; the mass at the upper bound is what exercises the half-open
// boundary handling downstream.
Matrix gen_inputs(std::uint64_t seed, std::size_t n, std::size_t dim, double lo, double hi,
                  bool clip);

// One cell's worth of sweep identity: seed plus the fixed sanity shape.
struct SweepCase {
  std::uint64_t seed = 0;
  int in_dim = 10;
  int out_dim = 8;
  int segments = 8;
  int degree = 3;
  bool clip_inputs = true;
};

}  // namespace lutkan
