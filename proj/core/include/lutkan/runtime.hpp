#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lutkan/types.hpp"

namespace lutkan {

inline constexpr const char* kFormatVersion = "lutkan/1";

// Domain membership and out-of-bounds handling, fixed at compile time and
// recorded in the artifact. half_open counts x == t_K as out of bounds;
// closed counts it as in range. clip_x always evaluates at the clipped
// input; zero_spline zeroes the table value for out-of-bounds inputs (the
// analytic base branch of spline_component artifacts stays live).
struct OobConfig {
  BoundaryMode boundary_mode = BoundaryMode::Closed;
  OobPolicy oob_policy = OobPolicy::ClipX;
};

// Segment-wise quantized lookup tables for one layer, plus everything needed
// to evaluate them. Layouts: q_table is [E, K, L] row-major raw bytes
// (reinterpreted as signed when dtype is int8), scale and y_min are [E, K],
// knots is [K+1]. The edge_* arrays are per-edge gains, present only for
// value_repr = spline_component. float_table is a debug copy of the
// unquantized table values ([E, K, L]); it is never serialized, and when
// present evaluation reads it instead of dequantizing.
struct LutLayerArtifact {
  std::string format_version = kFormatVersion;
  int in_dim = 0;
  int out_dim = 0;
  int L = 0;
  ValueRepr value_repr = ValueRepr::SplineComponent;
  Interp interp = Interp::Linear;
  Scheme scheme = Scheme::Symmetric;
  Dtype dtype = Dtype::Int8;
  ParamDtype param_dtype = ParamDtype::F32;
  OobConfig oob;
  std::string base_kind = "silu";

  std::vector<float> knots;
  std::vector<std::uint8_t> q_table;
  std::vector<float> scale;
  std::vector<float> y_min;
  std::vector<float> edge_base_scale;
  std::vector<float> edge_spline_scale;
  std::vector<float> edge_out_scale;

  std::vector<double> float_table;

  // Derived, rebuilt by finalize(); not part of the stored format.
  std::vector<double> knots_f64;

  int edge_count() const { return in_dim * out_dim; }
  int segment_count() const { return static_cast<int>(knots.size()) - 1; }

  // Validates shapes and enum pairings, widens knots. Throws ConfigError or
  // DimensionError on inconsistency. Must be called after filling fields.
  void finalize();
};

// Step 1: clamp into the table domain. closed clamps to [t_0, t_K]; half_open
// clamps to [t_0, nextafter(t_K, -inf)] evaluated at f32 width so x' < t_K
// holds in the stored knot precision.
double safe_clip(double x, const std::vector<float>& knots, BoundaryMode mode);

// Step 2: index of the segment containing x', i.e. the last k with
// t_k <= x', clamped to [0, K-1]. Binary search; knots must be the widened
// copy from the artifact.
int segment_index(const std::vector<double>& knots_f64, double x_clipped);

// Steps 3-4: within-segment interpolation coordinates. u in [0, 1] maps to
// z = u * (L - 1); l0 = floor(z), l1 = min(l0 + 1, L - 1), w = z - l0.
struct InterpCoords {
  int l0 = 0;
  int l1 = 0;
  double w = 0.0;
};
InterpCoords interp_coords(const std::vector<double>& knots_f64, int k, double x_clipped, int L);

// In(x) under the artifact's boundary mode, using the stored (f32) bounds.
bool in_range(const LutLayerArtifact& a, double x);

struct ValueResult {
  double value = 0.0;
  bool was_oob = false;
};

// Steps 1-5 for one edge: clip, locate, dequantize, interpolate, then apply
// the OOB policy. Rejects non-finite x with NonFiniteError.
ValueResult lut_eval_value(const LutLayerArtifact& a, int e, double x);

// Edge output. For value_repr = phi this is lut_eval_value's value. For
// spline_component the analytic base branch is reconstructed:
//   clip_x:      out * (base * b(x') + spline * s_hat(x'))   (input saturates)
//   zero_spline: out * (base * b(x)  + spline * m(x) * s_hat(x'))
double lut_eval_phi(const LutLayerArtifact& a, int e, double x);

// Out-of-bounds accounting. Inputs are counted per coordinate (each x_i of a
// sample once, however many edges consume it); a sample is OOB when any of
// its coordinates is.
struct OobStats {
  std::size_t n_samples = 0;
  std::size_t n_oob_samples = 0;
  std::size_t n_inputs = 0;
  std::size_t n_oob_inputs = 0;

  double oob_any_frac() const {
    return n_samples == 0 ? 0.0 : static_cast<double>(n_oob_samples) / static_cast<double>(n_samples);
  }
  void merge(const OobStats& o) {
    n_samples += o.n_samples;
    n_oob_samples += o.n_oob_samples;
    n_inputs += o.n_inputs;
    n_oob_inputs += o.n_oob_inputs;
  }
};

// y_j = sum_i phi_hat_ij(x_i) through the tables. The scalar tier evaluates
// edge by edge via lut_eval_phi; the optimized tier computes each input's
// clip/segment/interp coordinates once and streams the out_dim table rows.
// Tiers agree elementwise to 1e-6 (in practice far tighter).
std::pair<std::vector<double>, OobStats> lut_layer_forward(const LutLayerArtifact& a,
                                                           const std::vector<double>& x,
                                                           Tier tier = Tier::Optimized);

std::pair<Matrix, OobStats> lut_layer_forward_batch(const LutLayerArtifact& a, const Matrix& X,
                                                    Tier tier = Tier::Optimized);

// Sequential multi-layer evaluation; activations flow between layers
// unchanged and each layer keeps its own OOB stats. Throws ConfigError on an
// empty chain and DimensionError on shape mismatches between layers.
struct ChainResult {
  std::vector<double> y;
  std::vector<OobStats> per_layer;
};
ChainResult lut_model_forward(const std::vector<LutLayerArtifact>& chain,
                              const std::vector<double>& x, Tier tier = Tier::Optimized);

struct ChainBatchResult {
  Matrix Y;
  std::vector<OobStats> per_layer;
};
ChainBatchResult lut_model_forward_batch(const std::vector<LutLayerArtifact>& chain,
                                         const Matrix& X, Tier tier = Tier::Optimized);

}  // namespace lutkan
