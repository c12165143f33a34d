#pragma once

#include <cstdint>
#include <vector>

#include "lutkan/runtime.hpp"
#include "lutkan/spline.hpp"

namespace lutkan {

// Table construction settings. samples_per_segment is L; symmetric pairs
// with int8 (q in [-127, 127], never -128, y_min fixed at 0), asymmetric
// with uint8 (q in [0, 255]). validate() throws ConfigError on L < 2 or a
// scheme/dtype mismatch.
struct QuantConfig {
  int samples_per_segment = 64;
  Scheme scheme = Scheme::Symmetric;
  Dtype dtype = Dtype::Int8;
  ValueRepr value_repr = ValueRepr::SplineComponent;
  Interp interp = Interp::Linear;
  ParamDtype param_dtype = ParamDtype::F32;

  void validate() const;
};

// Unquantized table values. values is [E, K, L] row-major; sample_points is
// [K, L] with x_{k,l} = t_k + l * (t_{k+1} - t_k) / L (right endpoint
// excluded).
struct FloatLut {
  int edges = 0;
  int segments = 0;
  int samples_per_segment = 0;
  std::vector<double> sample_points;
  std::vector<double> values;
};

// The L sample positions of segment k.
std::vector<double> sample_segment_points(const std::vector<double>& breakpoints, int k, int L);

// Samples every edge at every segment's points. For value_repr = phi the
// table holds full edge outputs; for spline_component it holds only the
// spline sum s(x).
FloatLut build_float_lut(const KanLayerSpec& layer, const QuantConfig& config);

// One segment's quantization. q holds the integer codes; dequantization is
// y_min + scale * q. All parameter math is f64 here; storage-width rounding
// happens in compile_layer. Values must be finite. A constant (or all-zero)
// segment degenerates to scale = 0 and all codes 0.
struct SegmentQuant {
  std::vector<int> q;
  double scale = 0.0;
  double y_min = 0.0;
};

// scale = max|v| / 127, y_min = 0, q = round_half_away(v / scale) in
// [-127, 127].
SegmentQuant quantize_segment_symmetric(const std::vector<double>& values);

// y_min = min v, scale = (max v - y_min) / 255, q = round_half_away((v -
// y_min) / scale) in [0, 255].
SegmentQuant quantize_segment_asymmetric(const std::vector<double>& values);

// Full pipeline: sample, quantize per (edge, segment), pack. Dequant
// parameters are rounded to config.param_dtype before the codes are
// computed, so the stored parameters are the ones the codes were fit
// against. Deterministic: identical inputs give byte-identical artifacts.
LutLayerArtifact compile_layer(const KanLayerSpec& layer, const QuantConfig& config,
                               const OobConfig& oob);

// compile_layer per layer; adjacent layer shapes must chain.
std::vector<LutLayerArtifact> compile_model(const std::vector<KanLayerSpec>& layers,
                                            const QuantConfig& config, const OobConfig& oob);

// compile_layer plus a float_table copy of the unquantized values, so the
// runtime's table path can be exercised with quantization bypassed.
LutLayerArtifact compile_layer_debug_float(const KanLayerSpec& layer, const QuantConfig& config,
                                           const OobConfig& oob);

}  // namespace lutkan
