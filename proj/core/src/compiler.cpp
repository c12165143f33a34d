#include "lutkan/compiler.hpp"

#include <algorithm>
#include <cmath>

#include "lutkan/float16.hpp"

namespace lutkan {

void QuantConfig::validate() const {
  if (samples_per_segment < 2) throw ConfigError("samples_per_segment must be >= 2");
  if (scheme == Scheme::Symmetric && dtype != Dtype::Int8)
    throw ConfigError("symmetric scheme requires int8");
  if (scheme == Scheme::Asymmetric && dtype != Dtype::Uint8)
    throw ConfigError("asymmetric scheme requires uint8");
}

std::vector<double> sample_segment_points(const std::vector<double>& breakpoints, int k, int L) {
  if (L < 2) throw ConfigError("samples_per_segment must be >= 2");
  if (k < 0 || k + 1 >= static_cast<int>(breakpoints.size()))
    throw DimensionError("segment index out of range");
  const double t0 = breakpoints[k];
  const double step = (breakpoints[k + 1] - t0) / static_cast<double>(L);
  std::vector<double> xs(static_cast<std::size_t>(L));
  for (int l = 0; l < L; l++) xs[l] = t0 + static_cast<double>(l) * step;
  return xs;
}

FloatLut build_float_lut(const KanLayerSpec& layer, const QuantConfig& config) {
  config.validate();
  const KnotGrid& grid = layer.grid();
  const int E = layer.edge_count();
  const int K = grid.segment_count();
  const int L = config.samples_per_segment;
  const int R = grid.basis_count();

  FloatLut lut;
  lut.edges = E;
  lut.segments = K;
  lut.samples_per_segment = L;
  lut.sample_points.resize(static_cast<std::size_t>(K) * L);
  for (int k = 0; k < K; k++) {
    const std::vector<double> xs = sample_segment_points(grid.breakpoints(), k, L);
    std::copy(xs.begin(), xs.end(), lut.sample_points.begin() + static_cast<std::size_t>(k) * L);
  }

  // The sample grid is shared by all edges, so evaluate the basis once per
  // point and reuse it for every edge's coefficient dot product.
  const std::size_t npts = lut.sample_points.size();
  std::vector<double> basis(npts * static_cast<std::size_t>(R));
  std::vector<double> base_vals(npts);
  for (std::size_t p = 0; p < npts; p++) {
    const std::vector<double> b = basis_values(grid, lut.sample_points[p]);
    std::copy(b.begin(), b.end(), basis.begin() + p * R);
    if (config.value_repr == ValueRepr::Phi)
      base_vals[p] = base_fn(layer.base_kind(), lut.sample_points[p]);
  }

  lut.values.resize(static_cast<std::size_t>(E) * npts);
  for (int e = 0; e < E; e++) {
    const EdgeParams& edge = layer.edges()[e];
    double* out = lut.values.data() + static_cast<std::size_t>(e) * npts;
    for (std::size_t p = 0; p < npts; p++) {
      const double* b = basis.data() + p * R;
      double s = 0.0;
      for (int r = 0; r < R; r++) s += edge.coeffs[r] * b[r];
      out[p] = config.value_repr == ValueRepr::Phi
                   ? edge.out_scale * (edge.base_scale * base_vals[p] + edge.spline_scale * s)
                   : s;
    }
  }
  return lut;
}

namespace {

double round_half_away(double r) { return std::round(r); }

void check_finite_values(const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("cannot quantize an empty segment");
  for (double v : values)
    if (!std::isfinite(v)) throw NonFiniteError("non-finite table value");
}

// Codes against explicitly given dequant parameters.
std::vector<int> codes_for(const std::vector<double>& values, double scale, double y_min,
                           int q_lo, int q_hi) {
  std::vector<int> q(values.size(), 0);
  if (scale <= 0.0) return q;
  for (std::size_t i = 0; i < values.size(); i++) {
    const double r = round_half_away((values[i] - y_min) / scale);
    q[i] = static_cast<int>(std::clamp(r, static_cast<double>(q_lo), static_cast<double>(q_hi)));
  }
  return q;
}

double round_param(double v, ParamDtype dtype) {
  const float f = static_cast<float>(v);
  return dtype == ParamDtype::F16 ? static_cast<double>(round_through_f16(f))
                                  : static_cast<double>(f);
}

}  // namespace

SegmentQuant quantize_segment_symmetric(const std::vector<double>& values) {
  check_finite_values(values);
  double amax = 0.0;
  for (double v : values) amax = std::max(amax, std::fabs(v));
  SegmentQuant out;
  out.y_min = 0.0;
  out.scale = amax / 127.0;
  out.q = codes_for(values, out.scale, out.y_min, -127, 127);
  return out;
}

SegmentQuant quantize_segment_asymmetric(const std::vector<double>& values) {
  check_finite_values(values);
  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  SegmentQuant out;
  out.y_min = lo;
  out.scale = (hi - lo) / 255.0;
  out.q = codes_for(values, out.scale, out.y_min, 0, 255);
  return out;
}

namespace {

LutLayerArtifact compile_impl(const KanLayerSpec& layer, const QuantConfig& config,
                              const OobConfig& oob, bool keep_float) {
  config.validate();
  const FloatLut flut = build_float_lut(layer, config);
  const int E = flut.edges, K = flut.segments, L = flut.samples_per_segment;

  LutLayerArtifact a;
  a.format_version = kFormatVersion;
  a.in_dim = layer.in_dim();
  a.out_dim = layer.out_dim();
  a.L = L;
  a.value_repr = config.value_repr;
  a.interp = config.interp;
  a.scheme = config.scheme;
  a.dtype = config.dtype;
  a.param_dtype = config.param_dtype;
  a.oob = oob;
  a.base_kind = config.value_repr == ValueRepr::SplineComponent ? layer.base_kind() : "";

  if (config.value_repr == ValueRepr::SplineComponent) {
    a.edge_base_scale.resize(static_cast<std::size_t>(E));
    a.edge_spline_scale.resize(static_cast<std::size_t>(E));
    a.edge_out_scale.resize(static_cast<std::size_t>(E));
    for (int e = 0; e < E; e++) {
      const EdgeParams& p = layer.edges()[static_cast<std::size_t>(e)];
      a.edge_base_scale[static_cast<std::size_t>(e)] = static_cast<float>(p.base_scale);
      a.edge_spline_scale[static_cast<std::size_t>(e)] = static_cast<float>(p.spline_scale);
      a.edge_out_scale[static_cast<std::size_t>(e)] = static_cast<float>(p.out_scale);
    }
  }

  a.knots.resize(layer.grid().breakpoints().size());
  for (std::size_t i = 0; i < a.knots.size(); i++)
    a.knots[i] = static_cast<float>(layer.grid().breakpoints()[i]);

  const std::size_t cells = static_cast<std::size_t>(E) * K;
  a.q_table.resize(cells * static_cast<std::size_t>(L));
  a.scale.resize(cells);
  a.y_min.resize(cells);

  std::vector<double> seg(static_cast<std::size_t>(L));
  for (std::size_t cell = 0; cell < cells; cell++) {
    const double* src = flut.values.data() + cell * L;
    std::copy(src, src + L, seg.begin());

    // Fit in f64, then refit the codes against the storage-width parameters
    // so dequantization uses exactly what the artifact carries.
    double y_min, scale;
    if (config.scheme == Scheme::Symmetric) {
      const SegmentQuant sq = quantize_segment_symmetric(seg);
      y_min = 0.0;
      scale = round_param(sq.scale, config.param_dtype);
    } else {
      const SegmentQuant sq = quantize_segment_asymmetric(seg);
      y_min = round_param(sq.y_min, config.param_dtype);
      double hi = seg[0];
      for (double v : seg) hi = std::max(hi, v);
      // y_min may round above hi on a near-constant segment; keep scale >= 0.
      scale = std::max(round_param((hi - y_min) / 255.0, config.param_dtype), 0.0);
    }
    const std::vector<int> q =
        config.scheme == Scheme::Symmetric ? codes_for(seg, scale, y_min, -127, 127)
                                           : codes_for(seg, scale, y_min, 0, 255);

    a.scale[cell] = static_cast<float>(scale);
    a.y_min[cell] = static_cast<float>(y_min);
    std::uint8_t* dst = a.q_table.data() + cell * static_cast<std::size_t>(L);
    for (int l = 0; l < L; l++) {
      dst[l] = config.dtype == Dtype::Int8
                   ? static_cast<std::uint8_t>(static_cast<std::int8_t>(q[l]))
                   : static_cast<std::uint8_t>(q[l]);
    }
  }

  if (keep_float) a.float_table = flut.values;
  a.finalize();
  return a;
}

}  // namespace

LutLayerArtifact compile_layer(const KanLayerSpec& layer, const QuantConfig& config,
                               const OobConfig& oob) {
  return compile_impl(layer, config, oob, false);
}

std::vector<LutLayerArtifact> compile_model(const std::vector<KanLayerSpec>& layers,
                                            const QuantConfig& config, const OobConfig& oob) {
  if (layers.empty()) throw ConfigError("model has no layers");
  for (std::size_t l = 1; l < layers.size(); l++)
    if (layers[l].in_dim() != layers[l - 1].out_dim())
      throw DimensionError("layer shapes do not chain at position " + std::to_string(l));
  std::vector<LutLayerArtifact> out;
  out.reserve(layers.size());
  for (const auto& layer : layers) out.push_back(compile_layer(layer, config, oob));
  return out;
}

LutLayerArtifact compile_layer_debug_float(const KanLayerSpec& layer, const QuantConfig& config,
                                           const OobConfig& oob) {
  return compile_impl(layer, config, oob, true);
}

}  // namespace lutkan
