#include "lutkan/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace lutkan {

MemoryBreakdown memory_breakdown(const LutLayerArtifact& artifact, const KanLayerSpec& layer) {
  MemoryBreakdown m;
  const std::size_t param_size = artifact.param_dtype == ParamDtype::F16 ? 2 : 4;
  m.q_table_bytes = artifact.q_table.size();
  m.scale_bytes = artifact.scale.size() * param_size;
  m.y_min_bytes = artifact.y_min.size() * param_size;
  m.knots_bytes = artifact.knots.size() * 4;
  m.edge_scalar_bytes = (artifact.edge_base_scale.size() + artifact.edge_spline_scale.size() +
                         artifact.edge_out_scale.size()) *
                        4;
  m.total_bytes =
      m.q_table_bytes + m.scale_bytes + m.y_min_bytes + m.knots_bytes + m.edge_scalar_bytes;

  std::size_t params = 0;
  for (const auto& e : layer.edges()) params += e.coeffs.size() + 3;
  m.float_model_bytes = 4 * params;
  m.overhead_ratio = m.float_model_bytes == 0
                         ? 0.0
                         : static_cast<double>(m.total_bytes) / static_cast<double>(m.float_model_bytes);
  return m;
}

EvalReport eval_accuracy(const KanLayerSpec& layer, const LutLayerArtifact& artifact,
                         const Matrix& X) {
  if (layer.in_dim() != artifact.in_dim || layer.out_dim() != artifact.out_dim)
    throw DimensionError("layer and artifact shapes differ");
  if (X.cols != static_cast<std::size_t>(layer.in_dim()))
    throw DimensionError("input column count does not match in_dim");

  const int d = layer.in_dim(), m = layer.out_dim();
  const KnotGrid& grid = layer.grid();
  const int R = grid.basis_count();
  const double lo = artifact.knots_f64.front();
  const double hi = artifact.knots_f64.back();

  double sum_in = 0.0, max_in = 0.0;
  double sum_oob = 0.0, max_oob = 0.0;
  std::size_t n_in = 0, n_oob = 0, n_boundary = 0, oob_samples = 0;

  for (std::size_t s = 0; s < X.rows; s++) {
    const double* xrow = X.row(s);
    bool any_oob = false;
    for (int i = 0; i < d; i++) {
      const double x = xrow[i];
      if (!std::isfinite(x)) throw NonFiniteError("non-finite input value");
      const bool masked = !in_range(artifact, x);
      any_oob |= masked;
      const bool interior = lo <= x && x < hi;

      const std::vector<double> basis = basis_values(grid, x);
      const double base = base_fn(layer.base_kind(), x);
      for (int j = 0; j < m; j++) {
        const int e = i * m + j;
        const EdgeParams& edge = layer.edges()[e];
        double sp = 0.0;
        for (int r = 0; r < R; r++) sp += edge.coeffs[r] * basis[r];
        const double ref = edge.out_scale * (edge.base_scale * base + edge.spline_scale * sp);
        const double err = std::fabs(lut_eval_phi(artifact, e, x) - ref);
        if (masked) {
          sum_oob += err;
          max_oob = std::max(max_oob, err);
          n_oob++;
        } else if (interior) {
          sum_in += err;
          max_in = std::max(max_in, err);
          n_in++;
        } else {
          n_boundary++;
        }
      }
    }
    if (any_oob) oob_samples++;
  }

  EvalReport r;
  r.quant.samples_per_segment = artifact.L;
  r.quant.scheme = artifact.scheme;
  r.quant.dtype = artifact.dtype;
  r.quant.value_repr = artifact.value_repr;
  r.quant.interp = artifact.interp;
  r.quant.param_dtype = artifact.param_dtype;
  r.oob = artifact.oob;
  r.n_samples = X.rows;
  r.mae_inrange = n_in == 0 ? 0.0 : sum_in / static_cast<double>(n_in);
  r.maxabs_inrange = max_in;
  if (n_oob > 0) {
    r.mae_oob = sum_oob / static_cast<double>(n_oob);
    r.maxabs_oob = max_oob;
  }
  r.oob_any_frac = X.rows == 0 ? 0.0 : static_cast<double>(oob_samples) / static_cast<double>(X.rows);
  r.n_inrange_evals = n_in;
  r.n_oob_evals = n_oob;
  r.n_boundary_evals = n_boundary;
  r.memory = memory_breakdown(artifact, layer);
  return r;
}

}  // namespace lutkan
