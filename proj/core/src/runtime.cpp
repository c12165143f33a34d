#include "lutkan/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lutkan/spline.hpp"

namespace lutkan {

void LutLayerArtifact::finalize() {
  if (in_dim < 1 || out_dim < 1) throw ConfigError("artifact dims must be >= 1");
  if (L < 2) throw ConfigError("samples per segment must be >= 2");
  if (knots.size() < 2) throw ConfigError("artifact needs at least 2 knots");
  for (std::size_t i = 0; i < knots.size(); i++) {
    if (!std::isfinite(knots[i])) throw NonFiniteError("non-finite knot");
    if (i > 0 && !(knots[i - 1] < knots[i])) throw ConfigError("knots must be strictly increasing");
  }
  if (scheme == Scheme::Symmetric && dtype != Dtype::Int8)
    throw ConfigError("symmetric scheme requires int8");
  if (scheme == Scheme::Asymmetric && dtype != Dtype::Uint8)
    throw ConfigError("asymmetric scheme requires uint8");

  const std::size_t E = static_cast<std::size_t>(edge_count());
  const std::size_t K = static_cast<std::size_t>(segment_count());
  const std::size_t cells = E * K;
  if (q_table.size() != cells * static_cast<std::size_t>(L))
    throw DimensionError("q_table size does not match [E, K, L]");
  if (scale.size() != cells) throw DimensionError("scale size does not match [E, K]");
  if (y_min.size() != cells) throw DimensionError("y_min size does not match [E, K]");
  if (value_repr == ValueRepr::SplineComponent) {
    if (edge_base_scale.size() != E || edge_spline_scale.size() != E || edge_out_scale.size() != E)
      throw DimensionError("edge scale arrays must have one entry per edge");
    if (base_kind.empty()) throw ConfigError("spline_component artifact needs a base_kind");
  } else {
    if (!edge_base_scale.empty() || !edge_spline_scale.empty() || !edge_out_scale.empty())
      throw ConfigError("phi artifact must not carry edge scale arrays");
  }
  if (!float_table.empty() && float_table.size() != q_table.size())
    throw DimensionError("float_table size does not match q_table");

  knots_f64.assign(knots.begin(), knots.end());
}

double safe_clip(double x, const std::vector<float>& knots, BoundaryMode mode) {
  const double lo = static_cast<double>(knots.front());
  double hi = static_cast<double>(knots.back());
  if (mode == BoundaryMode::HalfOpen)
    hi = static_cast<double>(std::nextafterf(knots.back(), -std::numeric_limits<float>::infinity()));
  return std::clamp(x, lo, hi);
}

int segment_index(const std::vector<double>& knots_f64, double x_clipped) {
  const auto it = std::upper_bound(knots_f64.begin(), knots_f64.end(), x_clipped);
  int k = static_cast<int>(it - knots_f64.begin()) - 1;
  const int K = static_cast<int>(knots_f64.size()) - 1;
  return std::clamp(k, 0, K - 1);
}

InterpCoords interp_coords(const std::vector<double>& knots_f64, int k, double x_clipped, int L) {
  const double t0 = knots_f64[k], t1 = knots_f64[k + 1];
  const double u = (x_clipped - t0) / (t1 - t0);
  const double z = u * static_cast<double>(L - 1);
  InterpCoords c;
  c.l0 = std::clamp(static_cast<int>(std::floor(z)), 0, L - 1);
  c.l1 = std::min(c.l0 + 1, L - 1);
  c.w = z - static_cast<double>(c.l0);
  return c;
}

bool in_range(const LutLayerArtifact& a, double x) {
  const double lo = a.knots_f64.front(), hi = a.knots_f64.back();
  return a.oob.boundary_mode == BoundaryMode::HalfOpen ? (lo <= x && x < hi)
                                                       : (lo <= x && x <= hi);
}

namespace {

double silu(double x) { return x / (1.0 + std::exp(-x)); }

inline double fetch_cell(const LutLayerArtifact& a, std::size_t cell, int l) {
  const std::size_t off = cell * static_cast<std::size_t>(a.L) + static_cast<std::size_t>(l);
  if (!a.float_table.empty()) return a.float_table[off];
  const double q = a.dtype == Dtype::Int8
                       ? static_cast<double>(static_cast<std::int8_t>(a.q_table[off]))
                       : static_cast<double>(a.q_table[off]);
  return static_cast<double>(a.y_min[cell]) + static_cast<double>(a.scale[cell]) * q;
}

void check_finite_input(double x) {
  if (!std::isfinite(x)) throw NonFiniteError("non-finite input value");
}

}  // namespace

ValueResult lut_eval_value(const LutLayerArtifact& a, int e, double x) {
  check_finite_input(x);
  if (e < 0 || e >= a.edge_count()) throw DimensionError("edge index out of range");
  const bool in = in_range(a, x);
  const double xp = safe_clip(x, a.knots, a.oob.boundary_mode);
  const int k = segment_index(a.knots_f64, xp);
  const InterpCoords c = interp_coords(a.knots_f64, k, xp, a.L);
  const std::size_t cell = static_cast<std::size_t>(e) * a.segment_count() + k;
  const double v0 = fetch_cell(a, cell, c.l0);
  const double v1 = fetch_cell(a, cell, c.l1);
  double v = (1.0 - c.w) * v0 + c.w * v1;
  if (a.oob.oob_policy == OobPolicy::ZeroSpline && !in) v = 0.0;
  return {v, !in};
}

double lut_eval_phi(const LutLayerArtifact& a, int e, double x) {
  const ValueResult r = lut_eval_value(a, e, x);
  if (a.value_repr == ValueRepr::Phi) return r.value;
  const double bx = a.oob.oob_policy == OobPolicy::ClipX
                        ? base_fn(a.base_kind, safe_clip(x, a.knots, a.oob.boundary_mode))
                        : base_fn(a.base_kind, x);
  return static_cast<double>(a.edge_out_scale[e]) *
         (static_cast<double>(a.edge_base_scale[e]) * bx +
          static_cast<double>(a.edge_spline_scale[e]) * r.value);
}

namespace {

template <bool INT8>
inline double fetch_quant(const std::uint8_t* q, std::size_t off) {
  if constexpr (INT8) return static_cast<double>(static_cast<std::int8_t>(q[off]));
  return static_cast<double>(q[off]);
}

// One batch pass with fixed representation/policy/dtype. Per (sample, input)
// the clip/segment/interp work happens once (domain bounds hoisted, linear
// segment scan, mask folded into the lerp weights); the j loop only touches
// tables. cb/cs are the per-edge gains prefused to out*base and out*spline;
// null for the phi representation.
template <bool SPLINE_REPR, bool ZERO_SPLINE, bool INT8>
void forward_quant(const LutLayerArtifact& a, const Matrix& X, Matrix& Y, OobStats& stats,
                   const double* cb, const double* cs) {
  const int d = a.in_dim, m = a.out_dim, L = a.L;
  const std::size_t K = static_cast<std::size_t>(a.segment_count());
  const std::uint8_t* q = a.q_table.data();
  const float* scale = a.scale.data();
  const float* ymin = a.y_min.data();
  const double* T = a.knots_f64.data();

  const bool half_open = a.oob.boundary_mode == BoundaryMode::HalfOpen;
  const double lo = T[0];
  const double hi = T[K];
  // The same clip target safe_clip computes: one f32 step below t_K when the
  // domain is half open, t_K itself when closed.
  const double hi_clip =
      half_open ? static_cast<double>(
                      std::nextafterf(a.knots.back(), -std::numeric_limits<float>::infinity()))
                : hi;
  const double Lm1 = static_cast<double>(L - 1);

  std::size_t oob_inputs = 0, oob_samples = 0;

  // Per-sample scratch, reused across the batch. Splitting coordinate math
  // from the table walk keeps the two phases independently pipelined.
  std::vector<std::size_t> cell0v(static_cast<std::size_t>(d));
  std::vector<int> l0v(static_cast<std::size_t>(d)), l1v(static_cast<std::size_t>(d));
  std::vector<double> w0v(static_cast<std::size_t>(d)), w1v(static_cast<std::size_t>(d));
  std::vector<double> bxv(SPLINE_REPR ? static_cast<std::size_t>(d) : 0);

  for (std::size_t s = 0; s < X.rows; s++) {
    const double* xrow = X.row(s);
    double* yrow = Y.row(s);
    int row_oob = 0;

    for (int i = 0; i < d; i++) {
      const double x = xrow[i];
      check_finite_input(x);
      const bool in = lo <= x && (half_open ? x < hi : x <= hi);
      row_oob += !in;
      const double xp = x < lo ? lo : (x > hi_clip ? hi_clip : x);
      std::size_t k = 0;
      for (std::size_t r = 1; r < K; r++) k += xp >= T[r];
      const double u = (xp - T[k]) / (T[k + 1] - T[k]);
      const double z = u * Lm1;
      int l0 = static_cast<int>(std::floor(z));
      l0 = l0 < 0 ? 0 : (l0 > L - 1 ? L - 1 : l0);
      const double w1 = z - static_cast<double>(l0);
      const double mask = (ZERO_SPLINE && !in) ? 0.0 : 1.0;
      cell0v[i] = static_cast<std::size_t>(i) * m * K + k;
      l0v[i] = l0;
      l1v[i] = l0 + 1 < L ? l0 + 1 : L - 1;
      w0v[i] = mask * (1.0 - w1);
      w1v[i] = mask * w1;
      if constexpr (SPLINE_REPR) bxv[i] = silu(ZERO_SPLINE ? x : xp);
    }

    for (int i = 0; i < d; i++) {
      const std::size_t e0 = static_cast<std::size_t>(i) * m;
      const std::size_t cell0 = cell0v[i];
      const std::size_t l0 = static_cast<std::size_t>(l0v[i]);
      const std::size_t l1 = static_cast<std::size_t>(l1v[i]);
      const double w0m = w0v[i], w1m = w1v[i];
      const double bx = SPLINE_REPR ? bxv[i] : 0.0;
      for (int j = 0; j < m; j++) {
        const std::size_t cell = cell0 + static_cast<std::size_t>(j) * K;
        const std::size_t off = cell * static_cast<std::size_t>(L);
        const double ym = static_cast<double>(ymin[cell]);
        const double sc = static_cast<double>(scale[cell]);
        const double v0 = ym + sc * fetch_quant<INT8>(q, off + l0);
        const double v1 = ym + sc * fetch_quant<INT8>(q, off + l1);
        const double v = w0m * v0 + w1m * v1;
        if constexpr (SPLINE_REPR) {
          yrow[j] += cb[e0 + static_cast<std::size_t>(j)] * bx +
                     cs[e0 + static_cast<std::size_t>(j)] * v;
        } else {
          yrow[j] += v;
        }
      }
    }

    oob_inputs += static_cast<std::size_t>(row_oob);
    oob_samples += row_oob != 0;
  }
  stats.n_samples += X.rows;
  stats.n_inputs += X.rows * static_cast<std::size_t>(d);
  stats.n_oob_inputs += oob_inputs;
  stats.n_oob_samples += oob_samples;
}

void forward_generic(const LutLayerArtifact& a, const Matrix& X, Matrix& Y, OobStats& stats) {
  const int d = a.in_dim, m = a.out_dim;
  for (std::size_t s = 0; s < X.rows; s++) {
    const double* xrow = X.row(s);
    double* yrow = Y.row(s);
    bool any_oob = false;
    for (int i = 0; i < d; i++) {
      check_finite_input(xrow[i]);
      const bool in = in_range(a, xrow[i]);
      any_oob |= !in;
      if (!in) stats.n_oob_inputs++;
    }
    for (int j = 0; j < m; j++) {
      double acc = 0.0;
      for (int i = 0; i < d; i++) acc += lut_eval_phi(a, i * m + j, xrow[i]);
      yrow[j] = acc;
    }
    stats.n_samples++;
    stats.n_inputs += static_cast<std::size_t>(d);
    if (any_oob) stats.n_oob_samples++;
  }
}

}  // namespace

std::pair<Matrix, OobStats> lut_layer_forward_batch(const LutLayerArtifact& a, const Matrix& X,
                                                    Tier tier) {
  if (X.cols != static_cast<std::size_t>(a.in_dim))
    throw DimensionError("batch column count does not match artifact in_dim");
  Matrix Y(X.rows, static_cast<std::size_t>(a.out_dim));
  OobStats stats;
  if (tier == Tier::Scalar || !a.float_table.empty()) {
    forward_generic(a, X, Y, stats);
    return {std::move(Y), stats};
  }
  const bool sr = a.value_repr == ValueRepr::SplineComponent;
  const bool zs = a.oob.oob_policy == OobPolicy::ZeroSpline;
  const bool i8 = a.dtype == Dtype::Int8;
  std::vector<double> cb, cs;
  if (sr) {
    const std::size_t E = static_cast<std::size_t>(a.edge_count());
    cb.resize(E);
    cs.resize(E);
    for (std::size_t e = 0; e < E; e++) {
      cb[e] = static_cast<double>(a.edge_out_scale[e]) * static_cast<double>(a.edge_base_scale[e]);
      cs[e] =
          static_cast<double>(a.edge_out_scale[e]) * static_cast<double>(a.edge_spline_scale[e]);
    }
  }
  const double* cbp = cb.data();
  const double* csp = cs.data();
  if (sr && zs && i8) forward_quant<true, true, true>(a, X, Y, stats, cbp, csp);
  else if (sr && zs && !i8) forward_quant<true, true, false>(a, X, Y, stats, cbp, csp);
  else if (sr && !zs && i8) forward_quant<true, false, true>(a, X, Y, stats, cbp, csp);
  else if (sr && !zs && !i8) forward_quant<true, false, false>(a, X, Y, stats, cbp, csp);
  else if (!sr && zs && i8) forward_quant<false, true, true>(a, X, Y, stats, cbp, csp);
  else if (!sr && zs && !i8) forward_quant<false, true, false>(a, X, Y, stats, cbp, csp);
  else if (!sr && !zs && i8) forward_quant<false, false, true>(a, X, Y, stats, cbp, csp);
  else forward_quant<false, false, false>(a, X, Y, stats, cbp, csp);
  return {std::move(Y), stats};
}

std::pair<std::vector<double>, OobStats> lut_layer_forward(const LutLayerArtifact& a,
                                                           const std::vector<double>& x,
                                                           Tier tier) {
  if (x.size() != static_cast<std::size_t>(a.in_dim))
    throw DimensionError("input size does not match artifact in_dim");
  Matrix X(1, x.size());
  for (std::size_t i = 0; i < x.size(); i++) X.at(0, i) = x[i];
  auto [Y, stats] = lut_layer_forward_batch(a, X, tier);
  return {std::vector<double>(Y.data.begin(), Y.data.end()), stats};
}

ChainBatchResult lut_model_forward_batch(const std::vector<LutLayerArtifact>& chain,
                                         const Matrix& X, Tier tier) {
  if (chain.empty()) throw ConfigError("artifact chain is empty");
  for (std::size_t l = 1; l < chain.size(); l++)
    if (chain[l].in_dim != chain[l - 1].out_dim)
      throw DimensionError("artifact chain dimension mismatch between layers " +
                           std::to_string(l - 1) + " and " + std::to_string(l));
  ChainBatchResult r;
  Matrix cur = X;
  for (const auto& a : chain) {
    auto [Y, stats] = lut_layer_forward_batch(a, cur, tier);
    r.per_layer.push_back(stats);
    cur = std::move(Y);
  }
  r.Y = std::move(cur);
  return r;
}

ChainResult lut_model_forward(const std::vector<LutLayerArtifact>& chain,
                              const std::vector<double>& x, Tier tier) {
  Matrix X(1, x.size());
  for (std::size_t i = 0; i < x.size(); i++) X.at(0, i) = x[i];
  ChainBatchResult rb = lut_model_forward_batch(chain, X, tier);
  ChainResult r;
  r.y.assign(rb.Y.data.begin(), rb.Y.data.end());
  r.per_layer = std::move(rb.per_layer);
  return r;
}

}  // namespace lutkan
