#include "lutkan/spline.hpp"

#include <cmath>
#include <cstddef>

namespace lutkan {

KnotGrid::KnotGrid(std::vector<double> breakpoints, int degree)
    : breakpoints_(std::move(breakpoints)), degree_(degree) {
  if (degree_ < 0) throw ConfigError("degree must be >= 0");
  if (breakpoints_.size() < 2) throw ConfigError("need at least 2 breakpoints");
  for (std::size_t i = 0; i < breakpoints_.size(); i++) {
    if (!std::isfinite(breakpoints_[i])) throw NonFiniteError("non-finite breakpoint");
    if (i > 0 && !(breakpoints_[i - 1] < breakpoints_[i]))
      throw ConfigError("breakpoints must be strictly increasing");
  }

  const std::size_t n = breakpoints_.size();
  const double h_left = breakpoints_[1] - breakpoints_[0];
  const double h_right = breakpoints_[n - 1] - breakpoints_[n - 2];
  extended_.resize(n + 2 * static_cast<std::size_t>(degree_));
  for (int i = 0; i < degree_; i++)
    extended_[degree_ - 1 - i] = breakpoints_.front() - (i + 1) * h_left;
  for (std::size_t i = 0; i < n; i++) extended_[degree_ + i] = breakpoints_[i];
  for (int i = 0; i < degree_; i++)
    extended_[degree_ + n + i] = breakpoints_.back() + (i + 1) * h_right;
}

KanLayerSpec::KanLayerSpec(int in_dim, int out_dim, KnotGrid grid, std::string base_kind,
                           std::vector<EdgeParams> edges)
    : in_dim_(in_dim),
      out_dim_(out_dim),
      grid_(std::move(grid)),
      base_kind_(std::move(base_kind)),
      edges_(std::move(edges)) {
  if (in_dim_ < 1 || out_dim_ < 1) throw ConfigError("layer dims must be >= 1");
  const std::size_t expect = static_cast<std::size_t>(in_dim_) * out_dim_;
  if (edges_.size() != expect)
    throw DimensionError("edge count " + std::to_string(edges_.size()) + " != in_dim*out_dim " +
                         std::to_string(expect));
  const std::size_t R = static_cast<std::size_t>(grid_.basis_count());
  for (const auto& e : edges_) {
    if (e.coeffs.size() != R)
      throw DimensionError("edge coefficient count " + std::to_string(e.coeffs.size()) +
                           " != basis count " + std::to_string(R));
    for (double c : e.coeffs)
      if (!std::isfinite(c)) throw NonFiniteError("non-finite spline coefficient");
    if (!std::isfinite(e.base_scale) || !std::isfinite(e.spline_scale) || !std::isfinite(e.out_scale))
      throw NonFiniteError("non-finite edge scale");
  }

  packed_coeffs_.resize(edges_.size() * R);
  base_scales_.resize(edges_.size());
  spline_scales_.resize(edges_.size());
  out_scales_.resize(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); e++) {
    for (std::size_t r = 0; r < R; r++) packed_coeffs_[e * R + r] = edges_[e].coeffs[r];
    base_scales_[e] = edges_[e].base_scale;
    spline_scales_[e] = edges_[e].spline_scale;
    out_scales_[e] = edges_[e].out_scale;
  }
}

namespace {

// Cox-de Boor over T into `buf`, which must hold basis_count + degree
// entries for the degree-0 pass. After the final pass the first
// basis_count entries are the result.
void basis_into(const std::vector<double>& T, int degree, double x, double* buf) {
  const int n0 = static_cast<int>(T.size()) - 1;  // degree-0 indicator count
  for (int r = 0; r < n0; r++) buf[r] = (T[r] <= x && x < T[r + 1]) ? 1.0 : 0.0;
  for (int q = 1; q <= degree; q++) {
    const int count = n0 - q;
    for (int r = 0; r < count; r++) {
      double acc = 0.0;
      const double d1 = T[r + q] - T[r];
      if (d1 > 0.0) acc += (x - T[r]) / d1 * buf[r];
      const double d2 = T[r + q + 1] - T[r + 1];
      if (d2 > 0.0) acc += (T[r + q + 1] - x) / d2 * buf[r + 1];
      buf[r] = acc;
    }
  }
}

double silu(double x) { return x / (1.0 + std::exp(-x)); }

}  // namespace

std::vector<double> basis_values(const KnotGrid& grid, double x) {
  std::vector<double> buf(grid.basis_count() + grid.degree());
  basis_into(grid.extended_knots(), grid.degree(), x, buf.data());
  buf.resize(grid.basis_count());
  return buf;
}

double eval_spline(const KnotGrid& grid, const std::vector<double>& coeffs, double x) {
  if (coeffs.size() != static_cast<std::size_t>(grid.basis_count()))
    throw DimensionError("coefficient count does not match basis count");
  const std::vector<double> b = basis_values(grid, x);
  double acc = 0.0;
  for (std::size_t r = 0; r < b.size(); r++) acc += coeffs[r] * b[r];
  return acc;
}

double base_fn(const std::string& kind, double x) {
  if (kind == "silu") return silu(x);
  throw UnsupportedBaseError("unsupported base kind: \"" + kind + "\"");
}

double eval_edge_phi(const KnotGrid& grid, const EdgeParams& edge,
                     const std::string& base_kind, double x) {
  const double b = base_fn(base_kind, x);
  const double s = eval_spline(grid, edge.coeffs, x);
  return edge.out_scale * (edge.base_scale * b + edge.spline_scale * s);
}

std::vector<double> layer_forward(const KanLayerSpec& layer, const std::vector<double>& x,
                                  Tier tier) {
  if (x.size() != static_cast<std::size_t>(layer.in_dim()))
    throw DimensionError("input size does not match in_dim");
  Matrix X(1, x.size());
  for (std::size_t i = 0; i < x.size(); i++) X.at(0, i) = x[i];
  Matrix Y = layer_forward_batch(layer, X, tier);
  return std::vector<double>(Y.data.begin(), Y.data.end());
}

namespace {

Matrix forward_scalar(const KanLayerSpec& layer, const Matrix& X) {
  const int d = layer.in_dim(), m = layer.out_dim();
  Matrix Y(X.rows, static_cast<std::size_t>(m));
  for (std::size_t s = 0; s < X.rows; s++) {
    const double* xrow = X.row(s);
    double* yrow = Y.row(s);
    for (int j = 0; j < m; j++) {
      double acc = 0.0;
      for (int i = 0; i < d; i++)
        acc += eval_edge_phi(layer.grid(), layer.edge(i, j), layer.base_kind(), xrow[i]);
      yrow[j] = acc;
    }
  }
  return Y;
}

Matrix forward_optimized(const KanLayerSpec& layer, const Matrix& X) {
  const int d = layer.in_dim(), m = layer.out_dim();
  const KnotGrid& grid = layer.grid();
  const std::vector<double>& T = grid.extended_knots();
  const int degree = grid.degree();
  const int R = grid.basis_count();
  const double* coeffs = layer.packed_coeffs().data();
  const double* bs = layer.base_scales().data();
  const double* ss = layer.spline_scales().data();
  const double* os = layer.out_scales().data();
  const bool is_silu = layer.base_kind() == "silu";
  if (!is_silu) base_fn(layer.base_kind(), 0.0);  // raise the registry error up front

  Matrix Y(X.rows, static_cast<std::size_t>(m));
  std::vector<double> basis(static_cast<std::size_t>(R + degree));
  for (std::size_t s = 0; s < X.rows; s++) {
    const double* xrow = X.row(s);
    double* yrow = Y.row(s);
    for (int i = 0; i < d; i++) {
      const double x = xrow[i];
      basis_into(T, degree, x, basis.data());
      const double b = is_silu ? silu(x) : base_fn(layer.base_kind(), x);
      const double* crow = coeffs + static_cast<std::size_t>(i) * m * R;
      const std::size_t e0 = static_cast<std::size_t>(i) * m;
      for (int j = 0; j < m; j++) {
        double sp = 0.0;
        const double* c = crow + static_cast<std::size_t>(j) * R;
        for (int r = 0; r < R; r++) sp += c[r] * basis[r];
        const std::size_t e = e0 + j;
        yrow[j] += os[e] * (bs[e] * b + ss[e] * sp);
      }
    }
  }
  return Y;
}

}  // namespace

Matrix layer_forward_batch(const KanLayerSpec& layer, const Matrix& X, Tier tier) {
  if (X.cols != static_cast<std::size_t>(layer.in_dim()))
    throw DimensionError("batch column count does not match in_dim");
  return tier == Tier::Scalar ? forward_scalar(layer, X) : forward_optimized(layer, X);
}

}  // namespace lutkan
