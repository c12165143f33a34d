#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lutkan/types.hpp"

namespace lutkan {

// Breakpoints t_0 < ... < t_K plus degree. The knot vector is extended on
// each side by `degree` knots continuing the end segment spacing uniformly
// (t_{-1} = t_0 - (t_1 - t_0), t_{K+1} = t_K + (t_K - t_{K-1}), ...), which
// keeps every span width positive. Basis count is R = K + degree.
class KnotGrid {
 public:
  KnotGrid(std::vector<double> breakpoints, int degree);

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& extended_knots() const { return extended_; }
  int degree() const { return degree_; }
  int segment_count() const { return static_cast<int>(breakpoints_.size()) - 1; }
  int basis_count() const { return segment_count() + degree_; }
  double t0() const { return breakpoints_.front(); }
  double tK() const { return breakpoints_.back(); }

 private:
  std::vector<double> breakpoints_;
  int degree_;
  std::vector<double> extended_;
};

// Per-edge spline coefficients and the three scalar gains of
// phi(x) = out_scale * (base_scale * b(x) + spline_scale * s(x)).
struct EdgeParams {
  std::vector<double> coeffs;
  double base_scale = 1.0;
  double spline_scale = 1.0;
  double out_scale = 1.0;
};

// One KAN layer: in_dim * out_dim edges sharing a knot grid and base kind.
// Edges are stored row-major, input index outer: edge(i, j) = edges[i*out_dim + j].
class KanLayerSpec {
 public:
  KanLayerSpec(int in_dim, int out_dim, KnotGrid grid, std::string base_kind,
               std::vector<EdgeParams> edges);

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  int edge_count() const { return in_dim_ * out_dim_; }
  const KnotGrid& grid() const { return grid_; }
  const std::string& base_kind() const { return base_kind_; }
  const std::vector<EdgeParams>& edges() const { return edges_; }
  const EdgeParams& edge(int i, int j) const { return edges_[static_cast<std::size_t>(i) * out_dim_ + j]; }

  // Contiguous copies used by the optimized forward tier: coefficients as an
  // [E, R] row-major block plus one array per scalar gain.
  const std::vector<double>& packed_coeffs() const { return packed_coeffs_; }
  const std::vector<double>& base_scales() const { return base_scales_; }
  const std::vector<double>& spline_scales() const { return spline_scales_; }
  const std::vector<double>& out_scales() const { return out_scales_; }

 private:
  int in_dim_;
  int out_dim_;
  KnotGrid grid_;
  std::string base_kind_;
  std::vector<EdgeParams> edges_;
  std::vector<double> packed_coeffs_;
  std::vector<double> base_scales_;
  std::vector<double> spline_scales_;
  std::vector<double> out_scales_;
};

// All R basis values at x via the Cox-de Boor recursion over the extended
// knots, with the 0/0 -> 0 guard on zero-width spans. Total over the reals:
// outside [t_0, t_K) the values simply decay to the extension region.
std::vector<double> basis_values(const KnotGrid& grid, double x);

// s(x) = sum_r coeffs[r] * B_r(x). coeffs.size() must equal basis_count().
double eval_spline(const KnotGrid& grid, const std::vector<double>& coeffs, double x);

// Base function registry. Only "silu" (x * sigmoid(x)) is registered;
// unknown kinds throw UnsupportedBaseError.
double base_fn(const std::string& kind, double x);

// phi(x) for one edge.
double eval_edge_phi(const KnotGrid& grid, const EdgeParams& edge,
                     const std::string& base_kind, double x);

// y_j = sum_i phi_ij(x_i). x.size() must equal in_dim.
std::vector<double> layer_forward(const KanLayerSpec& layer, const std::vector<double>& x,
                                  Tier tier = Tier::Scalar);

// Row-wise forward over a batch. X.cols must equal in_dim. The scalar tier
// evaluates edge by edge; the optimized tier computes each input's basis
// vector once and reuses it across the out_dim edges fed by that input.
// Tiers agree elementwise to 1e-10.
Matrix layer_forward_batch(const KanLayerSpec& layer, const Matrix& X,
                           Tier tier = Tier::Scalar);

}  // namespace lutkan
