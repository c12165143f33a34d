#include "lutkan/model_gen.hpp"

#include <algorithm>

namespace lutkan {

KanLayerSpec gen_layer(std::uint64_t seed, int in_dim, int out_dim, int segments, int degree) {
  if (segments < 1) throw ConfigError("segments must be >= 1");
  std::vector<double> breakpoints(static_cast<std::size_t>(segments) + 1);
  for (int k = 0; k <= segments; k++)
    breakpoints[k] = -1.0 + 2.0 * static_cast<double>(k) / segments;
  KnotGrid grid(std::move(breakpoints), degree);

  Rng rng(seed);
  const int R = grid.basis_count();
  std::vector<EdgeParams> edges;
  edges.reserve(static_cast<std::size_t>(in_dim) * out_dim);
  for (int e = 0; e < in_dim * out_dim; e++) {
    EdgeParams ep;
    ep.coeffs.resize(R);
    for (int r = 0; r < R; r++) ep.coeffs[r] = rng.normal(0.0, 0.1);
    ep.base_scale = rng.uniform(0.5, 1.5);
    ep.spline_scale = rng.uniform(0.5, 1.5);
    ep.out_scale = rng.uniform(0.5, 1.5);
    edges.push_back(std::move(ep));
  }
  return KanLayerSpec(in_dim, out_dim, std::move(grid), "silu", std::move(edges));
}

KanLayerSpec gen_sanity_layer(std::uint64_t seed) {
  return gen_layer(seed, 10, 8, 8, 3);
}

Matrix gen_inputs(std::uint64_t seed, std::size_t n, std::size_t dim, double lo, double hi,
                  bool clip) {
  if (!(lo < hi)) throw ConfigError("input range must satisfy lo < hi");
  Rng rng(seed);
  Matrix X(n, dim);
  for (double& v : X.data) {
    double x = rng.normal();
    if (clip) x = std::clamp(x, lo, hi);
    v = x;
  }
  return X;
}

}  // namespace lutkan
