#pragma once

#include <filesystem>

#include "lutkan/spline.hpp"

namespace lutkan {

// Layer model file schema (JSON object):
//   in_dim, out_dim : int
//   degree          : int
//   breakpoints     : [t_0, ..., t_K]
//   base_kind       : string
//   edges           : [{coeffs: [...], base_scale, spline_scale, out_scale}, ...]
// Edges are row-major, input index outer. Missing or ill-typed fields throw
// ConfigError naming the field.
KanLayerSpec load_model_json(const std::filesystem::path& path);
void save_model_json(const KanLayerSpec& layer, const std::filesystem::path& path);

KanLayerSpec model_from_json_text(const std::string& text);
std::string model_to_json_text(const KanLayerSpec& layer);

}  // namespace lutkan
