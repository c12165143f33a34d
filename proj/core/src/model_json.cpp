#include "lutkan/model_json.hpp"

#include <fstream>

#include <json.hpp>

namespace lutkan {

namespace {

using nlohmann::json;

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string("model JSON missing key: ") + key);
  return *it;
}

double require_number(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number()) throw ConfigError(std::string("model JSON field is not a number: ") + key);
  return v.get<double>();
}

std::vector<double> require_array(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_array()) throw ConfigError(std::string("model JSON field is not an array: ") + key);
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(std::string("non-numeric entry in: ") + key);
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

KanLayerSpec model_from_json_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("model JSON parse failure");
  if (!j.is_object()) throw ConfigError("model JSON root must be an object");

  const int in_dim = static_cast<int>(require_number(j, "in_dim"));
  const int out_dim = static_cast<int>(require_number(j, "out_dim"));
  const int degree = static_cast<int>(require_number(j, "degree"));
  std::vector<double> breakpoints = require_array(j, "breakpoints");
  const json& bk = require(j, "base_kind");
  if (!bk.is_string()) throw ConfigError("model JSON field is not a string: base_kind");

  const json& edges_j = require(j, "edges");
  if (!edges_j.is_array()) throw ConfigError("model JSON field is not an array: edges");
  std::vector<EdgeParams> edges;
  edges.reserve(edges_j.size());
  for (const auto& ej : edges_j) {
    EdgeParams e;
    e.coeffs = require_array(ej, "coeffs");
    e.base_scale = require_number(ej, "base_scale");
    e.spline_scale = require_number(ej, "spline_scale");
    e.out_scale = require_number(ej, "out_scale");
    edges.push_back(std::move(e));
  }

  return KanLayerSpec(in_dim, out_dim, KnotGrid(std::move(breakpoints), degree),
                      bk.get<std::string>(), std::move(edges));
}

std::string model_to_json_text(const KanLayerSpec& layer) {
  json j;
  j["in_dim"] = layer.in_dim();
  j["out_dim"] = layer.out_dim();
  j["degree"] = layer.grid().degree();
  j["breakpoints"] = layer.grid().breakpoints();
  j["base_kind"] = layer.base_kind();
  json edges = json::array();
  for (const auto& e : layer.edges()) {
    json ej;
    ej["coeffs"] = e.coeffs;
    ej["base_scale"] = e.base_scale;
    ej["spline_scale"] = e.spline_scale;
    ej["out_scale"] = e.out_scale;
    edges.push_back(std::move(ej));
  }
  j["edges"] = std::move(edges);
  return j.dump(2);
}

KanLayerSpec load_model_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return model_from_json_text(text);
}

void save_model_json(const KanLayerSpec& layer, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write model file: " + path.string());
  out << model_to_json_text(layer) << "\n";
}

}  // namespace lutkan
