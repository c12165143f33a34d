#include "lutkan/types.hpp"

namespace lutkan {

std::string to_string(Scheme v) {
  return v == Scheme::Symmetric ? "symmetric" : "asymmetric";
}

std::string to_string(Dtype v) {
  return v == Dtype::Int8 ? "int8" : "uint8";
}

std::string to_string(ValueRepr v) {
  return v == ValueRepr::Phi ? "phi" : "spline_component";
}

std::string to_string(Interp) {
  return "linear";
}

std::string to_string(BoundaryMode v) {
  return v == BoundaryMode::HalfOpen ? "half_open" : "closed";
}

std::string to_string(OobPolicy v) {
  return v == OobPolicy::ClipX ? "clip_x" : "zero_spline";
}

std::string to_string(ParamDtype v) {
  return v == ParamDtype::F32 ? "f32" : "f16";
}

std::string to_string(Tier v) {
  return v == Tier::Scalar ? "scalar" : "optimized";
}

std::string to_string(BenchMode v) {
  return v == BenchMode::Steady ? "steady" : "cold_start";
}

namespace {

[[noreturn]] void bad_enum(const std::string& field, const std::string& s) {
  throw ConfigError("unknown " + field + " value: \"" + s + "\"");
}

}  // namespace

Scheme parse_scheme(const std::string& s, const std::string& field) {
  if (s == "symmetric") return Scheme::Symmetric;
  if (s == "asymmetric") return Scheme::Asymmetric;
  bad_enum(field, s);
}

Dtype parse_dtype(const std::string& s, const std::string& field) {
  if (s == "int8") return Dtype::Int8;
  if (s == "uint8") return Dtype::Uint8;
  bad_enum(field, s);
}

ValueRepr parse_value_repr(const std::string& s, const std::string& field) {
  if (s == "phi") return ValueRepr::Phi;
  if (s == "spline_component") return ValueRepr::SplineComponent;
  bad_enum(field, s);
}

Interp parse_interp(const std::string& s, const std::string& field) {
  if (s == "linear") return Interp::Linear;
  bad_enum(field, s);
}

BoundaryMode parse_boundary_mode(const std::string& s, const std::string& field) {
  if (s == "half_open") return BoundaryMode::HalfOpen;
  if (s == "closed") return BoundaryMode::Closed;
  bad_enum(field, s);
}

OobPolicy parse_oob_policy(const std::string& s, const std::string& field) {
  if (s == "clip_x") return OobPolicy::ClipX;
  if (s == "zero_spline") return OobPolicy::ZeroSpline;
  bad_enum(field, s);
}

ParamDtype parse_param_dtype(const std::string& s, const std::string& field) {
  if (s == "f32") return ParamDtype::F32;
  if (s == "f16") return ParamDtype::F16;
  bad_enum(field, s);
}

Tier parse_tier(const std::string& s, const std::string& field) {
  if (s == "scalar") return Tier::Scalar;
  if (s == "optimized") return Tier::Optimized;
  bad_enum(field, s);
}

BenchMode parse_bench_mode(const std::string& s, const std::string& field) {
  if (s == "steady") return BenchMode::Steady;
  if (s == "cold_start") return BenchMode::ColdStart;
  bad_enum(field, s);
}

}  // namespace lutkan
