#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lutkan {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or inconsistent configuration (unknown enum string, L < 2, scheme/dtype
// mismatch, invalid shapes at construction).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Vector/matrix sizes that do not match the declared layer shape.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// NaN or infinite values where finite reals are required.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Base function kind not present in the registry.
class UnsupportedBaseError : public Error {
 public:
  using Error::Error;
};

enum class Scheme { Symmetric, Asymmetric };
enum class Dtype { Int8, Uint8 };
enum class ValueRepr { Phi, SplineComponent };
enum class Interp { Linear };
enum class BoundaryMode { HalfOpen, Closed };
enum class OobPolicy { ClipX, ZeroSpline };
enum class ParamDtype { F32, F16 };
enum class Tier { Scalar, Optimized };
enum class BenchMode { Steady, ColdStart };

std::string to_string(Scheme v);
std::string to_string(Dtype v);
std::string to_string(ValueRepr v);
std::string to_string(Interp v);
std::string to_string(BoundaryMode v);
std::string to_string(OobPolicy v);
std::string to_string(ParamDtype v);
std::string to_string(Tier v);
std::string to_string(BenchMode v);

// Each parser throws ConfigError naming `field` when `s` is not a known value.
Scheme parse_scheme(const std::string& s, const std::string& field = "scheme");
Dtype parse_dtype(const std::string& s, const std::string& field = "dtype");
ValueRepr parse_value_repr(const std::string& s, const std::string& field = "value_repr");
Interp parse_interp(const std::string& s, const std::string& field = "interp");
BoundaryMode parse_boundary_mode(const std::string& s, const std::string& field = "boundary_mode");
OobPolicy parse_oob_policy(const std::string& s, const std::string& field = "oob_policy");
ParamDtype parse_param_dtype(const std::string& s, const std::string& field = "param_dtype");
Tier parse_tier(const std::string& s, const std::string& field = "tier");
BenchMode parse_bench_mode(const std::string& s, const std::string& field = "mode");

// Dense row-major matrix of doubles. Rows are samples, columns are features.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

}  // namespace lutkan
