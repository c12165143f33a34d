#pragma once

#include <filesystem>
#include <string>

#include "lutkan/metrics.hpp"
#include "lutkan/runtime.hpp"

namespace lutkan {

class IoError : public Error {
 public:
  using Error::Error;
};

// Container structure unreadable (bad signatures, truncation, bounds).
class CorruptArchiveError : public IoError {
 public:
  using IoError::IoError;
};

// An entry's payload fails inflation, size, or checksum verification, or a
// JSON payload does not parse.
class CorruptBlobError : public IoError {
 public:
  using IoError::IoError;
};

// A required manifest key or archive entry is absent.
class MissingKeyError : public IoError {
 public:
  using IoError::IoError;
};

// Declared shapes/dtypes disagree with each other or with the blob bytes.
class ShapeError : public IoError {
 public:
  using IoError::IoError;
};

// format_version is not one this reader understands.
class VersionError : public IoError {
 public:
  using IoError::IoError;
};

// An enum-valued manifest field holds an unknown string; the message names
// the field.
class EnumError : public IoError {
 public:
  using IoError::IoError;
};

// Artifact container: a ZIP deflate archive holding manifest.json plus one
// flat little-endian blob per array. The manifest declares every blob's
// dtype and shape. Saving is deterministic (fixed key order, fixed
// compression level): equal artifacts give byte-identical files.
// float_table debug copies are never written.
void save_artifact(const LutLayerArtifact& artifact, const std::filesystem::path& path);

// Loads and validates. Throws MissingKeyError, ShapeError, VersionError,
// EnumError, CorruptArchiveError, or CorruptBlobError as appropriate; never
// crashes on malformed input.
LutLayerArtifact load_artifact(const std::filesystem::path& path);

// The manifest JSON text exactly as save_artifact writes it.
std::string artifact_manifest_json(const LutLayerArtifact& artifact);

// Report files carry a "kind" tag ("eval" or "bench") plus the resolved
// config snapshot; see the README for the full schema.
void save_eval_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_eval_report(const std::filesystem::path& path);
void save_bench_report(const BenchReport& report, const std::filesystem::path& path);
BenchReport load_bench_report(const std::filesystem::path& path);

// "eval", "bench", "error", or whatever the file declares; throws IoError
// subtypes when the file is not a readable report.
std::string read_report_kind(const std::filesystem::path& path);

}  // namespace lutkan
