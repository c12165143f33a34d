#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lutkan::detail {

struct ZipEntry {
  std::string name;
  std::vector<std::uint8_t> data;
};

// Deterministic ZIP archive: entries deflated at a fixed level with a fixed
// timestamp, so equal inputs give byte-identical archives. Readable by
// standard unzip tools.
std::vector<std::uint8_t> zip_pack(const std::vector<ZipEntry>& entries);

// Parses and inflates all entries, verifying sizes and CRCs. Throws
// CorruptArchiveError for broken container structure and CorruptBlobError
// for entries whose payload fails inflation or checksum.
std::vector<ZipEntry> zip_unpack(const std::vector<std::uint8_t>& bytes);

}  // namespace lutkan::detail
