#include "detail/zip.hpp"

#include <zlib.h>

#include <cstring>

#include "lutkan/artifact_io.hpp"

namespace lutkan::detail {

namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50u;
constexpr std::uint32_t kCentralSig = 0x02014b50u;
constexpr std::uint32_t kEndSig = 0x06054b50u;
constexpr std::uint16_t kVersion = 20;
constexpr std::uint16_t kMethodDeflate = 8;
constexpr std::uint16_t kDosDate = ((2020 - 1980) << 9) | (1 << 5) | 1;  // fixed 2020-01-01
constexpr int kDeflateLevel = 6;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; i++) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const std::vector<std::uint8_t>& b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

std::vector<std::uint8_t> deflate_bytes(const std::vector<std::uint8_t>& data) {
  z_stream strm{};
  if (deflateInit2(&strm, kDeflateLevel, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    throw Error("deflate initialization failed");
  std::vector<std::uint8_t> out(deflateBound(&strm, static_cast<uLong>(data.size())));
  strm.next_in = const_cast<Bytef*>(data.data());
  strm.avail_in = static_cast<uInt>(data.size());
  strm.next_out = out.data();
  strm.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&strm, Z_FINISH);
  deflateEnd(&strm);
  if (rc != Z_STREAM_END) throw Error("deflate failed");
  out.resize(out.size() - strm.avail_out);
  return out;
}

std::vector<std::uint8_t> inflate_bytes(const std::uint8_t* data, std::size_t csize,
                                        std::size_t usize, const std::string& name) {
  std::vector<std::uint8_t> out(usize);
  z_stream strm{};
  if (inflateInit2(&strm, -15) != Z_OK) throw Error("inflate initialization failed");
  strm.next_in = const_cast<Bytef*>(data);
  strm.avail_in = static_cast<uInt>(csize);
  strm.next_out = out.data();
  strm.avail_out = static_cast<uInt>(usize);
  const int rc = inflate(&strm, Z_FINISH);
  inflateEnd(&strm);
  if (rc != Z_STREAM_END || strm.avail_out != 0)
    throw CorruptBlobError("entry \"" + name + "\" fails to inflate");
  return out;
}

}  // namespace

std::vector<std::uint8_t> zip_pack(const std::vector<ZipEntry>& entries) {
  std::vector<std::uint8_t> out;
  struct CentralRecord {
    std::string name;
    std::uint32_t crc, csize, usize, offset;
  };
  std::vector<CentralRecord> central;

  for (const auto& e : entries) {
    const std::vector<std::uint8_t> packed = deflate_bytes(e.data);
    const std::uint32_t crc =
        static_cast<std::uint32_t>(crc32(0, e.data.data(), static_cast<uInt>(e.data.size())));
    central.push_back({e.name, crc, static_cast<std::uint32_t>(packed.size()),
                       static_cast<std::uint32_t>(e.data.size()),
                       static_cast<std::uint32_t>(out.size())});
    put_u32(out, kLocalSig);
    put_u16(out, kVersion);
    put_u16(out, 0);  // flags
    put_u16(out, kMethodDeflate);
    put_u16(out, 0);  // mod time
    put_u16(out, kDosDate);
    put_u32(out, crc);
    put_u32(out, static_cast<std::uint32_t>(packed.size()));
    put_u32(out, static_cast<std::uint32_t>(e.data.size()));
    put_u16(out, static_cast<std::uint16_t>(e.name.size()));
    put_u16(out, 0);  // extra length
    out.insert(out.end(), e.name.begin(), e.name.end());
    out.insert(out.end(), packed.begin(), packed.end());
  }

  const std::uint32_t cd_offset = static_cast<std::uint32_t>(out.size());
  for (const auto& c : central) {
    put_u32(out, kCentralSig);
    put_u16(out, kVersion);  // version made by
    put_u16(out, kVersion);  // version needed
    put_u16(out, 0);         // flags
    put_u16(out, kMethodDeflate);
    put_u16(out, 0);  // mod time
    put_u16(out, kDosDate);
    put_u32(out, c.crc);
    put_u32(out, c.csize);
    put_u32(out, c.usize);
    put_u16(out, static_cast<std::uint16_t>(c.name.size()));
    put_u16(out, 0);  // extra
    put_u16(out, 0);  // comment
    put_u16(out, 0);  // disk number
    put_u16(out, 0);  // internal attrs
    put_u32(out, 0);  // external attrs
    put_u32(out, c.offset);
    out.insert(out.end(), c.name.begin(), c.name.end());
  }
  const std::uint32_t cd_size = static_cast<std::uint32_t>(out.size()) - cd_offset;

  put_u32(out, kEndSig);
  put_u16(out, 0);
  put_u16(out, 0);
  put_u16(out, static_cast<std::uint16_t>(central.size()));
  put_u16(out, static_cast<std::uint16_t>(central.size()));
  put_u32(out, cd_size);
  put_u32(out, cd_offset);
  put_u16(out, 0);
  return out;
}

std::vector<ZipEntry> zip_unpack(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 22) throw CorruptArchiveError("archive too small");

  // End record: scan backward over a possible trailing comment.
  std::size_t end_off = bytes.size();
  bool found = false;
  const std::size_t scan_floor = bytes.size() > 22 + 65535 ? bytes.size() - 22 - 65535 : 0;
  for (std::size_t off = bytes.size() - 22;; off--) {
    if (get_u32(bytes, off) == kEndSig) {
      end_off = off;
      found = true;
      break;
    }
    if (off == scan_floor) break;
  }
  if (!found) throw CorruptArchiveError("missing end-of-archive record");

  const std::uint16_t n_entries = get_u16(bytes, end_off + 10);
  const std::uint32_t cd_size = get_u32(bytes, end_off + 12);
  const std::uint32_t cd_offset = get_u32(bytes, end_off + 16);
  if (static_cast<std::size_t>(cd_offset) + cd_size > end_off)
    throw CorruptArchiveError("directory extends past end record");

  std::vector<ZipEntry> entries;
  std::size_t off = cd_offset;
  for (std::uint16_t i = 0; i < n_entries; i++) {
    if (off + 46 > cd_offset + cd_size || get_u32(bytes, off) != kCentralSig)
      throw CorruptArchiveError("bad directory entry");
    const std::uint16_t method = get_u16(bytes, off + 10);
    const std::uint32_t crc = get_u32(bytes, off + 16);
    const std::uint32_t csize = get_u32(bytes, off + 20);
    const std::uint32_t usize = get_u32(bytes, off + 24);
    const std::uint16_t name_len = get_u16(bytes, off + 28);
    const std::uint16_t extra_len = get_u16(bytes, off + 30);
    const std::uint16_t comment_len = get_u16(bytes, off + 32);
    const std::uint32_t local_off = get_u32(bytes, off + 42);
    if (off + 46 + name_len > cd_offset + cd_size)
      throw CorruptArchiveError("directory entry name out of bounds");
    std::string name(bytes.begin() + off + 46, bytes.begin() + off + 46 + name_len);
    off += 46 + static_cast<std::size_t>(name_len) + extra_len + comment_len;

    if (static_cast<std::size_t>(local_off) + 30 > bytes.size() ||
        get_u32(bytes, local_off) != kLocalSig)
      throw CorruptArchiveError("bad local header for \"" + name + "\"");
    const std::uint16_t l_name = get_u16(bytes, local_off + 26);
    const std::uint16_t l_extra = get_u16(bytes, local_off + 28);
    const std::size_t data_off = static_cast<std::size_t>(local_off) + 30 + l_name + l_extra;
    if (data_off + csize > bytes.size())
      throw CorruptArchiveError("entry data out of bounds for \"" + name + "\"");

    ZipEntry e;
    e.name = std::move(name);
    if (method == kMethodDeflate) {
      e.data = inflate_bytes(bytes.data() + data_off, csize, usize, e.name);
    } else if (method == 0) {
      if (csize != usize) throw CorruptBlobError("stored entry size mismatch for \"" + e.name + "\"");
      e.data.assign(bytes.begin() + data_off, bytes.begin() + data_off + csize);
    } else {
      throw CorruptArchiveError("unsupported compression method for \"" + e.name + "\"");
    }
    const std::uint32_t got_crc =
        static_cast<std::uint32_t>(crc32(0, e.data.data(), static_cast<uInt>(e.data.size())));
    if (got_crc != crc) throw CorruptBlobError("checksum mismatch for \"" + e.name + "\"");
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace lutkan::detail
