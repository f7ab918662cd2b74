#include "nlpre/zip.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <cstring>

namespace nlpre::zip {

namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::size_t kEndSize = 22;
// Anything larger than this inflated is refused rather than allocated.
constexpr std::size_t kMaxEntrySize = std::size_t{1} << 31;

std::uint16_t u16(std::string_view b, std::size_t at) {
  if (at + 2 > b.size()) throw ZipError("truncated archive");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) | static_cast<unsigned char>(b[at + 1]) << 8);
}

std::uint32_t u32(std::string_view b, std::size_t at) {
  return static_cast<std::uint32_t>(u16(b, at)) | static_cast<std::uint32_t>(u16(b, at + 2)) << 16;
}

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
  put16(out, static_cast<std::uint16_t>(v & 0xffff));
  put16(out, static_cast<std::uint16_t>(v >> 16));
}

std::uint32_t crc_of(std::string_view data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  for (std::size_t off = 0; off < data.size();) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(data.size() - off, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data() + off), n);
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string inflate_raw(std::string_view in, std::size_t expected) {
  if (expected > kMaxEntrySize) throw ZipError("entry too large");
  std::string out(expected, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw ZipError("inflate init failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) throw ZipError("corrupt deflate stream");
  return out;
}

std::string deflate_raw(std::string_view in) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    throw ZipError("deflate init failed");
  std::string out(deflateBound(&zs, static_cast<uLong>(in.size())), '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw ZipError("deflate failed");
  return out;
}

}  // namespace

bool looks_like_zip(std::string_view bytes) {
  return bytes.size() >= kEndSize && (u32(bytes, 0) == kLocalSig || u32(bytes, 0) == kEndSig);
}

std::vector<Entry> read_archive(std::string_view b) {
  if (b.size() < kEndSize) throw ZipError("too short for a ZIP archive");

  // The end record sits in the last 22 + 65535 (comment) bytes.
  std::size_t end = std::string_view::npos;
  const std::size_t floor = b.size() > kEndSize + 0xffff ? b.size() - kEndSize - 0xffff : 0;
  for (std::size_t at = b.size() - kEndSize + 1; at-- > floor;) {
    if (u32(b, at) == kEndSig) {
      end = at;
      break;
    }
  }
  if (end == std::string_view::npos) throw ZipError("end of central directory not found");

  const std::size_t count = u16(b, end + 10);
  std::size_t at = u32(b, end + 16);
  std::vector<Entry> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (u32(b, at) != kCentralSig) throw ZipError("bad central directory entry");
    const auto flags = u16(b, at + 8);
    const auto method = u16(b, at + 10);
    const auto crc = u32(b, at + 16);
    const std::size_t csize = u32(b, at + 20);
    const std::size_t usize = u32(b, at + 24);
    const std::size_t name_len = u16(b, at + 28);
    const std::size_t extra_len = u16(b, at + 30);
    const std::size_t comment_len = u16(b, at + 32);
    const std::size_t local = u32(b, at + 42);
    if (at + 46 + name_len > b.size()) throw ZipError("truncated central directory");
    std::string name(b.substr(at + 46, name_len));
    at += 46 + name_len + extra_len + comment_len;

    if (flags & 0x1) throw ZipError("encrypted entries are not supported");
    if (csize == 0xffffffff || usize == 0xffffffff) throw ZipError("ZIP64 archives are not supported");
    if (!name.empty() && name.back() == '/') continue;

    if (u32(b, local) != kLocalSig) throw ZipError("bad local header for " + name);
    const std::size_t data_at = local + 30 + u16(b, local + 26) + u16(b, local + 28);
    if (data_at + csize > b.size()) throw ZipError("truncated data for " + name);
    const auto raw = b.substr(data_at, csize);

    Entry e;
    e.name = std::move(name);
    if (method == 0) {
      if (csize != usize) throw ZipError("size mismatch for " + e.name);
      e.data = std::string(raw);
    } else if (method == 8) {
      e.data = inflate_raw(raw, usize);
    } else {
      throw ZipError("unsupported compression method " + std::to_string(method));
    }
    if (crc_of(e.data) != crc) throw ZipError("CRC mismatch for " + e.name);
    out.push_back(std::move(e));
  }
  return out;
}

std::string write_archive(const std::vector<Entry>& entries, bool deflate) {
  std::string out, central;
  // 1980-01-01 00:00, the DOS epoch; keeps output byte-stable.
  const std::uint16_t dos_time = 0, dos_date = (0 << 9) | (1 << 5) | 1;
  for (const auto& e : entries) {
    const auto crc = crc_of(e.data);
    std::string body = deflate ? deflate_raw(e.data) : e.data;
    const std::uint16_t method = deflate ? 8 : 0;
    const auto offset = static_cast<std::uint32_t>(out.size());

    put32(out, kLocalSig);
    put16(out, 20);
    put16(out, 0x0800);  // UTF-8 names
    put16(out, method);
    put16(out, dos_time);
    put16(out, dos_date);
    put32(out, crc);
    put32(out, static_cast<std::uint32_t>(body.size()));
    put32(out, static_cast<std::uint32_t>(e.data.size()));
    put16(out, static_cast<std::uint16_t>(e.name.size()));
    put16(out, 0);
    out += e.name;
    out += body;

    put32(central, kCentralSig);
    put16(central, 20);
    put16(central, 20);
    put16(central, 0x0800);
    put16(central, method);
    put16(central, dos_time);
    put16(central, dos_date);
    put32(central, crc);
    put32(central, static_cast<std::uint32_t>(body.size()));
    put32(central, static_cast<std::uint32_t>(e.data.size()));
    put16(central, static_cast<std::uint16_t>(e.name.size()));
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put32(central, 0);
    put32(central, offset);
    central += e.name;
  }
  const auto central_at = static_cast<std::uint32_t>(out.size());
  out += central;
  put32(out, kEndSig);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint16_t>(entries.size()));
  put16(out, static_cast<std::uint16_t>(entries.size()));
  put32(out, static_cast<std::uint32_t>(central.size()));
  put32(out, central_at);
  put16(out, 0);
  return out;
}

}  // namespace nlpre::zip
