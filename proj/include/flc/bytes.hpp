#pragma once

// Little-endian integers, LEB128 varints and CRC-32 over byte buffers.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flc/error.hpp"

namespace flc {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView asBytes(std::string_view s) noexcept {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline std::string_view asChars(ByteView b) noexcept {
  return {reinterpret_cast<const char*>(b.data()), b.size()};
}

std::uint32_t crc32(ByteView data, std::uint32_t seed = 0) noexcept;

inline std::uint64_t zigzagEncode(std::int64_t v) noexcept {
  return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}

inline std::int64_t zigzagDecode(std::uint64_t v) noexcept {
  return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1);
}

class ByteWriter {
 public:
  explicit ByteWriter(Bytes& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(v); }

  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }

  void varint(std::uint64_t v) {
    while (v >= 0x80) {
      out_.push_back(static_cast<std::uint8_t>(v | 0x80));
      v >>= 7;
    }
    out_.push_back(static_cast<std::uint8_t>(v));
  }

  void svarint(std::int64_t v) { varint(zigzagEncode(v)); }

  void raw(ByteView b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void raw(std::string_view s) { raw(asBytes(s)); }

  // Length-prefixed byte string.
  void blob(ByteView b) {
    varint(b.size());
    raw(b);
  }
  void blob(std::string_view s) { blob(asBytes(s)); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  Bytes& out_;
};

/// Bounds-checked reader. Every overrun throws an Error with the code given
/// at construction, so callers decide whether a short buffer means a corrupt
/// record, a corrupt model or a truncated archive.
class ByteReader {
 public:
  explicit ByteReader(ByteView data, Errc onError = Errc::CorruptRecord)
      : data_(data), onError_(onError) {}

  bool atEnd() const noexcept { return pos_ == data_.size(); }
  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }

  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      const std::uint8_t b = u8();
      if (shift == 63 && (b & 0x7E) != 0) fail("varint overflow");
      v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
      if ((b & 0x80) == 0) return v;
    }
    fail("varint too long");
  }

  std::int64_t svarint() { return zigzagDecode(varint()); }

  ByteView raw(std::size_t n) {
    need(n);
    ByteView out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  ByteView blob() {
    const std::uint64_t n = varint();
    if (n > remaining()) fail("length prefix exceeds buffer");
    return raw(static_cast<std::size_t>(n));
  }

  ByteView rest() { return raw(remaining()); }

  [[noreturn]] void fail(const std::string& why) const { throw Error(onError_, why); }

 private:
  void need(std::size_t n) const {
    if (n > remaining()) fail("unexpected end of buffer");
  }

  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
    return v;
  }

  ByteView data_;
  std::size_t pos_ = 0;
  Errc onError_;
};

}  // namespace flc
