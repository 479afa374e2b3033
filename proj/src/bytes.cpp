#include <array>

#include "flc/bytes.hpp"

namespace flc {

namespace {

constexpr std::array<std::uint32_t, 256> makeCrcTable() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

constexpr auto kCrcTable = makeCrcTable();

}  // namespace

std::uint32_t crc32(ByteView data, std::uint32_t seed) noexcept {
  std::uint32_t c = ~seed;
  for (const std::uint8_t b : data) c = kCrcTable[(c ^ b) & 0xFF] ^ (c >> 8);
  return ~c;
}

std::string_view errcName(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidVariant: return "InvalidVariant";
    case Errc::CorruptRecord: return "CorruptRecord";
    case Errc::InternalError: return "InternalError";
    case Errc::RefuseExhaustive: return "RefuseExhaustive";
    case Errc::InsufficientTraining: return "InsufficientTraining";
    case Errc::InvalidModel: return "InvalidModel";
    case Errc::BackendError: return "BackendError";
    case Errc::CorruptBlock: return "CorruptBlock";
    case Errc::NotAnArchive: return "NotAnArchive";
    case Errc::UnexpectedEof: return "UnexpectedEof";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace flc
