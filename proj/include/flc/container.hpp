#pragma once

// Streaming archive format (.flca):
//
//   header   "FLCA" | version u8 | flags u8 | blockLines u32 | backend u8
//            [name len u8 | name] [dict len u32 | dict] [model len u32 | model]
//   block*   variant u8 (8: untransformed) | basin u8 (0xFF none) | originalLen u32 | payloadLen u32
//            | payload | crc32(original bytes) u32
//   trailer  "ALCF" | blockCount u64 | totalOriginal u64
//
// All integers little-endian. A block payload is the LEB128 length of the
// transformed block followed by the backend output for it.

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include "flc/backend.hpp"
#include "flc/classifier.hpp"
#include "flc/transform.hpp"

namespace flc {

inline constexpr std::uint32_t kDefaultBlockLines = 256;
/// Block variant byte for raw line bytes handed straight to the backend.
inline constexpr std::uint8_t kUntransformedBlock = TransformVariant::kCount;

struct WriteSettings {
  bool transform = true;                    // false: backend alone on raw blocks
  std::optional<TransformVariant> variant;  // empty: route blocks with `model`
  const NlcaModel* model = nullptr;
  BackendId backend = BackendId::lz();
  std::uint32_t blockLines = kDefaultBlockLines;
  bool embedModel = true;
  std::size_t dictionaryEntries = TokenDictionary::kDefaultMaxEntries;
  std::size_t dictionarySampleLines = TokenDictionary::kDefaultSampleLines;
  const FilterRegistry* filters = nullptr;
};

struct WriteSummary {
  std::uint64_t blocks = 0;
  std::uint64_t inBytes = 0;
  std::uint64_t outBytes = 0;
  std::array<std::uint64_t, TransformVariant::kCount> variantBlocks{};  // transformed blocks only
};

/// Single pass over `in`. Throws std::invalid_argument for unusable settings
/// (auto routing without a model, zero block lines) and Error(IoError) when
/// either stream fails.
WriteSummary writeArchive(std::istream& in, const WriteSettings& settings, std::ostream& out);

struct ReadSummary {
  std::uint64_t blocks = 0;
  std::uint64_t inBytes = 0;
  std::uint64_t outBytes = 0;
};

/// Streams decoded blocks to `out` as soon as their CRC verifies. Throws
/// Error(NotAnArchive), Error(CorruptBlock) with the block index, or
/// Error(UnexpectedEof); blocks before the failure have already been written.
ReadSummary readArchive(std::istream& in, std::ostream& out, const FilterRegistry* filters = nullptr);

struct VerifyReport {
  std::uint64_t blocks = 0;  // blocks verified before the first error
  bool ok = false;
  std::optional<Errc> errorCode;
  std::optional<std::uint64_t> errorBlock;
  std::string firstError;
};

VerifyReport verifyArchive(std::istream& in, const FilterRegistry* filters = nullptr);

}  // namespace flc
