#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "flc/bytes.hpp"

namespace flc {

struct BackendId {
  enum class Kind : std::uint8_t { Store = 0, Lz = 1, External = 2 };

  Kind kind = Kind::Store;
  std::string name;  // External only

  static BackendId store() { return {Kind::Store, {}}; }
  static BackendId lz() { return {Kind::Lz, {}}; }
  static BackendId external(std::string name);

  /// Accepts "store", "lz" and "ext:NAME". Throws std::invalid_argument.
  static BackendId parse(std::string_view text);
  std::string toString() const;

  friend bool operator==(const BackendId&, const BackendId&) = default;
};

struct CompressedBlock {
  BackendId backend;
  std::uint64_t originalLen = 0;
  Bytes payload;
};

/// Shell command lines for one external compressor: raw bytes on standard
/// input, transformed bytes on standard output, exit status 0 on success.
struct FilterCommand {
  std::string compress;
  std::string decompress;
};

class FilterRegistry {
 public:
  /// Reads FLCA_EXT_<NAME>_C / FLCA_EXT_<NAME>_D pairs. Names are matched
  /// case-insensitively; entries missing either half are ignored.
  static FilterRegistry fromEnvironment();

  void add(std::string name, FilterCommand cmd);
  const FilterCommand* find(std::string_view name) const;
  const std::map<std::string, FilterCommand>& filters() const noexcept { return filters_; }

 private:
  std::map<std::string, FilterCommand> filters_;
};

/// Throws Error(BackendError) for unknown filters or failing commands.
/// When `filters` is null, external names are resolved from the environment.
CompressedBlock compressBlock(ByteView data, const BackendId& backend, const FilterRegistry* filters = nullptr);

/// Throws Error(CorruptBlock) on malformed payloads or length mismatch and
/// Error(BackendError) when an external filter fails.
Bytes decompressBlock(const CompressedBlock& block, const FilterRegistry* filters = nullptr);

/// Runs `command` through /bin/sh with `input` on its standard input and
/// returns its standard output.
Bytes runFilter(const std::string& command, ByteView input);

namespace lz {

inline constexpr std::size_t kWindow = 65535;  // longest match distance
inline constexpr std::size_t kMinMatch = 4;
inline constexpr std::size_t kMaxMatch = 273;

/// Greedy hash-chain LZ77 parse entropy-coded with an adaptive binary range
/// coder. Falls back to a stored payload whenever coding would expand.
Bytes compress(ByteView data);
Bytes decompress(ByteView payload, std::size_t originalLen);

}  // namespace lz

}  // namespace flc
