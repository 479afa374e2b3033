#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace flc {

enum class Errc {
  InvalidVariant,
  CorruptRecord,
  InternalError,
  RefuseExhaustive,
  InsufficientTraining,
  InvalidModel,
  BackendError,
  CorruptBlock,
  NotAnArchive,
  UnexpectedEof,
  IoError,
};

std::string_view errcName(Errc code) noexcept;

/// Single exception type for the library. `code()` identifies the failure
/// class; block-level failures carry the zero-based block index and backend
/// failures carry the filter's exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  static Error corruptBlock(std::uint64_t index, const std::string& why) {
    Error e(Errc::CorruptBlock, "corrupt block " + std::to_string(index) + ": " + why);
    e.blockIndex_ = index;
    return e;
  }

  static Error backend(int exitStatus, const std::string& why) {
    Error e(Errc::BackendError, why);
    e.exitStatus_ = exitStatus;
    return e;
  }

  Errc code() const noexcept { return code_; }
  std::optional<std::uint64_t> blockIndex() const noexcept { return blockIndex_; }
  std::optional<int> exitStatus() const noexcept { return exitStatus_; }

 private:
  Errc code_;
  std::optional<std::uint64_t> blockIndex_;
  std::optional<int> exitStatus_;
};

}  // namespace flc
