#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

namespace flc {

/// Splits a byte stream into lines on LF. A CR directly before the LF goes
/// to the terminator; an unterminated final line gets an empty terminator.
class LineReader {
 public:
  explicit LineReader(std::istream& in, std::size_t chunkSize = 64 * 1024);

  /// False at end of input. Throws Error(IoError) when the stream fails.
  bool next(std::string& content, std::string& terminator);

  std::uint64_t bytesRead() const noexcept { return consumed_; }

 private:
  bool fill();

  std::istream& in_;
  std::vector<char> buf_;
  std::size_t begin_ = 0;
  std::size_t end_ = 0;
  bool eof_ = false;
  std::uint64_t consumed_ = 0;
};

}  // namespace flc
