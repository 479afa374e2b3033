#include "flc/line_reader.hpp"

#include <cstring>

#include "flc/error.hpp"

namespace flc {

LineReader::LineReader(std::istream& in, std::size_t chunkSize) : in_(in), buf_(chunkSize) {}

bool LineReader::fill() {
  if (eof_) return false;
  if (begin_ > 0) {
    std::memmove(buf_.data(), buf_.data() + begin_, end_ - begin_);
    end_ -= begin_;
    begin_ = 0;
  }
  if (end_ == buf_.size()) buf_.resize(buf_.size() * 2);
  in_.read(buf_.data() + end_, static_cast<std::streamsize>(buf_.size() - end_));
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (in_.bad()) throw Error(Errc::IoError, "read failed");
  if (got == 0) eof_ = true;
  end_ += got;
  return got > 0;
}

bool LineReader::next(std::string& content, std::string& terminator) {
  std::size_t scanned = begin_;
  while (true) {
    const void* lf = std::memchr(buf_.data() + scanned, '\n', end_ - scanned);
    if (lf != nullptr) {
      const auto pos = static_cast<std::size_t>(static_cast<const char*>(lf) - buf_.data());
      std::size_t stop = pos;
      if (stop > begin_ && buf_[stop - 1] == '\r') --stop;
      content.assign(buf_.data() + begin_, stop - begin_);
      terminator.assign(buf_.data() + stop, pos + 1 - stop);
      consumed_ += pos + 1 - begin_;
      begin_ = pos + 1;
      return true;
    }
    const std::size_t offset = end_ - begin_;
    if (!fill()) break;
    scanned = begin_ + offset;
  }
  if (begin_ == end_) return false;
  content.assign(buf_.data() + begin_, end_ - begin_);
  terminator.clear();
  consumed_ += end_ - begin_;
  begin_ = end_;
  return true;
}

}  // namespace flc
