#pragma once

// Seeded synthetic log corpora: Apache common-log lines, RFC 3164 style
// syslog lines, and a mix alternating 1,000-line runs of each.

#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>

namespace flc {

enum class CorpusStyle { Apache, Syslog, Mixed };

/// Throws std::invalid_argument for names other than apache, syslog, mixed.
CorpusStyle parseCorpusStyle(std::string_view name);
std::string_view corpusStyleName(CorpusStyle s) noexcept;

struct CorpusSpec {
  CorpusStyle style = CorpusStyle::Apache;
  std::uint64_t lines = 0;
  std::uint64_t seed = 1;
};

inline constexpr std::uint64_t kMixedRunLines = 1000;

/// Produces the corpus one LF-terminated line at a time.
class CorpusGenerator {
 public:
  explicit CorpusGenerator(const CorpusSpec& spec);
  ~CorpusGenerator();
  CorpusGenerator(CorpusGenerator&&) noexcept;
  CorpusGenerator& operator=(CorpusGenerator&&) noexcept;

  /// Appends the next line (with its LF) to `out`; false when done.
  bool next(std::string& out);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

void generateCorpus(const CorpusSpec& spec, std::ostream& out);
std::string generateCorpus(const CorpusSpec& spec);

}  // namespace flc
