#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace flc {

// Declaration order is tie-break priority (earlier wins).
enum class TokenClass : std::uint8_t {
  Timestamp,
  Date,
  Time,
  IPv4,
  Hex,
  Decimal,
  Word,
  Separator,
  Other,
};

inline constexpr int kTokenClassCount = 9;

std::string_view tokenClassName(TokenClass c) noexcept;

struct Token {
  TokenClass cls = TokenClass::Other;
  std::string text;  // exact original bytes, never empty

  friend bool operator==(const Token&, const Token&) = default;
};

struct TokenizedLine {
  std::vector<Token> tokens;
  std::string terminator;  // "\n", "\r\n" or "" for an unterminated final line

  friend bool operator==(const TokenizedLine&, const TokenizedLine&) = default;
};

/// Classifies a whole token text by the grammar:
///   Timestamp  Date ('T' | ':') Time
///   Date       YYYY-MM-DD | DD/Mon/YYYY   (valid Gregorian calendar date)
///   Time       HH:MM:SS[.f{1,9}]          (00-23, 00-59, 00-59)
///   IPv4       four octets 0-255 joined by '.', no leading zeros
///   Hex        0x<hex>+ | >= 4 hex digits with at least one letter
///   Decimal    [0-9]+
///   Word       [A-Za-z]+
///   Separator  [ \t]+
/// and Other for everything else. Requires non-empty text.
TokenClass classifyToken(std::string_view text) noexcept;

/// Splits a line (no LF bytes) into alternating separator and non-separator
/// runs, each classified as a whole. A run is the longest match for any class
/// at its start, since Other absorbs every non-separator byte.
TokenizedLine tokenize(std::string_view line, std::string_view terminator = {});

std::string detokenize(const TokenizedLine& line);

/// Length of the line without its terminator.
std::size_t contentLength(const TokenizedLine& line) noexcept;

inline bool isSeparatorByte(unsigned char c) noexcept { return c == ' ' || c == '\t'; }

}  // namespace flc
