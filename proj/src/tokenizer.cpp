#include "flc/tokenizer.hpp"

#include "temporal.hpp"

namespace flc {

namespace {

bool isDigit(unsigned char c) noexcept { return c >= '0' && c <= '9'; }
bool isAlpha(unsigned char c) noexcept { return (c | 0x20) >= 'a' && (c | 0x20) <= 'z'; }
bool isHexLetter(unsigned char c) noexcept { return (c | 0x20) >= 'a' && (c | 0x20) <= 'f'; }

bool allOf(std::string_view s, bool (*pred)(unsigned char) noexcept) noexcept {
  for (const char c : s) {
    if (!pred(static_cast<unsigned char>(c))) return false;
  }
  return !s.empty();
}

bool isIpv4(std::string_view s) noexcept {
  int octets = 0;
  std::size_t i = 0;
  while (true) {
    const std::size_t start = i;
    unsigned value = 0;
    while (i < s.size() && isDigit(static_cast<unsigned char>(s[i])) && i - start < 4) {
      value = value * 10 + static_cast<unsigned>(s[i] - '0');
      ++i;
    }
    const std::size_t len = i - start;
    if (len == 0 || len > 3 || value > 255) return false;
    if (len > 1 && s[start] == '0') return false;
    ++octets;
    if (i == s.size()) return octets == 4;
    if (s[i] != '.' || octets == 4) return false;
    ++i;
  }
}

bool isHex(std::string_view s) noexcept {
  auto hexDigit = [](unsigned char c) noexcept { return isDigit(c) || isHexLetter(c); };
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    for (std::size_t i = 2; i < s.size(); ++i) {
      if (!hexDigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
  }
  if (s.size() < 4) return false;
  bool letter = false;
  for (const char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (!hexDigit(c)) return false;
    letter = letter || isHexLetter(c);
  }
  return letter;
}

}  // namespace

std::string_view tokenClassName(TokenClass c) noexcept {
  switch (c) {
    case TokenClass::Timestamp: return "Timestamp";
    case TokenClass::Date: return "Date";
    case TokenClass::Time: return "Time";
    case TokenClass::IPv4: return "IPv4";
    case TokenClass::Hex: return "Hex";
    case TokenClass::Decimal: return "Decimal";
    case TokenClass::Word: return "Word";
    case TokenClass::Separator: return "Separator";
    case TokenClass::Other: return "Other";
  }
  return "?";
}

TokenClass classifyToken(std::string_view text) noexcept {
  if (text.empty()) return TokenClass::Other;
  const auto first = static_cast<unsigned char>(text.front());
  if (isDigit(first)) {
    if (detail::parseTimestamp(text)) return TokenClass::Timestamp;
    if (detail::parseDate(text)) return TokenClass::Date;
    if (detail::parseTime(text)) return TokenClass::Time;
    if (isIpv4(text)) return TokenClass::IPv4;
  }
  if (isHex(text)) return TokenClass::Hex;
  if (allOf(text, isDigit)) return TokenClass::Decimal;
  if (allOf(text, isAlpha)) return TokenClass::Word;
  if (allOf(text, isSeparatorByte)) return TokenClass::Separator;
  return TokenClass::Other;
}

TokenizedLine tokenize(std::string_view line, std::string_view terminator) {
  TokenizedLine out;
  out.terminator.assign(terminator);
  std::size_t i = 0;
  while (i < line.size()) {
    const bool sep = isSeparatorByte(static_cast<unsigned char>(line[i]));
    std::size_t j = i + 1;
    while (j < line.size() && isSeparatorByte(static_cast<unsigned char>(line[j])) == sep) ++j;
    const std::string_view run = line.substr(i, j - i);
    out.tokens.push_back(Token{sep ? TokenClass::Separator : classifyToken(run), std::string(run)});
    i = j;
  }
  return out;
}

std::string detokenize(const TokenizedLine& line) {
  std::string out;
  out.reserve(contentLength(line) + line.terminator.size());
  for (const auto& t : line.tokens) out += t.text;
  out += line.terminator;
  return out;
}

std::size_t contentLength(const TokenizedLine& line) noexcept {
  std::size_t n = 0;
  for (const auto& t : line.tokens) n += t.text.size();
  return n;
}

}  // namespace flc
