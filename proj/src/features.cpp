#include <algorithm>
#include <stdexcept>

#include "flc/classifier.hpp"

namespace flc {

namespace {

std::uint8_t quantizeRate(std::size_t hits, std::size_t total) {
  if (total == 0) return 0;
  const auto q = (static_cast<unsigned __int128>(hits) * 16) / total;
  return static_cast<std::uint8_t>(std::min<unsigned __int128>(q, 15));
}

// floor(log2(num / den + 1)) clamped to 0..15, in exact integer arithmetic
// so boundary cases do not depend on floating-point rounding.
std::uint8_t quantizeLog(unsigned __int128 num, unsigned __int128 den) {
  std::uint8_t q = 0;
  while (q < 15 && (den << (q + 1)) <= num + den) ++q;
  return q;
}

bool isTemporal(TokenClass c) {
  return c == TokenClass::Timestamp || c == TokenClass::Date || c == TokenClass::Time;
}

}  // namespace

LatticeConfig BlockFeatures::toLattice() const {
  std::uint64_t bits = 0;
  for (const std::uint8_t v : values) bits = (bits << 4) | (v & 0xF);
  return LatticeConfig(kModelLatticeLength, bits);
}

BlockFeatures extractFeatures(std::span<const TokenizedLine> block, const TokenDictionary& dict) {
  if (block.empty()) throw std::invalid_argument("extractFeatures on an empty block");

  std::size_t words = 0, temporal = 0, ipv4 = 0, decimal = 0, dictHits = 0;
  std::size_t comparable = 0, matched = 0, prefixed = 0;
  std::uint64_t lengthSum = 0, countSum = 0;
  unsigned __int128 countSqSum = 0;

  const TokenizedLine* prev = nullptr;
  for (const auto& line : block) {
    std::size_t lineWords = 0;
    for (std::size_t i = 0; i < line.tokens.size(); ++i) {
      const Token& t = line.tokens[i];
      if (t.cls == TokenClass::Separator) continue;
      ++lineWords;
      temporal += isTemporal(t.cls);
      ipv4 += t.cls == TokenClass::IPv4;
      decimal += t.cls == TokenClass::Decimal;
      dictHits += dict.find(t.text).has_value();
      if (prev == nullptr) continue;
      ++comparable;
      if (i >= prev->tokens.size()) continue;
      const std::string& p = prev->tokens[i].text;
      if (p == t.text) {
        ++matched;
      } else if (p.size() >= kMinPrefixMatch && t.text.size() >= kMinPrefixMatch &&
                 p.compare(0, kMinPrefixMatch, t.text, 0, kMinPrefixMatch) == 0) {
        ++prefixed;
      }
    }
    words += lineWords;
    lengthSum += contentLength(line);
    countSum += lineWords;
    countSqSum += static_cast<unsigned __int128>(lineWords) * lineWords;
    prev = &line;
  }

  // variance = (n * sum(c^2) - sum(c)^2) / n^2, never negative in exact arithmetic
  const unsigned __int128 n = block.size();
  const unsigned __int128 varianceNum = n * countSqSum - static_cast<unsigned __int128>(countSum) * countSum;

  BlockFeatures f;
  f.values = {quantizeRate(matched, comparable),
              quantizeRate(prefixed, comparable),
              quantizeRate(temporal, words),
              quantizeRate(ipv4, words),
              quantizeRate(decimal, words),
              quantizeRate(dictHits, words),
              quantizeLog(lengthSum, n),
              quantizeLog(varianceNum, n * n)};
  return f;
}

}  // namespace flc
