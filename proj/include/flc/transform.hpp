#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "flc/bytes.hpp"
#include "flc/tokenizer.hpp"

namespace flc {

/// One of the eight transform variants. Bit 0 enables dictionary
/// substitution, bit 1 previous-line references, bit 2 typed field coding.
class TransformVariant {
 public:
  static constexpr int kCount = 8;

  constexpr TransformVariant() = default;

  constexpr bool dict() const noexcept { return id_ & 1; }
  constexpr bool lineRef() const noexcept { return id_ & 2; }
  constexpr bool fieldCode() const noexcept { return id_ & 4; }
  constexpr int id() const noexcept { return id_; }

  friend constexpr bool operator==(TransformVariant, TransformVariant) = default;

 private:
  friend TransformVariant variantFromId(int id);
  constexpr explicit TransformVariant(std::uint8_t id) : id_(id) {}
  std::uint8_t id_ = 0;
};

/// Throws Error(InvalidVariant) unless 0 <= id <= 7.
TransformVariant variantFromId(int id);

class TokenDictionary {
 public:
  static constexpr std::size_t kMinTokenLength = 2;
  static constexpr std::size_t kMinFrequency = 4;
  static constexpr std::size_t kDefaultMaxEntries = 1024;
  static constexpr std::size_t kDefaultSampleLines = 64 * 1024;

  TokenDictionary() = default;

  /// Throws Error(CorruptRecord) on duplicate entries or empty texts.
  explicit TokenDictionary(std::vector<std::string> entries);

  std::optional<std::uint32_t> find(std::string_view text) const;
  const std::string& entry(std::size_t code) const { return entries_.at(code); }
  const std::vector<std::string>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  Bytes serialize() const;
  static TokenDictionary deserialize(ByteView data);

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// Incremental token frequency count behind buildDictionary.
class DictionaryBuilder {
 public:
  void add(const TokenizedLine& line);
  TokenDictionary build(std::size_t maxEntries) const;

 private:
  std::unordered_map<std::string, std::size_t> freq_;
};

/// Most frequent token texts with length >= 2 and frequency >= 4, ordered by
/// (frequency desc, text asc), truncated to maxEntries.
TokenDictionary buildDictionary(std::span<const TokenizedLine> sample, std::size_t maxEntries);

namespace op {
struct CopyRun {
  std::uint64_t count = 0;
  friend bool operator==(const CopyRun&, const CopyRun&) = default;
};
struct PrefixMatch {
  std::uint64_t prefixLen = 0;
  std::string suffix;
  friend bool operator==(const PrefixMatch&, const PrefixMatch&) = default;
};
struct DictRef {
  std::uint64_t code = 0;
  friend bool operator==(const DictRef&, const DictRef&) = default;
};
struct FieldDelta {
  TokenClass cls = TokenClass::Decimal;
  Bytes payload;
  friend bool operator==(const FieldDelta&, const FieldDelta&) = default;
};
struct Literal {
  std::string bytes;
  friend bool operator==(const Literal&, const Literal&) = default;
};
struct EndOfLine {
  std::string terminator;
  friend bool operator==(const EndOfLine&, const EndOfLine&) = default;
};
}  // namespace op

using TokenOp = std::variant<op::CopyRun, op::PrefixMatch, op::DictRef, op::FieldDelta, op::Literal,
                             op::EndOfLine>;

struct TransformedRecord {
  std::vector<TokenOp> ops;
  friend bool operator==(const TransformedRecord&, const TransformedRecord&) = default;
};

inline constexpr std::size_t kMinPrefixMatch = 2;

/// True for the classes that FieldDelta can carry.
bool isFieldClass(TokenClass c) noexcept;

/// Canonical greedy encoding of `cur` against the previous line of the same
/// block (`prev == nullptr` at block start). `dict` must be non-null when the
/// variant enables the dictionary.
TransformedRecord encodeLine(const TokenizedLine* prev, const TokenizedLine& cur, TransformVariant v,
                             const TokenDictionary* dict);

/// Inverse of encodeLine. Throws Error(CorruptRecord) for references outside
/// the previous line or the dictionary, and for op kinds the variant does not
/// enable.
TokenizedLine decodeLine(const TokenizedLine* prev, const TransformedRecord& rec, TransformVariant v,
                         const TokenDictionary* dict);

/// Typed delta of two same-class field tokens. Throws Error(InternalError)
/// when the classes differ or are not field classes.
Bytes encodeField(const Token& prevTok, const Token& curTok);

/// Throws Error(CorruptRecord) on malformed payloads.
Token decodeField(const Token& prevTok, ByteView payload);

// Wire encoding of records: one tag byte per op, LEB128 integers,
// length-prefixed byte strings.
void serializeRecord(const TransformedRecord& rec, Bytes& out);
TransformedRecord parseRecord(ByteReader& in);

/// Transforms a whole block. The first line is always coded without a
/// predecessor, so blocks decode independently.
Bytes encodeBlock(std::span<const TokenizedLine> lines, TransformVariant v, const TokenDictionary* dict);

/// Decodes a block produced by encodeBlock and appends the original bytes to
/// `out`. Returns the number of lines decoded.
std::size_t decodeBlock(ByteView data, TransformVariant v, const TokenDictionary* dict, std::string& out);

}  // namespace flc
