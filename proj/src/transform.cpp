#include "flc/transform.hpp"

#include <algorithm>

namespace flc {

namespace {

enum WireTag : std::uint8_t {
  kTagCopyRun = 0x01,
  kTagPrefixMatch = 0x02,
  kTagDictRef = 0x03,
  kTagLiteral = 0x05,
  kTagEolBytes = 0x06,
  kTagEolLf = 0x07,
  kTagEolCrLf = 0x08,
  kTagEolNone = 0x09,
  kTagFieldBase = 0x10,  // 0x10 | TokenClass
};

[[noreturn]] void corrupt(const std::string& why) { throw Error(Errc::CorruptRecord, why); }

std::size_t commonPrefix(std::string_view a, std::string_view b) noexcept {
  const std::size_t n = std::min(a.size(), b.size());
  std::size_t i = 0;
  while (i < n && a[i] == b[i]) ++i;
  return i;
}

Token makeToken(std::string text) {
  const TokenClass cls = classifyToken(text);
  return Token{cls, std::move(text)};
}

}  // namespace

TransformVariant variantFromId(int id) {
  if (id < 0 || id >= TransformVariant::kCount) {
    throw Error(Errc::InvalidVariant, "variant id " + std::to_string(id) + " outside 0..7");
  }
  return TransformVariant(static_cast<std::uint8_t>(id));
}

TokenDictionary::TokenDictionary(std::vector<std::string> entries) : entries_(std::move(entries)) {
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].empty()) throw Error(Errc::CorruptRecord, "empty dictionary entry");
    if (!index_.emplace(entries_[i], static_cast<std::uint32_t>(i)).second) {
      throw Error(Errc::CorruptRecord, "duplicate dictionary entry");
    }
  }
}

std::optional<std::uint32_t> TokenDictionary::find(std::string_view text) const {
  if (index_.empty()) return std::nullopt;
  const auto it = index_.find(std::string(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Bytes TokenDictionary::serialize() const {
  Bytes out;
  ByteWriter w(out);
  w.varint(entries_.size());
  for (const auto& e : entries_) w.blob(e);
  return out;
}

TokenDictionary TokenDictionary::deserialize(ByteView data) {
  ByteReader r(data);
  const std::uint64_t n = r.varint();
  if (n > r.remaining()) r.fail("dictionary count exceeds buffer");
  std::vector<std::string> entries;
  entries.reserve(static_cast<std::size_t>(n));
  for (std::uint64_t i = 0; i < n; ++i) entries.emplace_back(asChars(r.blob()));
  if (!r.atEnd()) r.fail("trailing bytes after dictionary");
  return TokenDictionary(std::move(entries));
}

void DictionaryBuilder::add(const TokenizedLine& line) {
  for (const auto& tok : line.tokens) {
    if (tok.text.size() >= TokenDictionary::kMinTokenLength) ++freq_[tok.text];
  }
}

TokenDictionary DictionaryBuilder::build(std::size_t maxEntries) const {
  std::vector<std::pair<std::string_view, std::size_t>> ranked;
  for (const auto& [text, n] : freq_) {
    if (n >= TokenDictionary::kMinFrequency) ranked.emplace_back(text, n);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > maxEntries) ranked.resize(maxEntries);
  std::vector<std::string> entries;
  entries.reserve(ranked.size());
  for (const auto& [text, n] : ranked) entries.emplace_back(text);
  return TokenDictionary(std::move(entries));
}

TokenDictionary buildDictionary(std::span<const TokenizedLine> sample, std::size_t maxEntries) {
  DictionaryBuilder builder;
  for (const auto& line : sample) builder.add(line);
  return builder.build(maxEntries);
}

bool isFieldClass(TokenClass c) noexcept {
  switch (c) {
    case TokenClass::Timestamp:
    case TokenClass::Date:
    case TokenClass::Time:
    case TokenClass::IPv4:
    case TokenClass::Decimal:
      return true;
    default:
      return false;
  }
}

TransformedRecord encodeLine(const TokenizedLine* prev, const TokenizedLine& cur, TransformVariant v,
                             const TokenDictionary* dict) {
  if (v.dict() && dict == nullptr) throw Error(Errc::InternalError, "dictionary variant without dictionary");
  const auto& toks = cur.tokens;
  const std::size_t prevCount = prev ? prev->tokens.size() : 0;
  TransformedRecord rec;
  rec.ops.reserve(toks.size() + 1);
  std::size_t i = 0;
  while (i < toks.size()) {
    const Token& t = toks[i];
    const Token* p = i < prevCount ? &prev->tokens[i] : nullptr;
    if (v.lineRef() && p && *p == t) {
      std::size_t n = 1;
      while (i + n < toks.size() && i + n < prevCount && toks[i + n] == prev->tokens[i + n]) ++n;
      rec.ops.emplace_back(op::CopyRun{n});
      i += n;
      continue;
    }
    if (v.fieldCode() && p && p->cls == t.cls && isFieldClass(t.cls)) {
      rec.ops.emplace_back(op::FieldDelta{t.cls, encodeField(*p, t)});
    } else if (auto code = v.dict() ? dict->find(t.text) : std::nullopt) {
      rec.ops.emplace_back(op::DictRef{*code});
    } else if (std::size_t k = (v.lineRef() && p) ? commonPrefix(p->text, t.text) : 0; k >= kMinPrefixMatch) {
      rec.ops.emplace_back(op::PrefixMatch{k, t.text.substr(k)});
    } else {
      rec.ops.emplace_back(op::Literal{t.text});
    }
    ++i;
  }
  rec.ops.emplace_back(op::EndOfLine{cur.terminator});
  return rec;
}

TokenizedLine decodeLine(const TokenizedLine* prev, const TransformedRecord& rec, TransformVariant v,
                         const TokenDictionary* dict) {
  const std::size_t prevCount = prev ? prev->tokens.size() : 0;
  TokenizedLine out;
  bool ended = false;
  for (const auto& anyOp : rec.ops) {
    if (ended) corrupt("op after end of line");
    const std::size_t i = out.tokens.size();
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, op::CopyRun>) {
            if (!v.lineRef()) corrupt("copy run in variant without line references");
            if (o.count == 0 || o.count > prevCount || i > prevCount - o.count) {
              corrupt("copy run past previous line");
            }
            out.tokens.insert(out.tokens.end(), prev->tokens.begin() + static_cast<std::ptrdiff_t>(i),
                              prev->tokens.begin() + static_cast<std::ptrdiff_t>(i + o.count));
          } else if constexpr (std::is_same_v<T, op::FieldDelta>) {
            if (!v.fieldCode()) corrupt("field delta in variant without field coding");
            if (i >= prevCount) corrupt("field delta past previous line");
            const Token& p = prev->tokens[i];
            if (p.cls != o.cls || !isFieldClass(o.cls)) corrupt("field delta class mismatch");
            out.tokens.push_back(decodeField(p, o.payload));
          } else if constexpr (std::is_same_v<T, op::DictRef>) {
            if (!v.dict() || dict == nullptr) corrupt("dictionary reference in variant without dictionary");
            if (o.code >= dict->size()) corrupt("dictionary code out of range");
            out.tokens.push_back(makeToken(dict->entry(static_cast<std::size_t>(o.code))));
          } else if constexpr (std::is_same_v<T, op::PrefixMatch>) {
            if (!v.lineRef()) corrupt("prefix match in variant without line references");
            if (i >= prevCount) corrupt("prefix match past previous line");
            const std::string& ref = prev->tokens[i].text;
            if (o.prefixLen == 0 || o.prefixLen > ref.size()) corrupt("prefix length out of range");
            out.tokens.push_back(makeToken(ref.substr(0, static_cast<std::size_t>(o.prefixLen)) + o.suffix));
          } else if constexpr (std::is_same_v<T, op::Literal>) {
            if (o.bytes.empty()) corrupt("empty literal");
            out.tokens.push_back(makeToken(o.bytes));
          } else {
            out.terminator = o.terminator;
            ended = true;
          }
        },
        anyOp);
  }
  if (!ended) corrupt("record without end of line");
  return out;
}

void serializeRecord(const TransformedRecord& rec, Bytes& out) {
  ByteWriter w(out);
  for (const auto& anyOp : rec.ops) {
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, op::CopyRun>) {
            w.u8(kTagCopyRun);
            w.varint(o.count);
          } else if constexpr (std::is_same_v<T, op::PrefixMatch>) {
            w.u8(kTagPrefixMatch);
            w.varint(o.prefixLen);
            w.blob(o.suffix);
          } else if constexpr (std::is_same_v<T, op::DictRef>) {
            w.u8(kTagDictRef);
            w.varint(o.code);
          } else if constexpr (std::is_same_v<T, op::FieldDelta>) {
            w.u8(static_cast<std::uint8_t>(kTagFieldBase | static_cast<std::uint8_t>(o.cls)));
            w.blob(o.payload);
          } else if constexpr (std::is_same_v<T, op::Literal>) {
            w.u8(kTagLiteral);
            w.blob(o.bytes);
          } else {
            if (o.terminator == "\n") {
              w.u8(kTagEolLf);
            } else if (o.terminator == "\r\n") {
              w.u8(kTagEolCrLf);
            } else if (o.terminator.empty()) {
              w.u8(kTagEolNone);
            } else {
              w.u8(kTagEolBytes);
              w.blob(o.terminator);
            }
          }
        },
        anyOp);
  }
}

TransformedRecord parseRecord(ByteReader& in) {
  TransformedRecord rec;
  while (true) {
    const std::uint8_t tag = in.u8();
    switch (tag) {
      case kTagCopyRun:
        rec.ops.emplace_back(op::CopyRun{in.varint()});
        break;
      case kTagPrefixMatch: {
        const std::uint64_t k = in.varint();
        rec.ops.emplace_back(op::PrefixMatch{k, std::string(asChars(in.blob()))});
        break;
      }
      case kTagDictRef:
        rec.ops.emplace_back(op::DictRef{in.varint()});
        break;
      case kTagLiteral:
        rec.ops.emplace_back(op::Literal{std::string(asChars(in.blob()))});
        break;
      case kTagEolBytes:
        rec.ops.emplace_back(op::EndOfLine{std::string(asChars(in.blob()))});
        return rec;
      case kTagEolLf:
        rec.ops.emplace_back(op::EndOfLine{"\n"});
        return rec;
      case kTagEolCrLf:
        rec.ops.emplace_back(op::EndOfLine{"\r\n"});
        return rec;
      case kTagEolNone:
        rec.ops.emplace_back(op::EndOfLine{""});
        return rec;
      default: {
        const int cls = tag - kTagFieldBase;
        if (cls < 0 || cls >= kTokenClassCount || !isFieldClass(static_cast<TokenClass>(cls))) {
          in.fail("unknown op tag " + std::to_string(tag));
        }
        const ByteView payload = in.blob();
        rec.ops.emplace_back(op::FieldDelta{static_cast<TokenClass>(cls), Bytes(payload.begin(), payload.end())});
      }
    }
  }
}

Bytes encodeBlock(std::span<const TokenizedLine> lines, TransformVariant v, const TokenDictionary* dict) {
  Bytes out;
  const TokenizedLine* prev = nullptr;
  for (const auto& line : lines) {
    serializeRecord(encodeLine(prev, line, v, dict), out);
    prev = &line;
  }
  return out;
}

std::size_t decodeBlock(ByteView data, TransformVariant v, const TokenDictionary* dict, std::string& out) {
  ByteReader in(data);
  TokenizedLine prev;
  bool havePrev = false;
  std::size_t lines = 0;
  while (!in.atEnd()) {
    TokenizedLine line = decodeLine(havePrev ? &prev : nullptr, parseRecord(in), v, dict);
    for (const auto& t : line.tokens) out += t.text;
    out += line.terminator;
    prev = std::move(line);
    havePrev = true;
    ++lines;
  }
  return lines;
}

}  // namespace flc
