#include "flc/container.hpp"

#include <memory>
#include <stdexcept>

#include "flc/line_reader.hpp"

namespace flc {

namespace {

constexpr std::string_view kMagic = "FLCA";
constexpr std::string_view kEndMagic = "ALCF";
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kFlagModel = 1;
constexpr std::uint8_t kFlagDictionary = 2;
constexpr std::size_t kDictionarySampleBytes = 8u << 20;

struct RawLine {
  std::string content;
  std::string terminator;
};

// Byte-counting sink that maps stream failures to IoError.
class Sink {
 public:
  explicit Sink(std::ostream& out) : out_(out) {}

  void write(ByteView b) {
    out_.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
    if (!out_) throw Error(Errc::IoError, "write failed");
    written_ += b.size();
  }
  void write(std::string_view s) { write(asBytes(s)); }

  std::uint64_t written() const noexcept { return written_; }

 private:
  std::ostream& out_;
  std::uint64_t written_ = 0;
};

// Exact-length reads; a short read is an UnexpectedEof.
class Source {
 public:
  explicit Source(std::istream& in) : in_(in) {}

  Bytes read(std::size_t n) {
    Bytes b(n);
    in_.read(reinterpret_cast<char*>(b.data()), static_cast<std::streamsize>(n));
    const auto got = static_cast<std::size_t>(in_.gcount());
    consumed_ += got;
    if (in_.bad()) throw Error(Errc::IoError, "read failed");
    if (got != n) throw Error(Errc::UnexpectedEof, "archive truncated");
    return b;
  }

  std::size_t tryRead(std::uint8_t* dst, std::size_t n) {
    in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    const auto got = static_cast<std::size_t>(in_.gcount());
    consumed_ += got;
    if (in_.bad()) throw Error(Errc::IoError, "read failed");
    return got;
  }

  std::uint8_t u8() { return read(1)[0]; }
  std::uint32_t u32() { return ByteReader(read(4)).u32(); }
  std::uint64_t u64() { return ByteReader(read(8)).u64(); }

  bool atEof() {
    return in_.peek() == std::char_traits<char>::eof();
  }

  std::uint64_t consumed() const noexcept { return consumed_; }

 private:
  std::istream& in_;
  std::uint64_t consumed_ = 0;
};

struct Header {
  std::uint32_t blockLines = kDefaultBlockLines;
  BackendId backend;
  std::optional<TokenDictionary> dictionary;
  std::optional<NlcaModel> model;
};

Header readHeader(Source& src) {
  std::uint8_t magic[4];
  if (src.tryRead(magic, 4) != 4 || asChars(ByteView(magic, 4)) != kMagic) {
    throw Error(Errc::NotAnArchive, "missing FLCA magic");
  }
  if (src.u8() != kVersion) throw Error(Errc::NotAnArchive, "unsupported archive version");
  const std::uint8_t flags = src.u8();
  Header h;
  h.blockLines = src.u32();
  const std::uint8_t tag = src.u8();
  switch (tag) {
    case 0: h.backend = BackendId::store(); break;
    case 1: h.backend = BackendId::lz(); break;
    case 2: {
      const Bytes name = src.read(src.u8());
      try {
        h.backend = BackendId::external(std::string(asChars(name)));
      } catch (const std::invalid_argument&) {
        throw Error(Errc::NotAnArchive, "empty external backend name");
      }
      break;
    }
    default:
      throw Error(Errc::NotAnArchive, "unknown backend tag");
  }
  auto section = [&]() {
    const std::uint32_t len = src.u32();
    return src.read(len);
  };
  try {
    if (flags & kFlagDictionary) h.dictionary = TokenDictionary::deserialize(section());
    if (flags & kFlagModel) h.model = NlcaModel::deserialize(section());
  } catch (const Error& e) {
    if (e.code() == Errc::UnexpectedEof || e.code() == Errc::IoError) throw;
    throw Error(Errc::NotAnArchive, std::string("bad header section: ") + e.what());
  }
  return h;
}

Bytes headerBytes(const WriteSettings& s, const TokenDictionary* dict, const NlcaModel* model) {
  Bytes out;
  ByteWriter w(out);
  w.raw(kMagic);
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>((model ? kFlagModel : 0) | (dict ? kFlagDictionary : 0)));
  w.u32(s.blockLines);
  w.u8(static_cast<std::uint8_t>(s.backend.kind));
  if (s.backend.kind == BackendId::Kind::External) {
    if (s.backend.name.size() > 255) throw std::invalid_argument("external backend name longer than 255 bytes");
    w.u8(static_cast<std::uint8_t>(s.backend.name.size()));
    w.raw(s.backend.name);
  }
  auto section = [&](const Bytes& b) {
    w.u32(static_cast<std::uint32_t>(b.size()));
    w.raw(b);
  };
  if (dict) section(dict->serialize());
  if (model) section(model->serialize());
  return out;
}

class BlockWriter {
 public:
  BlockWriter(const WriteSettings& s, const TokenDictionary* dict, Sink& sink, WriteSummary& summary)
      : s_(s), dict_(dict), sink_(sink), summary_(summary) {}

  void add(const std::string& content, const std::string& terminator) {
    raw_ += content;
    raw_ += terminator;
    if (s_.transform) lines_.push_back(tokenize(content, terminator));
    if (++pending_ == s_.blockLines) flush();
  }

  void flush() {
    if (pending_ == 0) return;
    pending_ = 0;
    if (raw_.size() > 0xFFFFFFFFu) throw std::length_error("block larger than 4 GiB; lower --block-lines");
    TransformVariant v;
    std::uint8_t basin = kNoBasin;
    if (!s_.transform) {
      emit(kUntransformedBlock, basin, asBytes(raw_));
      return;
    }
    if (s_.variant) {
      v = *s_.variant;
    } else {
      const Classification c = classifyBlock(lines_, *dict_, *s_.model);
      v = c.variant;
      if (c.basin) basin = static_cast<std::uint8_t>(*c.basin);
    }
    emit(static_cast<std::uint8_t>(v.id()), basin, encodeBlock(lines_, v, v.dict() ? dict_ : nullptr));
    ++summary_.variantBlocks[static_cast<std::size_t>(v.id())];
  }

 private:
  void emit(std::uint8_t variantId, std::uint8_t basin, ByteView transformed) {
    const CompressedBlock cb = compressBlock(transformed, s_.backend, s_.filters);
    Bytes rec;
    ByteWriter w(rec);
    Bytes payload;
    ByteWriter pw(payload);
    pw.varint(transformed.size());
    pw.raw(cb.payload);
    w.u8(variantId);
    w.u8(basin);
    w.u32(static_cast<std::uint32_t>(raw_.size()));
    w.u32(static_cast<std::uint32_t>(payload.size()));
    w.raw(payload);
    w.u32(crc32(asBytes(raw_)));
    sink_.write(rec);

    ++summary_.blocks;
    lines_.clear();
    raw_.clear();
  }

  const WriteSettings& s_;
  const TokenDictionary* dict_;
  Sink& sink_;
  WriteSummary& summary_;
  std::vector<TokenizedLine> lines_;
  std::string raw_;
  std::uint32_t pending_ = 0;
};

// Decodes one block record whose variant byte has already been read.
std::string decodeBlockRecord(Source& src, std::uint8_t variantId, const Header& h, std::uint64_t index,
                              const FilterRegistry* filters) {
  src.u8();  // basin index, informational
  const std::uint32_t originalLen = src.u32();
  const std::uint32_t payloadLen = src.u32();
  const Bytes payload = src.read(payloadLen);
  const std::uint32_t crc = src.u32();

  std::string original;
  try {
    ByteReader pr(payload, Errc::CorruptBlock);
    const std::uint64_t transformedLen = pr.varint();
    if (transformedLen > std::uint64_t{1} << 32) throw Error(Errc::CorruptBlock, "transformed length too large");
    const ByteView rest = pr.rest();
    CompressedBlock cb{h.backend, transformedLen, Bytes(rest.begin(), rest.end())};
    const Bytes transformed = decompressBlock(cb, filters);
    if (variantId == kUntransformedBlock) {
      original.assign(asChars(transformed));
    } else {
      const TransformVariant v = variantFromId(variantId);
      if (v.dict() && !h.dictionary) throw Error(Errc::CorruptRecord, "dictionary variant without dictionary");
      original.reserve(originalLen);
      decodeBlock(transformed, v, h.dictionary ? &*h.dictionary : nullptr, original);
    }
  } catch (const Error& e) {
    if (e.code() == Errc::BackendError || e.code() == Errc::IoError) throw;
    throw Error::corruptBlock(index, e.what());
  }
  if (original.size() != originalLen) throw Error::corruptBlock(index, "length mismatch");
  if (crc32(asBytes(original)) != crc) throw Error::corruptBlock(index, "CRC mismatch");
  return original;
}

}  // namespace

WriteSummary writeArchive(std::istream& in, const WriteSettings& settings, std::ostream& out) {
  if (settings.blockLines == 0) throw std::invalid_argument("block lines must be positive");
  if (settings.transform && !settings.variant && settings.model == nullptr) {
    throw std::invalid_argument("automatic variant selection requires a model");
  }
  if (settings.model) settings.model->validate();

  WriteSummary summary;
  LineReader reader(in);
  const bool needDictionary = settings.transform && (!settings.variant || settings.variant->dict());

  // Dictionary pre-pass over a bounded prefix of the input.
  std::vector<RawLine> sample;
  std::unique_ptr<TokenDictionary> dict;
  if (needDictionary) {
    DictionaryBuilder builder;
    std::size_t sampleBytes = 0;
    RawLine line;
    while (sample.size() < settings.dictionarySampleLines && sampleBytes < kDictionarySampleBytes &&
           reader.next(line.content, line.terminator)) {
      builder.add(tokenize(line.content));
      sampleBytes += line.content.size() + line.terminator.size();
      sample.push_back(std::move(line));
    }
    dict = std::make_unique<TokenDictionary>(builder.build(settings.dictionaryEntries));
  }

  Sink sink(out);
  const NlcaModel* embedded = settings.embedModel ? settings.model : nullptr;
  sink.write(headerBytes(settings, dict.get(), embedded));

  BlockWriter blocks(settings, dict.get(), sink, summary);
  for (const auto& line : sample) blocks.add(line.content, line.terminator);
  sample.clear();
  sample.shrink_to_fit();
  std::string content, terminator;
  while (reader.next(content, terminator)) blocks.add(content, terminator);
  blocks.flush();

  Bytes trailer;
  ByteWriter w(trailer);
  w.raw(kEndMagic);
  w.u64(summary.blocks);
  w.u64(reader.bytesRead());
  sink.write(trailer);
  out.flush();
  if (!out) throw Error(Errc::IoError, "flush failed");

  summary.inBytes = reader.bytesRead();
  summary.outBytes = sink.written();
  return summary;
}

ReadSummary readArchive(std::istream& in, std::ostream& out, const FilterRegistry* filters) {
  Source src(in);
  Sink sink(out);
  const Header h = readHeader(src);
  ReadSummary summary;
  while (true) {
    const std::uint8_t first = src.u8();
    if (first == static_cast<std::uint8_t>(kEndMagic[0])) {
      const Bytes rest = src.read(3);
      if (asChars(rest) != kEndMagic.substr(1)) throw Error::corruptBlock(summary.blocks, "bad trailer magic");
      const std::uint64_t count = src.u64();
      const std::uint64_t total = src.u64();
      if (count != summary.blocks || total != summary.outBytes) {
        throw Error::corruptBlock(summary.blocks, "trailer totals disagree with the blocks read");
      }
      if (!src.atEof()) throw Error::corruptBlock(summary.blocks, "trailing bytes after trailer");
      break;
    }
    if (first > kUntransformedBlock) throw Error::corruptBlock(summary.blocks, "bad variant id");
    const std::string original = decodeBlockRecord(src, first, h, summary.blocks, filters);
    sink.write(original);
    summary.outBytes += original.size();
    ++summary.blocks;
  }
  out.flush();
  if (!out) throw Error(Errc::IoError, "flush failed");
  summary.inBytes = src.consumed();
  return summary;
}

VerifyReport verifyArchive(std::istream& in, const FilterRegistry* filters) {
  // Discards output but still counts blocks as they verify.
  class CountingBuf : public std::streambuf {
   protected:
    int_type overflow(int_type c) override { return traits_type::not_eof(c); }
    std::streamsize xsputn(const char*, std::streamsize n) override { return n; }
  } nullBuf;
  std::ostream discard(&nullBuf);

  VerifyReport report;
  try {
    report.blocks = readArchive(in, discard, filters).blocks;
    report.ok = true;
  } catch (const Error& e) {
    report.errorCode = e.code();
    report.errorBlock = e.blockIndex();
    report.firstError = e.what();
    if (e.blockIndex()) report.blocks = *e.blockIndex();
  }
  return report;
}

}  // namespace flc
