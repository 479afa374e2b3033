#include "flc/transform.hpp"

#include <charconv>

#include "temporal.hpp"

namespace flc {

namespace {

using detail::DateFormat;
using detail::DateValue;
using detail::TimestampValue;
using detail::TimeValue;

// Decimal payloads open with a varint: 0 for literal digits, otherwise the
// digit width of a delta-coded value.
constexpr std::uint64_t kDecimalLiteral = 0;
constexpr std::uint64_t kDecimalLimit = std::uint64_t{1} << 63;
// Four-digit years span fewer than 3.7 million days.
constexpr std::int64_t kMaxDayDelta = 4'000'000;

[[noreturn]] void corrupt(const std::string& why) { throw Error(Errc::CorruptRecord, "field: " + why); }

std::optional<std::uint64_t> decimalValue(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v >= kDecimalLimit) return std::nullopt;
  return v;
}

std::string padDecimal(std::uint64_t v, std::size_t width) {
  std::string digits = std::to_string(v);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return digits;
}

std::uint8_t timestampFlags(const TimestampValue& ts) {
  return static_cast<std::uint8_t>((ts.date.format == DateFormat::Clf ? 1 : 0) | (ts.joiner == ':' ? 2 : 0) |
                                   (ts.time.fracWidth << 4));
}

void writeFrac(ByteWriter& w, const TimeValue& t) {
  if (t.fracWidth > 0) w.varint(t.frac);
}

void readFrac(ByteReader& r, TimeValue& t, int width) {
  if (width > detail::kMaxFracWidth) corrupt("fraction width");
  t.fracWidth = width;
  if (width > 0) {
    const std::uint64_t f = r.varint();
    if (f > 0xFFFFFFFFu) corrupt("fraction value");
    t.frac = static_cast<std::uint32_t>(f);
  }
}

std::int64_t instant(const TimestampValue& ts) {
  return ts.date.days * detail::kSecondsPerDay + ts.time.seconds;
}

}  // namespace

Bytes encodeField(const Token& prevTok, const Token& curTok) {
  if (prevTok.cls != curTok.cls || !isFieldClass(curTok.cls)) {
    throw Error(Errc::InternalError, "encodeField on mismatched or non-field classes");
  }
  Bytes out;
  ByteWriter w(out);
  auto bad = [] { throw Error(Errc::InternalError, "encodeField on text outside its class grammar"); };

  switch (curTok.cls) {
    case TokenClass::Decimal: {
      const auto a = decimalValue(prevTok.text);
      const auto b = decimalValue(curTok.text);
      if (a && b && prevTok.text.size() == curTok.text.size()) {
        w.varint(curTok.text.size());
        w.svarint(static_cast<std::int64_t>(*b) - static_cast<std::int64_t>(*a));
      } else {
        w.varint(kDecimalLiteral);
        w.raw(curTok.text);
      }
      break;
    }
    case TokenClass::IPv4: {
      std::string_view s = curTok.text;
      for (int i = 0; i < 4; ++i) {
        const std::size_t dot = s.find('.');
        const std::string_view part = s.substr(0, dot);
        unsigned octet = 0;
        std::from_chars(part.data(), part.data() + part.size(), octet);
        w.u8(static_cast<std::uint8_t>(octet));
        s = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
      }
      break;
    }
    case TokenClass::Date: {
      const auto a = detail::parseDate(prevTok.text);
      const auto b = detail::parseDate(curTok.text);
      if (!a || !b) bad();
      w.u8(static_cast<std::uint8_t>(b->format));
      w.svarint(b->days - a->days);
      break;
    }
    case TokenClass::Time: {
      const auto a = detail::parseTime(prevTok.text);
      const auto b = detail::parseTime(curTok.text);
      if (!a || !b) bad();
      w.u8(static_cast<std::uint8_t>(b->fracWidth));
      w.svarint(b->seconds - a->seconds);
      writeFrac(w, *b);
      break;
    }
    case TokenClass::Timestamp: {
      const auto a = detail::parseTimestamp(prevTok.text);
      const auto b = detail::parseTimestamp(curTok.text);
      if (!a || !b) bad();
      w.u8(timestampFlags(*b));
      w.svarint(instant(*b) - instant(*a));
      writeFrac(w, b->time);
      break;
    }
    default:
      break;
  }
  return out;
}

Token decodeField(const Token& prevTok, ByteView payload) {
  ByteReader r(payload);
  std::string text;

  switch (prevTok.cls) {
    case TokenClass::Decimal: {
      const std::uint64_t width = r.varint();
      if (width == kDecimalLiteral) {
        text.assign(asChars(r.rest()));
        break;
      }
      const std::int64_t delta = r.svarint();
      const auto base = decimalValue(prevTok.text);
      if (!base || width != prevTok.text.size()) corrupt("decimal delta against non-delta base");
      std::int64_t value = 0;
      if (__builtin_add_overflow(static_cast<std::int64_t>(*base), delta, &value) || value < 0) {
        corrupt("decimal delta out of range");
      }
      text = padDecimal(static_cast<std::uint64_t>(value), static_cast<std::size_t>(width));
      if (text.size() != width) corrupt("decimal width");
      break;
    }
    case TokenClass::IPv4: {
      const ByteView oct = r.raw(4);
      for (int i = 0; i < 4; ++i) {
        if (i) text += '.';
        text += std::to_string(oct[static_cast<std::size_t>(i)]);
      }
      break;
    }
    case TokenClass::Date: {
      const std::uint8_t fmt = r.u8();
      const std::int64_t delta = r.svarint();
      const auto base = detail::parseDate(prevTok.text);
      if (!base || fmt > 1) corrupt("date format");
      if (delta > kMaxDayDelta || delta < -kMaxDayDelta) corrupt("date delta out of range");
      const auto s = detail::formatDate({base->days + delta, static_cast<DateFormat>(fmt)});
      if (!s) corrupt("date out of range");
      text = *s;
      break;
    }
    case TokenClass::Time: {
      const std::uint8_t width = r.u8();
      const std::int64_t delta = r.svarint();
      const auto base = detail::parseTime(prevTok.text);
      if (!base) corrupt("time base");
      if (delta >= detail::kSecondsPerDay || delta <= -detail::kSecondsPerDay) corrupt("time delta out of range");
      TimeValue t{base->seconds + delta, 0, 0};
      readFrac(r, t, width);
      const auto s = detail::formatTime(t);
      if (!s) corrupt("time out of range");
      text = *s;
      break;
    }
    case TokenClass::Timestamp: {
      const std::uint8_t flags = r.u8();
      const std::int64_t delta = r.svarint();
      const auto base = detail::parseTimestamp(prevTok.text);
      if (!base || (flags & 0x0C) != 0) corrupt("timestamp flags");
      if (delta > kMaxDayDelta * detail::kSecondsPerDay || delta < -kMaxDayDelta * detail::kSecondsPerDay) {
        corrupt("timestamp delta out of range");
      }
      const std::int64_t at = instant(*base) + delta;
      std::int64_t days = at / detail::kSecondsPerDay;
      std::int64_t secs = at % detail::kSecondsPerDay;
      if (secs < 0) {
        secs += detail::kSecondsPerDay;
        --days;
      }
      TimeValue t{secs, 0, 0};
      readFrac(r, t, flags >> 4);
      const auto ds = detail::formatDate({days, (flags & 1) ? DateFormat::Clf : DateFormat::Iso});
      const auto ts = detail::formatTime(t);
      if (!ds || !ts) corrupt("timestamp out of range");
      text = *ds + ((flags & 2) ? ':' : 'T') + *ts;
      break;
    }
    default:
      corrupt("not a field class");
  }
  if (!r.atEnd()) corrupt("trailing payload bytes");
  if (text.empty() || classifyToken(text) != prevTok.cls) corrupt("decoded text leaves its class");
  return Token{prevTok.cls, std::move(text)};
}

}  // namespace flc
