#include "temporal.hpp"

#include <array>
#include <cstring>

namespace flc::detail {

namespace {

constexpr std::array<const char*, 12> kMonths = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                 "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

bool digitsAt(std::string_view s, std::size_t pos, std::size_t n, unsigned& out) noexcept {
  if (pos + n > s.size()) return false;
  unsigned v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    const char c = s[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + static_cast<unsigned>(c - '0');
  }
  out = v;
  return true;
}

bool isLeap(std::int64_t y) noexcept { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

unsigned daysInMonth(std::int64_t y, unsigned m) noexcept {
  static constexpr unsigned kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && isLeap(y) ? 29 : kDays[m - 1];
}

void put(std::string& out, unsigned v, int width) {
  char buf[16];
  for (int i = width - 1; i >= 0; --i) {
    buf[i] = static_cast<char>('0' + v % 10);
    v /= 10;
  }
  out.append(buf, static_cast<std::size_t>(width));
}

}  // namespace

// Howard Hinnant's civil calendar algorithms.
std::int64_t daysFromCivil(std::int64_t y, unsigned m, unsigned d) noexcept {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civilFromDays(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) noexcept {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y = static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2);
}

std::optional<DateValue> parseDate(std::string_view s) noexcept {
  unsigned y = 0, m = 0, d = 0;
  DateFormat fmt;
  if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
    if (!digitsAt(s, 0, 4, y) || !digitsAt(s, 5, 2, m) || !digitsAt(s, 8, 2, d)) return std::nullopt;
    fmt = DateFormat::Iso;
  } else if (s.size() == 11 && s[2] == '/' && s[6] == '/') {
    if (!digitsAt(s, 0, 2, d) || !digitsAt(s, 7, 4, y)) return std::nullopt;
    for (unsigned i = 0; i < 12; ++i) {
      if (std::memcmp(s.data() + 3, kMonths[i], 3) == 0) m = i + 1;
    }
    fmt = DateFormat::Clf;
  } else {
    return std::nullopt;
  }
  if (m < 1 || m > 12 || d < 1 || d > daysInMonth(y, m)) return std::nullopt;
  return DateValue{daysFromCivil(y, m, d), fmt};
}

std::optional<TimeValue> parseTime(std::string_view s) noexcept {
  if (s.size() < 8 || s[2] != ':' || s[5] != ':') return std::nullopt;
  unsigned h = 0, mi = 0, se = 0;
  if (!digitsAt(s, 0, 2, h) || !digitsAt(s, 3, 2, mi) || !digitsAt(s, 6, 2, se)) return std::nullopt;
  if (h > 23 || mi > 59 || se > 59) return std::nullopt;
  TimeValue t;
  t.seconds = h * 3600 + mi * 60 + se;
  if (s.size() == 8) return t;
  const std::size_t width = s.size() - 9;
  if (s[8] != '.' || width < 1 || width > kMaxFracWidth) return std::nullopt;
  unsigned frac = 0;
  if (!digitsAt(s, 9, width, frac)) return std::nullopt;
  t.fracWidth = static_cast<int>(width);
  t.frac = frac;
  return t;
}

std::optional<TimestampValue> parseTimestamp(std::string_view s) noexcept {
  for (std::size_t dateLen : {std::size_t{10}, std::size_t{11}}) {
    if (s.size() < dateLen + 9) continue;
    const char joiner = s[dateLen];
    if (joiner != 'T' && joiner != ':') continue;
    auto date = parseDate(s.substr(0, dateLen));
    if (!date) continue;
    auto time = parseTime(s.substr(dateLen + 1));
    if (!time) continue;
    return TimestampValue{*date, joiner, *time};
  }
  return std::nullopt;
}

std::optional<std::string> formatDate(const DateValue& dv) {
  std::int64_t y = 0;
  unsigned m = 0, d = 0;
  civilFromDays(dv.days, y, m, d);
  if (y < 0 || y > 9999) return std::nullopt;
  std::string out;
  if (dv.format == DateFormat::Iso) {
    put(out, static_cast<unsigned>(y), 4);
    out += '-';
    put(out, m, 2);
    out += '-';
    put(out, d, 2);
  } else {
    put(out, d, 2);
    out += '/';
    out += kMonths[m - 1];
    out += '/';
    put(out, static_cast<unsigned>(y), 4);
  }
  return out;
}

std::optional<std::string> formatTime(const TimeValue& t) {
  if (t.seconds < 0 || t.seconds >= kSecondsPerDay) return std::nullopt;
  if (t.fracWidth < 0 || t.fracWidth > kMaxFracWidth) return std::nullopt;
  std::string out;
  const auto s = static_cast<unsigned>(t.seconds);
  put(out, s / 3600, 2);
  out += ':';
  put(out, s / 60 % 60, 2);
  out += ':';
  put(out, s % 60, 2);
  if (t.fracWidth > 0) {
    std::uint64_t limit = 1;
    for (int i = 0; i < t.fracWidth; ++i) limit *= 10;
    if (t.frac >= limit) return std::nullopt;
    out += '.';
    put(out, t.frac, t.fracWidth);
  }
  return out;
}

}  // namespace flc::detail
