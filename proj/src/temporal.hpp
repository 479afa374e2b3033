#pragma once

// Parsing and formatting of the temporal token classes. Shared by the
// classifier (which only needs "does it parse") and the field codec (which
// needs values it can difference and re-render byte-exactly).

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace flc::detail {

enum class DateFormat : std::uint8_t { Iso = 0, Clf = 1 };  // YYYY-MM-DD, DD/Mon/YYYY

struct DateValue {
  std::int64_t days = 0;  // days since 1970-01-01, proleptic Gregorian
  DateFormat format = DateFormat::Iso;
};

struct TimeValue {
  std::int64_t seconds = 0;  // seconds since midnight
  int fracWidth = 0;         // 0 when there is no fractional part
  std::uint32_t frac = 0;
};

struct TimestampValue {
  DateValue date;
  char joiner = 'T';
  TimeValue time;
};

inline constexpr int kMaxFracWidth = 9;
inline constexpr std::int64_t kSecondsPerDay = 86400;

std::optional<DateValue> parseDate(std::string_view s) noexcept;
std::optional<TimeValue> parseTime(std::string_view s) noexcept;
std::optional<TimestampValue> parseTimestamp(std::string_view s) noexcept;

// Empty optional when the value cannot be rendered in four-digit years.
std::optional<std::string> formatDate(const DateValue& d);
std::optional<std::string> formatTime(const TimeValue& t);

std::int64_t daysFromCivil(std::int64_t y, unsigned m, unsigned d) noexcept;
void civilFromDays(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) noexcept;

}  // namespace flc::detail
