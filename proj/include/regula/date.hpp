#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace regula {

// Proleptic Gregorian calendar date. Always calendar-valid after construction
// through parse_date/make_date; raw aggregate init is only used internally.
struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..days_in_month

  friend bool operator==(const Date&, const Date&) = default;
};

inline bool is_leap_year(int y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(int y, int m) {
  static constexpr int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap_year(y)) return 29;
  return lengths[m - 1];
}

inline bool is_valid_civil(int y, int m, int d) {
  return m >= 1 && m <= 12 && d >= 1 && d <= days_in_month(y, m);
}

// Serial day number relative to 1970-01-01 (Howard Hinnant's civil algorithms).
inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                       static_cast<unsigned>(d) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline Date civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

inline std::int64_t serial_day(const Date& d) { return days_from_civil(d.year, d.month, d.day); }

inline bool operator<(const Date& a, const Date& b) { return serial_day(a) < serial_day(b); }
inline bool operator<=(const Date& a, const Date& b) { return serial_day(a) <= serial_day(b); }
inline bool operator>(const Date& a, const Date& b) { return serial_day(a) > serial_day(b); }
inline bool operator>=(const Date& a, const Date& b) { return serial_day(a) >= serial_day(b); }

// Strict ISO-8601 YYYY-MM-DD; the date must be calendar-valid.
inline std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto digits = [&](size_t from, size_t n, int& out) {
    out = 0;
    for (size_t i = from; i < from + n; ++i) {
      char c = text[i];
      if (c < '0' || c > '9') return false;
      out = out * 10 + (c - '0');
    }
    return true;
  };
  int y = 0, m = 0, d = 0;
  if (!digits(0, 4, y) || !digits(5, 2, m) || !digits(8, 2, d)) return std::nullopt;
  if (!is_valid_civil(y, m, d)) return std::nullopt;
  return Date{y, m, d};
}

inline std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

inline Date add_days(const Date& d, std::int64_t n) {
  return civil_from_days(serial_day(d) + n);
}

// Month/year shifts clamp the day to the target month's length,
// e.g. 2020-01-31 plus one month is 2020-02-29.
inline Date add_months_clamped(const Date& d, int n) {
  int total = d.year * 12 + (d.month - 1) + n;
  int y = total / 12;
  int m = total % 12;
  if (m < 0) {
    m += 12;
    --y;
  }
  ++m;
  int day = d.day;
  int max_day = days_in_month(y, m);
  if (day > max_day) day = max_day;
  return Date{y, m, day};
}

inline Date add_years_clamped(const Date& d, int n) { return add_months_clamped(d, n * 12); }

}  // namespace regula
