#include "frailwatch/civil_time.hpp"

#include <cstdio>
#include <stdexcept>

namespace frailwatch {

std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

std::int64_t to_linear_seconds(const CivilTime& t) {
  return days_from_civil(t.year, t.month, t.day) * 86400 + t.hour * 3600 +
         t.minute * 60 + t.second;
}

CivilTime from_linear_seconds(std::int64_t s) {
  std::int64_t days = s / 86400;
  std::int64_t rem = s % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  CivilTime t;
  civil_from_days(days, t.year, t.month, t.day);
  t.hour = static_cast<int>(rem / 3600);
  t.minute = static_cast<int>((rem % 3600) / 60);
  t.second = static_cast<int>(rem % 60);
  return t;
}

CivilTime add_seconds(const CivilTime& t, std::int64_t seconds) {
  return from_linear_seconds(to_linear_seconds(t) + seconds);
}

std::string format_civil(const CivilTime& t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", t.year,
                t.month, t.day, t.hour, t.minute, t.second);
  return buf;
}

CivilTime parse_civil(const std::string& s) {
  CivilTime t;
  char sep = 0;
  int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d", &t.year, &t.month,
                      &t.day, &sep, &t.hour, &t.minute, &t.second);
  if (n != 7 || (sep != 'T' && sep != ' ')) {
    throw std::invalid_argument("invalid timestamp: '" + s +
                                "' (expected YYYY-MM-DDTHH:MM:SS)");
  }
  if (t.month < 1 || t.month > 12 || t.day < 1 || t.day > 31 || t.hour < 0 ||
      t.hour > 23 || t.minute < 0 || t.minute > 59 || t.second < 0 ||
      t.second > 60) {
    throw std::invalid_argument("invalid timestamp fields: '" + s + "'");
  }
  return t;
}

TimeOfDay time_of_day_bin(const CivilTime& t) {
  if (t.hour >= 6 && t.hour < 14) return TimeOfDay::T1;
  if (t.hour >= 14 && t.hour < 22) return TimeOfDay::T2;
  return TimeOfDay::T3;
}

const char* time_of_day_name(TimeOfDay t) {
  switch (t) {
    case TimeOfDay::T1: return "T1";
    case TimeOfDay::T2: return "T2";
    default: return "T3";
  }
}

std::int64_t span_day_index(const CivilTime& t) {
  std::int64_t shifted = to_linear_seconds(t) - 6 * 3600;
  std::int64_t day = shifted / 86400;
  if (shifted < 0 && shifted % 86400 != 0) day -= 1;
  return day;
}

int span_eight_hour_bin(const CivilTime& t) {
  std::int64_t shifted = to_linear_seconds(t) - 6 * 3600;
  std::int64_t rem = shifted % 86400;
  if (rem < 0) rem += 86400;
  return static_cast<int>(rem / 28800);
}

}  // namespace frailwatch
