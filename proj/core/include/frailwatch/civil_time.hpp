#pragma once

#include <cstdint>
#include <string>

namespace frailwatch {

// Wall-clock civil time without a timezone. All monitoring timestamps are
// local times; arithmetic is purely calendrical.
struct CivilTime {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
  int hour = 0;
  int minute = 0;
  int second = 0;

  bool operator==(const CivilTime&) const = default;
};

// Days since 1970-01-01 in the proleptic Gregorian calendar.
std::int64_t days_from_civil(int y, int m, int d);
void civil_from_days(std::int64_t z, int& y, int& m, int& d);

std::int64_t to_linear_seconds(const CivilTime& t);
CivilTime from_linear_seconds(std::int64_t s);
CivilTime add_seconds(const CivilTime& t, std::int64_t seconds);

// "YYYY-MM-DDTHH:MM:SS"
std::string format_civil(const CivilTime& t);
CivilTime parse_civil(const std::string& s);  // throws std::invalid_argument

// Time-of-day bins: T1 06:00-14:00, T2 14:00-22:00, T3 22:00-06:00.
enum class TimeOfDay : int { T1 = 0, T2 = 1, T3 = 2 };
TimeOfDay time_of_day_bin(const CivilTime& t);
const char* time_of_day_name(TimeOfDay t);

// Aggregation spans are anchored at 06:00 so a night record stays with its
// evening: a "day" runs 06:00-06:00 and its three 8-hour bins start at
// 06:00, 14:00 and 22:00.
std::int64_t span_day_index(const CivilTime& t);
int span_eight_hour_bin(const CivilTime& t);  // 0,1,2 within span_day_index

}  // namespace frailwatch
