#pragma once

#include <cstdint>

namespace nextcall {

inline constexpr std::int64_t kSecondsPerMinute = 60;
inline constexpr std::int64_t kSecondsPerHour = 3600;
inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kSecondsPerWeek = 7 * kSecondsPerDay;
inline constexpr int kMinutesPerDay = 1440;
inline constexpr int kHoursPerWeek = 168;

/// Floor division; timestamps may predate the epoch, so plain `/` is wrong.
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

constexpr std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
  return a - floor_div(a, b) * b;
}

/// Converts epoch-second timestamps into local clock readings.  One offset
/// applies to a whole dataset; DST shifts are out of scope for call logs of
/// a few weeks.
struct Clock {
  std::int64_t tz_offset = 0;  // seconds east of UTC

  constexpr std::int64_t local(std::int64_t ts) const { return ts + tz_offset; }

  constexpr int second_of_day(std::int64_t ts) const {
    return static_cast<int>(floor_mod(local(ts), kSecondsPerDay));
  }

  constexpr int minute_of_day(std::int64_t ts) const { return second_of_day(ts) / 60; }

  constexpr int hour_of_day(std::int64_t ts) const { return second_of_day(ts) / 3600; }

  /// 0 = Sunday ... 6 = Saturday.  1970-01-01 was a Thursday.
  constexpr int weekday(std::int64_t ts) const {
    return static_cast<int>(floor_mod(floor_div(local(ts), kSecondsPerDay) + 4, 7));
  }

  /// Daytime is the local interval [07:00, 20:00).
  constexpr bool is_daytime(std::int64_t ts) const {
    int h = hour_of_day(ts);
    return h >= 7 && h < 20;
  }

  /// Largest timestamp <= ts that lies on a local boundary of the given width.
  constexpr std::int64_t floor_to(std::int64_t ts, std::int64_t width) const {
    return ts - floor_mod(local(ts), width);
  }
};

}  // namespace nextcall
