#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ubad/errors.hpp"

namespace ubad {

// Days since 1970-01-01 (UTC). Negative values are valid dates before the epoch.
using Date = std::int64_t;

// Seconds since 1970-01-01T00:00:00Z.
using Timestamp = std::int64_t;

inline constexpr Timestamp kSecondsPerDay = 86400;

Date date_from_ymd(int year, int month, int day);
void ymd_from_date(Date date, int& year, int& month, int& day);

// "YYYY-MM-DD"
std::string format_date(Date date);
Date parse_date(const std::string& text);

// 0 = Monday ... 6 = Sunday
int day_of_week(Date date);
bool is_weekend(Date date);

// Accepts epoch seconds ("1275375600") or ISO-8601
// ("2010-06-01T07:00:00", optional seconds fraction, optional "Z" or "+hh:mm").
// A missing offset means UTC.
Timestamp parse_timestamp(const std::string& text);
std::string format_timestamp(Timestamp ts);

// Partition of the 24-hour day into T frames. Frame i starts at
// boundary_minutes[i]; the last frame wraps past midnight into the next
// calendar date and is attributed to the date on which it starts.
struct FrameConfig {
  std::vector<int> boundary_minutes;  // strictly increasing, each in [0, 1440)
  std::vector<std::string> labels;    // same length as boundary_minutes

  int frames() const { return static_cast<int>(boundary_minutes.size()); }
  void validate() const;  // throws ConfigError if not a partition

  static FrameConfig working_off();  // {06:00 working, 18:00 off}
  static FrameConfig hourly();       // 24 one-hour frames
};

struct DayFrame {
  Date day = 0;
  int frame = 0;
};

// Maps a timestamp onto (day, frame) under the start-date convention:
// a frame that wraps midnight belongs to the day it started on, so 02:00
// on day d lands in day d-1's wrapping frame.
DayFrame assign_timeframe(Timestamp ts, const FrameConfig& frames);

}  // namespace ubad
