#include "ubad/calendar.hpp"

#include <charconv>
#include <cstdio>

namespace ubad {

namespace {

// Howard Hinnant's days-from-civil algorithm.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);            // [0, 399]
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;  // [0, 365]
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;           // [0, 146096]
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);           // [0, 146096]
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);           // [0, 365]
  const unsigned mp = (5 * doy + 2) / 153;                                // [0, 11]
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yr + (m <= 2));
}

bool parse_int(const std::string& s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return ec == std::errc() && p == s.data() + pos + len;
}

}  // namespace

Date date_from_ymd(int year, int month, int day) {
  return days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
}

void ymd_from_date(Date date, int& year, int& month, int& day) {
  unsigned m = 0, d = 0;
  civil_from_days(date, year, m, d);
  month = static_cast<int>(m);
  day = static_cast<int>(d);
}

std::string format_date(Date date) {
  int y, m, d;
  ymd_from_date(date, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

Date parse_date(const std::string& text) {
  int y, m, d;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
      !parse_int(text, 0, 4, y) || !parse_int(text, 5, 2, m) || !parse_int(text, 8, 2, d) ||
      m < 1 || m > 12 || d < 1 || d > 31) {
    throw FormatError("invalid date: '" + text + "' (expected YYYY-MM-DD)");
  }
  return date_from_ymd(y, m, d);
}

int day_of_week(Date date) {
  // 1970-01-01 was a Thursday (index 3 with Monday = 0).
  return static_cast<int>(((date % 7) + 7 + 3) % 7);
}

bool is_weekend(Date date) {
  const int dow = day_of_week(date);
  return dow == 5 || dow == 6;
}

Timestamp parse_timestamp(const std::string& text) {
  if (text.empty()) throw FormatError("empty timestamp");

  // Epoch seconds: all digits (optionally signed).
  bool digits = true;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (!(c >= '0' && c <= '9') && !(i == 0 && (c == '-' || c == '+'))) {
      digits = false;
      break;
    }
  }
  if (digits) {
    Timestamp ts = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), ts);
    if (ec != std::errc() || p != text.data() + text.size()) {
      throw FormatError("invalid epoch timestamp: '" + text + "'");
    }
    return ts;
  }

  // ISO-8601: YYYY-MM-DD[Thh:mm[:ss[.frac]]][Z|+hh:mm|-hh:mm]
  if (text.size() < 10) throw FormatError("invalid timestamp: '" + text + "'");
  const Date day = parse_date(text.substr(0, 10));
  std::size_t pos = 10;
  int hh = 0, mm = 0, ss = 0;
  if (pos < text.size() && (text[pos] == 'T' || text[pos] == ' ')) {
    ++pos;
    if (!parse_int(text, pos, 2, hh) || pos + 2 >= text.size() || text[pos + 2] != ':' ||
        !parse_int(text, pos + 3, 2, mm) || hh > 23 || mm > 59) {
      throw FormatError("invalid timestamp: '" + text + "'");
    }
    pos += 5;
    if (pos < text.size() && text[pos] == ':') {
      if (!parse_int(text, pos + 1, 2, ss) || ss > 60) {
        throw FormatError("invalid timestamp: '" + text + "'");
      }
      pos += 3;
    }
    if (pos < text.size() && text[pos] == '.') {
      ++pos;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;  // truncate
    }
  }
  Timestamp offset = 0;
  if (pos < text.size()) {
    const char c = text[pos];
    if (c == 'Z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      int oh = 0, om = 0;
      if (!parse_int(text, pos + 1, 2, oh) || pos + 3 >= text.size() || text[pos + 3] != ':' ||
          !parse_int(text, pos + 4, 2, om)) {
        throw FormatError("invalid timestamp offset: '" + text + "'");
      }
      offset = (c == '+' ? 1 : -1) * (oh * 3600 + om * 60);
      pos += 6;
    }
  }
  if (pos != text.size()) throw FormatError("invalid timestamp: '" + text + "'");
  return day * kSecondsPerDay + hh * 3600 + mm * 60 + ss - offset;
}

std::string format_timestamp(Timestamp ts) {
  Date day = ts / kSecondsPerDay;
  Timestamp rem = ts % kSecondsPerDay;
  if (rem < 0) {
    rem += kSecondsPerDay;
    --day;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%sT%02d:%02d:%02dZ", format_date(day).c_str(),
                static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60),
                static_cast<int>(rem % 60));
  return buf;
}

void FrameConfig::validate() const {
  if (boundary_minutes.empty()) throw ConfigError("frame config has no frames");
  if (labels.size() != boundary_minutes.size()) {
    throw ConfigError("frame config labels do not match boundaries");
  }
  int prev = -1;
  for (int b : boundary_minutes) {
    if (b < 0 || b >= 1440) throw ConfigError("frame boundary out of [0, 1440)");
    if (b <= prev) throw ConfigError("frame boundaries must be strictly increasing");
    prev = b;
  }
}

FrameConfig FrameConfig::working_off() {
  return FrameConfig{{6 * 60, 18 * 60}, {"working", "off"}};
}

FrameConfig FrameConfig::hourly() {
  FrameConfig cfg;
  for (int h = 0; h < 24; ++h) {
    cfg.boundary_minutes.push_back(h * 60);
    char buf[8];
    std::snprintf(buf, sizeof(buf), "h%02d", h);
    cfg.labels.emplace_back(buf);
  }
  return cfg;
}

DayFrame assign_timeframe(Timestamp ts, const FrameConfig& frames) {
  frames.validate();
  if (ts < 0) throw UsageError("negative timestamp");
  const Date day = ts / kSecondsPerDay;
  const int sec_of_day = static_cast<int>(ts % kSecondsPerDay);
  const auto& b = frames.boundary_minutes;
  const int n = frames.frames();
  if (sec_of_day < b.front() * 60) {
    // Before the first boundary: inside the wrapping frame started yesterday.
    return DayFrame{day - 1, n - 1};
  }
  for (int i = n - 1; i >= 0; --i) {
    if (sec_of_day >= b[i] * 60) return DayFrame{day, i};
  }
  return DayFrame{day, n - 1};  // unreachable
}

}  // namespace ubad
