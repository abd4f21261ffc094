#pragma once

#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "ecall/error.hpp"

namespace ecall {

using Timestamp = std::chrono::sys_seconds;

/// Parses "YYYY-MM-DD", "YYYY-MM-DDTHH:MM[:SS][Z]" or the same with a space
/// separator. Offsets other than Z are rejected; everything is UTC.
inline Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  std::string s(text);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\n' || s.back() == '\r')) s.pop_back();
  if (!s.empty() && s.back() == 'Z') s.pop_back();

  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  char sep = 0;
  int consumed = 0;
  bool ok = false;
  if (s.size() == 10) {
    ok = std::sscanf(s.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &consumed) == 3 && consumed == 10;
  } else if (s.size() == 16) {
    ok = std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &consumed) == 6 &&
         consumed == 16;
  } else if (s.size() == 19) {
    ok = std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &sec,
                     &consumed) == 7 &&
         consumed == 19;
  }
  if (ok && sep != 0 && sep != 'T' && sep != ' ') ok = false;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ok || !ymd.ok() || h > 23 || mi > 59 || sec > 60 || h < 0 || mi < 0 || sec < 0) {
    throw Error(Errc::MalformedInput, "invalid timestamp '" + std::string(text) + "'");
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
}

inline std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  const auto day_start = floor<days>(ts);
  const year_month_day ymd{day_start};
  const hh_mm_ss hms{ts - day_start};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

inline std::string format_date(Timestamp ts) { return format_timestamp(ts).substr(0, 10); }

inline int year_of(Timestamp ts) {
  using namespace std::chrono;
  return static_cast<int>(year_month_day{floor<days>(ts)}.year());
}

/// Calendar-month shift keeping the time of day; the day of month is clamped
/// to the last day of the target month (Mar 31 - 1 month = Feb 28/29).
inline Timestamp add_calendar_months(Timestamp ts, int delta_months) {
  using namespace std::chrono;
  const auto day_start = floor<days>(ts);
  const year_month_day ymd{day_start};
  year_month_day shifted = ymd + months{delta_months};
  if (!shifted.ok()) shifted = year_month_day{shifted.year() / shifted.month() / last};
  return sys_days{shifted} + (ts - day_start);
}

}  // namespace ecall
