#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace gamenet {

using Date = std::chrono::sys_days;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD). Throws DataError.
Date parse_date(std::string_view text);
std::string format_date(Date d);

/// Inclusive date range.
struct ObservationWindow {
  Date start;
  Date end;

  ObservationWindow(Date s, Date e);
  bool contains(Date d) const { return start <= d && d <= end; }
};

}  // namespace gamenet
