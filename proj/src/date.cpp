#include "gamenet/date.hpp"

#include <fmt/format.h>

#include <charconv>

#include "gamenet/types.hpp"

namespace gamenet {

namespace {

int parse_fixed(std::string_view text, std::size_t pos, std::size_t len) {
  int value = 0;
  const char* first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc{} || ptr != first + len) {
    throw DataError("invalid date '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

Date parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw DataError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{parse_fixed(text, 0, 4)},
                           month{static_cast<unsigned>(parse_fixed(text, 5, 2))},
                           day{static_cast<unsigned>(parse_fixed(text, 8, 2))}};
  if (!ymd.ok()) throw DataError("invalid date '" + std::string(text) + "'");
  return sys_days{ymd};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

ObservationWindow::ObservationWindow(Date s, Date e) : start(s), end(e) {
  if (end < start) {
    throw DataError("observation window ends (" + format_date(end) + ") before it starts (" +
                    format_date(start) + ")");
  }
}

}  // namespace gamenet
