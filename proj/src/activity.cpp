#include "gamenet/activity.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <tuple>

namespace gamenet {

namespace {

auto key(const ActivityRecord& r) { return std::tuple(r.player, r.game, r.day); }

template <class T>
T parse_number(std::string_view field, const char* what, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(std::string("invalid ") + what + " '" + std::string(field) + "'", line_no);
  }
  return value;
}

}  // namespace

ActivityLog::ActivityLog(std::vector<ActivityRecord> records) : records_(std::move(records)) {
  std::sort(records_.begin(), records_.end(),
            [](const ActivityRecord& a, const ActivityRecord& b) { return key(a) < key(b); });
  auto dup = std::adjacent_find(records_.begin(), records_.end(),
                                [](const ActivityRecord& a, const ActivityRecord& b) { return key(a) == key(b); });
  if (dup != records_.end()) {
    throw DataError("duplicate activity record for player " + to_string(dup->player) + ", game " +
                    to_string(dup->game) + ", day " + format_date(dup->day));
  }
}

ActivityLog read_activity_csv(std::istream& in) {
  std::vector<ActivityRecord> records;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (line != "player_id,game_id,date,playtime_minutes") {
        throw ParseError("expected header 'player_id,game_id,date,playtime_minutes'", line_no);
      }
      continue;
    }
    std::string_view sv(line);
    std::string_view fields[4];
    for (int f = 0; f < 4; ++f) {
      const auto comma = sv.find(',');
      if ((comma == std::string_view::npos) != (f == 3)) throw ParseError("expected 4 fields", line_no);
      fields[f] = sv.substr(0, comma);
      if (comma != std::string_view::npos) sv.remove_prefix(comma + 1);
    }
    ActivityRecord r;
    r.player = PlayerId{parse_number<std::uint64_t>(fields[0], "player_id", line_no)};
    r.game = GameId{parse_number<std::uint64_t>(fields[1], "game_id", line_no)};
    try {
      r.day = parse_date(fields[2]);
    } catch (const DataError& e) {
      throw ParseError(e.what(), line_no);
    }
    r.playtime_minutes = parse_number<std::uint32_t>(fields[3], "playtime_minutes", line_no);
    records.push_back(r);
  }
  return ActivityLog(std::move(records));
}

ActivityLog read_activity_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open activity file " + path.string());
  return read_activity_csv(in);
}

void write_activity_csv(std::ostream& out, const ActivityLog& log) {
  out << "player_id,game_id,date,playtime_minutes\n";
  for (const auto& r : log.records()) {
    out << raw(r.player) << ',' << raw(r.game) << ',' << format_date(r.day) << ',' << r.playtime_minutes
        << '\n';
  }
}

std::map<GameId, std::vector<PlayerId>> players_by_game(const ActivityLog& log, const ObservationWindow& w) {
  std::map<GameId, std::vector<PlayerId>> out;
  for (const auto& r : log.records()) {
    if (r.playtime_minutes > 0 && w.contains(r.day)) out[r.game].push_back(r.player);
  }
  for (auto& [game, players] : out) {
    std::sort(players.begin(), players.end());
    players.erase(std::unique(players.begin(), players.end()), players.end());
  }
  return out;
}

}  // namespace gamenet
