#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "gamenet/date.hpp"
#include "gamenet/types.hpp"

namespace gamenet {

struct ActivityRecord {
  PlayerId player{};
  GameId game{};
  Date day{};
  std::uint32_t playtime_minutes = 0;

  friend bool operator==(const ActivityRecord&, const ActivityRecord&) = default;
};

/// Per-(player, game, day) playtime. Records are kept sorted by
/// (player, game, day); a second record for the same key is a DataError.
class ActivityLog {
 public:
  ActivityLog() = default;
  explicit ActivityLog(std::vector<ActivityRecord> records);

  std::span<const ActivityRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

 private:
  std::vector<ActivityRecord> records_;
};

// CSV with header `player_id,game_id,date,playtime_minutes`.
ActivityLog read_activity_csv(std::istream& in);
ActivityLog read_activity_csv(const std::filesystem::path& path);
void write_activity_csv(std::ostream& out, const ActivityLog& log);

/// Distinct players per game with positive playtime inside the window.
/// Player lists are sorted.
std::map<GameId, std::vector<PlayerId>> players_by_game(const ActivityLog& log,
                                                        const ObservationWindow& w);

}  // namespace gamenet
