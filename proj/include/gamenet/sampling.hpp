#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "gamenet/activity.hpp"
#include "gamenet/graph.hpp"

namespace gamenet {

enum class Visibility { public_profile, private_profile };

/// A friend-list lookup. Private profiles carry no friends.
struct FriendList {
  Visibility visibility = Visibility::public_profile;
  std::vector<PlayerId> friends;

  bool is_private() const { return visibility == Visibility::private_profile; }
  static FriendList private_profile() { return {Visibility::private_profile, {}}; }

  friend bool operator==(const FriendList&, const FriendList&) = default;
};

/// Source of friendship data. Implementations must be safe to call from
/// several threads at once.
class FriendProvider {
 public:
  virtual ~FriendProvider() = default;

  virtual FriendList friends_of(PlayerId player) = 0;
  virtual Visibility visibility(PlayerId player) { return friends_of(player).visibility; }
};

struct SnowballOptions {
  std::size_t max_in_flight = 1;
  // Fetched friend lists are appended here (JSON lines) as they arrive and
  // replayed on the next run, so an aborted crawl resumes where it stopped.
  std::optional<std::filesystem::path> checkpoint;
};

struct SnowballStats {
  std::size_t seed_network_nodes = 0;   // after expanding the seeds
  std::size_t seed_network_edges = 0;
  std::size_t lcc_nodes = 0;            // after restricting to the LCC
  std::size_t expanded_nodes = 0;       // after expanding the LCC
  std::size_t expanded_edges = 0;
  std::size_t closure_edges = 0;        // edges added by the closure pass
  std::size_t private_removed = 0;
  std::size_t fetches = 0;              // provider calls made in this run
};

struct SnowballResult {
  Graph graph;
  SnowballStats stats;
};

/// Four-step crawl: expand the seeds, keep the largest component, expand its
/// members, then fetch the new nodes' friends and add only edges between
/// nodes already present. Private profiles are dropped at the end.
///
/// Throws DataError if a seed is private, TransientError if the provider
/// fails (after the checkpoint has been flushed).
SnowballResult snowball_build(FriendProvider& provider, std::span<const PlayerId> seeds,
                              const SnowballOptions& options = {});

/// Players with strictly positive playtime on some day inside the window.
std::vector<PlayerId> active_players(const ActivityLog& log, const ObservationWindow& w);

/// Induce on the active players, then drop nodes left without neighbors.
Graph prune_inactive(const Graph& g, std::span<const PlayerId> active);

struct GameRank {
  GameId game{};
  std::size_t players = 0;          // distinct active players present in g
  std::uint64_t playtime_minutes = 0;  // their total playtime inside the window
};

/// Every game meeting min_nodes, ordered by players, then playtime (both
/// descending), then game id.
std::vector<GameRank> rank_games(const Graph& g, const ActivityLog& log, const ObservationWindow& w,
                                 std::size_t min_nodes);

/// The first n entries of rank_games.
std::vector<GameId> top_games(const Graph& g, const ActivityLog& log, const ObservationWindow& w,
                              std::size_t n, std::size_t min_nodes);

Graph game_subgraph(const Graph& g, const ActivityLog& log, const ObservationWindow& w, GameId game);

}  // namespace gamenet
