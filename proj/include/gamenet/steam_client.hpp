#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gamenet/activity.hpp"
#include "gamenet/sampling.hpp"

namespace gamenet {

/// Cumulative playtime of one owned game as seen on one day.
struct PlaytimeSnapshot {
  PlayerId player{};
  GameId game{};
  Date day{};
  std::uint64_t playtime_forever_minutes = 0;

  friend bool operator==(const PlaytimeSnapshot&, const PlaytimeSnapshot&) = default;
};

/// Friend lists plus daily playtime snapshots.
class SteamProvider : public FriendProvider {
 public:
  virtual std::vector<PlaytimeSnapshot> snapshot_playtimes(std::span<const PlayerId> players, Date day) = 0;
};

/// Reads a fixture directory:
///   friends/<player>.json            array of ids, or {"private": true}
///   playtime/<YYYY-MM-DD>/<player>.json
///       {"games": [{"appid": .., "playtime_forever": ..}, ...]}
/// A missing playtime file means the player was not observed that day.
class FixtureProvider : public SteamProvider {
 public:
  explicit FixtureProvider(std::filesystem::path root);

  FriendList friends_of(PlayerId player) override;
  std::vector<PlaytimeSnapshot> snapshot_playtimes(std::span<const PlayerId> players, Date day) override;

  std::size_t file_reads() const { return reads_.load(); }

 private:
  std::filesystem::path root_;
  std::mutex mu_;
  std::map<PlayerId, FriendList> cache_;
  std::atomic<std::size_t> reads_{0};
};

struct RateLimit {
  std::size_t requests = 1;
  std::chrono::milliseconds window{1000};
};

/// Continuous-refill token bucket; starts full. Shared by all threads of a
/// client.
class TokenBucket {
 public:
  explicit TokenBucket(RateLimit limit);

  void acquire();
  bool try_acquire();

 private:
  void refill(std::chrono::steady_clock::time_point now);

  double capacity_;
  double rate_per_ms_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mu_;
};

struct RetryPolicy {
  std::size_t max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30000};
};

struct ProviderConfig {
  enum class Mode { fixture, live };

  Mode mode = Mode::fixture;
  std::filesystem::path fixture_root;
  std::string api_key;  // live mode; read from STEAM_API_KEY
  std::string base_url = "https://api.steampowered.com";
  std::vector<RateLimit> rate_limits{{100000, std::chrono::hours(24)}, {200, std::chrono::minutes(5)}};
  RetryPolicy retry;
  std::filesystem::path cache_dir;  // empty: in-memory cache only

  void validate() const;
};

/// Steam Web API client (friend list, owned games, recently played).
/// Responses are cached by endpoint and parameters; 401/403 on a friend
/// list means a private profile.
class LiveProvider : public SteamProvider {
 public:
  explicit LiveProvider(ProviderConfig config);
  ~LiveProvider() override;

  FriendList friends_of(PlayerId player) override;
  std::vector<PlaytimeSnapshot> snapshot_playtimes(std::span<const PlayerId> players, Date day) override;

  struct RecentGame {
    GameId game{};
    std::uint64_t playtime_2weeks_minutes = 0;
    std::uint64_t playtime_forever_minutes = 0;
  };
  std::vector<RecentGame> recently_played(PlayerId player);

  struct Response {
    int status = 0;
    std::string body;
  };
  /// Cached GET. `params` exclude the API key, which is appended here.
  Response get(const std::string& path, const std::map<std::string, std::string>& params);

  std::size_t network_requests() const { return requests_.load(); }

 private:
  Response fetch(const std::string& path, const std::map<std::string, std::string>& params);
  std::optional<Response> cache_lookup(const std::string& key);
  void cache_store(const std::string& key, const Response& r);

  ProviderConfig config_;
  std::vector<std::unique_ptr<TokenBucket>> buckets_;
  std::mutex cache_mu_;
  std::map<std::string, Response> memory_cache_;
  std::atomic<std::size_t> requests_{0};
};

std::unique_ptr<SteamProvider> make_provider(const ProviderConfig& config);

struct DerivedActivity {
  ActivityLog log;
  std::size_t clamped = 0;  // negative deltas set to zero
};

/// Daily playtime = cumulative total minus the previous observed total for
/// the same (player, game). The first observed day is a baseline (0).
DerivedActivity derive_activity(std::span<const PlaytimeSnapshot> snapshots);

}  // namespace gamenet
