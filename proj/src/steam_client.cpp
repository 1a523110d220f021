#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "gamenet/steam_client.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>
#include <tuple>

#include "gamenet/hash.hpp"

namespace gamenet {

using nlohmann::json;

namespace {

std::uint64_t id_value(const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_string()) return std::stoull(v.get<std::string>());
  throw DataError("expected a numeric id, got " + v.dump());
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Owned-games payloads, either bare {"games": [...]} or wrapped in
// {"response": {...}}.
std::vector<PlaytimeSnapshot> parse_owned_games(const json& doc, PlayerId player, Date day) {
  const json& body = doc.contains("response") ? doc.at("response") : doc;
  std::vector<PlaytimeSnapshot> out;
  if (!body.contains("games")) return out;
  for (const auto& g : body.at("games")) {
    out.push_back({player, GameId{id_value(g.at("appid"))}, day, g.value("playtime_forever", std::uint64_t{0})});
  }
  return out;
}

}  // namespace

// --- fixtures -------------------------------------------------------------

FixtureProvider::FixtureProvider(std::filesystem::path root) : root_(std::move(root)) {
  if (!std::filesystem::is_directory(root_)) throw DataError("fixture root " + root_.string() + " is not a directory");
}

FriendList FixtureProvider::friends_of(PlayerId player) {
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(player); it != cache_.end()) return it->second;
  }
  const auto path = root_ / "friends" / (to_string(player) + ".json");
  ++reads_;
  FriendList list;
  try {
    const auto doc = json::parse(read_file(path));
    if (doc.is_object() && doc.value("private", false)) {
      list = FriendList::private_profile();
    } else if (doc.is_array()) {
      for (const auto& f : doc) list.friends.push_back(PlayerId{id_value(f)});
    } else {
      throw DataError("malformed friend list " + path.string());
    }
  } catch (const json::exception& e) {
    throw DataError("malformed friend list " + path.string() + ": " + e.what());
  }
  std::lock_guard lock(mu_);
  return cache_.emplace(player, std::move(list)).first->second;
}

std::vector<PlaytimeSnapshot> FixtureProvider::snapshot_playtimes(std::span<const PlayerId> players, Date day) {
  std::vector<PlaytimeSnapshot> out;
  const auto dir = root_ / "playtime" / format_date(day);
  for (PlayerId p : players) {
    const auto path = dir / (to_string(p) + ".json");
    if (!std::filesystem::exists(path)) continue;
    ++reads_;
    try {
      auto rows = parse_owned_games(json::parse(read_file(path)), p, day);
      out.insert(out.end(), rows.begin(), rows.end());
    } catch (const json::exception& e) {
      throw DataError("malformed playtime file " + path.string() + ": " + e.what());
    }
  }
  return out;
}

// --- rate limiting --------------------------------------------------------

TokenBucket::TokenBucket(RateLimit limit)
    : capacity_(static_cast<double>(limit.requests)),
      rate_per_ms_(static_cast<double>(limit.requests) / static_cast<double>(limit.window.count())),
      tokens_(capacity_),
      last_(std::chrono::steady_clock::now()) {
  if (limit.requests == 0 || limit.window.count() <= 0) throw UsageError("rate limit must be positive");
}

void TokenBucket::refill(std::chrono::steady_clock::time_point now) {
  const double elapsed = std::chrono::duration<double, std::milli>(now - last_).count();
  tokens_ = std::min(capacity_, tokens_ + elapsed * rate_per_ms_);
  last_ = now;
}

bool TokenBucket::try_acquire() {
  std::lock_guard lock(mu_);
  refill(std::chrono::steady_clock::now());
  if (tokens_ < 1.0) return false;
  tokens_ -= 1.0;
  return true;
}

void TokenBucket::acquire() {
  std::lock_guard lock(mu_);
  for (;;) {
    refill(std::chrono::steady_clock::now());
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const double wait_ms = (1.0 - tokens_) / rate_per_ms_;
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(wait_ms));
  }
}

// --- live client ----------------------------------------------------------

void ProviderConfig::validate() const {
  if (mode == Mode::live && api_key.empty()) throw UsageError("live mode requires STEAM_API_KEY");
  if (mode == Mode::fixture && fixture_root.empty()) throw UsageError("fixture mode requires a fixture root");
  for (const auto& r : rate_limits) {
    if (r.requests == 0 || r.window.count() <= 0) throw UsageError("rate limit must be positive");
  }
  if (retry.max_attempts == 0) throw UsageError("retry policy needs at least one attempt");
}

LiveProvider::LiveProvider(ProviderConfig config) : config_(std::move(config)) {
  config_.validate();
  for (const auto& r : config_.rate_limits) buckets_.push_back(std::make_unique<TokenBucket>(r));
  if (!config_.cache_dir.empty()) std::filesystem::create_directories(config_.cache_dir);
}

LiveProvider::~LiveProvider() = default;

namespace {

std::string cache_key(const std::string& path, const std::map<std::string, std::string>& params) {
  std::string k = path;
  for (const auto& [name, value] : params) k += "&" + name + "=" + value;
  return sha256_hex(k);
}

}  // namespace

std::optional<LiveProvider::Response> LiveProvider::cache_lookup(const std::string& key) {
  std::lock_guard lock(cache_mu_);
  if (auto it = memory_cache_.find(key); it != memory_cache_.end()) return it->second;
  if (config_.cache_dir.empty()) return std::nullopt;
  const auto file = config_.cache_dir / key;
  if (!std::filesystem::exists(file)) return std::nullopt;
  const auto bytes = read_file(file);
  const auto nl = bytes.find('\n');
  if (nl == std::string::npos) return std::nullopt;
  Response r{std::stoi(bytes.substr(0, nl)), bytes.substr(nl + 1)};
  memory_cache_.emplace(key, r);
  return r;
}

void LiveProvider::cache_store(const std::string& key, const Response& r) {
  std::lock_guard lock(cache_mu_);
  memory_cache_.insert_or_assign(key, r);
  if (config_.cache_dir.empty()) return;
  const auto file = config_.cache_dir / key;
  auto tmp = file;
  tmp += fmt::format(".tmp{}", std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << r.status << '\n' << r.body;
    if (!out) throw DataError("cannot write cache file " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

LiveProvider::Response LiveProvider::fetch(const std::string& path, const std::map<std::string, std::string>& params) {
  httplib::Params query(params.begin(), params.end());
  query.emplace("key", config_.api_key);
  const std::string target = httplib::append_query_params(path, query);

  auto backoff = config_.retry.initial_backoff;
  std::string last_error;
  for (std::size_t attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    for (auto& b : buckets_) b->acquire();
    ++requests_;
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    auto res = client.Get(target);
    if (res && res->status != 429 && res->status < 500) return {res->status, res->body};
    last_error = res ? fmt::format("HTTP {}", res->status) : httplib::to_string(res.error());
    if (attempt == config_.retry.max_attempts) break;
    std::this_thread::sleep_for(backoff);
    backoff = std::min(config_.retry.max_backoff,
                       std::chrono::milliseconds(static_cast<std::int64_t>(static_cast<double>(backoff.count()) *
                                                                           config_.retry.multiplier)));
  }
  throw TransientError(fmt::format("{} failed after {} attempts: {}", path, config_.retry.max_attempts, last_error));
}

LiveProvider::Response LiveProvider::get(const std::string& path, const std::map<std::string, std::string>& params) {
  const auto key = cache_key(path, params);
  if (auto hit = cache_lookup(key)) return *hit;
  auto r = fetch(path, params);
  if (r.status == 200 || r.status == 401 || r.status == 403) cache_store(key, r);
  return r;
}

FriendList LiveProvider::friends_of(PlayerId player) {
  const auto r = get("/ISteamUser/GetFriendList/v1/", {{"steamid", to_string(player)}, {"relationship", "friend"}});
  if (r.status == 401 || r.status == 403) return FriendList::private_profile();
  if (r.status != 200) throw DataError(fmt::format("friend list for {}: HTTP {}", to_string(player), r.status));
  FriendList list;
  try {
    const auto doc = json::parse(r.body);
    if (doc.contains("friendslist")) {
      for (const auto& f : doc.at("friendslist").at("friends")) list.friends.push_back(PlayerId{id_value(f.at("steamid"))});
    }
  } catch (const json::exception& e) {
    throw DataError(fmt::format("friend list for {}: {}", to_string(player), e.what()));
  }
  return list;
}

std::vector<PlaytimeSnapshot> LiveProvider::snapshot_playtimes(std::span<const PlayerId> players, Date day) {
  std::vector<PlaytimeSnapshot> out;
  for (PlayerId p : players) {
    // The day is part of the cache key so each daily snapshot is fetched once.
    const auto r = get("/IPlayerService/GetOwnedGames/v1/",
                       {{"steamid", to_string(p)}, {"include_played_free_games", "1"}, {"day", format_date(day)}});
    if (r.status == 401 || r.status == 403) continue;
    if (r.status != 200) throw DataError(fmt::format("owned games for {}: HTTP {}", to_string(p), r.status));
    try {
      auto rows = parse_owned_games(json::parse(r.body), p, day);
      out.insert(out.end(), rows.begin(), rows.end());
    } catch (const json::exception& e) {
      throw DataError(fmt::format("owned games for {}: {}", to_string(p), e.what()));
    }
  }
  return out;
}

std::vector<LiveProvider::RecentGame> LiveProvider::recently_played(PlayerId player) {
  const auto r = get("/IPlayerService/GetRecentlyPlayedGames/v1/", {{"steamid", to_string(player)}});
  std::vector<RecentGame> out;
  if (r.status == 401 || r.status == 403) return out;
  if (r.status != 200) throw DataError(fmt::format("recently played for {}: HTTP {}", to_string(player), r.status));
  try {
    const auto doc = json::parse(r.body);
    const json& body = doc.contains("response") ? doc.at("response") : doc;
    if (!body.contains("games")) return out;
    for (const auto& g : body.at("games")) {
      out.push_back({GameId{id_value(g.at("appid"))}, g.value("playtime_2weeks", std::uint64_t{0}),
                     g.value("playtime_forever", std::uint64_t{0})});
    }
  } catch (const json::exception& e) {
    throw DataError(fmt::format("recently played for {}: {}", to_string(player), e.what()));
  }
  return out;
}

std::unique_ptr<SteamProvider> make_provider(const ProviderConfig& config) {
  config.validate();
  if (config.mode == ProviderConfig::Mode::live) return std::make_unique<LiveProvider>(config);
  return std::make_unique<FixtureProvider>(config.fixture_root);
}

// --- activity ---------------------------------------------------------------

DerivedActivity derive_activity(std::span<const PlaytimeSnapshot> snapshots) {
  std::vector<PlaytimeSnapshot> sorted(snapshots.begin(), snapshots.end());
  auto key = [](const PlaytimeSnapshot& s) { return std::tuple(s.player, s.game, s.day); };
  std::stable_sort(sorted.begin(), sorted.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });

  DerivedActivity out;
  std::vector<ActivityRecord> records;
  records.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& s = sorted[i];
    std::uint64_t delta = 0;
    if (i > 0 && sorted[i - 1].player == s.player && sorted[i - 1].game == s.game) {
      const auto prev = sorted[i - 1].playtime_forever_minutes;
      if (s.playtime_forever_minutes < prev) {
        ++out.clamped;
      } else {
        delta = s.playtime_forever_minutes - prev;
      }
    }
    records.push_back({s.player, s.game, s.day, static_cast<std::uint32_t>(std::min<std::uint64_t>(delta, UINT32_MAX))});
  }
  out.log = ActivityLog(std::move(records));
  return out;
}

}  // namespace gamenet
