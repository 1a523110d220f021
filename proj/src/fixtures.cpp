#include "gamenet/fixtures.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "gamenet/activity.hpp"
#include "gamenet/characterization.hpp"

namespace gamenet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kPlayerBase = 76561198000000000ULL;

std::ofstream open_out(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

void write_text(const fs::path& p, const std::string& text) { open_out(p) << text; }

std::vector<std::string> pick(const std::vector<std::string>& pool, std::size_t n, Rng& rng) {
  std::vector<std::string> v = pool;
  rng.shuffle(v.begin(), v.end());
  v.resize(std::min(n, v.size()));
  return v;
}

}  // namespace

Graph erdos_renyi_graph(std::size_t n, double p, Rng& rng, std::uint64_t first_id) {
  GraphBuilder b;
  for (std::size_t i = 0; i < n; ++i) b.add_node(PlayerId{first_id + i});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) b.add_edge(PlayerId{first_id + i}, PlayerId{first_id + j});
    }
  }
  return b.build();
}

Graph preferential_attachment_graph(std::size_t n, std::size_t m, Rng& rng, std::uint64_t first_id) {
  if (m == 0 || n <= m) throw UsageError("preferential attachment needs n > m >= 1");
  GraphBuilder b;
  std::vector<std::uint64_t> stubs;
  for (std::size_t i = 0; i <= m; ++i) {
    b.add_node(PlayerId{first_id + i});
    for (std::size_t j = 0; j < i; ++j) {
      b.add_edge(PlayerId{first_id + i}, PlayerId{first_id + j});
      stubs.push_back(i);
      stubs.push_back(j);
    }
  }
  for (std::size_t v = m + 1; v < n; ++v) {
    std::set<std::uint64_t> targets;
    while (targets.size() < m) targets.insert(stubs[rng.below(stubs.size())]);
    b.add_node(PlayerId{first_id + v});
    for (auto t : targets) {
      b.add_edge(PlayerId{first_id + v}, PlayerId{first_id + t});
      stubs.push_back(v);
      stubs.push_back(t);
    }
  }
  return b.build();
}

Graph disjoint_cliques_graph(std::size_t cliques, std::size_t size, std::uint64_t first_id) {
  GraphBuilder b;
  for (std::size_t c = 0; c < cliques; ++c) {
    const std::uint64_t base = first_id + c * size;
    for (std::size_t i = 0; i < size; ++i) {
      b.add_node(PlayerId{base + i});
      for (std::size_t j = 0; j < i; ++j) b.add_edge(PlayerId{base + i}, PlayerId{base + j});
    }
  }
  return b.build();
}

FamilyCorpus family_corpus(std::size_t per_family, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint32_t> order;
  for (std::uint32_t f = 0; f < 3; ++f) order.insert(order.end(), per_family, f);
  rng.shuffle(order.begin(), order.end());

  FamilyCorpus corpus;
  for (std::size_t b = 0; b < order.size(); ++b) {
    const std::uint64_t first = kPlayerBase + b * 1000;
    const std::size_t n = 40 + rng.below(41);
    Graph g;
    switch (static_cast<Family>(order[b])) {
      case Family::dense_random: g = erdos_renyi_graph(n, rng.uniform(0.25, 0.35), rng, first); break;
      case Family::preferential_attachment: g = preferential_attachment_graph(n, 2, rng, first); break;
      case Family::disjoint_cliques: {
        // Cliques of mixed size 3-6 until n nodes are used.
        GraphBuilder b;
        for (std::size_t used = 0; used < n;) {
          const std::size_t size = std::min<std::size_t>(3 + rng.below(4), n - used);
          const Graph c = disjoint_cliques_graph(1, size, first + used);
          for (PlayerId p : c.nodes()) b.add_node(p);
          for (const auto& [u, v] : c.edges()) b.add_edge(u, v);
          used += size;
        }
        g = b.build();
        break;
      }
    }
    corpus.graphs.push_back({GameId{100 + b}, std::move(g)});
    corpus.family.push_back(order[b]);
  }
  return corpus;
}

void write_family_fixture(const fs::path& dir, std::size_t per_family, std::uint64_t seed) {
  const auto corpus = family_corpus(per_family, seed);
  Rng rng(derive_seed(seed, 7));
  const Date day = parse_date("2020-04-13");

  static const std::array<const char*, 3> kNames{"Arena", "Frontier", "Party"};
  static const std::array<std::vector<std::string>, 3> kGenres{
      std::vector<std::string>{"Action", "Sports"},
      std::vector<std::string>{"Massively Multiplayer", "Free to Play", "RPG"},
      std::vector<std::string>{"Casual", "Indie"}};
  static const std::array<std::vector<std::string>, 3> kTags{
      std::vector<std::string>{"team-based", "competitive", "pvp", "fps", "online co-op"},
      std::vector<std::string>{"massively multiplayer", "free to play", "open world", "crafting", "mmorpg"},
      std::vector<std::string>{"local co-op", "party game", "puzzle", "family friendly", "split screen"}};
  static const std::vector<std::string> kCommon{"singleplayer", "multiplayer", "indie", "great soundtrack", "atmospheric"};

  GraphBuilder all;
  std::vector<ActivityRecord> records;
  std::string families = "game_id,family\n";
  std::string catalog;
  for (std::size_t i = 0; i < corpus.graphs.size(); ++i) {
    const auto& [game, g] = corpus.graphs[i];
    const auto f = corpus.family[i];
    for (PlayerId p : g.nodes()) {
      all.add_node(p);
      records.push_back({p, game, day, 60});
    }
    for (const auto& [u, v] : g.edges()) all.add_edge(u, v);
    families += fmt::format("{},{}\n", raw(game), f);
    auto tags = pick(kTags[f], 3 + rng.below(3), rng);
    for (auto& t : pick(kCommon, 1 + rng.below(3), rng)) tags.push_back(t);
    catalog += json{{"game_id", raw(game)},
                    {"name", fmt::format("{} {:02}", kNames[f], i)},
                    {"genres", pick(kGenres[f], 1 + rng.below(kGenres[f].size()), rng)},
                    {"tags", tags}}
                   .dump() +
               "\n";
  }

  const Graph g = all.build();
  {
    auto out = open_out(dir / "edges.tsv");
    write_edge_list(out, g);
  }
  {
    auto out = open_out(dir / "activity.csv");
    write_activity_csv(out, ActivityLog(std::move(records)));
  }
  write_text(dir / "families.csv", families);
  write_text(dir / "catalog.jsonl", catalog);

  const json config{{"edge_list", "edges.tsv"},
                    {"activity", "activity.csv"},
                    {"catalog", "catalog.jsonl"},
                    {"window", {{"start", "2020-04-13"}, {"end", "2020-05-17"}}},
                    {"top_n", corpus.graphs.size()},
                    {"min_nodes", 10},
                    {"embedding", {{"dimensions", 8}}},
                    {"clustering", {{"k", 3}, {"k_min", 2}, {"k_max", 10}, {"n_init", 10}}},
                    {"out", "out"},
                    {"seed", seed}};
  write_text(dir / "config.json", config.dump(2) + "\n");
}

void write_bundled_fixture(const fs::path& dir, std::uint64_t seed) {
  constexpr std::size_t kPlayers = 2000;
  constexpr std::size_t kCommunities = 10;
  constexpr std::size_t kGames = 20;
  constexpr std::size_t kSeeds = 10;
  Rng rng(seed);

  // Friendships: growth with community-biased preferential attachment.
  std::vector<std::size_t> community(kPlayers);
  std::vector<std::set<std::size_t>> adj(kPlayers);
  std::vector<std::size_t> stubs;
  std::vector<std::vector<std::size_t>> community_stubs(kCommunities);
  for (std::size_t v = 0; v < kPlayers; ++v) {
    community[v] = rng.below(kCommunities);
    const std::size_t links = std::min<std::size_t>(v, 2 + rng.below(14));
    std::set<std::size_t> targets;
    for (std::size_t attempt = 0; targets.size() < links && attempt < 100; ++attempt) {
      const auto& local = community_stubs[community[v]];
      const auto& pool = (!local.empty() && rng.bernoulli(0.75)) ? local : stubs;
      targets.insert(pool[rng.below(pool.size())]);
    }
    for (auto t : targets) {
      adj[v].insert(t);
      adj[t].insert(v);
      for (auto x : {v, t}) {
        stubs.push_back(x);
        community_stubs[community[x]].push_back(x);
      }
    }
    stubs.push_back(v);
    community_stubs[community[v]].push_back(v);
  }

  auto id = [](std::size_t v) { return kPlayerBase + v; };

  // Seeds are drawn from well-connected players; a few others go private.
  std::vector<std::size_t> order(kPlayers);
  for (std::size_t v = 0; v < kPlayers; ++v) order[v] = v;
  rng.shuffle(order.begin(), order.end());
  std::stable_partition(order.begin(), order.end(), [&](std::size_t v) { return adj[v].size() >= 25; });
  std::vector<bool> is_private(kPlayers, false);
  std::string seeds;
  for (std::size_t i = 0; i < kSeeds; ++i) seeds += fmt::format("{}\n", id(order[i]));
  for (std::size_t i = kSeeds; i < kPlayers; ++i) is_private[order[i]] = rng.bernoulli(0.04);

  for (std::size_t v = 0; v < kPlayers; ++v) {
    json doc;
    if (is_private[v]) {
      doc = {{"private", true}};
    } else {
      doc = json::array();
      for (auto u : adj[v]) doc.push_back(id(u));
    }
    write_text(dir / "steam" / "friends" / fmt::format("{}.json", id(v)), doc.dump() + "\n");
  }
  write_text(dir / "seeds.txt", seeds);

  // Activity: community favourites plus a skewed global popularity.
  std::vector<double> cumulative;
  double total = 0.0;
  for (std::size_t r = 0; r < kGames; ++r) cumulative.push_back(total += 1.0 / std::pow(r + 1.0, 0.8));
  auto popular_game = [&] {
    const double x = rng.uniform() * total;
    return static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), x) - cumulative.begin());
  };
  auto game_id = [](std::size_t g) { return GameId{1000 + 10 * g}; };

  const Date start = parse_date("2020-04-13");
  std::vector<ActivityRecord> records;
  for (std::size_t v = 0; v < kPlayers; ++v) {
    const PlayerId p{id(v)};
    if (rng.bernoulli(0.1)) {
      // Inactive: observed but never played in the window.
      records.push_back({p, game_id(popular_game()), start + std::chrono::days{rng.below(35)}, 0});
      continue;
    }
    std::set<std::size_t> games;
    const std::size_t n_games = 1 + rng.below(4);
    while (games.size() < n_games) {
      games.insert(rng.bernoulli(0.5) ? (2 * community[v] + rng.below(2)) % kGames : popular_game());
    }
    for (auto g : games) {
      std::set<std::int64_t> days;
      const std::size_t n_days = 1 + rng.below(6);
      while (days.size() < n_days) days.insert(static_cast<std::int64_t>(rng.below(35)));
      for (auto d : days) {
        records.push_back({p, game_id(g), start + std::chrono::days{d}, static_cast<std::uint32_t>(10 + rng.below(290))});
      }
    }
    if (rng.bernoulli(0.1)) {
      // Before the window; must not count.
      records.push_back({p, game_id(*games.begin()), start - std::chrono::days{5}, 45});
    }
  }
  {
    auto out = open_out(dir / "activity.csv");
    write_activity_csv(out, ActivityLog(std::move(records)));
  }

  static const std::array<const char*, kGames> kNames{
      "Starfall Tactics", "Harbor Tycoon",  "Iron Vanguard",  "Moonlit Meadows", "Rift Runners",
      "Crown of Ash",     "Deep Sky Miner", "Pixel Derby",    "Hollow Signal",   "Last Outpost",
      "Garden Guild",     "Nova Arena",     "Tidebreakers",   "Ember Dungeon",   "Circuit Kings",
      "Quiet Village",    "Warlords Online", "Puzzle Parlor", "Frostbound",      "Skyline Couriers"};
  static const std::vector<std::string> kGenreList{"Action",     "Adventure", "Strategy",   "Simulation",
                                                   "RPG",        "Casual",    "Indie",      "Sports",
                                                   "Racing",     "Massively Multiplayer", "Free to Play"};
  static const std::vector<std::string> kTagList{
      "multiplayer", "online co-op", "local co-op", "pvp",        "open world",  "survival",     "crafting",
      "sandbox",     "fps",          "shooter",     "team-based", "turn-based",  "rts",          "management",
      "building",    "rpg",          "story rich",  "fantasy",    "sci-fi",      "horror",       "atmospheric",
      "casual",      "puzzle",       "racing",      "sports",     "free to play", "competitive", "difficult"};

  std::string catalog;
  for (std::size_t g = 0; g < kGames; ++g) {
    std::vector<std::string> tags{"Singleplayer"};
    for (auto& t : pick(kTagList, 6 + rng.below(9), rng)) tags.push_back(t);
    // Case and spacing variants collapse under normalization.
    if (rng.bernoulli(0.3)) tags.push_back("  MULTIPLAYER ");
    catalog += json{{"game_id", raw(game_id(g))},
                    {"name", kNames[g]},
                    {"genres", pick(kGenreList, 1 + rng.below(3), rng)},
                    {"tags", tags}}
                   .dump() +
               "\n";
  }
  write_text(dir / "catalog.jsonl", catalog);

  const json config{{"provider", {{"mode", "fixture"}, {"fixture_root", "steam"}}},
                    {"seeds", "seeds.txt"},
                    {"activity", "activity.csv"},
                    {"catalog", "catalog.jsonl"},
                    {"window", {{"start", "2020-04-13"}, {"end", "2020-05-17"}}},
                    {"top_n", kGames},
                    {"min_nodes", 20},
                    {"clustering", {{"k", 6}, {"k_min", 2}, {"k_max", 10}}},
                    {"out", "out"},
                    {"seed", seed}};
  write_text(dir / "config.json", config.dump(2) + "\n");
}

}  // namespace gamenet
