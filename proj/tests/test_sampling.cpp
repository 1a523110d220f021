#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "gamenet/sampling.hpp"
#include "oracles.hpp"

using namespace gamenet;
namespace fs = std::filesystem;

namespace {

PlayerId P(std::uint64_t v) { return PlayerId{v}; }
GameId G(std::uint64_t v) { return GameId{v}; }

Date day(int d) { return Date{std::chrono::year{2020} / 4 / 13} + std::chrono::days{d}; }
const ObservationWindow kWindow{day(0), day(34)};

// Friend lists from an undirected graph; ids in `hidden` are private.
class GraphProvider : public FriendProvider {
 public:
  GraphProvider(const Graph& g, std::set<PlayerId> hidden = {}) : hidden_(std::move(hidden)) {
    for (Graph::Index i = 0; i < g.node_count(); ++i) {
      auto& f = lists_[g.id(i)];
      for (auto j : g.neighbors(i)) f.push_back(g.id(j));
    }
  }
  FriendList friends_of(PlayerId p) override {
    ++calls;
    if (fail_after && calls > *fail_after) throw TransientError("provider down");
    if (hidden_.count(p)) return FriendList::private_profile();
    auto it = lists_.find(p);
    return {Visibility::public_profile, it == lists_.end() ? std::vector<PlayerId>{} : it->second};
  }

  std::atomic<std::size_t> calls{0};
  std::optional<std::size_t> fail_after;

 private:
  std::map<PlayerId, std::vector<PlayerId>> lists_;
  std::set<PlayerId> hidden_;
};

Graph edges(std::initializer_list<std::pair<int, int>> list) {
  std::vector<Edge> e;
  for (auto [u, v] : list) e.emplace_back(P(u), P(v));
  return from_edge_list(e);
}

ActivityRecord rec(int p, int g, int d, std::uint32_t minutes) { return {P(p), G(g), day(d), minutes}; }

// Random social graph plus activity; players 1..n, games 1..games.
struct World {
  Graph g;
  ActivityLog log;
};

World random_world(std::size_t n, std::size_t games, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  World w;
  w.g = oracle::from_matrix(oracle::random_matrix(n, 0.08, rng));
  std::vector<ActivityRecord> r;
  for (std::uint64_t p = 1; p <= n; ++p)
    for (std::uint64_t gm = 1; gm <= games; ++gm) {
      if (rng() % 3) continue;
      const int d = static_cast<int>(rng() % 40) - 3;  // some records fall outside
      r.push_back({P(p), G(gm), day(d), static_cast<std::uint32_t>(rng() % 4 == 0 ? 0 : rng() % 300)});
    }
  w.log = ActivityLog(std::move(r));
  return w;
}

}  // namespace

TEST(Snowball, SymmetricPair) {
  GraphProvider prov(edges({{1, 2}}));
  const std::vector<PlayerId> seeds{P(1)};
  const auto res = snowball_build(prov, seeds);
  EXPECT_EQ(res.graph, edges({{1, 2}}));
}

TEST(Snowball, DisjointPairsKeepSmallestIdComponent) {
  GraphProvider prov(edges({{1, 2}, {3, 4}}));
  const std::vector<PlayerId> seeds{P(3), P(1)};
  const auto res = snowball_build(prov, seeds);
  EXPECT_EQ(res.stats.lcc_nodes, 2u);
  EXPECT_EQ(res.graph, edges({{1, 2}}));
}

TEST(Snowball, ClosurePassAddsOnlyEdgesBetweenKnownNodes) {
  // Step 1 gives {1,2}; step 3 adds 3 and 4 through 2; the closure pass
  // then finds 3-4 (both known) and ignores 4-5 (5 is new).
  GraphProvider prov(edges({{1, 2}, {2, 3}, {2, 4}, {3, 4}, {4, 5}}));
  const std::vector<PlayerId> seeds{P(1)};
  const auto res = snowball_build(prov, seeds);
  EXPECT_EQ(res.graph, edges({{1, 2}, {2, 3}, {2, 4}, {3, 4}}));
  EXPECT_EQ(res.stats.closure_edges, 1u);
}

TEST(Snowball, PrivateProfilesRemoved) {
  GraphProvider prov(edges({{1, 2}, {1, 3}, {2, 3}, {3, 4}}), {P(3)});
  const std::vector<PlayerId> seeds{P(1)};
  const auto res = snowball_build(prov, seeds);
  EXPECT_FALSE(res.graph.contains(P(3)));
  EXPECT_EQ(res.graph, edges({{1, 2}}));
  EXPECT_EQ(res.stats.private_removed, 1u);
}

TEST(Snowball, PrivateSeedIsAnError) {
  GraphProvider prov(edges({{1, 2}}), {P(1)});
  const std::vector<PlayerId> seeds{P(1)};
  EXPECT_THROW(snowball_build(prov, seeds), DataError);
}

TEST(Snowball, EmptySeedsIsAnError) {
  GraphProvider prov(edges({{1, 2}}));
  EXPECT_THROW(snowball_build(prov, std::span<const PlayerId>{}), DataError);
}

TEST(Snowball, ExpansionGrowsAndConcurrencyDoesNotChangeResult) {
  std::mt19937_64 rng(41);
  const Graph world = oracle::from_matrix(oracle::random_matrix(600, 0.006, rng));
  std::set<PlayerId> hidden;
  for (PlayerId p : world.nodes())
    if (rng() % 25 == 0) hidden.insert(p);
  std::vector<PlayerId> seeds;
  for (PlayerId p : world.nodes())
    if (seeds.size() < 6 && !hidden.count(p) && world.degree(*world.index_of(p)) >= 3) seeds.push_back(p);

  GraphProvider serial(world, hidden);
  const auto a = snowball_build(serial, seeds);
  GraphProvider parallel(world, hidden);
  const auto b = snowball_build(parallel, seeds, {.max_in_flight = 8});
  EXPECT_EQ(a.graph, b.graph);
  EXPECT_GT(a.stats.expanded_nodes, a.stats.lcc_nodes);
  for (PlayerId p : a.graph.nodes()) EXPECT_FALSE(hidden.count(p));
  for (auto [u, v] : a.graph.edges()) EXPECT_TRUE(world.has_edge(u, v));
}

TEST(Snowball, ResumesFromCheckpointAfterProviderFailure) {
  std::mt19937_64 rng(7);
  const Graph world = oracle::from_matrix(oracle::random_matrix(300, 0.015, rng));
  std::vector<PlayerId> seeds{world.id(0), world.id(1), world.id(2)};
  const fs::path ckpt = fs::temp_directory_path() / "gamenet_test_crawl.jsonl";
  fs::remove(ckpt);

  GraphProvider reference(world);
  const auto expected = snowball_build(reference, seeds);

  GraphProvider flaky(world);
  flaky.fail_after = 40;
  EXPECT_THROW(snowball_build(flaky, seeds, {.checkpoint = ckpt}), TransientError);
  ASSERT_TRUE(fs::exists(ckpt));

  GraphProvider resumed(world);
  const auto res = snowball_build(resumed, seeds, {.checkpoint = ckpt});
  EXPECT_EQ(res.graph, expected.graph);
  EXPECT_LT(resumed.calls.load(), reference.calls.load());
  fs::remove(ckpt);
}

TEST(ActivePlayers, Examples) {
  EXPECT_TRUE(active_players(ActivityLog{}, kWindow).empty());
  EXPECT_EQ(active_players(ActivityLog({rec(1, 1, 3, 30)}), kWindow), std::vector<PlayerId>{P(1)});
  EXPECT_TRUE(active_players(ActivityLog({rec(1, 1, 3, 0)}), kWindow).empty());
  EXPECT_TRUE(active_players(ActivityLog({rec(1, 1, -1, 30), rec(1, 1, 35, 30)}), kWindow).empty());
  EXPECT_EQ(active_players(ActivityLog({rec(2, 1, 0, 5), rec(2, 1, 34, 5)}), kWindow), std::vector<PlayerId>{P(2)});
}

TEST(ActivityLog, DuplicateKeyIsAnError) {
  EXPECT_THROW(ActivityLog({rec(1, 1, 3, 30), rec(1, 1, 3, 10)}), DataError);
}

TEST(PruneInactive, Examples) {
  const std::vector<PlayerId> ends{P(1), P(3)};
  EXPECT_TRUE(prune_inactive(edges({{1, 2}, {2, 3}}), ends).empty());

  const Graph k3 = edges({{1, 2}, {2, 3}, {1, 3}});
  const std::vector<PlayerId> all{P(1), P(2), P(3)};
  EXPECT_EQ(prune_inactive(k3, all), k3);

  const std::vector<PlayerId> leaves{P(2), P(3), P(4)};
  EXPECT_TRUE(prune_inactive(edges({{1, 2}, {1, 3}, {1, 4}}), leaves).empty());
}

TEST(PruneInactive, OutputIsSubsetWithMinimumDegreeOne) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 40; ++t) {
    const Graph g = oracle::from_matrix(oracle::random_matrix(50, 0.05, rng));
    std::vector<PlayerId> active;
    for (PlayerId p : g.nodes())
      if (rng() % 3) active.push_back(p);
    const Graph h = prune_inactive(g, active);
    const std::set<PlayerId> a(active.begin(), active.end());
    for (Graph::Index i = 0; i < h.node_count(); ++i) {
      EXPECT_GE(h.degree(i), 1u);
      EXPECT_TRUE(a.count(h.id(i)));
      EXPECT_TRUE(g.contains(h.id(i)));
    }
  }
}

TEST(TopGames, OrderedByPlayerCount) {
  std::vector<ActivityRecord> r;
  for (int p = 1; p <= 5; ++p) r.push_back(rec(p, 1, 1, 10));
  for (int p = 1; p <= 3; ++p) r.push_back(rec(p, 2, 2, 100));
  const Graph g = edges({{1, 2}, {2, 3}, {3, 4}, {4, 5}});
  const ActivityLog log(std::move(r));
  EXPECT_EQ(top_games(g, log, kWindow, 10, 1), (std::vector<GameId>{G(1), G(2)}));
  EXPECT_EQ(top_games(g, log, kWindow, 1, 1), std::vector<GameId>{G(1)});
  EXPECT_EQ(top_games(g, log, kWindow, 10, 4), std::vector<GameId>{G(1)});
}

TEST(TopGames, BelowFloorExcluded) {
  std::vector<ActivityRecord> r;
  std::vector<Edge> e;
  for (int p = 1; p <= 249; ++p) {
    r.push_back(rec(p, 7, 0, 1));
    if (p > 1) e.emplace_back(P(p - 1), P(p));
  }
  const Graph g = from_edge_list(e);
  const ActivityLog log(std::move(r));
  EXPECT_TRUE(top_games(g, log, kWindow, 200, 250).empty());
  EXPECT_EQ(top_games(g, log, kWindow, 200, 249), std::vector<GameId>{G(7)});
}

TEST(TopGames, TieBrokenByPlaytimeThenId) {
  const Graph g = edges({{1, 2}, {3, 4}});
  const ActivityLog log({rec(1, 5, 0, 10), rec(2, 5, 0, 10), rec(3, 9, 0, 50), rec(4, 9, 0, 50),
                         rec(1, 3, 0, 10), rec(2, 3, 0, 10)});
  EXPECT_EQ(top_games(g, log, kWindow, 10, 1), (std::vector<GameId>{G(9), G(3), G(5)}));
}

TEST(TopGames, MatchesCountAndSortOracle) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const World w = random_world(120, 15, seed);
    const std::size_t min_nodes = 20;
    std::vector<std::tuple<std::size_t, std::uint64_t, std::uint64_t>> rows;  // players, minutes, game
    for (std::uint64_t gm = 1; gm <= 15; ++gm) {
      std::set<PlayerId> players;
      std::uint64_t minutes = 0;
      for (const auto& r : w.log.records()) {
        if (raw(r.game) != gm || !kWindow.contains(r.day) || r.playtime_minutes == 0) continue;
        if (!w.g.contains(r.player)) continue;
        players.insert(r.player);
        minutes += r.playtime_minutes;
      }
      if (players.size() >= min_nodes) rows.emplace_back(players.size(), minutes, gm);
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
      if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) > std::get<1>(b);
      return std::get<2>(a) < std::get<2>(b);
    });
    std::vector<GameId> expected;
    for (const auto& row : rows)
      if (expected.size() < 8) expected.push_back(G(std::get<2>(row)));
    const auto got = top_games(w.g, w.log, kWindow, 8, min_nodes);
    EXPECT_EQ(got, expected) << "seed " << seed;
    EXPECT_LE(got.size(), 8u);
    for (GameId gm : got) EXPECT_GE(game_subgraph(w.g, w.log, kWindow, gm).node_count(), min_nodes);
  }
}

TEST(GameSubgraph, Examples) {
  const Graph g = edges({{1, 2}, {2, 3}});
  EXPECT_TRUE(game_subgraph(g, ActivityLog{}, kWindow, G(1)).empty());
  const ActivityLog all({rec(1, 1, 0, 5), rec(2, 1, 0, 5), rec(3, 1, 0, 5)});
  EXPECT_EQ(game_subgraph(g, all, kWindow, G(1)), g);
}

TEST(GameSubgraph, MatchesSetIntersectionOracle) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const World w = random_world(80, 6, seed);
    const auto active = active_players(w.log, kWindow);
    const std::set<PlayerId> active_set(active.begin(), active.end());
    for (std::uint64_t gm = 1; gm <= 6; ++gm) {
      std::set<PlayerId> players;
      for (const auto& r : w.log.records())
        if (raw(r.game) == gm && kWindow.contains(r.day) && r.playtime_minutes > 0) players.insert(r.player);
      std::vector<PlayerId> nodes;
      for (PlayerId p : w.g.nodes())
        if (players.count(p)) nodes.push_back(p);
      std::vector<Edge> e;
      for (auto [u, v] : w.g.edges())
        if (players.count(u) && players.count(v)) e.emplace_back(u, v);
      const Graph got = game_subgraph(w.g, w.log, kWindow, G(gm));
      EXPECT_EQ(got, make_graph(nodes, e));
      for (PlayerId p : got.nodes()) EXPECT_TRUE(active_set.count(p));
    }
  }
}
