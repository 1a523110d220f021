#include "gamenet/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <thread>
#include <unordered_map>

namespace gamenet {

namespace {

using json = nlohmann::json;

// Memoizing fetcher over a provider, with an optional append-only
// checkpoint file.
class Crawler {
 public:
  Crawler(FriendProvider& provider, const SnowballOptions& options) : provider_(provider), options_(options) {
    if (options_.checkpoint && std::filesystem::exists(*options_.checkpoint)) load_checkpoint();
    if (options_.checkpoint) {
      out_.open(*options_.checkpoint, std::ios::app);
      if (!out_) throw DataError("cannot write checkpoint " + options_.checkpoint->string());
    }
  }

  std::size_t fetches() const { return fetches_; }

  const FriendList& get(PlayerId id) const { return memo_.at(id); }
  bool is_private(PlayerId id) const {
    auto it = memo_.find(id);
    return it != memo_.end() && it->second.is_private();
  }

  // Fetches every id not yet memoized, up to max_in_flight at a time.
  void fetch_all(std::span<const PlayerId> ids) {
    std::vector<PlayerId> todo;
    for (PlayerId id : ids) {
      if (!memo_.count(id)) todo.push_back(id);
    }
    std::sort(todo.begin(), todo.end());
    todo.erase(std::unique(todo.begin(), todo.end()), todo.end());
    if (todo.empty()) return;

    std::vector<std::optional<FriendList>> results(todo.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex mu;

    auto worker = [&] {
      while (!failed.load()) {
        const std::size_t i = next.fetch_add(1);
        if (i >= todo.size()) return;
        try {
          auto list = provider_.friends_of(todo[i]);
          std::lock_guard lock(mu);
          record(todo[i], list);
          results[i] = std::move(list);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
          failed.store(true);
        }
      }
    };

    const std::size_t workers = std::clamp<std::size_t>(options_.max_in_flight, 1, todo.size());
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    for (std::size_t i = 0; i < todo.size(); ++i) {
      if (results[i]) memo_.emplace(todo[i], std::move(*results[i]));
    }
    if (error) {
      out_.flush();
      try {
        std::rethrow_exception(error);
      } catch (const TransientError& e) {
        throw TransientError(std::string(e.what()) + " (crawl aborted; " + std::to_string(memo_.size()) +
                             " friend lists " + (options_.checkpoint ? "saved to checkpoint" : "fetched") + ")");
      }
    }
  }

 private:
  void record(PlayerId id, const FriendList& list) {
    ++fetches_;
    if (!out_.is_open()) return;
    json row{{"id", raw(id)}, {"private", list.is_private()}};
    auto& arr = row["friends"] = json::array();
    for (PlayerId f : list.friends) arr.push_back(raw(f));
    out_ << row.dump() << '\n';
    out_.flush();
  }

  void load_checkpoint() {
    std::ifstream in(*options_.checkpoint);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        const auto row = json::parse(line);
        FriendList list;
        if (row.at("private").get<bool>()) list.visibility = Visibility::private_profile;
        for (const auto& f : row.at("friends")) list.friends.push_back(PlayerId{f.get<std::uint64_t>()});
        memo_.insert_or_assign(PlayerId{row.at("id").get<std::uint64_t>()}, std::move(list));
      } catch (const json::exception& e) {
        // A torn final line from an interrupted write is dropped.
        if (in.peek() == std::char_traits<char>::eof()) break;
        throw ParseError(std::string("checkpoint: ") + e.what(), line_no);
      }
    }
  }

  FriendProvider& provider_;
  const SnowballOptions& options_;
  std::unordered_map<PlayerId, FriendList> memo_;
  std::ofstream out_;
  std::size_t fetches_ = 0;
};

}  // namespace

SnowballResult snowball_build(FriendProvider& provider, std::span<const PlayerId> seeds,
                              const SnowballOptions& options) {
  if (seeds.empty()) throw DataError("snowball_build: empty seed set");
  Crawler crawler(provider, options);
  SnowballResult result;
  auto& stats = result.stats;

  // Step 1: seeds and their friends.
  crawler.fetch_all(seeds);
  GraphBuilder step1;
  for (PlayerId s : seeds) {
    const auto& list = crawler.get(s);
    if (list.is_private()) throw DataError("seed " + to_string(s) + " has a private profile");
    step1.add_node(s);
    for (PlayerId f : list.friends) step1.add_edge(s, f);
  }
  const Graph seed_network = step1.build();
  stats.seed_network_nodes = seed_network.node_count();
  stats.seed_network_edges = seed_network.edge_count();

  // Step 2: largest component.
  const Graph lcc = largest_connected_component(seed_network);
  stats.lcc_nodes = lcc.node_count();

  // Step 3: friends of every LCC member.
  crawler.fetch_all(lcc.nodes());
  GraphBuilder step3;
  for (PlayerId u : lcc.nodes()) {
    step3.add_node(u);
    for (PlayerId f : crawler.get(u).friends) step3.add_edge(u, f);
  }
  const Graph expanded = step3.build();
  stats.expanded_nodes = expanded.node_count();
  stats.expanded_edges = expanded.edge_count();

  // Step 4: closure over the nodes added in step 3; no new nodes.
  std::vector<PlayerId> added;
  std::set_difference(expanded.nodes().begin(), expanded.nodes().end(), lcc.nodes().begin(), lcc.nodes().end(),
                      std::back_inserter(added));
  crawler.fetch_all(added);
  std::vector<Edge> edges = expanded.edges();
  for (PlayerId u : added) {
    for (PlayerId f : crawler.get(u).friends) {
      if (f != u && expanded.contains(f)) edges.emplace_back(u, f);
    }
  }
  const Graph closed = make_graph(expanded.nodes(), edges);
  stats.closure_edges = closed.edge_count() - expanded.edge_count();

  // Drop private profiles.
  std::vector<PlayerId> visible;
  for (PlayerId u : closed.nodes()) {
    if (crawler.is_private(u)) {
      ++stats.private_removed;
    } else {
      visible.push_back(u);
    }
  }
  result.graph = induced_subgraph(closed, visible);
  stats.fetches = crawler.fetches();
  return result;
}

std::vector<PlayerId> active_players(const ActivityLog& log, const ObservationWindow& w) {
  std::vector<PlayerId> out;
  for (const auto& r : log.records()) {
    if (r.playtime_minutes > 0 && w.contains(r.day)) out.push_back(r.player);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Graph prune_inactive(const Graph& g, std::span<const PlayerId> active) {
  Graph current = induced_subgraph(g, active);
  for (;;) {
    std::vector<PlayerId> keep;
    for (Graph::Index i = 0; i < current.node_count(); ++i) {
      if (current.degree(i) > 0) keep.push_back(current.id(i));
    }
    if (keep.size() == current.node_count()) return current;
    current = induced_subgraph(current, keep);
  }
}

std::vector<GameRank> rank_games(const Graph& g, const ActivityLog& log, const ObservationWindow& w,
                                 std::size_t min_nodes) {
  std::map<GameId, std::set<PlayerId>> players;
  std::map<GameId, std::uint64_t> minutes;
  for (const auto& r : log.records()) {
    if (r.playtime_minutes == 0 || !w.contains(r.day) || !g.contains(r.player)) continue;
    players[r.game].insert(r.player);
    minutes[r.game] += r.playtime_minutes;
  }
  std::vector<GameRank> ranks;
  for (const auto& [game, set] : players) {
    if (set.size() < min_nodes) continue;
    ranks.push_back({game, set.size(), minutes[game]});
  }
  std::sort(ranks.begin(), ranks.end(), [](const GameRank& a, const GameRank& b) {
    if (a.players != b.players) return a.players > b.players;
    if (a.playtime_minutes != b.playtime_minutes) return a.playtime_minutes > b.playtime_minutes;
    return a.game < b.game;
  });
  return ranks;
}

std::vector<GameId> top_games(const Graph& g, const ActivityLog& log, const ObservationWindow& w, std::size_t n,
                              std::size_t min_nodes) {
  if (n == 0) throw UsageError("top_games: n must be at least 1");
  auto ranks = rank_games(g, log, w, min_nodes);
  std::vector<GameId> out;
  for (std::size_t i = 0; i < ranks.size() && i < n; ++i) out.push_back(ranks[i].game);
  return out;
}

Graph game_subgraph(const Graph& g, const ActivityLog& log, const ObservationWindow& w, GameId game) {
  std::vector<PlayerId> players;
  for (const auto& r : log.records()) {
    if (r.game == game && r.playtime_minutes > 0 && w.contains(r.day)) players.push_back(r.player);
  }
  return induced_subgraph(g, players);
}

}  // namespace gamenet
