#include "gamenet/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include "gamenet/characterization.hpp"
#include "gamenet/hash.hpp"
#include "gamenet/rng.hpp"
#include "gamenet/sampling.hpp"

#ifndef GAMENET_VERSION
#define GAMENET_VERSION "0.0.0"
#endif

namespace gamenet {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view version() { return GAMENET_VERSION; }

// Streams of the master seed handed to each randomized stage.
constexpr std::uint64_t kMetricsStream = 1;
constexpr std::uint64_t kEmbedStream = 2;
constexpr std::uint64_t kClusterStream = 3;

// Defined in report.cpp.
void run_report(const std::map<std::string, fs::path>& inputs,
                const std::function<void(const std::string&, const std::string&)>& write);

namespace {

// --- config ----------------------------------------------------------------

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) throw UsageError(fmt::format("{}: expected an object", where));
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw UsageError(fmt::format("{}: unknown key '{}'", where, item.key()));
    }
  }
}

template <class T>
void get_if(const json& j, const char* key, T& dst) {
  if (j.contains(key) && !j.at(key).is_null()) dst = j.at(key).get<T>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path q(p);
  return (q.is_absolute() ? q : base / q).lexically_normal();
}

std::optional<fs::path> opt_path(const json& j, const char* key, const fs::path& base) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return resolve(base, j.at(key).get<std::string>());
}

ProviderConfig provider_from_json(const json& j, const fs::path& base) {
  check_keys(j, {"mode", "fixture_root", "base_url", "cache_dir", "rate_limits", "retry"}, "provider");
  ProviderConfig p;
  const auto mode = j.value("mode", std::string("fixture"));
  if (mode == "fixture") {
    p.mode = ProviderConfig::Mode::fixture;
  } else if (mode == "live") {
    p.mode = ProviderConfig::Mode::live;
  } else {
    throw UsageError("provider.mode must be 'fixture' or 'live'");
  }
  if (auto root = opt_path(j, "fixture_root", base)) p.fixture_root = *root;
  if (auto dir = opt_path(j, "cache_dir", base)) p.cache_dir = *dir;
  get_if(j, "base_url", p.base_url);
  if (j.contains("rate_limits")) {
    p.rate_limits.clear();
    for (const auto& r : j.at("rate_limits")) {
      check_keys(r, {"requests", "window_seconds"}, "provider.rate_limits");
      p.rate_limits.push_back({r.at("requests").get<std::size_t>(),
                               std::chrono::milliseconds(static_cast<std::int64_t>(
                                   r.at("window_seconds").get<double>() * 1000.0))});
    }
  }
  if (j.contains("retry")) {
    const auto& r = j.at("retry");
    check_keys(r, {"max_attempts", "initial_backoff_ms", "multiplier", "max_backoff_ms"}, "provider.retry");
    get_if(r, "max_attempts", p.retry.max_attempts);
    get_if(r, "multiplier", p.retry.multiplier);
    if (r.contains("initial_backoff_ms")) p.retry.initial_backoff = std::chrono::milliseconds(r.at("initial_backoff_ms").get<std::int64_t>());
    if (r.contains("max_backoff_ms")) p.retry.max_backoff = std::chrono::milliseconds(r.at("max_backoff_ms").get<std::int64_t>());
  }
  if (const char* key = std::getenv("STEAM_API_KEY")) p.api_key = key;
  return p;
}

bool needs_provider(const PipelineConfig& c) { return !c.edge_list || !c.activity; }

// --- artifacts ---------------------------------------------------------------

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

void write_atomic(const fs::path& file, std::string_view data) {
  fs::create_directories(file.parent_path());
  auto tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.close();
    if (!out) throw DataError("cannot write " + tmp.string());
  }
  fs::rename(tmp, file);
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  return in;
}

fs::path stage_dir(const PipelineConfig& cfg, Stage s) { return cfg.out / to_string(s); }

std::optional<Manifest> read_manifest(const fs::path& dir) {
  const auto file = dir / "manifest.json";
  if (!fs::exists(file)) return std::nullopt;
  try {
    auto in = open_in(file);
    return json::parse(in).get<Manifest>();
  } catch (const json::exception& e) {
    throw DataError(fmt::format("corrupt manifest {}: {}", file.string(), e.what()));
  }
}

// Hash of a directory tree: sorted relative paths with their file hashes.
std::string sha256_tree(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) entries.emplace_back(fs::relative(e.path(), root).generic_string(), sha256_file(e.path()));
  }
  std::sort(entries.begin(), entries.end());
  std::string joined;
  for (const auto& [p, h] : entries) joined += p + '\t' + h + '\n';
  return sha256_hex(joined);
}

struct Inputs {
  std::map<std::string, std::string> hashes;
  std::map<std::string, fs::path> paths;

  const fs::path& at(const std::string& name) const { return paths.at(name); }
};

void add_upstream(Inputs& in, const PipelineConfig& cfg, Stage s, const std::string& file) {
  const auto dir = stage_dir(cfg, s);
  const auto m = read_manifest(dir);
  if (!m) {
    throw DataError(fmt::format("missing artifacts of stage '{0}' in {1}; run `gamenet {0}` first", to_string(s),
                                dir.string()));
  }
  const auto it = m->outputs.find(file);
  const auto path = dir / file;
  if (it == m->outputs.end() || !fs::exists(path)) {
    throw DataError(fmt::format("stage '{0}' is missing {1}; rerun `gamenet {0}`", to_string(s), path.string()));
  }
  const auto h = sha256_file(path);
  if (h != it->second) {
    throw DataError(fmt::format("hash mismatch for {}: manifest records {}, file has {}; rerun `gamenet {}`",
                                path.string(), it->second, h, to_string(s)));
  }
  const auto key = to_string(s) + "/" + file;
  in.hashes[key] = h;
  in.paths[key] = path;
}

void add_external(Inputs& in, const std::string& name, const fs::path& path) {
  if (!fs::exists(path)) throw DataError(fmt::format("{} not found: {}", name, path.string()));
  in.hashes[name] = fs::is_directory(path) ? sha256_tree(path) : sha256_file(path);
  in.paths[name] = path;
}

Inputs gather_inputs(Stage stage, const PipelineConfig& cfg) {
  Inputs in;
  switch (stage) {
    case Stage::sample:
      if (cfg.edge_list) add_external(in, "edge_list", *cfg.edge_list);
      if (cfg.seeds && !cfg.edge_list) add_external(in, "seeds", *cfg.seeds);
      if (cfg.activity) add_external(in, "activity", *cfg.activity);
      if (needs_provider(cfg) && cfg.provider.mode == ProviderConfig::Mode::fixture) {
        add_external(in, "fixture_root", cfg.provider.fixture_root);
      }
      break;
    case Stage::subgraphs:
      add_upstream(in, cfg, Stage::sample, "graph.tsv");
      add_upstream(in, cfg, Stage::sample, "activity.csv");
      break;
    case Stage::metrics:
    case Stage::embed:
      add_upstream(in, cfg, Stage::subgraphs, "graphs.jsonl");
      break;
    case Stage::cluster:
      add_upstream(in, cfg, Stage::embed, "embedding.csv");
      break;
    case Stage::characterize:
      add_upstream(in, cfg, Stage::cluster, "assignment.csv");
      add_upstream(in, cfg, Stage::metrics, "profiles.jsonl");
      add_external(in, "catalog", cfg.catalog);
      break;
    case Stage::report:
      add_upstream(in, cfg, Stage::metrics, "profiles.jsonl");
      add_upstream(in, cfg, Stage::cluster, "sweep.csv");
      add_upstream(in, cfg, Stage::characterize, "cluster_profiles.json");
      add_upstream(in, cfg, Stage::characterize, "tag_frequencies.json");
      break;
  }
  return in;
}

// The part of the configuration each stage's outputs depend on (input file
// contents are tracked separately by hash).
json stage_config(Stage stage, const PipelineConfig& cfg) {
  switch (stage) {
    case Stage::sample:
      return {{"source", cfg.edge_list ? "edge_list" : "crawl"},
              {"activity", cfg.activity ? "csv" : "snapshots"},
              {"mode", cfg.provider.mode == ProviderConfig::Mode::live ? "live" : "fixture"},
              {"window", {format_date(cfg.window.start), format_date(cfg.window.end)}}};
    case Stage::subgraphs:
      return {{"window", {format_date(cfg.window.start), format_date(cfg.window.end)}},
              {"top_n", cfg.top_n},
              {"min_nodes", cfg.min_nodes}};
    case Stage::metrics:
      return {{"seed", cfg.seed},
              {"bootstrap", cfg.powerlaw.bootstrap},
              {"p_threshold", cfg.powerlaw.p_threshold},
              {"min_tail", cfg.powerlaw.min_tail},
              {"alpha_min", cfg.powerlaw.alpha_min},
              {"alpha_max", cfg.powerlaw.alpha_max}};
    case Stage::embed: {
      const auto& e = cfg.embedding;
      return {{"seed", cfg.seed},
              {"dimensions", e.dimensions},
              {"wl_iterations", e.wl_iterations},
              {"epochs", e.epochs},
              {"learning_rate", e.learning_rate},
              {"negative_samples", e.negative_samples},
              {"min_token_count", e.min_token_count}};
    }
    case Stage::cluster: {
      const auto& c = cfg.clustering;
      return {{"seed", cfg.seed}, {"k", c.k},         {"k_min", c.k_min}, {"k_max", c.k_max},
              {"n_init", c.n_init}, {"max_iter", c.max_iter}, {"tol", c.tol}};
    }
    case Stage::characterize:
      return {{"tags_top_k", cfg.tags_top_k}};
    case Stage::report:
      return json::object();
  }
  return json::object();
}

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& data) {
    write_atomic(dir_ / name, data);
    hashes_[name] = sha256_hex(data);
  }
  const fs::path& dir() const { return dir_; }
  const std::map<std::string, std::string>& hashes() const { return hashes_; }

 private:
  fs::path dir_;
  std::map<std::string, std::string> hashes_;
};

template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt::format("{:.9g}", *v) : std::string{}; }

// --- stages ------------------------------------------------------------------

std::vector<PlayerId> read_seeds(const fs::path& path) {
  auto in = open_in(path);
  std::vector<PlayerId> seeds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const auto token = line.substr(first, last - first + 1);
    if (token.find_first_not_of("0123456789") != std::string::npos) {
      throw ParseError("seed id is not a number: " + token, line_no);
    }
    seeds.push_back(PlayerId{std::stoull(token)});
  }
  if (seeds.empty()) throw DataError("seed list " + path.string() + " is empty");
  return seeds;
}

void stage_sample(const PipelineConfig& cfg, const Inputs& in, Outputs& out) {
  std::unique_ptr<SteamProvider> provider;
  auto get_provider = [&]() -> SteamProvider& {
    if (!provider) provider = make_provider(cfg.provider);
    return *provider;
  };

  json stats;
  Graph g;
  if (cfg.edge_list) {
    BuildReport report;
    g = read_edge_list(in.at("edge_list"), &report);
    stats["input"] = {{"self_loops", report.self_loops}, {"duplicate_edges", report.duplicate_edges}};
  } else {
    const auto seeds = read_seeds(in.at("seeds"));
    const auto checkpoint = out.dir() / "crawl.checkpoint.jsonl";
    fs::create_directories(out.dir());
    auto res = snowball_build(get_provider(), seeds, {cfg.max_in_flight, checkpoint});
    const auto& s = res.stats;
    stats["crawl"] = {{"seeds", seeds.size()},
                      {"seed_network_nodes", s.seed_network_nodes},
                      {"seed_network_edges", s.seed_network_edges},
                      {"lcc_nodes", s.lcc_nodes},
                      {"expanded_nodes", s.expanded_nodes},
                      {"expanded_edges", s.expanded_edges},
                      {"closure_edges", s.closure_edges},
                      {"private_removed", s.private_removed}};
    g = std::move(res.graph);
    fs::remove(checkpoint);
  }

  ActivityLog log;
  if (cfg.activity) {
    log = read_activity_csv(in.at("activity"));
  } else {
    std::vector<PlaytimeSnapshot> snapshots;
    for (Date d = cfg.window.start; d <= cfg.window.end; d += std::chrono::days{1}) {
      auto day = get_provider().snapshot_playtimes(g.nodes(), d);
      snapshots.insert(snapshots.end(), day.begin(), day.end());
    }
    auto derived = derive_activity(snapshots);
    if (derived.clamped > 0) {
      fmt::print(stderr, "warning: {} negative playtime deltas clamped to 0\n", derived.clamped);
    }
    stats["negative_deltas_clamped"] = derived.clamped;
    log = std::move(derived.log);
  }

  const auto active = active_players(log, cfg.window);
  const Graph pruned = prune_inactive(g, active);
  std::vector<ActivityRecord> kept;
  for (const auto& r : log.records()) {
    if (pruned.contains(r.player)) kept.push_back(r);
  }
  const ActivityLog kept_log(std::move(kept));

  stats["before_pruning"] = {{"nodes", g.node_count()}, {"edges", g.edge_count()}};
  stats["active_players"] = active.size();
  stats["nodes"] = pruned.node_count();
  stats["edges"] = pruned.edge_count();
  stats["activity_records"] = kept_log.size();

  out.write("graph.tsv", render([&](std::ostream& o) { write_edge_list(o, pruned); }));
  out.write("activity.csv", render([&](std::ostream& o) { write_activity_csv(o, kept_log); }));
  out.write("stats.json", stats.dump(2) + "\n");
}

void stage_subgraphs(const PipelineConfig& cfg, const Inputs& in, Outputs& out) {
  const Graph g = read_edge_list(in.at("sample/graph.tsv"));
  const ActivityLog log = read_activity_csv(in.at("sample/activity.csv"));
  auto ranks = rank_games(g, log, cfg.window, cfg.min_nodes);
  if (ranks.size() > cfg.top_n) ranks.resize(cfg.top_n);
  if (ranks.empty()) {
    throw DataError(fmt::format("no game has at least {} active players in the sampled graph", cfg.min_nodes));
  }

  std::string table = "rank,game_id,players,playtime_minutes\n";
  std::vector<GameGraph> corpus;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    const auto& r = ranks[i];
    table += fmt::format("{},{},{},{}\n", i + 1, raw(r.game), r.players, r.playtime_minutes);
    corpus.push_back({r.game, game_subgraph(g, log, cfg.window, r.game)});
  }
  out.write("top_games.csv", table);
  out.write("graphs.jsonl", render([&](std::ostream& o) { write_graphs_jsonl(o, corpus); }));
}

void stage_metrics(const PipelineConfig& cfg, const Inputs& in, Outputs& out) {
  auto file = open_in(in.at("subgraphs/graphs.jsonl"));
  const auto corpus = read_graphs_jsonl(file);
  const std::uint64_t seed = derive_seed(cfg.seed, kMetricsStream);

  std::vector<StructuralProfile> profiles(corpus.size());
  parallel_for(corpus.size(), cfg.jobs, [&](std::size_t i) {
    ProfileOptions o;
    o.seed = derive_seed(seed, raw(corpus[i].game));
    o.powerlaw = cfg.powerlaw;
    o.powerlaw.seed = derive_seed(o.seed, 1);
    o.powerlaw.jobs = 1;
    profiles[i] = profile(corpus[i].graph, o);
  });

  std::string jsonl;
  std::string csv =
      "game_id,nodes,density,mean_deg,std_deg,avg_clust,n_cc,lcc_fraction,modularity,assortativity,powerlaw,"
      "deg_centr,betw_centr,edges,alpha,xmin,ks_stat,p_value\n";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& p = profiles[i];
    jsonl += json{{"graph_id", raw(corpus[i].game)}, {"profile", p}}.dump() + "\n";
    csv += fmt::format("{},{},{},{:.9g},{:.9g},{:.9g},{},{:.9g},{},{},{},{},{},{},{},{},{},{}\n", raw(corpus[i].game),
                       p.n_nodes, fmt_opt(p.density), p.mean_degree, p.std_degree, p.avg_clustering, p.n_components,
                       p.lcc_fraction, fmt_opt(p.modularity), fmt_opt(p.assortativity), to_string(p.powerlaw.verdict),
                       fmt_opt(p.degree_centralization), fmt_opt(p.betweenness_centralization), p.n_edges,
                       fmt_opt(p.powerlaw.alpha), p.powerlaw.xmin, fmt_opt(p.powerlaw.ks_stat),
                       fmt_opt(p.powerlaw.p_value));
  }
  out.write("profiles.jsonl", jsonl);
  out.write("profiles.csv", csv);
}

void stage_embed(const PipelineConfig& cfg, const Inputs& in, Outputs& out) {
  auto file = open_in(in.at("subgraphs/graphs.jsonl"));
  const auto corpus = read_graphs_jsonl(file);
  std::vector<WLDocument> docs;
  docs.reserve(corpus.size());
  for (const auto& gg : corpus) docs.push_back(wl_document(gg.graph, cfg.embedding.wl_iterations, gg.game));

  EmbeddingConfig ec = cfg.embedding;
  ec.seed = derive_seed(cfg.seed, kEmbedStream);
  const auto result = train(docs, ec);

  std::string loss = "epoch,loss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) loss += fmt::format("{},{:.9g}\n", e + 1, result.epoch_loss[e]);
  out.write("documents.jsonl", render([&](std::ostream& o) { write_documents_jsonl(o, docs); }));
  out.write("embedding.csv", render([&](std::ostream& o) { write_embedding_csv(o, result.embedding); }));
  out.write("loss.csv", loss);
}

void stage_cluster(const PipelineConfig& cfg, const Inputs& in, Outputs& out) {
  auto file = open_in(in.at("embed/embedding.csv"));
  const auto m = read_embedding_csv(file);
  const PointMatrix points(m);

  ClusteringConfig cc = cfg.clustering;
  cc.seed = derive_seed(cfg.seed, kClusterStream);
  const auto rows = sweep(points, cc);

  const std::size_t k = cc.k;
  // Same seed as the sweep's run at this k, so the two agree.
  ClusteringConfig final_cfg = cc;
  final_cfg.k = k;
  final_cfg.seed = derive_seed(cc.seed, k);
  const auto a = kmeans(points, final_cfg);

  json summary{{"k", k}, {"inertia", a.inertia}, {"silhouette", silhouette(points, a.labels).mean}};
  summary["flagged_sweep_rows"] = std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return r.flagged; });

  out.write("sweep.csv", render([&](std::ostream& o) { write_sweep_csv(o, rows); }));
  out.write("assignment.csv", render([&](std::ostream& o) { write_assignment_csv(o, m.ids, a.labels); }));
  out.write("summary.json", summary.dump(2) + "\n");
}

void stage_characterize(const PipelineConfig& cfg, const Inputs& in, Outputs& out) {
  auto assignment_file = open_in(in.at("cluster/assignment.csv"));
  const Membership membership = read_assignment_csv(assignment_file);
  auto profiles_file = open_in(in.at("metrics/profiles.jsonl"));
  std::map<GameId, StructuralProfile> profiles;
  for (auto& [id, p] : read_profiles_jsonl(profiles_file)) profiles.emplace(id, std::move(p));

  std::set<GameId> corpus;
  std::uint32_t max_label = 0;
  for (const auto& [game, c] : membership) {
    corpus.insert(game);
    max_label = std::max(max_label, c);
  }
  const std::size_t k = membership.empty() ? 0 : max_label + 1;

  std::vector<GameMeta> catalog;
  for (auto& g : read_catalog_jsonl(in.at("catalog"))) {
    if (corpus.count(g.game_id)) catalog.push_back(std::move(g));
  }
  const TagSelections selections = catalog.empty() ? TagSelections{} : tfidf_select(catalog, cfg.tags_top_k);
  const auto clusters = build_cluster_profiles(membership, k, profiles, catalog, selections);

  std::string selected;
  for (const auto& [game, tags] : selections) {
    json row{{"game_id", raw(game)}, {"tags", json::array()}};
    for (const auto& t : tags) row["tags"].push_back({{"tag", t.tag}, {"tf", t.tf}, {"idf", t.idf}, {"score", t.score}});
    selected += row.dump() + "\n";
  }
  json freq = json::object();
  const auto counts = cluster_tag_frequencies(membership, k, selections);
  for (std::size_t c = 0; c < counts.size(); ++c) freq[std::to_string(c)] = counts[c];
  json genres = json::object();
  const auto dist = genre_distribution(membership, k, catalog);
  for (std::size_t c = 0; c < dist.size(); ++c) genres[std::to_string(c)] = dist[c];

  out.write("selected_tags.jsonl", selected);
  out.write("cluster_profiles.json", json(clusters).dump(2) + "\n");
  out.write("cluster_profiles.csv", render([&](std::ostream& o) { write_cluster_profiles_csv(o, clusters); }));
  out.write("tag_frequencies.json", freq.dump(2) + "\n");
  out.write("genre_distribution.json", genres.dump(2) + "\n");
}

bool up_to_date(const fs::path& dir, const Manifest& fresh) {
  const auto old = read_manifest(dir);
  if (!old || old->version != fresh.version || old->config_hash != fresh.config_hash || old->inputs != fresh.inputs) {
    return false;
  }
  for (const auto& [name, hash] : old->outputs) {
    const auto p = dir / name;
    if (!fs::exists(p) || sha256_file(p) != hash) return false;
  }
  return true;
}

}  // namespace

// --- public API ----------------------------------------------------------------

PipelineConfig PipelineConfig::from_json(const json& j, const fs::path& base) {
  PipelineConfig c;
  try {
    check_keys(j, {"provider", "max_in_flight", "edge_list", "seeds", "activity", "catalog", "window", "top_n",
                   "min_nodes", "powerlaw", "embedding", "clustering", "tags_top_k", "out", "seed", "jobs"},
               "config");
    if (j.contains("provider")) c.provider = provider_from_json(j.at("provider"), base);
    get_if(j, "max_in_flight", c.max_in_flight);
    c.edge_list = opt_path(j, "edge_list", base);
    c.seeds = opt_path(j, "seeds", base);
    c.activity = opt_path(j, "activity", base);
    if (auto p = opt_path(j, "catalog", base)) c.catalog = *p;
    if (!j.contains("window")) throw UsageError("config: 'window' is required");
    const auto& w = j.at("window");
    check_keys(w, {"start", "end"}, "window");
    try {
      c.window = ObservationWindow(parse_date(w.at("start").get<std::string>()), parse_date(w.at("end").get<std::string>()));
    } catch (const DataError& e) {
      throw UsageError(std::string("window: ") + e.what());
    }
    get_if(j, "top_n", c.top_n);
    get_if(j, "min_nodes", c.min_nodes);
    if (j.contains("powerlaw")) {
      const auto& p = j.at("powerlaw");
      check_keys(p, {"bootstrap", "p_threshold", "min_tail", "alpha_min", "alpha_max"}, "powerlaw");
      get_if(p, "bootstrap", c.powerlaw.bootstrap);
      get_if(p, "p_threshold", c.powerlaw.p_threshold);
      get_if(p, "min_tail", c.powerlaw.min_tail);
      get_if(p, "alpha_min", c.powerlaw.alpha_min);
      get_if(p, "alpha_max", c.powerlaw.alpha_max);
    }
    if (j.contains("embedding")) {
      const auto& e = j.at("embedding");
      check_keys(e, {"dimensions", "wl_iterations", "epochs", "learning_rate", "negative_samples", "min_token_count"},
                 "embedding");
      get_if(e, "dimensions", c.embedding.dimensions);
      get_if(e, "wl_iterations", c.embedding.wl_iterations);
      get_if(e, "epochs", c.embedding.epochs);
      get_if(e, "learning_rate", c.embedding.learning_rate);
      get_if(e, "negative_samples", c.embedding.negative_samples);
      get_if(e, "min_token_count", c.embedding.min_token_count);
    }
    if (j.contains("clustering")) {
      const auto& k = j.at("clustering");
      check_keys(k, {"k", "k_min", "k_max", "n_init", "max_iter", "tol"}, "clustering");
      get_if(k, "k", c.clustering.k);
      get_if(k, "k_min", c.clustering.k_min);
      get_if(k, "k_max", c.clustering.k_max);
      get_if(k, "n_init", c.clustering.n_init);
      get_if(k, "max_iter", c.clustering.max_iter);
      get_if(k, "tol", c.clustering.tol);
    }
    get_if(j, "tags_top_k", c.tags_top_k);
    if (auto p = opt_path(j, "out", base)) c.out = *p;
    get_if(j, "seed", c.seed);
    get_if(j, "jobs", c.jobs);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot open config " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(fmt::format("config {}: {}", file.string(), e.what()));
  }
  return from_json(j, fs::absolute(file).parent_path());
}

void PipelineConfig::validate() const {
  if (top_n < 1) throw UsageError("top_n must be at least 1");
  if (min_nodes < 1) throw UsageError("min_nodes must be at least 1");
  if (jobs < 1) throw UsageError("jobs must be at least 1");
  if (max_in_flight < 1) throw UsageError("max_in_flight must be at least 1");
  if (tags_top_k < 1) throw UsageError("tags_top_k must be at least 1");
  if (powerlaw.p_threshold < 0 || powerlaw.p_threshold > 1) throw UsageError("powerlaw.p_threshold must be in [0, 1]");
  if (!(powerlaw.alpha_min > 1.0 && powerlaw.alpha_max > powerlaw.alpha_min)) {
    throw UsageError("powerlaw alpha range must satisfy 1 < alpha_min < alpha_max");
  }
  embedding.validate();
  const auto& c = clustering;
  if (c.k_min < 2 || c.k_max < c.k_min) throw UsageError("clustering needs 2 <= k_min <= k_max");
  if (c.k < 2) throw UsageError("clustering.k must be at least 2");
  if (c.n_init < 1 || c.max_iter < 1) throw UsageError("clustering n_init and max_iter must be positive");
  if (catalog.empty()) throw UsageError("config: 'catalog' is required");
  if (!edge_list && !seeds) throw UsageError("config needs either 'edge_list' or 'seeds'");
  if (needs_provider(*this)) provider.validate();
}

std::span<const Stage> all_stages() {
  static constexpr std::array stages{Stage::sample, Stage::subgraphs, Stage::metrics, Stage::embed,
                                     Stage::cluster, Stage::characterize, Stage::report};
  return stages;
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::sample: return "sample";
    case Stage::subgraphs: return "subgraphs";
    case Stage::metrics: return "metrics";
    case Stage::embed: return "embed";
    case Stage::cluster: return "cluster";
    case Stage::characterize: return "characterize";
    case Stage::report: return "report";
  }
  return "?";
}

Stage parse_stage(std::string_view name) {
  for (Stage s : all_stages()) {
    if (to_string(s) == name) return s;
  }
  throw UsageError(fmt::format("unknown stage '{}'", name));
}

void to_json(json& j, const Manifest& m) {
  j = json{{"stage", m.stage},
           {"version", m.version},
           {"config_hash", m.config_hash},
           {"inputs", m.inputs},
           {"outputs", m.outputs}};
}

void from_json(const json& j, Manifest& m) {
  m.stage = j.at("stage").get<std::string>();
  m.version = j.at("version").get<std::string>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
  m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
}

StageOutcome run_stage(Stage stage, const PipelineConfig& cfg, bool force) {
  cfg.validate();
  const auto dir = stage_dir(cfg, stage);
  const Inputs in = gather_inputs(stage, cfg);

  Manifest manifest;
  manifest.stage = to_string(stage);
  manifest.version = std::string(version());
  manifest.config_hash = sha256_hex(stage_config(stage, cfg).dump());
  manifest.inputs = in.hashes;
  if (!force && up_to_date(dir, manifest)) return {stage, true};

  fs::create_directories(dir);
  fs::remove(dir / "manifest.json");
  Outputs out(dir);
  switch (stage) {
    case Stage::sample: stage_sample(cfg, in, out); break;
    case Stage::subgraphs: stage_subgraphs(cfg, in, out); break;
    case Stage::metrics: stage_metrics(cfg, in, out); break;
    case Stage::embed: stage_embed(cfg, in, out); break;
    case Stage::cluster: stage_cluster(cfg, in, out); break;
    case Stage::characterize: stage_characterize(cfg, in, out); break;
    case Stage::report:
      run_report(in.paths, [&](const std::string& name, const std::string& data) { out.write(name, data); });
      break;
  }
  manifest.outputs = out.hashes();
  write_atomic(dir / "manifest.json", json(manifest).dump(2) + "\n");
  return {stage, false};
}

std::vector<StageOutcome> run_pipeline(const PipelineConfig& cfg, bool force) {
  std::vector<StageOutcome> outcomes;
  bool rerun_downstream = force;
  for (Stage s : all_stages()) {
    auto o = run_stage(s, cfg, rerun_downstream);
    if (!o.skipped) rerun_downstream = true;
    outcomes.push_back(o);
  }
  return outcomes;
}

// --- corpus files ------------------------------------------------------------------

void write_graphs_jsonl(std::ostream& out, std::span<const GameGraph> graphs) {
  for (const auto& gg : graphs) {
    json nodes = json::array();
    for (PlayerId p : gg.graph.nodes()) nodes.push_back(raw(p));
    json edges = json::array();
    for (const auto& [u, v] : gg.graph.edges()) edges.push_back({raw(u), raw(v)});
    out << json{{"game_id", raw(gg.game)}, {"nodes", nodes}, {"edges", edges}}.dump() << '\n';
  }
}

std::vector<GameGraph> read_graphs_jsonl(std::istream& in) {
  std::vector<GameGraph> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      std::vector<PlayerId> nodes;
      for (const auto& n : j.at("nodes")) nodes.push_back(PlayerId{n.get<std::uint64_t>()});
      std::vector<Edge> edges;
      for (const auto& e : j.at("edges")) edges.emplace_back(PlayerId{e.at(0).get<std::uint64_t>()}, PlayerId{e.at(1).get<std::uint64_t>()});
      out.push_back({GameId{j.at("game_id").get<std::uint64_t>()}, make_graph(nodes, edges)});
    } catch (const json::exception& e) {
      throw ParseError(std::string("graph corpus: ") + e.what(), line_no);
    }
  }
  return out;
}

std::vector<std::pair<GameId, StructuralProfile>> read_profiles_jsonl(std::istream& in) {
  std::vector<std::pair<GameId, StructuralProfile>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      out.emplace_back(GameId{j.at("graph_id").get<std::uint64_t>()}, j.at("profile").get<StructuralProfile>());
    } catch (const json::exception& e) {
      throw ParseError(std::string("profiles: ") + e.what(), line_no);
    }
  }
  return out;
}

}  // namespace gamenet
