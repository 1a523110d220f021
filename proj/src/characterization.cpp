#include "gamenet/characterization.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>

namespace gamenet {

using nlohmann::json;

std::string normalize_tag(std::string_view tag) {
  std::string out;
  bool pending_space = false;
  for (char c : tag) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

GameMeta make_game_meta(GameId id, std::string name, std::vector<std::string> genres,
                        std::span<const std::string> raw_tags) {
  GameMeta meta{id, std::move(name), std::move(genres), {}};
  std::set<std::string> seen;
  for (const auto& t : raw_tags) {
    auto norm = normalize_tag(t);
    if (norm.empty() || !seen.insert(norm).second) continue;
    meta.tags.push_back(std::move(norm));
  }
  return meta;
}

std::vector<GameMeta> read_catalog_jsonl(std::istream& in) {
  std::vector<GameMeta> out;
  std::set<GameId> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto row = json::parse(line);
      const GameId id{row.at("game_id").get<std::uint64_t>()};
      if (!ids.insert(id).second) throw ParseError("duplicate game_id " + to_string(id), line_no);
      const auto tags = row.value("tags", std::vector<std::string>{});
      out.push_back(make_game_meta(id, row.value("name", std::string{}),
                                   row.value("genres", std::vector<std::string>{}), tags));
    } catch (const json::exception& e) {
      throw ParseError(std::string("catalog: ") + e.what(), line_no);
    }
  }
  return out;
}

std::vector<GameMeta> read_catalog_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open catalog " + path.string());
  return read_catalog_jsonl(in);
}

void write_catalog_jsonl(std::ostream& out, std::span<const GameMeta> catalog) {
  for (const auto& g : catalog) {
    json row{{"game_id", raw(g.game_id)}, {"name", g.name}, {"genres", g.genres}, {"tags", g.tags}};
    out << row.dump() << '\n';
  }
}

TagSelections tfidf_select(std::span<const GameMeta> catalog, std::size_t top_k) {
  if (catalog.empty()) throw DataError("tfidf_select: empty catalog");
  std::map<std::string, std::size_t> df;
  for (const auto& g : catalog) {
    for (const auto& t : g.tags) ++df[t];
  }
  const double n = static_cast<double>(catalog.size());
  TagSelections out;
  for (const auto& g : catalog) {
    auto& scores = out[g.game_id];
    if (g.tags.empty()) continue;
    const double tf = 1.0 / static_cast<double>(g.tags.size());
    for (const auto& t : g.tags) {
      const double idf = std::log(n / static_cast<double>(df[t]));
      scores.push_back({t, tf, idf, tf * idf});
    }
    std::sort(scores.begin(), scores.end(), [](const TagScore& a, const TagScore& b) {
      return a.score != b.score ? a.score > b.score : a.tag < b.tag;
    });
    if (scores.size() > top_k) scores.resize(top_k);
  }
  return out;
}

std::vector<TagCounts> cluster_tag_frequencies(const Membership& membership, std::size_t k,
                                               const TagSelections& selections) {
  std::vector<TagCounts> out(k);
  for (const auto& [game, cluster] : membership) {
    if (cluster >= k) throw DataError("cluster index " + std::to_string(cluster) + " out of range");
    auto it = selections.find(game);
    if (it == selections.end()) throw DataError("no tag selection for game " + to_string(game));
    for (const auto& s : it->second) ++out[cluster][s.tag];
  }
  return out;
}

std::vector<std::map<std::string, double>> genre_distribution(const Membership& membership, std::size_t k,
                                                              std::span<const GameMeta> catalog) {
  std::map<GameId, const GameMeta*> by_id;
  for (const auto& g : catalog) by_id[g.game_id] = &g;
  std::vector<std::map<std::string, std::size_t>> counts(k);
  std::vector<std::size_t> totals(k, 0);
  for (const auto& [game, cluster] : membership) {
    if (cluster >= k) throw DataError("cluster index " + std::to_string(cluster) + " out of range");
    auto it = by_id.find(game);
    if (it == by_id.end()) continue;
    for (const auto& genre : it->second->genres) {
      ++counts[cluster][genre];
      ++totals[cluster];
    }
  }
  std::vector<std::map<std::string, double>> out(k);
  for (std::size_t c = 0; c < k; ++c) {
    for (const auto& [genre, count] : counts[c]) {
      out[c][genre] = static_cast<double>(count) / static_cast<double>(totals[c]);
    }
  }
  return out;
}

namespace {

struct Mean {
  double sum = 0.0;
  std::size_t n = 0;
  void add(std::optional<double> v) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  std::optional<double> value() const {
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }
};

}  // namespace

std::vector<ClusterProfile> build_cluster_profiles(const Membership& membership, std::size_t k,
                                                   const std::map<GameId, StructuralProfile>& profiles,
                                                   std::span<const GameMeta> catalog,
                                                   const TagSelections& selections) {
  std::map<GameId, const GameMeta*> by_id;
  for (const auto& g : catalog) by_id[g.game_id] = &g;

  std::vector<std::string> missing;
  std::set<GameId> assigned;
  for (const auto& [game, cluster] : membership) {
    assigned.insert(game);
    if (!profiles.count(game)) missing.push_back(to_string(game) + " (profile)");
    if (!by_id.count(game)) missing.push_back(to_string(game) + " (catalog)");
    if (!selections.count(game)) missing.push_back(to_string(game) + " (tag selection)");
  }
  for (const auto& [game, _] : profiles) {
    if (!assigned.count(game)) missing.push_back(to_string(game) + " (cluster assignment)");
  }
  if (!missing.empty()) {
    std::string msg = "coverage mismatch; missing:";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }

  const auto tags = cluster_tag_frequencies(membership, k, selections);
  const auto genres = genre_distribution(membership, k, catalog);

  std::vector<std::vector<GameId>> members(k);
  for (const auto& [game, cluster] : membership) members[cluster].push_back(game);

  std::vector<ClusterProfile> out;
  for (std::size_t c = 0; c < k; ++c) {
    auto& ids = members[c];
    if (ids.empty()) continue;
    std::sort(ids.begin(), ids.end());
    Mean nodes, edges, dens, mean_deg, std_deg, clust, ncc, lcc, mod, assort, pl, deg_c, betw_c;
    for (auto id : ids) {
      const auto& p = profiles.at(id);
      nodes.add(static_cast<double>(p.n_nodes));
      edges.add(static_cast<double>(p.n_edges));
      dens.add(p.density);
      mean_deg.add(p.mean_degree);
      std_deg.add(p.std_degree);
      clust.add(p.avg_clustering);
      ncc.add(static_cast<double>(p.n_components));
      lcc.add(p.lcc_fraction);
      mod.add(p.modularity);
      assort.add(p.assortativity);
      pl.add(p.powerlaw.verdict == PowerLawVerdict::power_law ? 1.0 : 0.0);
      deg_c.add(p.degree_centralization);
      betw_c.add(p.betweenness_centralization);
    }
    ClusterProfile cp;
    cp.cluster = static_cast<std::uint32_t>(c);
    cp.size = ids.size();
    cp.avg_metrics = {nodes.value(),  edges.value(), dens.value(),   mean_deg.value(), std_deg.value(),
                      clust.value(),  ncc.value(),   lcc.value(),    mod.value(),      assort.value(),
                      pl.value(),     deg_c.value(), betw_c.value()};
    cp.tag_frequencies = tags[c];
    cp.genre_distribution = genres[c];
    cp.member_ids = ids;
    for (auto id : ids) cp.members.push_back(by_id.at(id)->name);
    out.push_back(std::move(cp));
  }
  return out;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_double(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

void to_json(json& j, const AveragedMetrics& m) {
  j = json{{"nodes", opt(m.nodes)},
           {"edges", opt(m.edges)},
           {"density", opt(m.density)},
           {"mean_degree", opt(m.mean_degree)},
           {"std_degree", opt(m.std_degree)},
           {"avg_clustering", opt(m.avg_clustering)},
           {"n_components", opt(m.n_components)},
           {"lcc_fraction", opt(m.lcc_fraction)},
           {"modularity", opt(m.modularity)},
           {"assortativity", opt(m.assortativity)},
           {"powerlaw_share", opt(m.powerlaw_share)},
           {"degree_centralization", opt(m.degree_centralization)},
           {"betweenness_centralization", opt(m.betweenness_centralization)}};
}

void from_json(const json& j, AveragedMetrics& m) {
  m.nodes = opt_double(j, "nodes");
  m.edges = opt_double(j, "edges");
  m.density = opt_double(j, "density");
  m.mean_degree = opt_double(j, "mean_degree");
  m.std_degree = opt_double(j, "std_degree");
  m.avg_clustering = opt_double(j, "avg_clustering");
  m.n_components = opt_double(j, "n_components");
  m.lcc_fraction = opt_double(j, "lcc_fraction");
  m.modularity = opt_double(j, "modularity");
  m.assortativity = opt_double(j, "assortativity");
  m.powerlaw_share = opt_double(j, "powerlaw_share");
  m.degree_centralization = opt_double(j, "degree_centralization");
  m.betweenness_centralization = opt_double(j, "betweenness_centralization");
}

void to_json(json& j, const ClusterProfile& p) {
  std::vector<std::uint64_t> ids;
  for (auto id : p.member_ids) ids.push_back(raw(id));
  j = json{{"cluster", p.cluster},
           {"size", p.size},
           {"avg_metrics", p.avg_metrics},
           {"tag_frequencies", p.tag_frequencies},
           {"genre_distribution", p.genre_distribution},
           {"member_ids", ids},
           {"members", p.members}};
}

void from_json(const json& j, ClusterProfile& p) {
  p.cluster = j.at("cluster").get<std::uint32_t>();
  p.size = j.at("size").get<std::size_t>();
  p.avg_metrics = j.at("avg_metrics").get<AveragedMetrics>();
  p.tag_frequencies = j.at("tag_frequencies").get<TagCounts>();
  p.genre_distribution = j.at("genre_distribution").get<std::map<std::string, double>>();
  p.member_ids.clear();
  for (const auto& id : j.at("member_ids")) p.member_ids.push_back(GameId{id.get<std::uint64_t>()});
  p.members = j.at("members").get<std::vector<std::string>>();
}

void write_cluster_profiles_csv(std::ostream& out, std::span<const ClusterProfile> clusters) {
  out << "cluster,games,nodes,density,mean_deg,std_deg,avg_clust,n_cc,lcc_fraction,modularity,assortativity,"
         "%pl,deg_centr,betw_centr\n";
  auto f = [](const std::optional<double>& v) { return v ? fmt::format("{:.9g}", *v) : std::string(); };
  for (const auto& c : clusters) {
    const auto& m = c.avg_metrics;
    out << c.cluster << ',' << c.size << ',' << f(m.nodes) << ',' << f(m.density) << ',' << f(m.mean_degree) << ','
        << f(m.std_degree) << ',' << f(m.avg_clustering) << ',' << f(m.n_components) << ',' << f(m.lcc_fraction)
        << ',' << f(m.modularity) << ',' << f(m.assortativity) << ','
        << f(m.powerlaw_share ? std::optional<double>(*m.powerlaw_share * 100.0) : std::nullopt) << ','
        << f(m.degree_centralization) << ',' << f(m.betweenness_centralization) << '\n';
  }
}

}  // namespace gamenet
