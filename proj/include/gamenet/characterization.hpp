#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gamenet/metrics.hpp"

namespace gamenet {

struct GameMeta {
  GameId game_id{};
  std::string name;
  std::vector<std::string> genres;  // verbatim
  std::vector<std::string> tags;    // normalized, unique
};

/// Lowercase, trim, collapse internal whitespace.
std::string normalize_tag(std::string_view tag);

/// Normalizes tags and drops case-insensitive duplicates (first kept).
GameMeta make_game_meta(GameId id, std::string name, std::vector<std::string> genres,
                        std::span<const std::string> raw_tags);

// JSON lines: {"game_id": .., "name": .., "genres": [..], "tags": [..]}
std::vector<GameMeta> read_catalog_jsonl(std::istream& in);
std::vector<GameMeta> read_catalog_jsonl(const std::filesystem::path& path);
void write_catalog_jsonl(std::ostream& out, std::span<const GameMeta> catalog);

struct TagScore {
  std::string tag;
  double tf = 0.0;
  double idf = 0.0;
  double score = 0.0;
};

using TagSelections = std::map<GameId, std::vector<TagScore>>;

/// tf = 1/|tags|, idf = ln(N/df). Each game's tags ranked by score, ties by
/// tag, and cut to top_k.
TagSelections tfidf_select(std::span<const GameMeta> catalog, std::size_t top_k = 10);

/// Game -> cluster index.
using Membership = std::vector<std::pair<GameId, std::uint32_t>>;
using TagCounts = std::map<std::string, std::size_t>;

/// Per cluster (0..k-1), how many member games selected each tag.
std::vector<TagCounts> cluster_tag_frequencies(const Membership& membership, std::size_t k,
                                               const TagSelections& selections);

/// Per cluster, share of genre occurrences among member games' genre lists.
std::vector<std::map<std::string, double>> genre_distribution(const Membership& membership, std::size_t k,
                                                              std::span<const GameMeta> catalog);

/// Field-wise means over member profiles; undefined values are skipped and a
/// field with no defined value stays undefined.
struct AveragedMetrics {
  std::optional<double> nodes;
  std::optional<double> edges;
  std::optional<double> density;
  std::optional<double> mean_degree;
  std::optional<double> std_degree;
  std::optional<double> avg_clustering;
  std::optional<double> n_components;
  std::optional<double> lcc_fraction;
  std::optional<double> modularity;
  std::optional<double> assortativity;
  std::optional<double> powerlaw_share;  // members with a power_law verdict
  std::optional<double> degree_centralization;
  std::optional<double> betweenness_centralization;
};

struct ClusterProfile {
  std::uint32_t cluster = 0;
  std::size_t size = 0;
  AveragedMetrics avg_metrics;
  TagCounts tag_frequencies;
  std::map<std::string, double> genre_distribution;
  std::vector<GameId> member_ids;  // ascending
  std::vector<std::string> members;  // names, same order
};

/// One profile per non-empty cluster. Throws DataError naming any game
/// missing from profiles, catalog or selections.
std::vector<ClusterProfile> build_cluster_profiles(const Membership& membership, std::size_t k,
                                                   const std::map<GameId, StructuralProfile>& profiles,
                                                   std::span<const GameMeta> catalog,
                                                   const TagSelections& selections);

void to_json(nlohmann::json& j, const AveragedMetrics& m);
void from_json(const nlohmann::json& j, AveragedMetrics& m);
void to_json(nlohmann::json& j, const ClusterProfile& p);
void from_json(const nlohmann::json& j, ClusterProfile& p);

/// Averaged metrics, one row per cluster; undefined values are empty fields.
void write_cluster_profiles_csv(std::ostream& out, std::span<const ClusterProfile> clusters);

}  // namespace gamenet
