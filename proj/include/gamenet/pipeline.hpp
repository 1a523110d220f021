#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gamenet/clustering.hpp"
#include "gamenet/date.hpp"
#include "gamenet/embedding.hpp"
#include "gamenet/metrics.hpp"
#include "gamenet/steam_client.hpp"

namespace gamenet {

std::string_view version();

struct PipelineConfig {
  ProviderConfig provider;  // used when the graph or activity is fetched
  std::size_t max_in_flight = 1;
  std::optional<std::filesystem::path> edge_list;  // prebuilt graph; skips the crawl
  std::optional<std::filesystem::path> seeds;      // one player id per line
  std::optional<std::filesystem::path> activity;   // else derived from playtime snapshots
  std::filesystem::path catalog;
  ObservationWindow window{Date{}, Date{}};
  std::size_t top_n = 200;
  std::size_t min_nodes = 250;
  PowerLawOptions powerlaw;
  EmbeddingConfig embedding;
  ClusteringConfig clustering;
  std::size_t tags_top_k = 10;
  std::filesystem::path out = "out";
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  /// Relative paths resolve against `base`. Unknown keys are rejected.
  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base);
  static PipelineConfig load(const std::filesystem::path& file);
  void validate() const;
};

enum class Stage { sample, subgraphs, metrics, embed, cluster, characterize, report };

std::span<const Stage> all_stages();
std::string to_string(Stage s);
Stage parse_stage(std::string_view name);

struct Manifest {
  std::string stage;
  std::string version;
  std::string config_hash;
  std::map<std::string, std::string> inputs;   // name -> sha256
  std::map<std::string, std::string> outputs;  // path relative to the stage dir -> sha256
};

void to_json(nlohmann::json& j, const Manifest& m);
void from_json(const nlohmann::json& j, Manifest& m);

struct StageOutcome {
  Stage stage;
  bool skipped = false;  // outputs already matched config and inputs
};

/// Runs one stage after validating its upstream artifacts by hash. With
/// force == false an up-to-date stage is left alone.
StageOutcome run_stage(Stage stage, const PipelineConfig& cfg, bool force = false);
std::vector<StageOutcome> run_pipeline(const PipelineConfig& cfg, bool force = false);

/// One game's friendship graph. JSON lines:
/// {"game_id": .., "nodes": [..], "edges": [[u, v], ..]}
struct GameGraph {
  GameId game{};
  Graph graph;
};

void write_graphs_jsonl(std::ostream& out, std::span<const GameGraph> graphs);
std::vector<GameGraph> read_graphs_jsonl(std::istream& in);

/// `{"graph_id": .., "profile": {..}}` per line.
std::vector<std::pair<GameId, StructuralProfile>> read_profiles_jsonl(std::istream& in);

// --- report formatting -----------------------------------------------------

struct SizeSummary {
  double min = 0, q25 = 0, q50 = 0, q75 = 0, max = 0, mean = 0, std = 0;
};

/// Linear-interpolation quartiles; sample standard deviation.
SizeSummary summarize_sizes(std::span<const double> values);

/// Linear interpolation between order statistics of sorted data.
double percentile(std::span<const double> sorted, double q);

/// "17,273", "879.79": thousands separators, two decimals unless integral.
std::string format_grouped(double v, bool force_decimals = false);

/// One markdown row in the corpus-size table layout.
std::string format_size_row(std::string_view label, const SizeSummary& s);

}  // namespace gamenet
