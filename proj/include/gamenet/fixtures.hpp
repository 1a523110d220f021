#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gamenet/graph.hpp"
#include "gamenet/pipeline.hpp"
#include "gamenet/rng.hpp"

namespace gamenet {

// Synthetic generators. Node ids run from first_id upward.

Graph erdos_renyi_graph(std::size_t n, double p, Rng& rng, std::uint64_t first_id = 1);

/// Barabasi-Albert growth from an m-clique; each new node links to m distinct
/// existing nodes with probability proportional to degree.
Graph preferential_attachment_graph(std::size_t n, std::size_t m, Rng& rng, std::uint64_t first_id = 1);

Graph disjoint_cliques_graph(std::size_t cliques, std::size_t size, std::uint64_t first_id = 1);

enum class Family : std::uint32_t { dense_random = 0, preferential_attachment = 1, disjoint_cliques = 2 };

struct FamilyCorpus {
  std::vector<GameGraph> graphs;
  std::vector<std::uint32_t> family;  // per graph
};

/// per_family graphs of each family with 40-80 nodes, each on its own block
/// of player ids, shuffled. Families: G(n, p) with p in [0.25, 0.35];
/// preferential attachment with m = 2; disjoint cliques of mixed size 3-6.
FamilyCorpus family_corpus(std::size_t per_family, std::uint64_t seed);

/// Corpus as pipeline inputs: edges.tsv (union of all graphs), activity.csv
/// (each block plays its own game), catalog.jsonl, families.csv and
/// config.json.
void write_family_fixture(const std::filesystem::path& dir, std::size_t per_family, std::uint64_t seed);

/// Crawlable fixture with 2,000 players and 20 games: steam/friends/*.json,
/// seeds.txt, activity.csv, catalog.jsonl and config.json.
void write_bundled_fixture(const std::filesystem::path& dir, std::uint64_t seed);

}  // namespace gamenet
