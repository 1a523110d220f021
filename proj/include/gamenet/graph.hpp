#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gamenet/types.hpp"

namespace gamenet {

using Edge = std::pair<PlayerId, PlayerId>;

/// Immutable undirected simple graph.
///
/// Nodes are stored in ascending id order and addressed by a dense index;
/// adjacency is kept in CSR form with each neighbor list sorted. Two graphs
/// with the same node and edge sets therefore compare equal regardless of
/// the order in which they were built.
class Graph {
 public:
  using Index = std::uint32_t;

  Graph() = default;

  std::size_t node_count() const { return ids_.size(); }
  std::size_t edge_count() const { return adj_.size() / 2; }
  bool empty() const { return ids_.empty(); }

  std::span<const PlayerId> nodes() const { return ids_; }
  PlayerId id(Index i) const { return ids_[i]; }
  std::optional<Index> index_of(PlayerId id) const;
  bool contains(PlayerId id) const { return index_of(id).has_value(); }

  std::span<const Index> neighbors(Index i) const {
    return {adj_.data() + offsets_[i], adj_.data() + offsets_[i + 1]};
  }
  std::size_t degree(Index i) const { return offsets_[i + 1] - offsets_[i]; }
  std::vector<std::size_t> degrees() const;

  bool has_edge(PlayerId u, PlayerId v) const;

  /// Edges as (smaller id, larger id), sorted.
  std::vector<Edge> edges() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.ids_ == b.ids_ && a.offsets_ == b.offsets_ && a.adj_ == b.adj_;
  }

 private:
  friend class GraphBuilder;

  std::vector<PlayerId> ids_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Index> adj_;
};

/// Tallies of input records dropped while canonicalizing.
struct BuildReport {
  std::size_t self_loops = 0;
  std::size_t duplicate_edges = 0;
};

/// Accumulates nodes and edges, then canonicalizes into a Graph.
class GraphBuilder {
 public:
  void add_node(PlayerId id) { nodes_.push_back(id); }
  void add_edge(PlayerId u, PlayerId v);
  Graph build(BuildReport* report = nullptr);

 private:
  std::vector<PlayerId> nodes_;
  std::vector<Edge> edges_;
  std::size_t self_loops_ = 0;
};

Graph from_edge_list(std::span<const Edge> pairs, BuildReport* report = nullptr);

/// Graph over `nodes` plus every edge endpoint.
Graph make_graph(std::span<const PlayerId> nodes, std::span<const Edge> edges,
                 BuildReport* report = nullptr);

// Tab-separated edge-list files. '#' lines and blank lines are skipped.
Graph read_edge_list(std::istream& in, BuildReport* report = nullptr);
Graph read_edge_list(const std::filesystem::path& path, BuildReport* report = nullptr);
void write_edge_list(std::ostream& out, const Graph& g);

/// Nodes in keep ∩ nodes(g), with every edge of g between them. Ids absent
/// from g are ignored; isolated retained nodes stay.
Graph induced_subgraph(const Graph& g, std::span<const PlayerId> keep);

struct ComponentPartition {
  std::vector<std::vector<PlayerId>> components;  // ordered by smallest member id
  std::size_t lcc_index = 0;

  std::size_t count() const { return components.size(); }
};

/// Component label per node index; labels follow smallest-member order.
std::vector<std::uint32_t> component_labels(const Graph& g, std::size_t* count = nullptr);

ComponentPartition connected_components(const Graph& g);

/// Largest component as an induced subgraph; ties go to the component with
/// the smallest member id. Throws DataError on an empty graph.
Graph largest_connected_component(const Graph& g);

}  // namespace gamenet
