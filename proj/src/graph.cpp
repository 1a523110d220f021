#include "gamenet/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <string>

namespace gamenet {

std::optional<Graph::Index> Graph::index_of(PlayerId id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) return std::nullopt;
  return static_cast<Index>(it - ids_.begin());
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> out(node_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = degree(static_cast<Index>(i));
  return out;
}

bool Graph::has_edge(PlayerId u, PlayerId v) const {
  auto iu = index_of(u);
  auto iv = index_of(v);
  if (!iu || !iv) return false;
  auto nb = neighbors(*iu);
  return std::binary_search(nb.begin(), nb.end(), *iv);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (Index u = 0; u < node_count(); ++u) {
    for (Index v : neighbors(u)) {
      if (u < v) out.emplace_back(ids_[u], ids_[v]);
    }
  }
  return out;
}

void GraphBuilder::add_edge(PlayerId u, PlayerId v) {
  if (u == v) {
    ++self_loops_;
    nodes_.push_back(u);
    return;
  }
  if (v < u) std::swap(u, v);
  edges_.emplace_back(u, v);
}

Graph GraphBuilder::build(BuildReport* report) {
  for (const auto& [u, v] : edges_) {
    nodes_.push_back(u);
    nodes_.push_back(v);
  }
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());

  std::sort(edges_.begin(), edges_.end());
  const std::size_t before = edges_.size();
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  if (report) {
    report->self_loops = self_loops_;
    report->duplicate_edges = before - edges_.size();
  }

  Graph g;
  g.ids_ = std::move(nodes_);
  const std::size_t n = g.ids_.size();
  auto index = [&](PlayerId id) {
    return static_cast<Graph::Index>(std::lower_bound(g.ids_.begin(), g.ids_.end(), id) - g.ids_.begin());
  };

  std::vector<std::size_t> deg(n, 0);
  std::vector<std::pair<Graph::Index, Graph::Index>> idx_edges;
  idx_edges.reserve(edges_.size());
  for (const auto& [u, v] : edges_) {
    const auto iu = index(u);
    const auto iv = index(v);
    idx_edges.emplace_back(iu, iv);
    ++deg[iu];
    ++deg[iv];
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + deg[i];
  g.adj_.resize(g.offsets_[n]);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& [iu, iv] : idx_edges) {
    g.adj_[cursor[iu]++] = iv;
    g.adj_[cursor[iv]++] = iu;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(g.adj_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]),
              g.adj_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]));
  }

  nodes_.clear();
  edges_.clear();
  self_loops_ = 0;
  return g;
}

Graph from_edge_list(std::span<const Edge> pairs, BuildReport* report) {
  return make_graph({}, pairs, report);
}

Graph make_graph(std::span<const PlayerId> nodes, std::span<const Edge> edges, BuildReport* report) {
  GraphBuilder b;
  for (PlayerId id : nodes) b.add_node(id);
  for (const auto& [u, v] : edges) b.add_edge(u, v);
  return b.build(report);
}

namespace {

std::uint64_t parse_id(std::string_view field, std::size_t line_no) {
  std::uint64_t value = 0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc{} || ptr != last) {
    throw ParseError("invalid node id '" + std::string(field) + "'", line_no);
  }
  return value;
}

}  // namespace

Graph read_edge_list(std::istream& in, BuildReport* report) {
  GraphBuilder b;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected two tab-separated ids", line_no);
    const std::string_view sv(line);
    const auto u = parse_id(sv.substr(0, tab), line_no);
    const auto v = parse_id(sv.substr(tab + 1), line_no);
    b.add_edge(PlayerId{u}, PlayerId{v});
  }
  return b.build(report);
}

Graph read_edge_list(const std::filesystem::path& path, BuildReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list " + path.string());
  return read_edge_list(in, report);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  for (const auto& [u, v] : g.edges()) out << raw(u) << '\t' << raw(v) << '\n';
}

Graph induced_subgraph(const Graph& g, std::span<const PlayerId> keep) {
  std::vector<char> kept(g.node_count(), 0);
  for (PlayerId id : keep) {
    if (auto i = g.index_of(id)) kept[*i] = 1;
  }
  GraphBuilder b;
  for (Graph::Index u = 0; u < g.node_count(); ++u) {
    if (!kept[u]) continue;
    b.add_node(g.id(u));
    for (Graph::Index v : g.neighbors(u)) {
      if (u < v && kept[v]) b.add_edge(g.id(u), g.id(v));
    }
  }
  return b.build();
}

std::vector<std::uint32_t> component_labels(const Graph& g, std::size_t* count) {
  constexpr auto kUnset = ~std::uint32_t{0};
  std::vector<std::uint32_t> label(g.node_count(), kUnset);
  std::uint32_t next = 0;
  std::queue<Graph::Index> frontier;
  // Scanning in index order visits components by smallest member id.
  for (Graph::Index s = 0; s < g.node_count(); ++s) {
    if (label[s] != kUnset) continue;
    label[s] = next;
    frontier.push(s);
    while (!frontier.empty()) {
      const auto u = frontier.front();
      frontier.pop();
      for (auto v : g.neighbors(u)) {
        if (label[v] == kUnset) {
          label[v] = next;
          frontier.push(v);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

ComponentPartition connected_components(const Graph& g) {
  std::size_t count = 0;
  const auto label = component_labels(g, &count);
  ComponentPartition part;
  part.components.resize(count);
  for (Graph::Index i = 0; i < g.node_count(); ++i) part.components[label[i]].push_back(g.id(i));
  for (std::size_t c = 0; c < count; ++c) {
    if (part.components[c].size() > part.components[part.lcc_index].size()) part.lcc_index = c;
  }
  return part;
}

Graph largest_connected_component(const Graph& g) {
  if (g.empty()) throw DataError("largest connected component of an empty graph");
  const auto part = connected_components(g);
  return induced_subgraph(g, part.components[part.lcc_index]);
}

}  // namespace gamenet
