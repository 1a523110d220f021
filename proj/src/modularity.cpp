#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "gamenet/metrics.hpp"
#include "gamenet/rng.hpp"

namespace gamenet {

double modularity(const Graph& g, std::span<const std::uint32_t> label) {
  if (label.size() != g.node_count()) throw DataError("modularity: label count does not match node count");
  const std::size_t m = g.edge_count();
  if (m == 0) return 0.0;
  const std::size_t k = label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1;
  std::vector<std::size_t> intra(k, 0), degree_sum(k, 0);
  for (Graph::Index u = 0; u < g.node_count(); ++u) {
    degree_sum[label[u]] += g.degree(u);
    for (auto v : g.neighbors(u)) {
      if (u < v && label[u] == label[v]) ++intra[label[u]];
    }
  }
  const double md = static_cast<double>(m);
  double q = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double share = static_cast<double>(degree_sum[c]) / (2.0 * md);
    q += static_cast<double>(intra[c]) / md - share * share;
  }
  return q;
}

namespace {

// Weighted graph at one aggregation level. Self-loop weight holds the
// internal edge weight of an aggregated community.
struct Level {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;
  std::vector<double> self;
  std::vector<double> strength;

  std::size_t size() const { return adj.size(); }
};

Level from_graph(const Graph& g) {
  Level lv;
  const std::size_t n = g.node_count();
  lv.adj.resize(n);
  lv.self.assign(n, 0.0);
  lv.strength.assign(n, 0.0);
  for (Graph::Index u = 0; u < n; ++u) {
    for (auto v : g.neighbors(u)) lv.adj[u].emplace_back(v, 1.0);
    lv.strength[u] = static_cast<double>(g.degree(u));
  }
  return lv;
}

// One round of local moving. Returns the community of every node, densely
// numbered in order of first appearance, and whether any node moved.
bool local_moving(const Level& lv, double two_m, Rng& rng, std::vector<std::uint32_t>& community) {
  const std::size_t n = lv.size();
  community.resize(n);
  std::iota(community.begin(), community.end(), 0u);
  std::vector<double> tot(lv.strength);

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  rng.shuffle(order.begin(), order.end());

  std::vector<double> link(n, 0.0);
  std::vector<std::uint32_t> touched;
  bool moved_any = false;
  constexpr double kEps = 1e-12;
  constexpr int kMaxPasses = 1000;

  for (int pass = 0; pass < kMaxPasses; ++pass) {
    bool moved = false;
    for (auto i : order) {
      const auto own = community[i];
      const double ki = lv.strength[i];
      touched.clear();
      touched.push_back(own);
      for (const auto& [j, w] : lv.adj[i]) {
        const auto c = community[j];
        if (link[c] == 0.0 && c != own) touched.push_back(c);
        link[c] += w;
      }
      tot[own] -= ki;
      std::uint32_t best = own;
      double best_gain = link[own] - tot[own] * ki / two_m;
      for (auto c : touched) {
        const double gain = link[c] - tot[c] * ki / two_m;
        if (gain > best_gain + kEps) {
          best = c;
          best_gain = gain;
        }
      }
      tot[best] += ki;
      for (auto c : touched) link[c] = 0.0;
      if (best != own) {
        community[i] = best;
        moved = true;
        moved_any = true;
      }
    }
    if (!moved) break;
  }

  std::vector<std::uint32_t> remap(n, ~std::uint32_t{0});
  std::uint32_t next = 0;
  for (auto& c : community) {
    if (remap[c] == ~std::uint32_t{0}) remap[c] = next++;
    c = remap[c];
  }
  return moved_any;
}

Level aggregate(const Level& lv, const std::vector<std::uint32_t>& community, std::size_t count) {
  Level out;
  out.adj.resize(count);
  out.self.assign(count, 0.0);
  out.strength.assign(count, 0.0);
  std::vector<std::unordered_map<std::uint32_t, double>> acc(count);
  for (std::size_t u = 0; u < lv.size(); ++u) {
    const auto cu = community[u];
    out.self[cu] += lv.self[u];
    out.strength[cu] += lv.strength[u];
    for (const auto& [v, w] : lv.adj[u]) {
      const auto cv = community[v];
      if (cu == cv) {
        // Both orientations are visited, so each internal edge adds w/2 twice.
        out.self[cu] += w / 2.0;
      } else {
        acc[cu][cv] += w;
      }
    }
  }
  for (std::size_t c = 0; c < count; ++c) {
    out.adj[c].assign(acc[c].begin(), acc[c].end());
    std::sort(out.adj[c].begin(), out.adj[c].end());
  }
  return out;
}

}  // namespace

std::optional<Communities> modularity_score(const Graph& g, std::uint64_t seed) {
  if (g.edge_count() == 0) return std::nullopt;
  const double two_m = 2.0 * static_cast<double>(g.edge_count());

  Level lv = from_graph(g);
  std::vector<std::uint32_t> label(g.node_count());
  std::iota(label.begin(), label.end(), 0u);

  for (std::uint64_t depth = 0;; ++depth) {
    Rng rng(derive_seed(seed, depth));
    std::vector<std::uint32_t> community;
    const bool moved = local_moving(lv, two_m, rng, community);
    if (!moved) break;
    const std::size_t count = *std::max_element(community.begin(), community.end()) + 1;
    for (auto& l : label) l = community[l];
    if (count == lv.size()) break;
    lv = aggregate(lv, community, count);
  }

  // Dense relabeling in node-index order.
  std::vector<std::uint32_t> remap(g.node_count(), ~std::uint32_t{0});
  std::uint32_t next = 0;
  for (auto& l : label) {
    if (remap[l] == ~std::uint32_t{0}) remap[l] = next++;
    l = remap[l];
  }
  Communities out;
  out.count = next;
  out.q = modularity(g, label);
  out.label = std::move(label);
  return out;
}

}  // namespace gamenet
