#include "gamenet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <queue>

namespace gamenet {

std::optional<double> density(const Graph& g) {
  const auto n = static_cast<double>(g.node_count());
  if (g.node_count() < 2) return std::nullopt;
  return static_cast<double>(g.edge_count()) / (n * (n - 1.0) / 2.0);
}

DegreeStats degree_stats(const Graph& g) {
  if (g.empty()) throw DataError("degree_stats: empty graph");
  const auto n = static_cast<double>(g.node_count());
  DegreeStats s;
  s.mean = 2.0 * static_cast<double>(g.edge_count()) / n;
  double ss = 0.0;
  for (Graph::Index i = 0; i < g.node_count(); ++i) {
    const double d = static_cast<double>(g.degree(i)) - s.mean;
    ss += d * d;
  }
  s.std = std::sqrt(ss / n);
  return s;
}

std::optional<double> assortativity(const Graph& g) {
  if (g.edge_count() == 0) return std::nullopt;
  std::size_t lo = ~std::size_t{0};
  std::size_t hi = 0;
  for (Graph::Index i = 0; i < g.node_count(); ++i) {
    if (g.degree(i) == 0) continue;
    lo = std::min(lo, g.degree(i));
    hi = std::max(hi, g.degree(i));
  }
  if (lo == hi) return std::nullopt;

  // Sums over undirected edges; each contributes both orientations.
  long double sum_jk = 0, sum_half = 0, sum_half_sq = 0;
  for (Graph::Index u = 0; u < g.node_count(); ++u) {
    const long double du = static_cast<long double>(g.degree(u));
    for (auto v : g.neighbors(u)) {
      if (v < u) continue;
      const long double dv = static_cast<long double>(g.degree(v));
      sum_jk += du * dv;
      sum_half += (du + dv) / 2;
      sum_half_sq += (du * du + dv * dv) / 2;
    }
  }
  const long double m = static_cast<long double>(g.edge_count());
  const long double mean = sum_half / m;
  const long double num = sum_jk / m - mean * mean;
  const long double den = sum_half_sq / m - mean * mean;
  return static_cast<double>(num / den);
}

std::optional<double> degree_centralization(const Graph& g) {
  const std::size_t n = g.node_count();
  if (n < 3) return std::nullopt;
  const auto deg = g.degrees();
  const auto dmax = *std::max_element(deg.begin(), deg.end());
  std::size_t sum = 0;
  for (auto d : deg) sum += dmax - d;
  return static_cast<double>(sum) / static_cast<double>((n - 1) * (n - 2));
}

std::vector<double> betweenness(const Graph& g) {
  const std::size_t n = g.node_count();
  std::vector<double> bc(n, 0.0);
  if (n < 3) return bc;

  // Single-source dependency accumulation from every source.
  std::vector<std::vector<Graph::Index>> pred(n);
  std::vector<double> sigma(n), delta(n);
  std::vector<std::int64_t> dist(n);
  std::vector<Graph::Index> order;
  order.reserve(n);
  std::queue<Graph::Index> q;
  for (Graph::Index s = 0; s < n; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      pred[i].clear();
      sigma[i] = 0.0;
      delta[i] = 0.0;
      dist[i] = -1;
    }
    order.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const auto v = q.front();
      q.pop();
      order.push_back(v);
      for (auto w : g.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          pred[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto w = *it;
      for (auto v : pred[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) bc[w] += delta[w];
    }
  }
  // Each unordered pair was counted from both ends.
  const double pairs = static_cast<double>(n - 1) * static_cast<double>(n - 2);
  for (auto& b : bc) b /= pairs;
  return bc;
}

std::optional<double> betweenness_centralization(const Graph& g) {
  const std::size_t n = g.node_count();
  if (n < 3) return std::nullopt;
  const auto bc = betweenness(g);
  const double bmax = *std::max_element(bc.begin(), bc.end());
  double sum = 0.0;
  for (double b : bc) sum += bmax - b;
  return sum / static_cast<double>(n - 1);
}

double avg_clustering(const Graph& g) {
  const std::size_t n = g.node_count();
  if (n == 0) throw DataError("avg_clustering: empty graph");
  std::vector<char> mark(n, 0);
  double total = 0.0;
  for (Graph::Index u = 0; u < n; ++u) {
    const auto nb = g.neighbors(u);
    const std::size_t d = nb.size();
    if (d < 2) continue;
    for (auto v : nb) mark[v] = 1;
    std::size_t links = 0;
    for (auto v : nb) {
      for (auto w : g.neighbors(v)) links += mark[w];
    }
    for (auto v : nb) mark[v] = 0;
    // Every neighbor-neighbor link was seen twice.
    total += static_cast<double>(links) / static_cast<double>(d * (d - 1));
  }
  return total / static_cast<double>(n);
}

StructuralProfile profile(const Graph& g, const ProfileOptions& options) {
  if (g.empty()) throw DataError("profile: empty graph");
  StructuralProfile p;
  p.n_nodes = g.node_count();
  p.n_edges = g.edge_count();
  p.density = density(g);
  const auto ds = degree_stats(g);
  p.mean_degree = ds.mean;
  p.std_degree = ds.std;
  p.assortativity = assortativity(g);
  p.degree_centralization = degree_centralization(g);
  p.betweenness_centralization = betweenness_centralization(g);
  p.avg_clustering = avg_clustering(g);
  const auto parts = connected_components(g);
  p.n_components = parts.count();
  p.lcc_fraction = static_cast<double>(parts.components[parts.lcc_index].size()) / static_cast<double>(p.n_nodes);
  if (auto c = modularity_score(g, options.seed)) p.modularity = c->q;
  p.powerlaw = powerlaw_fit(g.degrees(), options.powerlaw);
  return p;
}

// --- JSON ----------------------------------------------------------------

namespace {

using nlohmann::json;

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_double(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

std::string to_string(PowerLawVerdict v) {
  switch (v) {
    case PowerLawVerdict::power_law:
      return "power_law";
    case PowerLawVerdict::not_power_law:
      return "not_power_law";
    case PowerLawVerdict::inconclusive:
      break;
  }
  return "inconclusive";
}

PowerLawVerdict parse_verdict(const std::string& s) {
  if (s == "power_law") return PowerLawVerdict::power_law;
  if (s == "not_power_law") return PowerLawVerdict::not_power_law;
  if (s == "inconclusive") return PowerLawVerdict::inconclusive;
  throw DataError("unknown power-law verdict '" + s + "'");
}

void to_json(json& j, const PowerLawFit& fit) {
  j = json{{"alpha", opt(fit.alpha)},     {"xmin", fit.xmin},
           {"ks_stat", opt(fit.ks_stat)}, {"p_value", opt(fit.p_value)},
           {"verdict", to_string(fit.verdict)}};
}

void from_json(const json& j, PowerLawFit& fit) {
  fit.alpha = opt_double(j, "alpha");
  fit.xmin = j.at("xmin").get<std::uint64_t>();
  fit.ks_stat = opt_double(j, "ks_stat");
  fit.p_value = opt_double(j, "p_value");
  fit.verdict = parse_verdict(j.at("verdict").get<std::string>());
}

void to_json(json& j, const StructuralProfile& p) {
  j = json{{"n_nodes", p.n_nodes},
           {"n_edges", p.n_edges},
           {"density", opt(p.density)},
           {"mean_degree", p.mean_degree},
           {"std_degree", p.std_degree},
           {"assortativity", opt(p.assortativity)},
           {"degree_centralization", opt(p.degree_centralization)},
           {"betweenness_centralization", opt(p.betweenness_centralization)},
           {"avg_clustering", p.avg_clustering},
           {"n_components", p.n_components},
           {"lcc_fraction", p.lcc_fraction},
           {"modularity", opt(p.modularity)},
           {"powerlaw", p.powerlaw}};
}

void from_json(const json& j, StructuralProfile& p) {
  p.n_nodes = j.at("n_nodes").get<std::size_t>();
  p.n_edges = j.at("n_edges").get<std::size_t>();
  p.density = opt_double(j, "density");
  p.mean_degree = j.at("mean_degree").get<double>();
  p.std_degree = j.at("std_degree").get<double>();
  p.assortativity = opt_double(j, "assortativity");
  p.degree_centralization = opt_double(j, "degree_centralization");
  p.betweenness_centralization = opt_double(j, "betweenness_centralization");
  p.avg_clustering = j.at("avg_clustering").get<double>();
  p.n_components = j.at("n_components").get<std::size_t>();
  p.lcc_fraction = j.at("lcc_fraction").get<double>();
  p.modularity = opt_double(j, "modularity");
  p.powerlaw = j.at("powerlaw").get<PowerLawFit>();
}

}  // namespace gamenet
