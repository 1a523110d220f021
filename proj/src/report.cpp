#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "gamenet/characterization.hpp"
#include "gamenet/pipeline.hpp"

namespace gamenet {

namespace fs = std::filesystem;
using nlohmann::json;

double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DataError("percentile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

SizeSummary summarize_sizes(std::span<const double> values) {
  if (values.empty()) throw DataError("size summary of an empty corpus");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  SizeSummary s;
  s.min = v.front();
  s.q25 = percentile(v, 0.25);
  s.q50 = percentile(v, 0.50);
  s.q75 = percentile(v, 0.75);
  s.max = v.back();
  const double n = static_cast<double>(v.size());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

std::string format_grouped(double v, bool force_decimals) {
  const bool integral = !force_decimals && v == std::round(v);
  std::string text = integral ? fmt::format("{:.0f}", v) : fmt::format("{:.2f}", v);
  const bool negative = !text.empty() && text[0] == '-';
  const auto dot = text.find('.');
  const std::size_t int_end = dot == std::string::npos ? text.size() : dot;
  const std::size_t int_begin = negative ? 1 : 0;
  std::string grouped;
  for (std::size_t i = int_begin; i < int_end; ++i) {
    if (i > int_begin && (int_end - i) % 3 == 0) grouped += ',';
    grouped += text[i];
  }
  return (negative ? "-" : "") + grouped + text.substr(int_end);
}

std::string format_size_row(std::string_view label, const SizeSummary& s) {
  return fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} |", label, format_grouped(s.min), format_grouped(s.q25),
                     format_grouped(s.q50), format_grouped(s.q75), format_grouped(s.max), format_grouped(s.mean, true),
                     format_grouped(s.std, true));
}

namespace {

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  return in;
}

json read_json(const fs::path& p) {
  auto in = open_in(p);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(fmt::format("{}: {}", p.string(), e.what()));
  }
}

std::string percent(double share) { return fmt::format("{:.0f}%", share * 100.0); }

// Top tags of a cluster by count, ties by tag.
std::vector<std::pair<std::string, std::size_t>> top_tags(const TagCounts& counts, std::size_t n) {
  std::vector<std::pair<std::string, std::size_t>> v(counts.begin(), counts.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (v.size() > n) v.resize(n);
  return v;
}

}  // namespace

void run_report(const std::map<std::string, fs::path>& inputs,
                const std::function<void(const std::string&, const std::string&)>& write) {
  auto profiles_in = open_in(inputs.at("metrics/profiles.jsonl"));
  const auto profiles = read_profiles_jsonl(profiles_in);
  auto sweep_in = open_in(inputs.at("cluster/sweep.csv"));
  const auto sweep_rows = read_sweep_csv(sweep_in);
  const auto clusters = read_json(inputs.at("characterize/cluster_profiles.json")).get<std::vector<ClusterProfile>>();
  const auto tag_freq = read_json(inputs.at("characterize/tag_frequencies.json"));

  // Corpus sizes.
  std::vector<double> nodes, edges;
  for (const auto& [id, p] : profiles) {
    nodes.push_back(static_cast<double>(p.n_nodes));
    edges.push_back(static_cast<double>(p.n_edges));
  }
  const auto node_stats = summarize_sizes(nodes);
  const auto edge_stats = summarize_sizes(edges);
  std::string table1_csv = "quantity,min,p25,p50,p75,max,mean,std\n";
  for (const auto& [label, s] : {std::pair{"nodes", node_stats}, std::pair{"edges", edge_stats}}) {
    table1_csv += fmt::format("{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", label, s.min, s.q25, s.q50, s.q75,
                              s.max, s.mean, s.std);
  }
  std::string table1_md = "|  | Min | 25% | 50% | 75% | Max | Mean | Std |\n|---|---:|---:|---:|---:|---:|---:|---:|\n";
  table1_md += format_size_row("#nodes", node_stats) + "\n";
  table1_md += format_size_row("#edges", edge_stats) + "\n";

  // Per-cluster tables.
  std::ostringstream table2;
  write_cluster_profiles_csv(table2, clusters);

  std::ostringstream fig1;
  write_sweep_csv(fig1, sweep_rows);

  std::string appendix;
  for (const auto& c : clusters) {
    appendix += fmt::format("Cluster #{} ({} games)\n", c.cluster, c.size);
    for (std::size_t i = 0; i < c.member_ids.size(); ++i) {
      appendix += fmt::format("  {}\t{}\n", raw(c.member_ids[i]), c.members[i]);
    }
    appendix += "\n";
  }

  std::string summary = "# Game friendship network clusters\n\n";
  summary += fmt::format("{} game graphs in {} clusters.\n\n", profiles.size(), clusters.size());
  summary += "## Graph sizes\n\n" + table1_md + "\n";
  summary += "## Clusters\n\n";
  summary += "| Cluster | Size | Game type (from user-defined tags) | Top genre | Mean nodes | %pl |\n";
  summary += "|---|---:|---|---|---:|---:|\n";
  for (const auto& c : clusters) {
    std::string tags;
    for (const auto& [tag, count] : top_tags(c.tag_frequencies, 3)) {
      if (!tags.empty()) tags += ", ";
      tags += c.size > 1 ? fmt::format("{} ({})", tag, percent(static_cast<double>(count) / static_cast<double>(c.size)))
                         : tag;
    }
    std::string genre = "-";
    if (!c.genre_distribution.empty()) {
      const auto best = std::max_element(c.genre_distribution.begin(), c.genre_distribution.end(),
                                         [](const auto& a, const auto& b) { return a.second < b.second; });
      genre = fmt::format("{} ({})", best->first, percent(best->second));
    }
    const auto& m = c.avg_metrics;
    summary += fmt::format("| #{} | {} | {} | {} | {} | {} |\n", c.cluster, c.size, tags.empty() ? "-" : tags, genre,
                           m.nodes ? format_grouped(*m.nodes, true) : "-",
                           m.powerlaw_share ? percent(*m.powerlaw_share) : "-");
  }
  summary += "\n## K sweep\n\n| k | inertia | silhouette |\n|---:|---:|---:|\n";
  for (const auto& r : sweep_rows) summary += fmt::format("| {} | {:.6g} | {:.4f} |\n", r.k, r.inertia, r.silhouette);

  write("table1_sizes.csv", table1_csv);
  write("table1_sizes.md", table1_md);
  write("table2_clusters.csv", table2.str());
  write("fig1_sweep.csv", fig1.str());
  write("fig2_tag_frequencies.json", tag_freq.dump(2) + "\n");
  write("appendix_membership.txt", appendix);
  write("summary.md", summary);
}

}  // namespace gamenet
