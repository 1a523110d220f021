#include "gamenet/clustering.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "gamenet/rng.hpp"

namespace gamenet {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

double inertia(const PointMatrix& points, std::span<const std::uint32_t> labels, std::span<const double> centers) {
  const std::size_t d = points.dimensions;
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) total += squared_distance(points.row(i), centers.subspan(labels[i] * d, d));
  return total;
}

namespace {

std::size_t distinct_rows(const PointMatrix& points) {
  std::vector<std::vector<double>> rows;
  rows.reserve(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) rows.emplace_back(points.row(i).begin(), points.row(i).end());
  std::sort(rows.begin(), rows.end());
  return static_cast<std::size_t>(std::unique(rows.begin(), rows.end()) - rows.begin());
}

std::uint32_t nearest(std::span<const double> p, std::span<const double> centers, std::size_t k, double* dist) {
  const std::size_t d = p.size();
  std::uint32_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double dd = squared_distance(p, centers.subspan(c * d, d));
    if (dd < best_d) {
      best_d = dd;
      best = static_cast<std::uint32_t>(c);
    }
  }
  if (dist) *dist = best_d;
  return best;
}

std::vector<double> plus_plus_seeds(const PointMatrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  const std::size_t d = points.dimensions;
  std::vector<double> centers;
  centers.reserve(k * d);
  auto add = [&](std::size_t i) { centers.insert(centers.end(), points.row(i).begin(), points.row(i).end()); };
  add(rng.below(n));
  std::vector<double> closest(n);
  for (std::size_t i = 0; i < n; ++i) closest[i] = squared_distance(points.row(i), {centers.data(), d});
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : closest) total += v;
    std::size_t pick = n - 1;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        r -= closest[i];
        if (r < 0.0) {
          pick = i;
          break;
        }
      }
      // Rounding may leave r >= 0; fall back to the last point with mass.
      while (closest[pick] == 0.0 && pick > 0) --pick;
    } else {
      pick = rng.below(n);
    }
    add(pick);
    for (std::size_t i = 0; i < n; ++i) {
      closest[i] = std::min(closest[i], squared_distance(points.row(i), {centers.data() + c * d, d}));
    }
  }
  return centers;
}

ClusterAssignment lloyd(const PointMatrix& points, std::size_t k, const ClusteringConfig& config, Rng& rng) {
  const std::size_t n = points.rows();
  const std::size_t d = points.dimensions;
  ClusterAssignment a;
  a.k = k;
  a.dimensions = d;
  a.centers = plus_plus_seeds(points, k, rng);
  a.labels.assign(n, 0);
  std::vector<double> dist(n);
  std::vector<std::size_t> sizes(k);
  double previous = std::numeric_limits<double>::infinity();

  for (std::size_t iter = 0; iter < config.max_iter; ++iter) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      a.labels[i] = nearest(points.row(i), a.centers, k, &dist[i]);
      total += dist[i];
    }

    std::fill(sizes.begin(), sizes.end(), 0);
    std::vector<double> sums(k * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      ++sizes[a.labels[i]];
      const auto p = points.row(i);
      for (std::size_t j = 0; j < d; ++j) sums[a.labels[i] * d + j] += p[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) {
        // Re-seed an empty cluster at the point farthest from its center
        // among clusters that can spare one.
        std::size_t far = n;
        for (std::size_t i = 0; i < n; ++i) {
          if (sizes[a.labels[i]] > 1 && (far == n || dist[i] > dist[far])) far = i;
        }
        if (far == n) continue;
        const auto from = a.labels[far];
        const auto p = points.row(far);
        for (std::size_t j = 0; j < d; ++j) {
          sums[from * d + j] -= p[j];
          sums[c * d + j] = p[j];
        }
        --sizes[from];
        sizes[c] = 1;
        a.labels[far] = static_cast<std::uint32_t>(c);
        dist[far] = 0.0;
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;
      for (std::size_t j = 0; j < d; ++j) a.centers[c * d + j] = sums[c * d + j] / static_cast<double>(sizes[c]);
    }

    const bool converged = std::isfinite(previous) && (previous - total) <= config.tol * std::max(previous, 1e-300);
    previous = total;
    if (converged) break;
  }

  for (std::size_t i = 0; i < n; ++i) a.labels[i] = nearest(points.row(i), a.centers, k, nullptr);
  a.inertia = inertia(points, a.labels, a.centers);
  return a;
}

}  // namespace

ClusterAssignment kmeans(const PointMatrix& points, const ClusteringConfig& config) {
  const std::size_t k = config.k;
  if (k < 1) throw UsageError("kmeans: k must be >= 1");
  if (config.n_init < 1) throw UsageError("kmeans: n_init must be >= 1");
  if (distinct_rows(points) < k) {
    throw DataError(fmt::format("kmeans: {} clusters requested but only {} distinct points", k, distinct_rows(points)));
  }
  ClusterAssignment best;
  for (std::size_t run = 0; run < config.n_init; ++run) {
    Rng rng(derive_seed(config.seed, k, run));
    auto a = lloyd(points, k, config, rng);
    if (run == 0 || a.inertia < best.inertia) best = std::move(a);
  }
  return best;
}

Silhouette silhouette(const PointMatrix& points, std::span<const std::uint32_t> labels) {
  const std::size_t n = points.rows();
  const std::size_t k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  if (k < 2) throw DataError("silhouette: needs at least two clusters");
  std::vector<std::size_t> sizes(k, 0);
  for (auto l : labels) ++sizes[l];
  if (std::find(sizes.begin(), sizes.end(), 0) != sizes.end()) throw DataError("silhouette: empty cluster");

  Silhouette s;
  s.per_point.assign(n, 0.0);
  std::vector<double> sum(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sum[labels[j]] += std::sqrt(squared_distance(points.row(i), points.row(j)));
    }
    const auto own = labels[i];
    if (sizes[own] == 1) continue;
    const double a = sum[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own) b = std::min(b, sum[c] / static_cast<double>(sizes[c]));
    }
    const double m = std::max(a, b);
    s.per_point[i] = m > 0.0 ? (b - a) / m : 0.0;
  }
  double total = 0.0;
  for (double v : s.per_point) total += v;
  s.mean = n ? total / static_cast<double>(n) : 0.0;
  return s;
}

std::vector<SweepRow> sweep(const PointMatrix& points, const ClusteringConfig& config) {
  if (config.k_min < 2 || config.k_min > config.k_max) throw UsageError("sweep: need 2 <= k_min <= k_max");
  if (config.k_max + 1 > points.rows()) throw UsageError("sweep: k_max must be at most the number of samples - 1");
  std::vector<SweepRow> rows;
  for (std::size_t k = config.k_min; k <= config.k_max; ++k) {
    ClusteringConfig c = config;
    c.k = k;
    c.seed = derive_seed(config.seed, k);
    const auto a = kmeans(points, c);
    SweepRow row;
    row.k = k;
    row.inertia = a.inertia;
    row.silhouette = silhouette(points, a.labels).mean;
    row.flagged = !rows.empty() && row.inertia > rows.back().inertia * (1.0 + 1e-12);
    rows.push_back(row);
  }
  return rows;
}

double adjusted_rand_index(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  if (a.size() != b.size()) throw DataError("adjusted_rand_index: label vectors differ in length");
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> table;
  std::map<std::uint32_t, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1;
    rows[a[i]] += 1;
    cols[b[i]] += 1;
  }
  auto choose2 = [](double x) { return x * (x - 1) / 2; };
  double index = 0, sum_a = 0, sum_b = 0;
  for (const auto& [_, v] : table) index += choose2(v);
  for (const auto& [_, v] : rows) sum_a += choose2(v);
  for (const auto& [_, v] : cols) sum_b += choose2(v);
  const double total = choose2(static_cast<double>(a.size()));
  const double expected = total > 0 ? sum_a * sum_b / total : 0.0;
  const double max_index = (sum_a + sum_b) / 2;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

void write_assignment_csv(std::ostream& out, std::span<const GameId> ids, std::span<const std::uint32_t> labels) {
  out << "graph_id,cluster\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out << raw(ids[i]) << ',' << labels[i] << '\n';
}

std::vector<std::pair<GameId, std::uint32_t>> read_assignment_csv(std::istream& in) {
  std::vector<std::pair<GameId, std::uint32_t>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "graph_id,cluster") throw ParseError("expected header graph_id,cluster", 1);
      continue;
    }
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::uint64_t id = 0;
    std::uint32_t c = 0;
    char comma = 0;
    if (!(ss >> id >> comma >> c) || comma != ',') throw ParseError("invalid assignment row", line_no);
    out.emplace_back(GameId{id}, c);
  }
  return out;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "k,inertia,silhouette\n";
  for (const auto& r : rows) out << r.k << ',' << fmt::format("{:.9g}", r.inertia) << ',' << fmt::format("{:.9g}", r.silhouette) << '\n';
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::vector<SweepRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "k,inertia,silhouette") throw ParseError("expected header k,inertia,silhouette", 1);
      continue;
    }
    if (line.empty()) continue;
    std::istringstream ss(line);
    SweepRow r;
    char c1 = 0, c2 = 0;
    if (!(ss >> r.k >> c1 >> r.inertia >> c2 >> r.silhouette) || c1 != ',' || c2 != ',') {
      throw ParseError("invalid sweep row", line_no);
    }
    r.flagged = !rows.empty() && r.inertia > rows.back().inertia * (1.0 + 1e-12);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace gamenet
