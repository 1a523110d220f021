#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "gamenet/embedding.hpp"

namespace gamenet {

/// Read-only view of n points in d dimensions, row-major.
struct PointMatrix {
  std::span<const double> values;
  std::size_t dimensions = 0;

  PointMatrix(std::span<const double> v, std::size_t d) : values(v), dimensions(d) {}
  explicit PointMatrix(const EmbeddingMatrix& m) : values(m.values), dimensions(m.dimensions) {}

  std::size_t rows() const { return dimensions ? values.size() / dimensions : 0; }
  std::span<const double> row(std::size_t i) const { return values.subspan(i * dimensions, dimensions); }
};

struct ClusteringConfig {
  std::size_t k = 6;
  std::size_t k_min = 2;
  std::size_t k_max = 10;
  std::size_t n_init = 10;
  std::size_t max_iter = 300;
  double tol = 1e-6;  // relative inertia change that ends a run
  std::uint64_t seed = 0;
};

struct ClusterAssignment {
  std::vector<std::uint32_t> labels;
  std::size_t k = 0;
  std::size_t dimensions = 0;
  std::vector<double> centers;  // k x dimensions
  double inertia = 0.0;

  std::span<const double> center(std::size_t c) const { return {centers.data() + c * dimensions, dimensions}; }
};

double squared_distance(std::span<const double> a, std::span<const double> b);

/// Sum of squared distances from each point to its labelled center.
double inertia(const PointMatrix& points, std::span<const std::uint32_t> labels, std::span<const double> centers);

/// Best of n_init Lloyd runs from k-means++ seeding. Throws DataError when
/// there are fewer than k distinct points.
ClusterAssignment kmeans(const PointMatrix& points, const ClusteringConfig& config);

struct Silhouette {
  double mean = 0.0;
  std::vector<double> per_point;
};

/// Euclidean silhouette; points alone in their cluster score 0. Throws
/// DataError for fewer than two clusters or an empty cluster index.
Silhouette silhouette(const PointMatrix& points, std::span<const std::uint32_t> labels);

struct SweepRow {
  std::size_t k = 0;
  double inertia = 0.0;
  double silhouette = 0.0;
  bool flagged = false;  // inertia rose compared with k - 1
};

/// k-means for every k in [k_min, k_max].
std::vector<SweepRow> sweep(const PointMatrix& points, const ClusteringConfig& config);

double adjusted_rand_index(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

// CSV `graph_id,cluster` and `k,inertia,silhouette`.
void write_assignment_csv(std::ostream& out, std::span<const GameId> ids, std::span<const std::uint32_t> labels);
std::vector<std::pair<GameId, std::uint32_t>> read_assignment_csv(std::istream& in);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
std::vector<SweepRow> read_sweep_csv(std::istream& in);

}  // namespace gamenet
