#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gamenet/graph.hpp"

namespace gamenet {

// Structural features of a single network. Functions returning
// std::optional use nullopt for "undefined" (e.g. density of a one-node
// graph); these serialize as null.

/// |E| / C(|V|, 2); undefined below two nodes.
std::optional<double> density(const Graph& g);

struct DegreeStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};
DegreeStats degree_stats(const Graph& g);

/// Pearson correlation of endpoint degrees over both orientations of every
/// edge. Undefined without edges or when every stub has the same degree.
std::optional<double> assortativity(const Graph& g);

/// Freeman degree centralization, sum(d_max - d_v) / ((n-1)(n-2)).
std::optional<double> degree_centralization(const Graph& g);

/// Shortest-path betweenness per node index, normalized by (n-1)(n-2)/2.
/// On disconnected graphs only reachable pairs contribute.
std::vector<double> betweenness(const Graph& g);

/// sum(b_max - b_v) / (n-1) over normalized betweenness.
std::optional<double> betweenness_centralization(const Graph& g);

/// Mean local clustering coefficient; nodes of degree < 2 count as 0.
double avg_clustering(const Graph& g);

struct Communities {
  std::vector<std::uint32_t> label;  // per node index, dense from 0
  std::size_t count = 0;
  double q = 0.0;
};

/// Newman modularity of a node partition (resolution 1).
double modularity(const Graph& g, std::span<const std::uint32_t> label);

/// Louvain local moving with aggregation, deterministic for a seed.
/// Undefined on an edgeless graph.
std::optional<Communities> modularity_score(const Graph& g, std::uint64_t seed = 0);

// --- power-law fitting ---------------------------------------------------

enum class PowerLawVerdict { power_law, not_power_law, inconclusive };

std::string to_string(PowerLawVerdict v);
PowerLawVerdict parse_verdict(const std::string& s);

struct PowerLawFit {
  std::optional<double> alpha;
  std::uint64_t xmin = 1;
  std::optional<double> ks_stat;
  std::optional<double> p_value;
  std::size_t tail_size = 0;
  PowerLawVerdict verdict = PowerLawVerdict::inconclusive;
};

struct PowerLawOptions {
  std::size_t bootstrap = 100;
  double p_threshold = 0.1;
  std::size_t min_tail = 25;
  // Search interval for the exponent.
  double alpha_min = 1.01;
  double alpha_max = 5.0;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

/// Best tail fit without the goodness-of-fit bootstrap.
struct TailFit {
  double alpha = 0.0;
  std::uint64_t xmin = 1;
  double ks = 0.0;
  std::size_t tail_size = 0;
};

/// Discrete MLE exponent for each candidate xmin (tails of at least
/// min_tail points), keeping the xmin with the smallest KS distance.
/// `sorted` must be ascending positive integers. nullopt if no candidate.
std::optional<TailFit> fit_tail(std::span<const std::uint64_t> sorted, const PowerLawOptions& options);

/// Discrete maximum-likelihood exponent for a fixed xmin.
double discrete_alpha_mle(std::span<const std::uint64_t> tail, std::uint64_t xmin, const PowerLawOptions& options);

/// P(X >= x) for the discrete power law on x >= xmin.
double powerlaw_ccdf(double alpha, std::uint64_t xmin, std::uint64_t x);

/// Full fit: tail estimate plus semi-parametric bootstrap p-value.
/// Zero degrees are ignored.
PowerLawFit powerlaw_fit(std::span<const std::size_t> degrees, const PowerLawOptions& options = {});

// --- whole-graph profile -------------------------------------------------

struct StructuralProfile {
  std::size_t n_nodes = 0;
  std::size_t n_edges = 0;
  std::optional<double> density;
  double mean_degree = 0.0;
  double std_degree = 0.0;
  std::optional<double> assortativity;
  std::optional<double> degree_centralization;
  std::optional<double> betweenness_centralization;
  double avg_clustering = 0.0;
  std::size_t n_components = 0;
  double lcc_fraction = 0.0;
  std::optional<double> modularity;
  PowerLawFit powerlaw;
};

struct ProfileOptions {
  std::uint64_t seed = 0;
  PowerLawOptions powerlaw;
};

/// All features for one graph. Requires at least one node.
StructuralProfile profile(const Graph& g, const ProfileOptions& options = {});

void to_json(nlohmann::json& j, const PowerLawFit& fit);
void from_json(const nlohmann::json& j, PowerLawFit& fit);
void to_json(nlohmann::json& j, const StructuralProfile& p);
void from_json(const nlohmann::json& j, StructuralProfile& p);

}  // namespace gamenet
