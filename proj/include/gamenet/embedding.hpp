#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gamenet/graph.hpp"

namespace gamenet {

/// A graph seen as a document of Weisfeiler-Lehman subtree tokens.
struct WLDocument {
  GameId graph_id{};
  std::vector<std::string> tokens;  // "<iteration>:<label>", n_nodes * (h + 1) of them
};

/// Degree-initialized WL relabeling for h iterations. Iteration i+1 labels
/// are the hex FNV-1a-64 hash of "<own>(<sorted neighbor labels, comma
/// separated>)".
WLDocument wl_document(const Graph& g, std::size_t iterations, GameId graph_id = {});

struct EmbeddingConfig {
  std::size_t dimensions = 8;
  std::size_t wl_iterations = 2;
  std::size_t epochs = 10;
  double learning_rate = 0.025;  // decays linearly to ~0 over training
  std::size_t negative_samples = 5;
  std::size_t min_token_count = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EmbeddingMatrix {
  std::vector<GameId> ids;  // row order = corpus order
  std::size_t dimensions = 0;
  std::vector<double> values;  // row-major
  std::vector<std::string> vocabulary;

  std::size_t rows() const { return ids.size(); }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * dimensions, dimensions}; }
};

struct TrainResult {
  EmbeddingMatrix embedding;
  std::vector<double> epoch_loss;  // mean logistic loss per epoch
};

/// Distributed bag-of-words document vectors trained with negative
/// sampling. Identical documents train as one and get identical rows; the
/// update order is canonical (by content), so permuting the corpus only
/// permutes the rows.
TrainResult train(std::span<const WLDocument> corpus, const EmbeddingConfig& config);

// --- objective ------------------------------------------------------------
// The per-pair loss is
//   -log s(d.w_t) - sum_n log s(-d.w_n)
// for document vector d, target token t and noise tokens n. Training and
// gradient checks share these routines.

struct TrainingPair {
  std::size_t doc = 0;
  std::size_t target = 0;
  std::vector<std::size_t> negatives;
};

/// Loss of one pair; coeff[s] receives dLoss/dScore for sample s (target
/// first, then negatives), so dLoss/dd = sum coeff[s] w_s and
/// dLoss/dw_s = coeff[s] d.
double pair_loss(std::span<const double> doc, std::span<const double> words, std::size_t dimensions,
                 std::size_t target, std::span<const std::size_t> negatives, std::span<double> coeff);

struct SgnsParameters {
  std::size_t dimensions = 0;
  std::vector<double> docs;   // row-major
  std::vector<double> words;  // row-major output vectors
};

/// Summed loss over pairs; fills the full gradient when `gradient` is given.
double sgns_objective(const SgnsParameters& params, std::span<const TrainingPair> pairs,
                      SgnsParameters* gradient = nullptr);

// --- files ----------------------------------------------------------------

/// CSV `graph_id,v0,...,v{d-1}` with 9 significant digits.
void write_embedding_csv(std::ostream& out, const EmbeddingMatrix& m);
EmbeddingMatrix read_embedding_csv(std::istream& in);

/// One JSON object per line: {"graph_id": ..., "tokens": [...]}, tokens sorted.
void write_documents_jsonl(std::ostream& out, std::span<const WLDocument> docs);

}  // namespace gamenet
