#include "gamenet/embedding.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <ostream>

#include "gamenet/hash.hpp"
#include "gamenet/rng.hpp"

namespace gamenet {

WLDocument wl_document(const Graph& g, std::size_t iterations, GameId graph_id) {
  const std::size_t n = g.node_count();
  WLDocument doc;
  doc.graph_id = graph_id;
  doc.tokens.reserve(n * (iterations + 1));

  std::vector<std::string> label(n);
  for (Graph::Index i = 0; i < n; ++i) label[i] = std::to_string(g.degree(i));
  for (const auto& l : label) doc.tokens.push_back("0:" + l);

  std::vector<std::string> next(n);
  std::vector<const std::string*> nb;
  for (std::size_t it = 1; it <= iterations; ++it) {
    for (Graph::Index i = 0; i < n; ++i) {
      nb.clear();
      for (auto j : g.neighbors(i)) nb.push_back(&label[j]);
      std::sort(nb.begin(), nb.end(), [](const std::string* a, const std::string* b) { return *a < *b; });
      std::uint64_t h = fnv1a64(label[i]);
      h = fnv1a64("(", h);
      for (std::size_t k = 0; k < nb.size(); ++k) {
        if (k > 0) h = fnv1a64(",", h);
        h = fnv1a64(*nb[k], h);
      }
      h = fnv1a64(")", h);
      next[i] = hex64(h);
    }
    label.swap(next);
    const std::string prefix = std::to_string(it) + ":";
    for (const auto& l : label) doc.tokens.push_back(prefix + l);
  }
  return doc;
}

void EmbeddingConfig::validate() const {
  if (dimensions < 1) throw UsageError("embedding dimensions must be >= 1");
  if (!(learning_rate > 0.0)) throw UsageError("embedding learning rate must be > 0");
}

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// -log(sigmoid(x)), stable for large |x|.
double neg_log_sigmoid(double x) { return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x)); }

double dot(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

double pair_loss(std::span<const double> doc, std::span<const double> words, std::size_t dimensions,
                 std::size_t target, std::span<const std::size_t> negatives, std::span<double> coeff) {
  double loss = 0.0;
  for (std::size_t s = 0; s <= negatives.size(); ++s) {
    const std::size_t w = s == 0 ? target : negatives[s - 1];
    const double score = dot(doc.data(), words.data() + w * dimensions, dimensions);
    const double label = s == 0 ? 1.0 : 0.0;
    loss += s == 0 ? neg_log_sigmoid(score) : neg_log_sigmoid(-score);
    coeff[s] = sigmoid(score) - label;
  }
  return loss;
}

double sgns_objective(const SgnsParameters& params, std::span<const TrainingPair> pairs, SgnsParameters* gradient) {
  const std::size_t d = params.dimensions;
  if (gradient) {
    gradient->dimensions = d;
    gradient->docs.assign(params.docs.size(), 0.0);
    gradient->words.assign(params.words.size(), 0.0);
  }
  double total = 0.0;
  std::vector<double> coeff;
  for (const auto& p : pairs) {
    coeff.assign(p.negatives.size() + 1, 0.0);
    const std::span<const double> doc(params.docs.data() + p.doc * d, d);
    total += pair_loss(doc, params.words, d, p.target, p.negatives, coeff);
    if (!gradient) continue;
    for (std::size_t s = 0; s < coeff.size(); ++s) {
      const std::size_t w = s == 0 ? p.target : p.negatives[s - 1];
      for (std::size_t k = 0; k < d; ++k) {
        gradient->docs[p.doc * d + k] += coeff[s] * params.words[w * d + k];
        gradient->words[w * d + k] += coeff[s] * doc[k];
      }
    }
  }
  return total;
}

namespace {

struct UniqueDoc {
  std::vector<std::string> sorted_tokens;
  std::uint64_t key = 0;
  std::vector<std::size_t> rows;      // corpus rows sharing this content
  std::vector<std::size_t> token_ids;  // in-vocabulary token occurrences
};

}  // namespace

TrainResult train(std::span<const WLDocument> corpus, const EmbeddingConfig& config) {
  config.validate();
  if (corpus.empty()) throw DataError("embedding: empty corpus");
  const std::size_t d = config.dimensions;

  // Group identical documents and order groups by content.
  std::map<std::vector<std::string>, std::size_t> by_content;
  std::vector<UniqueDoc> docs;
  for (std::size_t r = 0; r < corpus.size(); ++r) {
    auto sorted = corpus[r].tokens;
    std::sort(sorted.begin(), sorted.end());
    auto [it, inserted] = by_content.emplace(sorted, docs.size());
    if (inserted) {
      UniqueDoc u;
      u.key = kFnvOffset;
      for (const auto& t : sorted) u.key = fnv1a64(t, fnv1a64("\n", u.key));
      u.sorted_tokens = std::move(sorted);
      docs.push_back(std::move(u));
    }
    docs[it->second].rows.push_back(r);
  }
  std::sort(docs.begin(), docs.end(), [](const UniqueDoc& a, const UniqueDoc& b) {
    return a.key != b.key ? a.key < b.key : a.sorted_tokens < b.sorted_tokens;
  });

  // Vocabulary over the whole corpus (with multiplicity).
  std::map<std::string, std::size_t> counts;
  for (const auto& u : docs) {
    for (const auto& t : u.sorted_tokens) counts[t] += u.rows.size();
  }
  TrainResult result;
  auto& m = result.embedding;
  m.dimensions = d;
  std::map<std::string, std::size_t> index;
  std::vector<double> noise_cdf;
  double acc = 0.0;
  for (const auto& [token, c] : counts) {
    if (c < config.min_token_count) continue;
    index.emplace(token, m.vocabulary.size());
    m.vocabulary.push_back(token);
    acc += std::pow(static_cast<double>(c), 0.75);
    noise_cdf.push_back(acc);
  }
  if (m.vocabulary.empty()) throw DataError("embedding: vocabulary is empty after min_token_count filtering");
  for (auto& c : noise_cdf) c /= acc;
  const std::size_t vocab = m.vocabulary.size();

  std::uint64_t total_updates = 0;
  for (auto& u : docs) {
    for (const auto& t : u.sorted_tokens) {
      if (auto it = index.find(t); it != index.end()) u.token_ids.push_back(it->second);
    }
    total_updates += u.token_ids.size() * u.rows.size();
  }
  total_updates *= config.epochs;

  std::vector<double> doc_vecs(docs.size() * d);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    Rng rng(derive_seed(config.seed, docs[i].key));
    for (std::size_t k = 0; k < d; ++k) doc_vecs[i * d + k] = (rng.uniform() - 0.5) / static_cast<double>(d);
  }
  std::vector<double> word_vecs(vocab * d, 0.0);

  auto draw_noise = [&](Rng& rng) {
    const double u = rng.uniform();
    auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - noise_cdf.begin()), vocab - 1);
  };

  std::uint64_t done = 0;
  std::vector<double> coeff(config.negative_samples + 1);
  std::vector<std::size_t> negatives;
  std::vector<double> grad_doc(d);
  std::vector<std::size_t> order;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::uint64_t epoch_pairs = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const auto& u = docs[i];
      double* dv = doc_vecs.data() + i * d;
      for (std::size_t rep = 0; rep < u.rows.size(); ++rep) {
        Rng rng(derive_seed(config.seed, u.key, epoch * u.rows.size() + rep + 1));
        order = u.token_ids;
        rng.shuffle(order.begin(), order.end());
        for (auto target : order) {
          const double lr =
              config.learning_rate *
              std::max(1e-4, 1.0 - static_cast<double>(done) / static_cast<double>(std::max<std::uint64_t>(total_updates, 1)));
          negatives.clear();
          for (std::size_t s = 0; s < config.negative_samples; ++s) {
            const auto w = draw_noise(rng);
            if (w != target) negatives.push_back(w);
          }
          epoch_loss += pair_loss({dv, d}, word_vecs, d, target, negatives, coeff);
          ++epoch_pairs;
          std::fill(grad_doc.begin(), grad_doc.end(), 0.0);
          for (std::size_t s = 0; s <= negatives.size(); ++s) {
            double* wv = word_vecs.data() + (s == 0 ? target : negatives[s - 1]) * d;
            for (std::size_t k = 0; k < d; ++k) {
              grad_doc[k] += coeff[s] * wv[k];
              wv[k] -= lr * coeff[s] * dv[k];
            }
          }
          for (std::size_t k = 0; k < d; ++k) dv[k] -= lr * grad_doc[k];
          ++done;
        }
      }
    }
    result.epoch_loss.push_back(epoch_pairs ? epoch_loss / static_cast<double>(epoch_pairs) : 0.0);
  }

  m.ids.resize(corpus.size());
  m.values.assign(corpus.size() * d, 0.0);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (auto r : docs[i].rows) {
      m.ids[r] = corpus[r].graph_id;
      std::copy_n(doc_vecs.begin() + static_cast<std::ptrdiff_t>(i * d), d,
                  m.values.begin() + static_cast<std::ptrdiff_t>(r * d));
    }
  }
  return result;
}

void write_embedding_csv(std::ostream& out, const EmbeddingMatrix& m) {
  out << "graph_id";
  for (std::size_t k = 0; k < m.dimensions; ++k) out << ",v" << k;
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << raw(m.ids[r]);
    for (double v : m.row(r)) out << ',' << fmt::format("{:.9g}", v);
    out << '\n';
  }
}

EmbeddingMatrix read_embedding_csv(std::istream& in) {
  EmbeddingMatrix m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (line_no == 1) {
      if (fields.empty() || fields[0] != "graph_id") throw ParseError("expected header starting with graph_id", 1);
      m.dimensions = fields.size() - 1;
      continue;
    }
    if (fields.size() != m.dimensions + 1) throw ParseError("wrong number of columns", line_no);
    std::uint64_t id = 0;
    auto [p, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), id);
    if (ec != std::errc{} || p != fields[0].data() + fields[0].size()) throw ParseError("invalid graph_id", line_no);
    m.ids.push_back(GameId{id});
    for (std::size_t k = 1; k < fields.size(); ++k) {
      char* end = nullptr;
      const double v = std::strtod(fields[k].c_str(), &end);
      if (end != fields[k].c_str() + fields[k].size() || fields[k].empty()) throw ParseError("invalid value", line_no);
      m.values.push_back(v);
    }
  }
  return m;
}

void write_documents_jsonl(std::ostream& out, std::span<const WLDocument> docs) {
  for (const auto& doc : docs) {
    auto tokens = doc.tokens;
    std::sort(tokens.begin(), tokens.end());
    nlohmann::json row{{"graph_id", raw(doc.graph_id)}, {"tokens", tokens}};
    out << row.dump() << '\n';
  }
}

}  // namespace gamenet
