#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lexent::lexical {

using Tokens = std::vector<std::string>;

/// Lowercases, splits Latin-script runs on non-alphanumerics, and emits CJK
/// runs as overlapping character bigrams (a lone CJK character is kept as is).
Tokens tokenize(std::string_view text);

struct Bm25Params {
  double k1 = 1.5;
  double b = 0.75;
};

struct Posting {
  std::uint32_t doc = 0;  // position in Bm25Index::doc_ids()
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

/// Okapi BM25 inverted index. Immutable after build.
///
///   score(d) = sum_t idf(t) * tf(t,d) * (k1 + 1) / (tf(t,d) + k1 * (1 - b + b * |d| / avgdl))
///   idf(t)   = ln(1 + (N - df + 0.5) / (df + 0.5))
///
/// The idf form is non-negative for every df in [0, N].
class Bm25Index {
 public:
  static Bm25Index build(const std::vector<std::pair<std::string, Tokens>>& docs, Bm25Params params = {});

  double idf(std::string_view term) const;
  static double idf(std::size_t n_docs, std::size_t df);

  /// Scores for every document, aligned with doc_ids().
  std::vector<double> scores(std::span<const std::string> query) const;

  std::unordered_map<std::string, double> score_map(std::span<const std::string> query) const;

  /// Descending by score, ties by ascending doc id; length min(k, n_docs).
  std::vector<ScoredDoc> top_k(std::span<const std::string> query, std::size_t k = 100) const;

  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  const std::vector<std::uint32_t>& doc_lengths() const { return doc_len_; }
  std::size_t n_docs() const { return doc_ids_.size(); }
  double avgdl() const { return avgdl_; }
  const Bm25Params& params() const { return params_; }
  const std::vector<Posting>* postings(std::string_view term) const;
  std::size_t vocabulary_size() const { return postings_.size(); }
  /// Position of a doc id in doc_ids(), or npos.
  std::size_t position(std::string_view doc_id) const;

  /// Versioned text format: "BM25v1 <k1> <b> <n_docs> <avgdl>", one
  /// "<term>\t<doc>:<tf>,..." line per term (sorted), then "DOCS" and
  /// "<doc_id>\t<len>" lines.
  std::string serialize() const;
  static Bm25Index deserialize(std::string_view data);
  void save(const std::string& path) const;
  static Bm25Index load(const std::string& path);

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  void finalize();

  Bm25Params params_;
  std::vector<std::string> doc_ids_;
  std::vector<std::uint32_t> doc_len_;
  std::unordered_map<std::string, std::size_t> doc_pos_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  double avgdl_ = 0.0;
};

/// Sorts scores into a ranked list with the tie rule and truncates to k.
std::vector<ScoredDoc> rank_scores(const std::vector<std::string>& ids, const std::vector<double>& scores,
                                   std::size_t k);

/// Scores many queries; parallel across queries.
std::vector<std::vector<double>> bm25_scores_batch(const Bm25Index& index, const std::vector<Tokens>& queries);

using IdfTable = std::unordered_map<std::string, double>;

/// Smoothed idf over a collection: ln((1 + N) / (1 + df)) + 1.
IdfTable compute_idf(const std::vector<Tokens>& docs);

struct TfidfVector {
  std::unordered_map<std::string, double> weights;
  double norm = 0.0;
};

/// tf * idf weights, L2-normalized (all-zero vectors stay zero). Terms without
/// an idf entry get weight 0.
TfidfVector tfidf_vector(std::span<const std::string> tokens, const IdfTable& idf);

double cosine(const TfidfVector& a, const TfidfVector& b);

/// Cosine of the normalized tf-idf vectors; 0 if either is all-zero.
double tfidf_cosine(std::span<const std::string> a, std::span<const std::string> b, const IdfTable& idf);

/// Similarity of one query against many documents; parallel across documents.
std::vector<double> tfidf_cosines(const TfidfVector& query, const std::vector<TfidfVector>& docs);

/// Serial reference kernels, kept for equivalence tests and benchmarks.
namespace serial {
std::vector<std::vector<double>> bm25_scores_batch(const Bm25Index& index, const std::vector<Tokens>& queries);
std::vector<double> tfidf_cosines(const TfidfVector& query, const std::vector<TfidfVector>& docs);
}  // namespace serial

}  // namespace lexent::lexical
