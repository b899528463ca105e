#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lexent/corpus.hpp"
#include "lexent/lexical.hpp"
#include "lexent/matrix.hpp"
#include "lexent/metrics.hpp"
#include "lexent/scorer.hpp"

namespace lexent::fusion {

/// Per (query, candidate) paragraph-level score matrices, N x M.
struct ScoreMatrixPair {
  std::string query_id;
  std::string cand_id;
  Matrix lex;
  Matrix sem;
  std::optional<Matrix> fused;
};

enum class Aggregation { max, mean_row_max };

/// Where min-max normalization of lexical scores takes its bounds from:
/// the single matrix, or all candidate matrices of the same query.
enum class NormalizeScope { matrix, query };

struct FusionConfig {
  double w_sem = 0.3;  // weight of the semantic (supporting) score; lexical gets 1 - w_sem
  Aggregation aggregation = Aggregation::mean_row_max;
  bool normalize_lex = true;
  NormalizeScope normalize_scope = NormalizeScope::query;

  void validate() const;
};

Aggregation parse_aggregation(std::string_view s);
NormalizeScope parse_normalize_scope(std::string_view s);

struct LexRange {
  double min = 0.0;
  double max = 0.0;
};

LexRange range_of(const Matrix& m);

/// fused = w_sem * sem + (1 - w_sem) * lex', where lex' is lex min-max
/// normalized to [0, 1] when normalize_lex is set (a constant range maps to
/// 0). Bounds come from `range` when given, else from the lex matrix itself.
Matrix union_scores(const ScoreMatrixPair& pair, const FusionConfig& config,
                    std::optional<LexRange> range = std::nullopt);

/// max: global maximum; mean_row_max: mean over rows of each row's maximum.
double aggregate(const Matrix& m, Aggregation method);

/// Paragraph-level BM25 index over a candidate pool; paragraph j of document
/// d is indexed as "<d>#<j>".
class ParagraphIndex {
 public:
  static ParagraphIndex build(const std::vector<corpus::Document>& docs, lexical::Bm25Params params = {});

  const lexical::Bm25Index& index() const { return index_; }
  /// Index positions of a document's paragraphs, in paragraph order.
  const std::vector<std::size_t>& paragraphs_of(std::string_view doc_id) const;

 private:
  lexical::Bm25Index index_;
  std::unordered_map<std::string, std::vector<std::size_t>> paragraphs_;
};

/// Lexical matrices for one query against each candidate: entry (i, j) is the
/// BM25 score of candidate paragraph j for query paragraph i.
std::vector<Matrix> lex_matrices(const ParagraphIndex& pindex, const std::vector<lexical::Tokens>& query_paragraphs,
                                 const std::vector<std::string>& candidate_ids);

/// Ranks candidates by the aggregated fused matrix, descending, ties by
/// ascending id. Candidates without paragraphs score 0. When `matrices` is
/// non-null it receives every candidate's lex/sem/fused matrices.
std::vector<lexical::ScoredDoc> rank(const corpus::Document& query, const std::vector<const corpus::Document*>& candidates,
                                     const FusionConfig& config, const scorer::ScorerBackend& backend,
                                     const ParagraphIndex& pindex, std::vector<ScoreMatrixPair>* matrices = nullptr);

struct DecisionStrategy {
  enum class Kind { top1, topk, relative_threshold };
  Kind kind = Kind::relative_threshold;
  std::size_t k = 1;
  double beta = 0.9;

  /// "top1", "topk:<k>", or "relative:<beta>".
  static DecisionStrategy parse(std::string_view s);
  std::string to_string() const;
};

/// Selected ids in rank order. relative_threshold keeps every candidate with
/// score >= beta * top score. The input must be sorted by descending score.
std::vector<std::string> decide(const std::vector<lexical::ScoredDoc>& ranked, const DecisionStrategy& strategy);

/// query id -> scored candidates.
using QueryScores = std::map<std::string, std::vector<lexical::ScoredDoc>>;

struct EnsembleWeights {
  std::vector<std::string> model_ids;
  std::vector<double> weights;  // sums to 1
  double metric = 0.0;          // dev metric achieved by these weights
};

/// Weighted sum of each model's scores per (query, doc); missing scores count
/// as 0. Re-sorted descending with the id tie rule.
QueryScores combine(const std::map<std::string, QueryScores>& model_scores, const EnsembleWeights& weights);

/// Grid search over the weight simplex (step 1/steps) maximizing F-beta of
/// decide(combined) on the dev gold, restricted to gold queries. Among equal
/// metrics the first vector in descending lexicographic order wins, which
/// favors earlier models.
EnsembleWeights learn_ensemble(const std::map<std::string, QueryScores>& model_scores, const metrics::IdSets& dev_gold,
                               const DecisionStrategy& strategy, double beta = 2.0, std::size_t steps = 10);

/// Matrix cache format: "MAT <N> <M>" then N rows of M space-separated reals.
std::string format_matrix(const Matrix& m);
Matrix parse_matrix(std::string_view data);

namespace serial {
std::vector<Matrix> lex_matrices(const ParagraphIndex& pindex, const std::vector<lexical::Tokens>& query_paragraphs,
                                 const std::vector<std::string>& candidate_ids);
}  // namespace serial

}  // namespace lexent::fusion
