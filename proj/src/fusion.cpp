#include "lexent/fusion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>

#include "lexent/error.hpp"

namespace lexent::fusion {

void FusionConfig::validate() const {
  if (!(w_sem >= 0.0 && w_sem <= 1.0)) throw UsageError("fusion weight w_sem must lie in [0, 1]");
}

Aggregation parse_aggregation(std::string_view s) {
  if (s == "max") return Aggregation::max;
  if (s == "mean_row_max") return Aggregation::mean_row_max;
  throw UsageError("unknown aggregation '" + std::string(s) + "' (max | mean_row_max)");
}

NormalizeScope parse_normalize_scope(std::string_view s) {
  if (s == "matrix") return NormalizeScope::matrix;
  if (s == "query") return NormalizeScope::query;
  throw UsageError("unknown normalization scope '" + std::string(s) + "' (matrix | query)");
}

LexRange range_of(const Matrix& m) {
  if (m.empty()) return {};
  const auto [lo, hi] = std::minmax_element(m.data().begin(), m.data().end());
  return {*lo, *hi};
}

Matrix union_scores(const ScoreMatrixPair& pair, const FusionConfig& config, std::optional<LexRange> range) {
  config.validate();
  if (!pair.lex.same_shape(pair.sem)) {
    throw DataError("lexical matrix is " + std::to_string(pair.lex.rows()) + "x" + std::to_string(pair.lex.cols()) +
                    " but semantic matrix is " + std::to_string(pair.sem.rows()) + "x" + std::to_string(pair.sem.cols()));
  }
  for (const double s : pair.sem.data()) {
    if (!(s >= 0.0 && s <= 1.0)) throw DataError("semantic score outside [0, 1]");
  }
  const LexRange r = range.value_or(range_of(pair.lex));
  const double span = r.max - r.min;
  const double w = config.w_sem;

  Matrix fused(pair.lex.rows(), pair.lex.cols());
  const auto& lex = pair.lex.data();
  const auto& sem = pair.sem.data();
  auto& out = fused.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    double l = lex[i];
    if (config.normalize_lex) l = span > 0.0 ? std::clamp((lex[i] - r.min) / span, 0.0, 1.0) : 0.0;
    out[i] = w * sem[i] + (1.0 - w) * l;
  }
  return fused;
}

double aggregate(const Matrix& m, Aggregation method) {
  if (m.rows() == 0 || m.cols() == 0) throw DataError("cannot aggregate an empty matrix");
  if (method == Aggregation::max) return *std::max_element(m.data().begin(), m.data().end());
  double sum = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double row_max = m(i, 0);
    for (std::size_t j = 1; j < m.cols(); ++j) row_max = std::max(row_max, m(i, j));
    sum += row_max;
  }
  return sum / static_cast<double>(m.rows());
}

ParagraphIndex ParagraphIndex::build(const std::vector<corpus::Document>& docs, lexical::Bm25Params params) {
  std::vector<std::pair<std::string, lexical::Tokens>> entries;
  ParagraphIndex pi;
  for (const auto& d : docs) {
    auto& positions = pi.paragraphs_[d.id];
    if (!positions.empty()) throw DataError("duplicate document id '" + d.id + "' in paragraph index");
    for (const auto& p : d.paragraphs) {
      positions.push_back(entries.size());
      entries.emplace_back(d.id + "#" + std::to_string(p.index), lexical::tokenize(p.text));
    }
  }
  if (entries.empty()) throw DataError("paragraph index needs at least one paragraph");
  pi.index_ = lexical::Bm25Index::build(entries, params);
  return pi;
}

const std::vector<std::size_t>& ParagraphIndex::paragraphs_of(std::string_view doc_id) const {
  const auto it = paragraphs_.find(std::string(doc_id));
  if (it == paragraphs_.end()) throw DataError("document '" + std::string(doc_id) + "' is not in the paragraph index");
  return it->second;
}

namespace {

Matrix gather(const std::vector<std::vector<double>>& rows, const std::vector<std::size_t>& columns) {
  Matrix m(rows.size(), columns.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) m(i, j) = rows[i][columns[j]];
  }
  return m;
}

}  // namespace

std::vector<Matrix> lex_matrices(const ParagraphIndex& pindex, const std::vector<lexical::Tokens>& query_paragraphs,
                                 const std::vector<std::string>& candidate_ids) {
  const auto rows = lexical::bm25_scores_batch(pindex.index(), query_paragraphs);
  std::vector<const std::vector<std::size_t>*> columns;
  columns.reserve(candidate_ids.size());
  for (const auto& id : candidate_ids) columns.push_back(&pindex.paragraphs_of(id));

  std::vector<Matrix> out(candidate_ids.size());
  const auto n = static_cast<std::ptrdiff_t>(candidate_ids.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < n; ++c) {
    out[static_cast<std::size_t>(c)] = gather(rows, *columns[static_cast<std::size_t>(c)]);
  }
  return out;
}

namespace serial {

std::vector<Matrix> lex_matrices(const ParagraphIndex& pindex, const std::vector<lexical::Tokens>& query_paragraphs,
                                 const std::vector<std::string>& candidate_ids) {
  const auto rows = lexical::serial::bm25_scores_batch(pindex.index(), query_paragraphs);
  std::vector<Matrix> out;
  out.reserve(candidate_ids.size());
  for (const auto& id : candidate_ids) out.push_back(gather(rows, pindex.paragraphs_of(id)));
  return out;
}

}  // namespace serial

namespace {

void sort_ranked(std::vector<lexical::ScoredDoc>& ranked) {
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
}

}  // namespace

std::vector<lexical::ScoredDoc> rank(const corpus::Document& query, const std::vector<const corpus::Document*>& candidates,
                                     const FusionConfig& config, const scorer::ScorerBackend& backend,
                                     const ParagraphIndex& pindex, std::vector<ScoreMatrixPair>* matrices) {
  config.validate();
  if (query.paragraphs.empty()) throw DataError("query '" + query.id + "' has no paragraphs");

  std::vector<std::string> q_texts;
  std::vector<lexical::Tokens> q_tokens;
  for (const auto& p : query.paragraphs) {
    q_texts.push_back(p.text);
    q_tokens.push_back(lexical::tokenize(p.text));
  }

  std::vector<lexical::ScoredDoc> ranked;
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> cand_texts;
  for (const auto* c : candidates) {
    if (c->paragraphs.empty()) {
      ranked.push_back({c->id, 0.0});
      continue;
    }
    ids.push_back(c->id);
    auto& texts = cand_texts.emplace_back();
    for (const auto& p : c->paragraphs) texts.push_back(p.text);
  }

  const auto lex = lex_matrices(pindex, q_tokens, ids);
  for (std::size_t c = 0; c < ids.size(); ++c) {
    if (lex[c].cols() != cand_texts[c].size()) {
      throw DataError("paragraph index and corpus disagree on the paragraphs of '" + ids[c] + "'");
    }
  }
  const auto sem = scorer::score_matrices(backend, q_texts, cand_texts);

  std::optional<LexRange> range;
  if (config.normalize_lex && config.normalize_scope == NormalizeScope::query && !lex.empty()) {
    LexRange r = range_of(lex.front());
    for (const auto& m : lex) {
      const auto mr = range_of(m);
      r.min = std::min(r.min, mr.min);
      r.max = std::max(r.max, mr.max);
    }
    range = r;
  }

  for (std::size_t c = 0; c < ids.size(); ++c) {
    ScoreMatrixPair pair{query.id, ids[c], lex[c], sem[c], std::nullopt};
    pair.fused = union_scores(pair, config, range);
    ranked.push_back({ids[c], aggregate(*pair.fused, config.aggregation)});
    if (matrices != nullptr) matrices->push_back(std::move(pair));
  }
  sort_ranked(ranked);
  return ranked;
}

DecisionStrategy DecisionStrategy::parse(std::string_view s) {
  DecisionStrategy d;
  auto number_after = [&](std::string_view prefix, auto& out) {
    const auto rest = s.substr(prefix.size());
    const auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), out);
    if (ec != std::errc() || p != rest.data() + rest.size() || rest.empty()) {
      throw UsageError("bad decision strategy '" + std::string(s) + "'");
    }
  };
  if (s == "top1") {
    d.kind = Kind::top1;
  } else if (s.rfind("topk:", 0) == 0) {
    d.kind = Kind::topk;
    number_after("topk:", d.k);
    if (d.k == 0) throw UsageError("topk needs k >= 1");
  } else if (s == "relative") {
    d.kind = Kind::relative_threshold;
  } else if (s.rfind("relative:", 0) == 0) {
    d.kind = Kind::relative_threshold;
    number_after("relative:", d.beta);
    if (!(d.beta >= 0.0 && d.beta <= 1.0)) throw UsageError("relative threshold beta must lie in [0, 1]");
  } else {
    throw UsageError("unknown decision strategy '" + std::string(s) + "' (top1 | topk:<k> | relative:<beta>)");
  }
  return d;
}

std::string DecisionStrategy::to_string() const {
  switch (kind) {
    case Kind::top1: return "top1";
    case Kind::topk: return "topk:" + std::to_string(k);
    case Kind::relative_threshold: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "relative:%g", beta);
      return buf;
    }
  }
  return "top1";
}

std::vector<std::string> decide(const std::vector<lexical::ScoredDoc>& ranked, const DecisionStrategy& strategy) {
  if (ranked.empty()) throw DataError("cannot decide on an empty ranking");
  std::vector<std::string> out;
  switch (strategy.kind) {
    case DecisionStrategy::Kind::top1:
      out.push_back(ranked.front().doc_id);
      break;
    case DecisionStrategy::Kind::topk:
      for (std::size_t i = 0; i < std::min(strategy.k, ranked.size()); ++i) out.push_back(ranked[i].doc_id);
      break;
    case DecisionStrategy::Kind::relative_threshold: {
      const double cut = strategy.beta * ranked.front().score;
      out.push_back(ranked.front().doc_id);
      for (std::size_t i = 1; i < ranked.size(); ++i) {
        if (ranked[i].score >= cut) out.push_back(ranked[i].doc_id);
      }
      break;
    }
  }
  return out;
}

QueryScores combine(const std::map<std::string, QueryScores>& model_scores, const EnsembleWeights& weights) {
  if (weights.model_ids.size() != weights.weights.size()) throw UsageError("ensemble weights and model ids differ in length");
  std::map<std::string, std::map<std::string, double>> acc;
  for (std::size_t m = 0; m < weights.model_ids.size(); ++m) {
    const auto it = model_scores.find(weights.model_ids[m]);
    if (it == model_scores.end()) throw DataError("no scores for model '" + weights.model_ids[m] + "'");
    for (const auto& [q, docs] : it->second) {
      auto& slot = acc[q];
      for (const auto& d : docs) slot[d.doc_id] += weights.weights[m] * d.score;
    }
  }
  QueryScores out;
  for (const auto& [q, docs] : acc) {
    auto& ranked = out[q];
    for (const auto& [id, s] : docs) ranked.push_back({id, s});
    sort_ranked(ranked);
  }
  return out;
}

EnsembleWeights learn_ensemble(const std::map<std::string, QueryScores>& model_scores, const metrics::IdSets& dev_gold,
                               const DecisionStrategy& strategy, double beta, std::size_t steps) {
  if (model_scores.empty()) throw DataError("ensemble needs at least one model");
  if (dev_gold.empty()) throw DataError("ensemble needs non-empty dev gold");
  if (steps == 0) throw UsageError("ensemble grid needs at least one step");

  EnsembleWeights candidate;
  for (const auto& [id, scores] : model_scores) candidate.model_ids.push_back(id);
  const std::size_t k = candidate.model_ids.size();
  candidate.weights.assign(k, 0.0);

  EnsembleWeights best;
  bool have_best = false;
  std::vector<std::size_t> parts(k, 0);

  auto evaluate = [&] {
    for (std::size_t m = 0; m < k; ++m) candidate.weights[m] = static_cast<double>(parts[m]) / static_cast<double>(steps);
    const auto combined = combine(model_scores, candidate);
    metrics::IdSets predictions;
    for (const auto& [q, ranked] : combined) {
      if (dev_gold.count(q) == 0 || ranked.empty()) continue;
      const auto picked = decide(ranked, strategy);
      predictions[q] = {picked.begin(), picked.end()};
    }
    const auto pr = metrics::macro_pr(predictions, dev_gold);
    const double metric = metrics::f_beta(pr.precision, pr.recall, beta);
    if (!have_best || metric > best.metric) {
      best = candidate;
      best.metric = metric;
      have_best = true;
    }
  };

  // Compositions of `steps` into k parts, first part descending.
  std::function<void(std::size_t, std::size_t)> walk = [&](std::size_t m, std::size_t remaining) {
    if (m + 1 == k) {
      parts[m] = remaining;
      evaluate();
      return;
    }
    for (std::size_t v = remaining + 1; v-- > 0;) {
      parts[m] = v;
      walk(m + 1, remaining - v);
    }
  };
  walk(0, steps);
  return best;
}

std::string format_matrix(const Matrix& m) {
  std::string out = "MAT " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  char buf[64];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j > 0) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

Matrix parse_matrix(std::string_view data) {
  auto next_token = [&](std::string_view& s) -> std::string_view {
    std::size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\n' || s[b] == '\r' || s[b] == '\t')) ++b;
    std::size_t e = b;
    while (e < s.size() && s[e] != ' ' && s[e] != '\n' && s[e] != '\r' && s[e] != '\t') ++e;
    const auto tok = s.substr(b, e - b);
    s.remove_prefix(e);
    return tok;
  };
  std::string_view s = data;
  if (next_token(s) != "MAT") throw DataError("matrix file must start with 'MAT <N> <M>'");
  std::size_t rows = 0, cols = 0;
  for (auto* dim : {&rows, &cols}) {
    const auto tok = next_token(s);
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), *dim);
    if (ec != std::errc() || p != tok.data() + tok.size() || tok.empty()) throw DataError("bad matrix dimension '" + std::string(tok) + "'");
  }
  Matrix m(rows, cols);
  for (auto& v : m.data()) {
    const auto tok = next_token(s);
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size() || tok.empty()) throw DataError("bad matrix entry '" + std::string(tok) + "'");
  }
  if (!next_token(s).empty()) throw DataError("matrix file has more entries than its header declares");
  return m;
}

}  // namespace lexent::fusion
