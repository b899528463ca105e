#include "doctest.h"
#include "lexent/error.hpp"
#include "lexent/fusion.hpp"
#include "lexent/rng.hpp"
#include "synthetic.hpp"

#include <algorithm>

using namespace lexent;
using namespace lexent::fusion;

namespace {

scorer::ScorerBackend random_backend(std::uint64_t seed, std::uint32_t dim = 1u << 12) {
  Rng rng(seed);
  auto model = std::make_shared<scorer::LogRegModel>(dim);
  for (auto& w : model->mutable_weights()) w = 4.0 * (uniform_real(rng) - 0.5);
  return scorer::ScorerBackend::builtin(model);
}

std::vector<std::string> order_of(const std::vector<lexical::ScoredDoc>& ranked) {
  std::vector<std::string> ids;
  for (const auto& r : ranked) ids.push_back(r.doc_id);
  return ids;
}

// Sort by score descending then id ascending, the documented tie rule.
std::vector<std::string> order_by(std::vector<lexical::ScoredDoc> scored) {
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
  });
  return order_of(scored);
}

struct Setup {
  std::vector<corpus::Document> docs = synthetic::toy_cases(13, 21);
  ParagraphIndex pindex = ParagraphIndex::build(docs);
  std::vector<const corpus::Document*> candidates;
  Setup() {
    for (std::size_t i = 1; i < docs.size(); ++i) candidates.push_back(&docs[i]);
  }
};

}  // namespace

TEST_CASE("union scores") {
  ScoreMatrixPair pair{"q", "c", Matrix(1, 2, std::vector<double>{2.0, 4.0}), Matrix(1, 2, std::vector<double>{0.5, 0.5}), {}};
  FusionConfig cfg;
  cfg.normalize_scope = NormalizeScope::matrix;
  cfg.w_sem = 1.0;
  CHECK(union_scores(pair, cfg) == pair.sem);
  cfg.w_sem = 0.0;
  CHECK(union_scores(pair, cfg) == Matrix(1, 2, std::vector<double>{0.0, 1.0}));
  cfg.w_sem = 0.3;
  CHECK(union_scores(pair, cfg)(0, 1) == doctest::Approx(0.7 * 1.0 + 0.3 * 0.5));
  CHECK(union_scores(pair, cfg, LexRange{0.0, 8.0})(0, 1) == doctest::Approx(0.7 * 0.5 + 0.3 * 0.5));

  ScoreMatrixPair flat{"q", "c", Matrix(1, 1, 3.0), Matrix(1, 1, 0.2), {}};
  CHECK(union_scores(flat, cfg)(0, 0) == doctest::Approx(0.3 * 0.2));

  ScoreMatrixPair bad{"q", "c", Matrix(1, 2), Matrix(2, 1), {}};
  CHECK_THROWS_AS(union_scores(bad, cfg), DataError);
  ScoreMatrixPair out_of_range{"q", "c", Matrix(1, 1), Matrix(1, 1, 1.5), {}};
  CHECK_THROWS_AS(union_scores(out_of_range, cfg), DataError);
  cfg.w_sem = 1.5;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("aggregation") {
  CHECK(aggregate(Matrix(1, 1, 0.4), Aggregation::max) == 0.4);
  CHECK(aggregate(Matrix(1, 1, 0.4), Aggregation::mean_row_max) == 0.4);
  const Matrix m(2, 2, std::vector<double>{0.2, 0.8, 0.4, 0.1});
  CHECK(aggregate(m, Aggregation::max) == 0.8);
  CHECK(aggregate(m, Aggregation::mean_row_max) == doctest::Approx(0.6));
  CHECK(parse_aggregation("max") == Aggregation::max);
  CHECK_THROWS(parse_aggregation("median"));
}

TEST_CASE("rank endpoints follow the single-signal rankings") {
  const Setup s;
  const auto backend = random_backend(3);
  const auto& query = s.docs[0];

  std::vector<ScoreMatrixPair> mats;
  FusionConfig cfg;
  cfg.w_sem = 0.0;
  const auto lexical_only = rank(query, s.candidates, cfg, backend, s.pindex, &mats);
  double lo = mats.front().lex(0, 0), hi = lo;
  for (const auto& m : mats) {
    for (double v : m.lex.data()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  std::vector<lexical::ScoredDoc> lex_scores, sem_scores;
  for (const auto& m : mats) {
    Matrix norm = m.lex;
    for (double& v : norm.data()) v = (v - lo) / (hi - lo);
    lex_scores.push_back({m.cand_id, aggregate(norm, Aggregation::mean_row_max)});
    sem_scores.push_back({m.cand_id, aggregate(m.sem, Aggregation::mean_row_max)});
  }
  CHECK(order_of(lexical_only) == order_by(lex_scores));

  cfg.w_sem = 1.0;
  CHECK(order_of(rank(query, s.candidates, cfg, backend, s.pindex)) == order_by(sem_scores));

  // A constant semantic signal shifts every candidate equally.
  const auto constant = scorer::ScorerBackend::builtin(std::make_shared<const scorer::LogRegModel>(1u << 12));
  for (double w : {0.0, 0.3, 0.7, 0.99}) {
    cfg.w_sem = w;
    CHECK(order_of(rank(query, s.candidates, cfg, constant, s.pindex)) == order_of(lexical_only));
  }
}

TEST_CASE("paragraph index and lexical matrices") {
  const Setup s;
  CHECK(s.pindex.paragraphs_of("doc03").size() == s.docs[3].paragraphs.size());
  std::vector<lexical::Tokens> q;
  for (const auto& p : s.docs[0].paragraphs) q.push_back(lexical::tokenize(p.text));
  std::vector<std::string> ids;
  for (const auto* c : s.candidates) ids.push_back(c->id);
  const auto par = lex_matrices(s.pindex, q, ids);
  CHECK(par == serial::lex_matrices(s.pindex, q, ids));
  CHECK(par[0].rows() == q.size());
  CHECK(par[0].cols() == s.docs[1].paragraphs.size());
}

TEST_CASE("decision strategies") {
  const std::vector<lexical::ScoredDoc> two{{"a", 0.9}, {"b", 0.8}};
  CHECK(decide(two, DecisionStrategy::parse("top1")) == std::vector<std::string>{"a"});
  const std::vector<lexical::ScoredDoc> tied{{"a", 0.9}, {"b", 0.9}, {"c", 0.8}};
  CHECK(decide(tied, DecisionStrategy::parse("relative:1.0")) == std::vector<std::string>{"a", "b"});
  const std::vector<lexical::ScoredDoc> gap{{"a", 1.0}, {"b", 0.95}, {"c", 0.5}};
  CHECK(decide(gap, DecisionStrategy::parse("relative:0.9")) == std::vector<std::string>{"a", "b"});
  CHECK(decide(gap, DecisionStrategy::parse("topk:2")) == std::vector<std::string>{"a", "b"});
  CHECK_THROWS_AS(decide({}, DecisionStrategy::parse("top1")), DataError);
  CHECK(DecisionStrategy::parse("relative:0.8").to_string() == "relative:0.8");
  CHECK_THROWS_AS(DecisionStrategy::parse("topk:0"), UsageError);
  CHECK_THROWS_AS(DecisionStrategy::parse("best"), UsageError);
}

TEST_CASE("ensemble weights") {
  const metrics::IdSets gold{{"q1", {"a"}}, {"q2", {"b"}}};
  const QueryScores good{{"q1", {{"a", 0.9}, {"b", 0.1}}}, {"q2", {{"b", 0.8}, {"a", 0.2}}}};
  const QueryScores bad{{"q1", {{"b", 0.9}, {"a", 0.1}}}, {"q2", {{"a", 0.8}, {"b", 0.2}}}};
  const auto top1 = DecisionStrategy::parse("top1");

  const auto single = learn_ensemble({{"m", good}}, gold, top1);
  CHECK(single.weights == std::vector<double>{1.0});

  const auto same = learn_ensemble({{"m1", good}, {"m2", good}}, gold, top1);
  CHECK(same.weights == std::vector<double>{1.0, 0.0});

  const auto learned = learn_ensemble({{"m1_ranks", good}, {"m2_anti", bad}}, gold, top1);
  REQUIRE(learned.model_ids.size() == 2);
  const auto at = std::find(learned.model_ids.begin(), learned.model_ids.end(), "m1_ranks") - learned.model_ids.begin();
  CHECK(learned.weights[at] >= 0.9);
  CHECK(learned.metric == doctest::Approx(1.0));

  const auto combined = combine({{"m1_ranks", good}, {"m2_anti", bad}}, learned);
  CHECK(combined.at("q1").front().doc_id == "a");
}

TEST_CASE("matrix text format") {
  const Matrix m(2, 3, std::vector<double>{0.1, 0.2, 1.0 / 3.0, 4, 5, 6});
  CHECK(parse_matrix(format_matrix(m)) == m);
  CHECK_THROWS_AS(parse_matrix("MAT 2 2\n1 2\n"), DataError);
}
