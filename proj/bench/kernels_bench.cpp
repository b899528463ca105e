// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>

#include "lexent/fusion.hpp"
#include "lexent/lexical.hpp"
#include "lexent/rng.hpp"
#include "lexent/scorer.hpp"

using namespace lexent;

namespace {

std::string random_text(Rng& rng, std::size_t len, std::size_t vocab) {
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s += "w" + std::to_string(uniform_index(rng, vocab)) + " ";
  return s;
}

struct LexicalFixture {
  lexical::Bm25Index index;
  std::vector<lexical::Tokens> queries;
  std::vector<lexical::TfidfVector> vectors;

  LexicalFixture() {
    Rng rng(1);
    std::vector<std::pair<std::string, lexical::Tokens>> docs;
    std::vector<lexical::Tokens> toks;
    for (int d = 0; d < 5000; ++d) {
      toks.push_back(lexical::tokenize(random_text(rng, 200, 5000)));
      docs.emplace_back("d" + std::to_string(d), toks.back());
    }
    index = lexical::Bm25Index::build(docs);
    for (int q = 0; q < 64; ++q) queries.push_back(lexical::tokenize(random_text(rng, 30, 5000)));
    const auto idf = lexical::compute_idf(toks);
    for (const auto& t : toks) vectors.push_back(lexical::tfidf_vector(t, idf));
  }
};

const LexicalFixture& lexical_fixture() {
  static const LexicalFixture f;
  return f;
}

struct ScorerFixture {
  scorer::LogRegModel model{1u << 18};
  std::vector<scorer::TextPair> pairs;

  ScorerFixture() {
    Rng rng(2);
    for (auto& w : model.mutable_weights()) w = uniform_real(rng) - 0.5;
    for (int i = 0; i < 4000; ++i) pairs.emplace_back(random_text(rng, 40, 3000), random_text(rng, 40, 3000));
  }
};

const ScorerFixture& scorer_fixture() {
  static const ScorerFixture f;
  return f;
}

void BM_Bm25BatchSerial(benchmark::State& state) {
  const auto& f = lexical_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(lexical::serial::bm25_scores_batch(f.index, f.queries));
}
void BM_Bm25BatchParallel(benchmark::State& state) {
  const auto& f = lexical_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(lexical::bm25_scores_batch(f.index, f.queries));
}
void BM_TfidfCosinesSerial(benchmark::State& state) {
  const auto& f = lexical_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(lexical::serial::tfidf_cosines(f.vectors[0], f.vectors));
}
void BM_TfidfCosinesParallel(benchmark::State& state) {
  const auto& f = lexical_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(lexical::tfidf_cosines(f.vectors[0], f.vectors));
}
void BM_PredictSerial(benchmark::State& state) {
  const auto& f = scorer_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(scorer::serial::predict_builtin(f.model, f.pairs));
}
void BM_PredictParallel(benchmark::State& state) {
  const auto& f = scorer_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(scorer::predict_builtin(f.model, f.pairs));
}

}  // namespace

BENCHMARK(BM_Bm25BatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Bm25BatchParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TfidfCosinesSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TfidfCosinesParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_PredictSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
