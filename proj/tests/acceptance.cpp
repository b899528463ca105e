// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lexent/chunker.hpp"
#include "lexent/cli.hpp"
#include "lexent/datagen.hpp"
#include "lexent/fusion.hpp"
#include "lexent/lexical.hpp"
#include "lexent/metrics.hpp"
#include "lexent/paralaw.hpp"
#include "lexent/rng.hpp"
#include "lexent/scorer.hpp"
#include "lexent/selflabel.hpp"
#include "lexent/text.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"
#include "sample_rows.hpp"
#include "test_support.hpp"

using namespace lexent;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Outcome f2_arithmetic() {
  const double a = metrics::f_beta(0.6974, 0.7342, 2.0);
  const double b = metrics::f_beta(0.6824, 0.7252, 2.0);
  const bool ok = std::abs(a - 0.7266) <= 1e-4 && std::abs(b - 0.7162) <= 1e-4;
  return {ok, fmt("F2 = %.6f / %.6f (want 0.7266 / 0.7162 +-1e-4)", a, b)};
}

Outcome accuracy_arithmetic() {
  std::vector<bool> pred(81, true), gold(81, true);
  for (int i = 0; i < 32; ++i) gold[i] = false;
  const double acc = metrics::accuracy(pred, gold);
  return {std::abs(acc - 0.6049) <= 1e-4, fmt("49/81 = %.6f (want 0.6049 +-1e-4)", acc)};
}

Outcome sample_rows_exactness() {
  const paralaw::AlignedPair cur{0, oracle::kEnCur, oracle::kJaCur};
  const paralaw::AlignedPair next{1, oracle::kEnNext, oracle::kJaNext};
  const paralaw::AlignedPair rnd{0, oracle::kEnRand, oracle::kJaRand};
  const auto samples = paralaw::generate_samples(cur, next, rnd);
  const auto rows = oracle::reference_rows();
  bool ok = samples.size() == 12;
  std::size_t nfsp = 0;
  for (std::size_t i = 0; ok && i < rows.size(); ++i) {
    ok = samples[i].first.text == rows[i].first && samples[i].second.text == rows[i].second &&
         samples[i].nfsp == rows[i].nfsp && samples[i].nmsp == rows[i].nmsp;
    if (samples[i].nfsp) ++nfsp;
  }
  ok = ok && nfsp == 4;

  // NMSP:NFSP ratio over random synthetic corpora.
  Rng rng(2024);
  std::size_t corpora_checked = 0;
  for (int trial = 0; ok && trial < 20; ++trial) {
    std::vector<paralaw::ParallelDoc> corpus;
    const auto n_docs = 2 + uniform_index(rng, 6);
    for (std::size_t d = 0; d < n_docs; ++d) {
      paralaw::ParallelDoc doc{"d" + std::to_string(d), {}};
      const auto len = 1 + uniform_index(rng, 8);
      for (std::size_t i = 0; i < len; ++i) {
        const auto tag = std::to_string(trial) + "/" + std::to_string(d) + "/" + std::to_string(i);
        doc.pairs.push_back({i, "s " + tag, "文 " + tag});
      }
      corpus.push_back(doc);
    }
    std::size_t adj = 0;
    for (const auto& d : corpus) adj += d.pairs.size() > 1 ? d.pairs.size() - 1 : 0;
    if (adj == 0) continue;
    const auto data = paralaw::build_dataset(corpus, static_cast<std::uint64_t>(trial));
    std::size_t n_nfsp = 0;
    for (const auto& s : data) n_nfsp += s.nfsp ? 1 : 0;
    ok = data.size() == 3 * n_nfsp && n_nfsp == 4 * adj;
    ++corpora_checked;
  }
  return {ok, "12 rows, 4 NFSP-labeled, NMSP:NFSP = 3:1 on " + std::to_string(corpora_checked) + " random corpora"};
}

Outcome bm25_oracle() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto n_docs = 1 + uniform_index(rng, 50);
    const auto vocab = 1 + uniform_index(rng, 20);
    std::vector<lexical::Tokens> docs;
    std::vector<std::pair<std::string, lexical::Tokens>> named;
    for (std::size_t d = 0; d < n_docs; ++d) {
      lexical::Tokens t;
      const auto len = 1 + uniform_index(rng, 40);
      for (std::size_t i = 0; i < len; ++i) t.push_back("v" + std::to_string(uniform_index(rng, vocab)));
      docs.push_back(t);
      named.emplace_back("d" + std::to_string(d), t);
    }
    const auto idx = lexical::Bm25Index::build(named);
    for (int q = 0; q < 5; ++q) {
      lexical::Tokens query;
      const auto qlen = 1 + uniform_index(rng, 5);
      for (std::size_t i = 0; i < qlen; ++i) query.push_back("v" + std::to_string(uniform_index(rng, vocab + 3)));
      const auto got = idx.scores(query);
      const auto want = oracle::bm25(docs, query);
      for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= 1e-9 && secs < 5.0, fmt("max |index - oracle| = %.3g over 100 corpora in %.2f s", worst, secs)};
}

Outcome chunk_law() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<chunker::ChunkSpec> grid{{110, 20}, {150, 10}, {150, 20}, {150, 40}, {150, 50}, {200, 50}, {300, 50}};
  lexical::Tokens tokens;
  for (int i = 0; i < 2000; ++i) tokens.push_back("t" + std::to_string(i));
  std::size_t checked = 0;
  for (const auto& spec : grid) {
    for (std::size_t len = 1; len <= 2000; ++len) {
      const lexical::Tokens slice(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(len));
      const auto chunks = chunker::chunk_tokens(slice, spec);
      const std::size_t want = 1 + oracle::ceil_div(len > spec.window ? len - spec.window : 0, spec.stride);
      if (chunks.size() != want) return {false, "count mismatch at L=" + std::to_string(len)};
      std::vector<bool> covered(len, false);
      for (std::size_t c = 0; c < chunks.size(); ++c) {
        const auto& ch = chunks[c];
        if (ch.start_token != c * spec.stride) return {false, "bad start at L=" + std::to_string(len)};
        if (ch.end_token != std::min(len, ch.start_token + spec.window)) return {false, "bad end"};
        if (c > 0) {
          const auto overlap = chunks[c - 1].end_token - ch.start_token;
          if (overlap != spec.window - spec.stride) return {false, "bad overlap at L=" + std::to_string(len)};
        }
        for (auto t = ch.start_token; t < ch.end_token; ++t) covered[t] = true;
      }
      if (std::find(covered.begin(), covered.end(), false) != covered.end()) return {false, "coverage gap"};
      ++checked;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {secs < 5.0, fmt("%.0f (L, spec) cases in %.2f s", static_cast<double>(checked), secs)};
}

Outcome selflabel_monotonicity() {
  Rng rng(6);
  for (int inst = 0; inst < 1000; ++inst) {
    const auto n = 1 + uniform_index(rng, 50);
    std::vector<bool> y0(n);
    std::vector<double> pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      y0[i] = uniform_real(rng) < 0.5;
      pred[i] = uniform_real(rng);
    }
    const double threshold = uniform_real(rng);
    const auto r = selflabel::relabel(y0, pred, threshold);
    std::vector<std::size_t> want;
    for (std::size_t i = 0; i < n; ++i) {
      if (!y0[i] && r.labels[i]) return {false, "negative -> positive flip in instance " + std::to_string(inst)};
      if (y0[i] && pred[i] < threshold) want.push_back(i);
    }
    if (r.flipped != want) return {false, "flip set mismatch in instance " + std::to_string(inst)};
  }
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto set = synthetic::make_noisy_set(seed, 30, 30, 0.2);
    selflabel::SelfLabelConfig cfg;
    cfg.e1 = 3;
    cfg.e2 = 0;
    cfg.dim = 1u << 12;
    const auto sl = selflabel::run_self_label(set.pairs, set.labels, cfg, seed);
    scorer::TrainSchedule plain;
    plain.stages.push_back({set.pairs, 3, cfg.learning_rate, ""});
    if (sl.model.serialize() != scorer::train(plain, seed, cfg.dim).model.serialize()) {
      return {false, "3/0 differs from plain training"};
    }
  }
  return {true, "1000 relabel instances exact; 3/0 bit-identical on 5 seeds"};
}

Outcome noise_repair() {
  std::size_t wins = 0;
  double noise_sum = 0.0, clean_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto set = synthetic::make_noisy_set(1000 + seed, 200, 200, 0.2);
    selflabel::SelfLabelConfig cfg;
    cfg.dim = 1u << 14;
    const auto r = selflabel::run_self_label(set.pairs, set.labels, cfg, seed);
    std::size_t noise = 0, clean = 0;
    for (const auto i : r.flipped) (set.planted[i] ? noise : clean) += 1;
    const double fn = static_cast<double>(noise) / 40.0;
    const double fc = static_cast<double>(clean) / 160.0;
    noise_sum += fn;
    clean_sum += fc;
    if (fn > fc) ++wins;
  }
  return {wins == 10, std::to_string(wins) + "/10 seeds; mean flipped fraction noise " + fmt("%.3f vs clean %.3f", noise_sum / 10, clean_sum / 10)};
}

Outcome fusion_endpoints() {
  const auto docs = synthetic::toy_cases(77, 21);
  const auto pindex = fusion::ParagraphIndex::build(docs);
  std::vector<const corpus::Document*> cands;
  for (std::size_t i = 1; i < docs.size(); ++i) cands.push_back(&docs[i]);
  Rng rng(5);
  auto model = std::make_shared<scorer::LogRegModel>(1u << 12);
  for (auto& w : model->mutable_weights()) w = 4.0 * (uniform_real(rng) - 0.5);
  const auto backend = scorer::ScorerBackend::builtin(model);

  auto ids = [](std::vector<lexical::ScoredDoc> v, bool sort) {
    if (sort) {
      std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
      });
    }
    std::vector<std::string> out;
    for (const auto& d : v) out.push_back(d.doc_id);
    return out;
  };

  fusion::FusionConfig cfg;
  std::vector<fusion::ScoreMatrixPair> mats;
  cfg.w_sem = 0.0;
  const auto at0 = fusion::rank(docs[0], cands, cfg, backend, pindex, &mats);
  cfg.w_sem = 1.0;
  const auto at1 = fusion::rank(docs[0], cands, cfg, backend, pindex);

  double lo = mats[0].lex(0, 0), hi = lo;
  for (const auto& m : mats) {
    for (double v : m.lex.data()) lo = std::min(lo, v), hi = std::max(hi, v);
  }
  std::vector<lexical::ScoredDoc> lex_only, sem_only;
  for (const auto& m : mats) {
    Matrix n = m.lex;
    for (double& v : n.data()) v = (v - lo) / (hi - lo);
    lex_only.push_back({m.cand_id, fusion::aggregate(n, fusion::Aggregation::mean_row_max)});
    sem_only.push_back({m.cand_id, fusion::aggregate(m.sem, fusion::Aggregation::mean_row_max)});
  }
  const bool lex_ok = ids(at0, false) == ids(lex_only, true);
  const bool sem_ok = ids(at1, false) == ids(sem_only, true);

  fusion::ScoreMatrixPair spot{"q", "c", Matrix(1, 2, std::vector<double>{0.0, 1.0}),
                               Matrix(1, 2, std::vector<double>{0.5, 0.5}), {}};
  fusion::FusionConfig spot_cfg;
  spot_cfg.w_sem = 0.7;
  spot_cfg.normalize_scope = fusion::NormalizeScope::matrix;
  const double v = fusion::union_scores(spot, spot_cfg)(0, 1);
  const bool spot_ok = std::abs(v - 0.65) <= 1e-12;
  return {lex_ok && sem_ok && spot_ok,
          std::string("alpha=0 ") + (lex_ok ? "matches" : "differs") + ", alpha=1 " + (sem_ok ? "matches" : "differs") +
              fmt(", spot value %.4f", v)};
}

Outcome negative_cap() {
  Rng rng(31);
  std::vector<datagen::Article> articles;
  std::vector<lexical::Tokens> toks;
  for (int i = 0; i < 400; ++i) {
    std::string text;
    for (int k = 0; k < 12; ++k) text += "w" + std::to_string(uniform_index(rng, 60)) + " ";
    articles.push_back({"art" + std::to_string(i), text});
    toks.push_back(lexical::tokenize(text));
  }
  const auto idf = lexical::compute_idf(toks);
  std::size_t max_neg = 0;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<datagen::Question> questions;
    for (int q = 0; q < 5; ++q) {
      datagen::Question question{"q" + std::to_string(q), "", {}};
      for (int k = 0; k < 8; ++k) question.text += "w" + std::to_string(uniform_index(rng, 60)) + " ";
      std::set<std::size_t> pos;
      const auto n_pos = 1 + uniform_index(rng, 5);
      while (pos.size() < n_pos) pos.insert(uniform_index(rng, articles.size()));
      for (auto p : pos) question.positive_ids.push_back(articles[p].id);
      questions.push_back(question);
    }
    const auto pool = articles.size() > 300 && trial % 2 ? 400 : 120 + uniform_index(rng, 280);
    const std::vector<datagen::Article> subset(articles.begin(), articles.begin() + static_cast<std::ptrdiff_t>(pool));
    for (auto& q : questions) {
      for (auto& id : q.positive_ids) {
        if (std::stoul(id.substr(3)) >= pool) id = subset[uniform_index(rng, pool)].id;
      }
      std::sort(q.positive_ids.begin(), q.positive_ids.end());
      q.positive_ids.erase(std::unique(q.positive_ids.begin(), q.positive_ids.end()), q.positive_ids.end());
    }
    const auto pairs = datagen::build_retrieval_pairs(questions, subset, idf);
    for (const auto& q : questions) {
      std::size_t neg = 0;
      std::set<std::string> pos_seen;
      for (const auto& p : pairs) {
        if (p.query_id != q.id) continue;
        if (p.label) pos_seen.insert(*p.article_id); else ++neg;
      }
      const std::set<std::string> want(q.positive_ids.begin(), q.positive_ids.end());
      if (pos_seen != want) return {false, "positives lost for " + q.id};
      if (neg > 150) return {false, "more than 150 negatives"};
      max_neg = std::max(max_neg, neg);
    }
  }
  return {max_neg == 150, "30 randomized annotation sets, max negatives per question " + std::to_string(max_neg)};
}

Outcome gradient_check() {
  Rng rng(404);
  const std::uint32_t dim = 1u << 12;
  scorer::LogRegModel model(dim);
  for (auto& w : model.mutable_weights()) w = uniform_real(rng) - 0.5;
  model.set_bias(-0.2);
  double worst = 0.0;
  for (int probe = 0; probe < 100; ++probe) {
    std::string a, b;
    for (int k = 0; k < 6; ++k) a += "t" + std::to_string(uniform_index(rng, 30)) + " ";
    for (int k = 0; k < 6; ++k) b += "t" + std::to_string(uniform_index(rng, 30)) + " ";
    scorer::Example ex{scorer::featurize(a, b, dim), uniform_real(rng) < 0.5, 0.5 + uniform_real(rng)};
    const auto g = scorer::loss_gradient(model, ex);
    const double h = 1e-6;
    auto check = [&](double analytic, double& param) {
      const double saved = param;
      param = saved + h;
      const double up = scorer::example_loss(model, ex);
      param = saved - h;
      const double down = scorer::example_loss(model, ex);
      param = saved;
      const double numeric = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(analytic - numeric) / std::max(1e-8, std::max(std::abs(analytic), std::abs(numeric))));
    };
    const auto k = uniform_index(rng, ex.x.size());
    check(g.weights[k], model.mutable_weights()[ex.x.index[k]]);
    double bias = model.bias();
    const double saved_bias = bias;
    const double h2 = 1e-6;
    model.set_bias(saved_bias + h2);
    const double up = scorer::example_loss(model, ex);
    model.set_bias(saved_bias - h2);
    const double down = scorer::example_loss(model, ex);
    model.set_bias(saved_bias);
    const double numeric = (up - down) / (2 * h2);
    worst = std::max(worst, std::abs(g.bias - numeric) / std::max(1e-8, std::max(std::abs(g.bias), std::abs(numeric))));
  }
  return {worst <= 1e-4, fmt("max relative error %.3g over 100 probes", worst)};
}

Outcome negation_single_application() {
  const auto rules = datagen::read_rules((fs::path(corpus::default_data_dir()) / "negation_rules.jsonl").string());
  std::size_t checked = 0;
  for (const auto lang : {datagen::RuleLanguage::english, datagen::RuleLanguage::japanese}) {
    const auto active = datagen::rules_for(rules, lang);
    for (const auto& rule : active) {
      const std::string text = lang == datagen::RuleLanguage::english ? "The party " + rule.pattern + " act here."
                                                                       : "当事者は" + rule.pattern + "。";
      const auto out = datagen::negate(text, active);
      if (!out) return {false, "rule " + std::to_string(rule.priority) + " did not fire on its own pattern"};
      // Exactly one replacement by the chosen rule.
      const auto* used = &active.front();
      for (const auto& r : active) {
        if (r.priority == out->priority) used = &r;
      }
      const auto pos = datagen::find_match(text, *used);
      if (!pos) return {false, "reported rule does not match"};
      const std::string once = text.substr(0, *pos) + used->replacement + text.substr(*pos + used->pattern.size());
      if (out->text != once) return {false, "more than one rewrite for rule " + std::to_string(used->priority)};
      const std::vector<datagen::NegationRule> same{*used};
      const auto again = datagen::negate(out->text, same);
      if (again && again->text == text) return {false, "rule " + std::to_string(used->priority) + " reconstructs its input"};
      ++checked;
    }
  }
  return {true, std::to_string(checked) + " shipped rules spot-checked"};
}

std::map<std::string, std::string> run_pipeline(const fs::path& dir) {
  const std::string fx = lexent::testing::fixture_dir() + "/toy/";
  auto f = [&](const std::string& name) { return (dir / name).string(); };
  const std::vector<std::vector<std::string>> steps{
      {"ingest", "--input", fx + "cases", "--kind", "case", "--out", f("cases.jsonl"), "--filter-language"},
      {"ingest", "--input", fx + "queries", "--kind", "question", "--out", f("queries.jsonl")},
      {"--seed", "7", "silver", "--corpus", f("cases.jsonl"), "--out", f("silver.jsonl")},
      {"--seed", "7", "--set", "scorer.dim=65536", "train", "--pairs", f("silver.jsonl"), "--out", f("model.txt")},
      {"index", "--corpus", f("cases.jsonl"), "--out", f("index.bm25")},
      {"retrieve", "--index", f("index.bm25"), "--queries", f("queries.jsonl"), "--k", "10", "--out", f("bm25.run")},
      {"fuse", "--corpus", f("cases.jsonl"), "--queries", f("queries.jsonl"), "--run", f("bm25.run"), "--model",
       f("model.txt"), "--out", f("fused.run"), "--decisions-out", f("decisions.jsonl")},
      {"eval", "--predictions", f("decisions.jsonl"), "--gold", fx + "gold.jsonl", "--out", f("report.json"),
       "--plot-out", f("plot.tsv"), "--setting", "fused"},
  };
  for (const auto& args : steps) {
    std::ostringstream out, err;
    if (cli::run(args, out, err) != 0) throw std::runtime_error("pipeline step " + args[0] + " failed: " + err.str());
  }
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = text::read_file(e.path().string());
  return files;
}

Outcome end_to_end() {
  lexent::testing::TempDir a("accept"), b("accept");
  const auto start = std::chrono::steady_clock::now();
  const auto first = run_pipeline(a.path());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto second = run_pipeline(b.path());
  const bool same = first == second;
  return {same && secs < 10.0, fmt("pipeline %.2f s; ", secs) + std::to_string(first.size()) + " output files " +
                                   (same ? "byte-identical" : "DIFFER") + " across runs"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"F2 arithmetic", f2_arithmetic},
      {"accuracy arithmetic", accuracy_arithmetic},
      {"NFSP/NMSP sample table", sample_rows_exactness},
      {"BM25 oracle equivalence", bm25_oracle},
      {"chunk-count law", chunk_law},
      {"self-label monotonicity", selflabel_monotonicity},
      {"noise repair", noise_repair},
      {"fusion endpoints", fusion_endpoints},
      {"negative cap", negative_cap},
      {"gradient check", gradient_check},
      {"negation single application", negation_single_application},
      {"end-to-end determinism", end_to_end},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %2zu. %-28s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    if (!o.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
