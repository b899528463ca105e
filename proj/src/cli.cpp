#include "lexent/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <ostream>
#include <set>

#include "json.hpp"
#include "lexent/chunker.hpp"
#include "lexent/config.hpp"
#include "lexent/corpus.hpp"
#include "lexent/datagen.hpp"
#include "lexent/error.hpp"
#include "lexent/external.hpp"
#include "lexent/fusion.hpp"
#include "lexent/lexical.hpp"
#include "lexent/metrics.hpp"
#include "lexent/pairs.hpp"
#include "lexent/parallel.hpp"
#include "lexent/paralaw.hpp"
#include "lexent/runfile.hpp"
#include "lexent/scorer.hpp"
#include "lexent/selflabel.hpp"
#include "lexent/text.hpp"

namespace lexent::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  // global
  std::string config_path;
  std::vector<std::string> sets;
  std::int64_t seed = -1;
  int threads = 0;

  // shared file flags
  std::string input, out, corpus, queries, questions, articles, annotations, pairs, index, run, model, gold;
  std::string kind = "case";
  std::string tag;
  std::string strategy;
  std::string schedule;
  std::string rules;
  std::string language;
  std::string train_out, valid_out, out_model, out_pairs, flips, loss_out;
  std::string matrix_dir, decisions_out, combined_out, plot_out, setting, predictions;
  std::string pred_labels, gold_labels;
  std::vector<std::string> model_runs;
  std::string level = "doc";
  std::size_t k = 0;
  std::size_t cap = 0;
  std::size_t n = 0;
  std::size_t epochs = 0;
  std::size_t window = 0, stride = 0, e1 = 0, e2 = 0;
  double lr = 0.0, neg_ratio = -1.0, sample_rate = -1.0, w_sem = -1.0;
  bool filter_language = false;
  bool negate = false;
  bool keep_self = false;
};

// Explicit flags override the configuration tree.
template <typename T>
T pick(const CLI::App& sub, const char* flag, const T& flag_value, const Config& cfg, const char* key) {
  if (sub.count(flag) > 0) return flag_value;
  return cfg.get<T>(key);
}

std::uint64_t seed_of(const Config& cfg) { return cfg.get<std::uint64_t>("seed"); }

std::string data_path(const Config& cfg, const char* key, const char* file) {
  const auto explicit_path = cfg.get<std::string>(key);
  if (!explicit_path.empty()) return explicit_path;
  auto dir = cfg.get<std::string>("corpus.data_dir");
  if (dir.empty()) dir = corpus::default_data_dir();
  return (fs::path(dir) / file).string();
}

corpus::SentenceSplitter make_splitter(const Config& cfg) {
  return corpus::SentenceSplitter::from_file(data_path(cfg, "corpus.abbreviations", "abbreviations.txt"));
}

std::vector<corpus::Document> load_corpus(const std::string& path, const Config& cfg) {
  return corpus::read_corpus_jsonl(path, make_splitter(cfg));
}

lexical::Bm25Params bm25_params(const Config& cfg) {
  return {cfg.get<double>("bm25.k1"), cfg.get<double>("bm25.b")};
}

metrics::IdSets annotations_to_sets(const std::vector<Annotation>& anns) {
  metrics::IdSets out;
  for (const auto& a : anns) out[a.query_id] = {a.positive_ids.begin(), a.positive_ids.end()};
  return out;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required flag ") + flag);
}

std::unique_ptr<scorer::ScorerBackend> make_backend(const Options& o, const Config& cfg) {
  if (!o.model.empty()) {
    auto model = std::make_shared<const scorer::LogRegModel>(scorer::LogRegModel::load(o.model));
    return std::make_unique<scorer::ScorerBackend>(scorer::ScorerBackend::builtin(std::move(model)));
  }
  const auto external = cfg.get<std::string>("scorer.external");
  if (external.empty()) throw UsageError("no scorer: pass --model or set scorer.external / LEXENT_SCORER");
  auto ext = std::make_shared<scorer::ExternalScorer>(scorer::Endpoint::parse(external),
                                                      std::chrono::milliseconds(cfg.get<std::int64_t>("scorer.timeout_ms")));
  return std::make_unique<scorer::ScorerBackend>(scorer::ScorerBackend::external(std::move(ext)));
}

std::vector<datagen::Article> to_articles(const std::vector<corpus::Document>& docs) {
  std::vector<datagen::Article> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back({d.id, d.full_text()});
  return out;
}

lexical::IdfTable idf_over(const std::vector<datagen::Article>& articles) {
  std::vector<lexical::Tokens> docs;
  docs.reserve(articles.size());
  for (const auto& a : articles) docs.push_back(lexical::tokenize(a.text));
  return lexical::compute_idf(docs);
}

std::vector<datagen::Question> join_questions(const std::vector<corpus::Document>& qdocs,
                                              const std::vector<Annotation>& anns) {
  std::map<std::string, const corpus::Document*> by_id;
  for (const auto& d : qdocs) by_id.emplace(d.id, &d);
  std::vector<datagen::Question> out;
  for (const auto& a : anns) {
    const auto it = by_id.find(a.query_id);
    if (it == by_id.end()) throw DataError("annotation for unknown question '" + a.query_id + "'");
    out.push_back({a.query_id, it->second->full_text(), a.positive_ids});
  }
  return out;
}

// ---------------------------------------------------------------- commands

int cmd_ingest(const Options& o, const CLI::App& sub, const Config& cfg, std::ostream& out) {
  require(o.input, "--input");
  require(o.out, "--out");
  const auto splitter = make_splitter(cfg);
  std::vector<corpus::Document> docs;
  if (fs::is_directory(o.input)) {
    docs = corpus::ingest_collection(o.input, corpus::parse_kind(o.kind), splitter);
  } else {
    docs = corpus::read_corpus_jsonl(o.input, splitter);
  }
  std::size_t dropped = 0;
  if (pick(sub, "--filter-language", o.filter_language, cfg, "corpus.filter_language")) {
    const auto filter = corpus::LanguageFilter::from_files(data_path(cfg, "corpus.stopwords_en", "stopwords_en.txt"),
                                                           data_path(cfg, "corpus.stopwords_fr", "stopwords_fr.txt"));
    for (auto& d : docs) {
      auto kept = corpus::filter_language(d.paragraphs, filter);
      dropped += d.paragraphs.size() - kept.size();
      for (std::size_t i = 0; i < kept.size(); ++i) kept[i].index = i;
      d.paragraphs = std::move(kept);
    }
  }
  corpus::write_corpus_jsonl(o.out, docs);
  out << "ingested " << docs.size() << " documents";
  if (dropped > 0) out << ", dropped " << dropped << " foreign-language paragraphs";
  out << "\n";
  return kExitOk;
}

int cmd_index(const Options& o, const Config& cfg, std::ostream& out) {
  require(o.corpus, "--corpus");
  require(o.out, "--out");
  const auto docs = load_corpus(o.corpus, cfg);
  std::vector<std::pair<std::string, lexical::Tokens>> entries;
  if (o.level == "doc") {
    for (const auto& d : docs) entries.emplace_back(d.id, lexical::tokenize(d.full_text()));
  } else if (o.level == "paragraph") {
    for (const auto& d : docs) {
      for (const auto& p : d.paragraphs) entries.emplace_back(d.id + "#" + std::to_string(p.index), lexical::tokenize(p.text));
    }
  } else {
    throw UsageError("--level must be doc or paragraph");
  }
  const auto idx = lexical::Bm25Index::build(entries, bm25_params(cfg));
  idx.save(o.out);
  out << "indexed " << idx.n_docs() << " documents, " << idx.vocabulary_size() << " terms\n";
  return kExitOk;
}

int cmd_retrieve(const Options& o, const CLI::App& sub, const Config& cfg, std::ostream& out) {
  require(o.index, "--index");
  require(o.queries, "--queries");
  require(o.out, "--out");
  const auto k = pick<std::size_t>(sub, "--k", o.k, cfg, "bm25.k");
  if (k == 0) throw UsageError("--k must be >= 1");
  const auto idx = lexical::Bm25Index::load(o.index);
  const auto queries = load_corpus(o.queries, cfg);
  std::vector<lexical::Tokens> tokens;
  for (const auto& q : queries) tokens.push_back(lexical::tokenize(q.full_text()));
  const auto scores = lexical::bm25_scores_batch(idx, tokens);

  std::vector<runfile::RunRecord> records;
  const std::string tag = o.tag.empty() ? "bm25" : o.tag;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    auto ranked = lexical::rank_scores(idx.doc_ids(), scores[q], k + 1);
    if (!o.keep_self) {
      ranked.erase(std::remove_if(ranked.begin(), ranked.end(), [&](const auto& d) { return d.doc_id == queries[q].id; }),
                   ranked.end());
    }
    if (ranked.size() > k) ranked.resize(k);
    for (auto& r : runfile::to_records(queries[q].id, ranked, tag)) records.push_back(std::move(r));
  }
  runfile::write_run(o.out, records);
  out << "retrieved " << records.size() << " rows for " << queries.size() << " queries\n";
  return kExitOk;
}

int cmd_chunk(const Options& o, const CLI::App& sub, const Config& cfg, std::ostream& out) {
  require(o.pairs, "--pairs");
  require(o.out, "--out");
  chunker::ChunkSpec spec{pick<std::size_t>(sub, "--window", o.window, cfg, "chunk.window"),
                          pick<std::size_t>(sub, "--stride", o.stride, cfg, "chunk.stride")};
  spec.validate();
  std::vector<LabeledPair> result;
  const auto input = read_pairs(o.pairs);
  for (std::size_t i = 0; i < input.size(); ++i) {
    const auto& p = input[i];
    const std::string article_id = p.article_id.value_or("pair" + std::to_string(i));
    for (auto& c : chunker::expand_pairs(p.query_id, p.text_a, article_id, lexical::tokenize(p.text_b), p.label, spec)) {
      c.weight = p.weight;
      result.push_back(std::move(c));
    }
  }
  write_pairs(o.out, result);
  out << "expanded " << input.size() << " pairs into " << result.size() << " chunk pairs\n";
  return kExitOk;
}

int cmd_pairs(const Options& o, const CLI::App& sub, const Config& cfg, std::ostream& out) {
  require(o.questions, "--questions");
  require(o.articles, "--articles");
  require(o.annotations, "--annotations");
  require(o.out, "--out");
  const auto articles = to_articles(load_corpus(o.articles, cfg));
  const auto questions = join_questions(load_corpus(o.questions, cfg), read_annotations(o.annotations));
  const auto cap = pick<std::size_t>(sub, "--cap", o.cap, cfg, "datagen.cap");
  const auto result = datagen::build_retrieval_pairs(questions, articles, idf_over(articles), cap);
  write_pairs(o.out, result);
  out << "built " << result.size() << " pairs for " << questions.size() << " questions\n";
  return kExitOk;
}

int cmd_augment(const Options& o, const CLI::App& sub, const Config& cfg, std::ostream& out) {
  require(o.questions, "--questions");
  require(o.articles, "--articles");
  require(o.annotations, "--annotations");
  require(o.out, "--out");
  const auto articles = to_articles(load_corpus(o.articles, cfg));
  std::map<std::string, const datagen::Article*> by_id;
  for (const auto& a : articles) by_id.emplace(a.id, &a);
  const auto questions = join_questions(load_corpus(o.questions, cfg), read_annotations(o.annotations));
  const auto n = pick<std::size_t>(sub, "--n", o.n, cfg, "datagen.augment_n");
  const auto idf = idf_over(articles);

  std::vector<datagen::NegationRule> rules;
  if (o.negate || !o.rules.empty()) {
    const std::string path = !o.rules.empty() ? o.rules : data_path(cfg, "datagen.rules", "negation_rules.jsonl");
    const auto lang = datagen::parse_rule_language(o.language.empty() ? cfg.get<std::string>("datagen.language") : o.language);
    rules = datagen::rules_for(datagen::read_rules(path), lang);
  }

  std::vector<LabeledPair> result;
  std::size_t negated = 0;
  for (const auto& q : questions) {
    std::vector<datagen::Article> gold;
    for (const auto& id : q.positive_ids) {
      const auto it = by_id.find(id);
      if (it == by_id.end()) throw DataError("question '" + q.id + "' annotates unknown article '" + id + "'");
      gold.push_back(*it->second);
    }
    const auto augmented = datagen::augment_relevant(q.text, gold, articles, n, idf);
    const auto negation = rules.empty() ? std::nullopt : datagen::negate(q.text, rules);
    for (std::size_t i = 0; i < augmented.size(); ++i) {
      LabeledPair p;
      p.query_id = q.id;
      p.text_a = q.text;
      p.text_b = augmented[i].text;
      p.label = true;
      p.provenance = i < gold.size() ? Provenance::gold : Provenance::augmented;
      p.article_id = augmented[i].id;
      if (negation) {
        LabeledPair neg = p;
        neg.text_a = negation->text;
        neg.label = !p.label;
        neg.provenance = Provenance::augmented;
        result.push_back(std::move(p));
        result.push_back(std::move(neg));
        ++negated;
      } else {
        result.push_back(std::move(p));
      }
    }
  }
  write_pairs(o.out, result);
  out << "wrote " << result.size() << " pairs (" << negated << " negated)\n";
  return kExitOk;
}

int cmd_silver(const Options& o, const CLI::App& sub, const Config& cfg, std::ostream& out) {
  require(o.corpus, "--corpus");
  require(o.out, "--out");
  datagen::SilverConfig sc;
  sc.neg_ratio = pick(sub, "--neg-ratio", o.neg_ratio, cfg, "datagen.neg_ratio");
  sc.sample_rate = pick(sub, "--sample-rate", o.sample_rate, cfg, "datagen.sample_rate");
  sc.seed = seed_of(cfg);
  const auto result = datagen::build_silver_supporting(load_corpus(o.corpus, cfg), sc);
  write_pairs(o.out, result);
  const auto positives = std::count_if(result.begin(), result.end(), [](const auto& p) { return p.label; });
  out << "wrote " << result.size() << " silver pairs (" << positives << " positive)\n";
  return kExitOk;
}

int cmd_paralaw(const Options& o, const Config& cfg, std::ostream& out) {
  require(o.input, "--input");
  require(o.out, "--out");
  paralaw::Languages langs{cfg.get<std::string>("paralaw.lang_a"), cfg.get<std::string>("paralaw.lang_b")};
  const auto samples = paralaw::build_dataset(paralaw::read_parallel_tsv(o.input), seed_of(cfg), langs);
  paralaw::write_samples(o.out, samples);
  out << "generated " << samples.size() << " samples";
  if (!o.train_out.empty() || !o.valid_out.empty()) {
    require(o.train_out, "--train-out");
    require(o.valid_out, "--valid-out");
    const auto [train, valid] = paralaw::split(samples, seed_of(cfg), cfg.get<double>("paralaw.train_fraction"));
    paralaw::write_samples(o.train_out, train);
    paralaw::write_samples(o.valid_out, valid);
    out << " (" << train.size() << " train / " << valid.size() << " validation)";
  }
  out << "\n";
  return kExitOk;
}

void write_loss_trace(const std::string& path, const std::vector<double>& trace) {
  std::string s = "epoch\tmean_loss\n";
  char buf[64];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu\t%.17g\n", i + 1, trace[i]);
    s += buf;
  }
  text::write_file(path, s);
}

int cmd_train(const Options& o, const CLI::App& sub, const Config& cfg, std::ostream& out) {
  require(o.out, "--out");
  scorer::TrainSchedule schedule;
  if (!o.schedule.empty()) {
    schedule = scorer::read_schedule(o.schedule);
  } else {
    require(o.pairs, "--pairs or --schedule");
    scorer::TrainStage stage;
    stage.source = o.pairs;
    stage.data = read_pairs(o.pairs);
    stage.epochs = pick<std::size_t>(sub, "--epochs", o.epochs, cfg, "scorer.epochs");
    stage.learning_rate = pick(sub, "--lr", o.lr, cfg, "scorer.learning_rate");
    schedule.stages.push_back(std::move(stage));
  }
  const auto result = scorer::train(schedule, seed_of(cfg), cfg.get<std::uint32_t>("scorer.dim"));
  result.model.save(o.out);
  if (!o.loss_out.empty()) write_loss_trace(o.loss_out, result.loss_trace);
  out << "trained " << result.loss_trace.size() << " epochs";
  if (!result.loss_trace.empty()) out << ", final mean loss " << result.loss_trace.back();
  out << "\n";
  return kExitOk;
}

int cmd_selflabel(const Options& o, const CLI::App& sub, const Config& cfg, std::ostream& out) {
  require(o.pairs, "--pairs");
  require(o.out_model, "--out-model");
  selflabel::SelfLabelConfig sc;
  sc.e1 = pick<std::size_t>(sub, "--e1", o.e1, cfg, "selflabel.e1");
  sc.e2 = pick<std::size_t>(sub, "--e2", o.e2, cfg, "selflabel.e2");
  sc.decision_threshold = cfg.get<double>("selflabel.threshold");
  sc.learning_rate = pick(sub, "--lr", o.lr, cfg, "selflabel.learning_rate");
  sc.rounds = cfg.get<std::size_t>("selflabel.rounds");
  sc.dim = cfg.get<std::uint32_t>("scorer.dim");
  auto pairs = read_pairs(o.pairs);
  std::vector<bool> y0;
  for (const auto& p : pairs) y0.push_back(p.label);
  const auto result = selflabel::run_self_label(pairs, y0, sc, seed_of(cfg));
  result.model.save(o.out_model);
  if (!o.out_pairs.empty()) {
    for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i].label = result.labels[i];
    write_pairs(o.out_pairs, pairs);
  }
  if (!o.flips.empty()) selflabel::write_flip_report(o.flips, result.flipped);
  out << "self-labeling flipped " << result.flipped.size() << " of "
      << std::count(y0.begin(), y0.end(), true) << " positive labels\n";
  return kExitOk;
}

fusion::FusionConfig fusion_config(const Options& o, const CLI::App& sub, const Config& cfg) {
  fusion::FusionConfig fc;
  fc.w_sem = pick(sub, "--w-sem", o.w_sem, cfg, "fusion.w_sem");
  fc.aggregation = fusion::parse_aggregation(cfg.get<std::string>("fusion.aggregation"));
  fc.normalize_lex = cfg.get<bool>("fusion.normalize_lex");
  fc.normalize_scope = fusion::parse_normalize_scope(cfg.get<std::string>("fusion.normalize_scope"));
  fc.validate();
  return fc;
}

int cmd_fuse(const Options& o, const CLI::App& sub, const Config& cfg, std::ostream& out) {
  require(o.corpus, "--corpus");
  require(o.queries, "--queries");
  require(o.out, "--out");
  const auto config = fusion_config(o, sub, cfg);
  const auto strategy = fusion::DecisionStrategy::parse(o.strategy.empty() ? cfg.get<std::string>("fusion.strategy") : o.strategy);
  const auto docs = load_corpus(o.corpus, cfg);
  const auto queries = load_corpus(o.queries, cfg);
  std::map<std::string, const corpus::Document*> by_id;
  for (const auto& d : docs) by_id.emplace(d.id, &d);

  std::map<std::string, std::vector<lexical::ScoredDoc>> candidate_runs;
  if (!o.run.empty()) candidate_runs = runfile::by_query(runfile::read_run(o.run));

  const auto pindex = fusion::ParagraphIndex::build(docs, bm25_params(cfg));
  const auto backend = make_backend(o, cfg);
  if (!o.matrix_dir.empty()) fs::create_directories(o.matrix_dir);

  std::vector<runfile::RunRecord> records;
  std::vector<Annotation> decisions;
  const std::string tag = o.tag.empty() ? "fused" : o.tag;
  for (const auto& q : queries) {
    std::vector<const corpus::Document*> candidates;
    if (!o.run.empty()) {
      const auto it = candidate_runs.find(q.id);
      if (it == candidate_runs.end()) continue;
      for (const auto& c : it->second) {
        const auto d = by_id.find(c.doc_id);
        if (d == by_id.end()) throw DataError("run lists '" + c.doc_id + "' which is not in the corpus");
        candidates.push_back(d->second);
      }
    } else {
      for (const auto& d : docs) {
        if (d.id != q.id) candidates.push_back(&d);
      }
    }
    if (candidates.empty()) continue;
    std::vector<fusion::ScoreMatrixPair> matrices;
    const auto ranked = fusion::rank(q, candidates, config, *backend, pindex, o.matrix_dir.empty() ? nullptr : &matrices);
    for (auto& r : runfile::to_records(q.id, ranked, tag)) records.push_back(std::move(r));
    decisions.push_back({q.id, fusion::decide(ranked, strategy)});
    for (const auto& m : matrices) {
      const auto stem = (fs::path(o.matrix_dir) / (m.query_id + "__" + m.cand_id)).string();
      text::write_file(stem + ".lex.mat", fusion::format_matrix(m.lex));
      text::write_file(stem + ".sem.mat", fusion::format_matrix(m.sem));
      text::write_file(stem + ".fused.mat", fusion::format_matrix(*m.fused));
    }
  }
  runfile::write_run(o.out, records);
  if (!o.decisions_out.empty()) write_annotations(o.decisions_out, decisions);
  out << "fused rankings for " << decisions.size() << " queries (strategy " << strategy.to_string() << ")\n";
  return kExitOk;
}

int cmd_ensemble(const Options& o, const Config& cfg, std::ostream& out) {
  require(o.gold, "--gold");
  require(o.out, "--out");
  if (o.model_runs.empty()) throw UsageError("ensemble needs at least one --model-run id=path");
  std::map<std::string, fusion::QueryScores> scores;
  for (const auto& spec : o.model_runs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--model-run expects id=path, got '" + spec + "'");
    const auto id = spec.substr(0, eq);
    if (scores.count(id) != 0) throw UsageError("duplicate model id '" + id + "'");
    scores[id] = runfile::by_query(runfile::read_run(spec.substr(eq + 1)));
  }
  const auto strategy = fusion::DecisionStrategy::parse(o.strategy.empty() ? cfg.get<std::string>("fusion.strategy") : o.strategy);
  const auto gold = annotations_to_sets(read_annotations(o.gold));
  const auto weights = fusion::learn_ensemble(scores, gold, strategy, cfg.get<double>("eval.beta"));
  json w = json::object();
  for (std::size_t i = 0; i < weights.model_ids.size(); ++i) w[weights.model_ids[i]] = weights.weights[i];
  json doc{{"weights", w}, {"metric", weights.metric}, {"strategy", strategy.to_string()}};
  text::write_file(o.out, doc.dump(2) + "\n");
  if (!o.combined_out.empty()) {
    std::vector<runfile::RunRecord> records;
    for (const auto& [q, ranked] : fusion::combine(scores, weights)) {
      for (auto& r : runfile::to_records(q, ranked, o.tag.empty() ? "ensemble" : o.tag)) records.push_back(std::move(r));
    }
    runfile::write_run(o.combined_out, records);
  }
  out << w.dump() << "\n";
  return kExitOk;
}

int cmd_eval(const Options& o, const Config& cfg, std::ostream& out) {
  metrics::MetricsReport report;
  bool have_sets = false;
  if (!o.run.empty() || !o.predictions.empty()) {
    require(o.gold, "--gold");
    const auto gold = annotations_to_sets(read_annotations(o.gold));
    metrics::IdSets predictions;
    if (!o.predictions.empty()) {
      predictions = annotations_to_sets(read_annotations(o.predictions));
    } else {
      const std::string strat = o.strategy.empty() ? cfg.get<std::string>("eval.strategy") : o.strategy;
      for (const auto& [q, ranked] : runfile::by_query(runfile::read_run(o.run))) {
        if (strat.empty()) {
          for (const auto& d : ranked) predictions[q].insert(d.doc_id);
        } else {
          const auto picked = fusion::decide(ranked, fusion::DecisionStrategy::parse(strat));
          predictions[q] = {picked.begin(), picked.end()};
        }
      }
    }
    report = metrics::evaluate(predictions, gold);
    have_sets = true;
  }
  if (!o.pred_labels.empty() || !o.gold_labels.empty()) {
    require(o.pred_labels, "--pred-labels");
    require(o.gold_labels, "--gold-labels");
    std::vector<bool> pred, gold;
    for (const auto& p : read_pairs(o.pred_labels)) pred.push_back(p.label);
    for (const auto& p : read_pairs(o.gold_labels)) gold.push_back(p.label);
    report.accuracy = metrics::accuracy(pred, gold);
  } else if (!have_sets) {
    throw UsageError("eval needs --run/--predictions with --gold, or --pred-labels with --gold-labels");
  }
  const auto json_text = report.to_json();
  out << json_text << "\n";
  if (!o.out.empty()) text::write_file(o.out, json_text + "\n");
  if (!o.plot_out.empty()) {
    const bool fresh = !fs::exists(o.plot_out);
    std::string row;
    if (fresh) row += "setting\tp_macro\tr_macro\tf2\treturn\tretrieved\n";
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s\t%.6f\t%.6f\t%.6f\t%zu\t%zu\n", o.setting.empty() ? "run" : o.setting.c_str(),
                  report.p_macro, report.r_macro, report.f2, report.return_count, report.retrieved_count);
    row += buf;
    std::string existing = fresh ? std::string() : text::read_file(o.plot_out);
    text::write_file(o.plot_out, existing + row);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lexent: lexical/semantic legal retrieval and entailment toolkit", "lexent"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_path, "JSON configuration file");
  app.add_option("--set", o.sets, "Override a configuration key (section.key=value)")->take_all();
  app.add_option("--seed", o.seed, "Seed for every random choice");
  app.add_option("--threads", o.threads, "OpenMP thread count");

  auto* ingest = app.add_subcommand("ingest", "Read a directory of text files or a JSON-lines corpus");
  ingest->add_option("--input", o.input, "Directory or corpus .jsonl");
  ingest->add_option("--kind", o.kind, "case | article | question");
  ingest->add_option("--out", o.out, "Output corpus .jsonl");
  ingest->add_flag("--filter-language", o.filter_language, "Drop French paragraphs");

  auto* index = app.add_subcommand("index", "Build a BM25 index");
  index->add_option("--corpus", o.corpus, "Corpus .jsonl");
  index->add_option("--out", o.out, "Index file");
  index->add_option("--level", o.level, "doc | paragraph");

  auto* retrieve = app.add_subcommand("retrieve", "BM25 top-k candidates per query");
  retrieve->add_option("--index", o.index, "Index file");
  retrieve->add_option("--queries", o.queries, "Query corpus .jsonl");
  retrieve->add_option("--k", o.k, "Candidates per query");
  retrieve->add_option("--out", o.out, "Run file");
  retrieve->add_option("--tag", o.tag, "Run tag");
  retrieve->add_flag("--keep-self", o.keep_self, "Keep a document with the query's own id");

  auto* chunk = app.add_subcommand("chunk", "Expand (question, article) pairs into (question, chunk) pairs");
  chunk->add_option("--pairs", o.pairs, "Pair file");
  chunk->add_option("--window", o.window, "Window size in tokens");
  chunk->add_option("--stride", o.stride, "Stride in tokens");
  chunk->add_option("--out", o.out, "Output pair file");

  auto* pairs = app.add_subcommand("pairs", "Training pairs with tf-idf capped negatives");
  pairs->add_option("--questions", o.questions, "Question corpus .jsonl");
  pairs->add_option("--articles", o.articles, "Article corpus .jsonl");
  pairs->add_option("--annotations", o.annotations, "Annotation .jsonl");
  pairs->add_option("--cap", o.cap, "Maximum negatives per question");
  pairs->add_option("--out", o.out, "Output pair file");

  auto* augment = app.add_subcommand("augment", "Append tf-idf neighbours to gold articles; optional negation");
  augment->add_option("--questions", o.questions, "Question corpus .jsonl");
  augment->add_option("--articles", o.articles, "Article corpus .jsonl");
  augment->add_option("--annotations", o.annotations, "Annotation .jsonl");
  augment->add_option("--n", o.n, "Articles appended per question");
  augment->add_flag("--negate", o.negate, "Add label-flipped negated questions (shipped rules)");
  augment->add_option("--rules", o.rules, "Negation rule file (implies --negate)");
  augment->add_option("--language", o.language, "english | japanese");
  augment->add_option("--out", o.out, "Output pair file");

  auto* silver = app.add_subcommand("silver", "Silver supporting pairs from case law");
  silver->add_option("--corpus", o.corpus, "Case corpus .jsonl");
  silver->add_option("--neg-ratio", o.neg_ratio, "Negatives per positive");
  silver->add_option("--sample-rate", o.sample_rate, "Fraction of positives kept");
  silver->add_option("--out", o.out, "Output pair file");

  auto* para = app.add_subcommand("paralaw", "NFSP/NMSP samples from an aligned corpus, with optional 9:1 split");
  para->add_option("--input", o.input, "Aligned TSV (doc_id, pos, text_a, text_b)");
  para->add_option("--out", o.out, "All samples .jsonl");
  para->add_option("--train-out", o.train_out, "Training split .jsonl");
  para->add_option("--valid-out", o.valid_out, "Validation split .jsonl");

  auto* train = app.add_subcommand("train", "Train the built-in classifier");
  train->add_option("--schedule", o.schedule, "Schedule JSON (stages run in order)");
  train->add_option("--pairs", o.pairs, "Single-stage pair file");
  train->add_option("--epochs", o.epochs, "Epochs for --pairs");
  train->add_option("--lr", o.lr, "Learning rate for --pairs");
  train->add_option("--out", o.out, "Model file");
  train->add_option("--loss-out", o.loss_out, "Per-epoch loss TSV");

  auto* self = app.add_subcommand("selflabel", "Train, relabel noisy positives, retrain");
  self->add_option("--pairs", o.pairs, "Pair file");
  self->add_option("--e1", o.e1, "Epochs before relabeling");
  self->add_option("--e2", o.e2, "Epochs after relabeling");
  self->add_option("--lr", o.lr, "Learning rate");
  self->add_option("--out-model", o.out_model, "Model file");
  self->add_option("--out-pairs", o.out_pairs, "Relabeled pair file");
  self->add_option("--flips", o.flips, "Flip report .jsonl");

  auto* fuse = app.add_subcommand("fuse", "Rank candidates by fused lexical/semantic matrices and decide");
  fuse->add_option("--corpus", o.corpus, "Candidate corpus .jsonl");
  fuse->add_option("--queries", o.queries, "Query corpus .jsonl");
  fuse->add_option("--run", o.run, "Candidate run (e.g. from retrieve)");
  fuse->add_option("--model", o.model, "Built-in model file");
  fuse->add_option("--w-sem", o.w_sem, "Semantic weight");
  fuse->add_option("--strategy", o.strategy, "top1 | topk:<k> | relative:<beta>");
  fuse->add_option("--out", o.out, "Fused run file");
  fuse->add_option("--decisions-out", o.decisions_out, "Selected ids .jsonl");
  fuse->add_option("--matrix-dir", o.matrix_dir, "Directory for matrix cache files");
  fuse->add_option("--tag", o.tag, "Run tag");

  auto* ensemble = app.add_subcommand("ensemble", "Learn ensemble weights on dev gold");
  ensemble->add_option("--model-run", o.model_runs, "id=run-file (repeatable)");
  ensemble->add_option("--gold", o.gold, "Dev annotations .jsonl");
  ensemble->add_option("--strategy", o.strategy, "Decision strategy");
  ensemble->add_option("--out", o.out, "Weights JSON");
  ensemble->add_option("--combined-out", o.combined_out, "Combined run file");
  ensemble->add_option("--tag", o.tag, "Run tag");

  auto* eval = app.add_subcommand("eval", "Macro P/R/F2, accuracy, Return/Retrieved");
  eval->add_option("--run", o.run, "Run file");
  eval->add_option("--predictions", o.predictions, "Selected ids .jsonl");
  eval->add_option("--strategy", o.strategy, "Apply a decision strategy to the run");
  eval->add_option("--gold", o.gold, "Gold annotations .jsonl");
  eval->add_option("--pred-labels", o.pred_labels, "Predicted labels (pair file)");
  eval->add_option("--gold-labels", o.gold_labels, "Gold labels (pair file)");
  eval->add_option("--out", o.out, "Report JSON file");
  eval->add_option("--plot-out", o.plot_out, "Append a metric row to this TSV");
  eval->add_option("--setting", o.setting, "Setting label for --plot-out");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    Config cfg;
    if (!o.config_path.empty()) cfg.merge_file(o.config_path);
    cfg.apply_environment();
    for (const auto& s : o.sets) cfg.set(s);
    if (o.seed >= 0) cfg.set("seed=" + std::to_string(o.seed));
    if (o.threads > 0) set_num_threads(o.threads);

    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "ingest") return cmd_ingest(o, *sub, cfg, out);
    if (name == "index") return cmd_index(o, cfg, out);
    if (name == "retrieve") return cmd_retrieve(o, *sub, cfg, out);
    if (name == "chunk") return cmd_chunk(o, *sub, cfg, out);
    if (name == "pairs") return cmd_pairs(o, *sub, cfg, out);
    if (name == "augment") return cmd_augment(o, *sub, cfg, out);
    if (name == "silver") return cmd_silver(o, *sub, cfg, out);
    if (name == "paralaw") return cmd_paralaw(o, cfg, out);
    if (name == "train") return cmd_train(o, *sub, cfg, out);
    if (name == "selflabel") return cmd_selflabel(o, *sub, cfg, out);
    if (name == "fuse") return cmd_fuse(o, *sub, cfg, out);
    if (name == "ensemble") return cmd_ensemble(o, cfg, out);
    if (name == "eval") return cmd_eval(o, cfg, out);
    err << "error: unhandled subcommand " << name << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace lexent::cli
