#include "lexent/scorer.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>

#include "json.hpp"
#include "lexent/error.hpp"
#include "lexent/external.hpp"
#include "lexent/lexical.hpp"
#include "lexent/text.hpp"

namespace lexent::scorer {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

SparseVector featurize(std::string_view text_a, std::string_view text_b, std::uint32_t dim) {
  if (dim == 0 || (dim & (dim - 1)) != 0) throw UsageError("feature dimension must be a power of two");
  const std::uint64_t mask = dim - 1;

  std::map<std::string, double> tf_a, tf_b;
  for (auto& t : lexical::tokenize(text_a)) tf_a[std::move(t)] += 1.0;
  for (auto& t : lexical::tokenize(text_b)) tf_b[std::move(t)] += 1.0;

  std::map<std::uint32_t, double> acc;
  auto add = [&](std::string_view ns, const std::string& term, double v) {
    std::string key(ns);
    key += term;
    acc[static_cast<std::uint32_t>(fnv1a(key) & mask)] += v;
  };
  for (const auto& [t, c] : tf_a) add("a:", t, c);
  for (const auto& [t, c] : tf_b) add("b:", t, c);
  for (const auto& [t, c] : tf_a) {
    const auto it = tf_b.find(t);
    if (it != tf_b.end()) add("x:", t, std::min(c, it->second));
  }

  SparseVector v;
  double sq = 0.0;
  for (const auto& [i, x] : acc) sq += x * x;
  const double norm = std::sqrt(sq);
  v.index.reserve(acc.size());
  v.value.reserve(acc.size());
  for (const auto& [i, x] : acc) {
    v.index.push_back(i);
    v.value.push_back(norm > 0.0 ? x / norm : 0.0);
  }
  return v;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LogRegModel::LogRegModel(std::uint32_t dim, std::uint64_t seed) : dim_(dim), seed_(seed), weights_(dim, 0.0) {
  if (dim == 0 || (dim & (dim - 1)) != 0) throw UsageError("model dimension must be a power of two");
}

double LogRegModel::margin(const SparseVector& x) const {
  double z = bias_;
  for (std::size_t k = 0; k < x.index.size(); ++k) z += weights_[x.index[k] & (dim_ - 1)] * x.value[k];
  return z;
}

double LogRegModel::predict(const SparseVector& x) const {
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(sigmoid(margin(x)), lo, hi);
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_num(std::string_view s, const char* what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw DataError(std::string("model file: bad ") + what + " '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string LogRegModel::serialize() const {
  std::string out = "LOGREGv1 " + std::to_string(dim_) + " " + fmt(bias_) + " " + std::to_string(seed_) + "\n";
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] != 0.0) {
      out += std::to_string(i);
      out += '\t';
      out += fmt(weights_[i]);
      out += '\n';
    }
  }
  return out;
}

LogRegModel LogRegModel::deserialize(std::string_view data) {
  const auto nl = data.find('\n');
  const std::string_view header = data.substr(0, nl);
  std::vector<std::string_view> parts;
  for (std::size_t start = 0;;) {
    const auto sp = header.find(' ', start);
    parts.push_back(header.substr(start, sp == std::string_view::npos ? std::string_view::npos : sp - start));
    if (sp == std::string_view::npos) break;
    start = sp + 1;
  }
  if (parts.size() != 4 || parts[0] != "LOGREGv1") throw DataError("model file: expected 'LOGREGv1 <dim> <bias> <seed>' header");
  LogRegModel m(parse_num<std::uint32_t>(parts[1], "dim"), parse_num<std::uint64_t>(parts[3], "seed"));
  m.bias_ = parse_num<double>(parts[2], "bias");
  std::string_view rest = nl == std::string_view::npos ? std::string_view{} : data.substr(nl + 1);
  while (!rest.empty()) {
    const auto end = rest.find('\n');
    const std::string_view line = rest.substr(0, end);
    rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end + 1);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw DataError("model file: bad weight line '" + std::string(line) + "'");
    const auto idx = parse_num<std::uint32_t>(line.substr(0, tab), "index");
    if (idx >= m.dim_) throw DataError("model file: weight index out of range");
    const double w = parse_num<double>(line.substr(tab + 1), "weight");
    if (!std::isfinite(w)) throw DataError("model file: non-finite weight");
    m.weights_[idx] = w;
  }
  if (!std::isfinite(m.bias_)) throw DataError("model file: non-finite bias");
  return m;
}

void LogRegModel::save(const std::string& path) const { text::write_file(path, serialize()); }

LogRegModel LogRegModel::load(const std::string& path) { return deserialize(text::read_file(path)); }

std::vector<Example> make_examples(const std::vector<LabeledPair>& pairs, std::uint32_t dim) {
  std::vector<Example> out(pairs.size());
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& p = pairs[static_cast<std::size_t>(i)];
    auto& ex = out[static_cast<std::size_t>(i)];
    ex.x = featurize(p.text_a, p.text_b, dim);
    ex.y = p.label;
    ex.weight = p.weight;
  }
  return out;
}

double example_loss(const LogRegModel& model, const Example& ex) {
  // log(1 + exp(-z)) for y = 1, log(1 + exp(z)) for y = 0, computed stably.
  const double z = model.margin(ex.x);
  const double s = ex.y ? -z : z;
  const double l = s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
  return ex.weight * l;
}

Gradient loss_gradient(const LogRegModel& model, const Example& ex) {
  const double g = ex.weight * (sigmoid(model.margin(ex.x)) - (ex.y ? 1.0 : 0.0));
  Gradient grad;
  grad.weights.resize(ex.x.size());
  for (std::size_t k = 0; k < ex.x.size(); ++k) grad.weights[k] = g * ex.x.value[k];
  grad.bias = g;
  return grad;
}

double mean_loss(const LogRegModel& model, const std::vector<Example>& data) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : data) total += example_loss(model, ex);
  return total / static_cast<double>(data.size());
}

Trainer::Trainer(LogRegModel init, std::uint64_t seed) : model_(std::move(init)), seed_(seed), rng_(substream_seed(seed, 0x7a1ULL)) {}

void Trainer::begin_stage() { stage_epoch_ = 0; }

std::vector<double> Trainer::run_epochs(const std::vector<Example>& data, std::size_t epochs, double learning_rate) {
  if (epochs == 0) return {};
  if (data.empty()) throw DataError("cannot train on an empty dataset");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw UsageError("learning rate must be positive");

  std::vector<double> trace;
  trace.reserve(epochs);
  auto& w = model_.mutable_weights();
  const std::uint32_t mask = model_.dim() - 1;
  for (std::size_t e = 0; e < epochs; ++e) {
    ++stage_epoch_;
    const double step = learning_rate / std::sqrt(static_cast<double>(stage_epoch_));
    for (const auto i : shuffled_indices(data.size(), rng_)) {
      const Example& ex = data[i];
      const double g = ex.weight * (sigmoid(model_.margin(ex.x)) - (ex.y ? 1.0 : 0.0));
      for (std::size_t k = 0; k < ex.x.size(); ++k) w[ex.x.index[k] & mask] -= step * g * ex.x.value[k];
      model_.set_bias(model_.bias() - step * g);
    }
    trace.push_back(mean_loss(model_, data));
  }
  return trace;
}

TrainResult train(const TrainSchedule& schedule, std::uint64_t seed, std::uint32_t dim) {
  if (schedule.stages.empty()) throw UsageError("training schedule needs at least one stage");
  for (const auto& stage : schedule.stages) {
    if (stage.epochs > 0 && stage.data.empty()) {
      throw DataError("training stage" + (stage.source.empty() ? std::string() : " '" + stage.source + "'") +
                      " has positive epochs but no data");
    }
  }
  Trainer trainer(LogRegModel(dim, seed), seed);
  std::vector<double> trace;
  for (const auto& stage : schedule.stages) {
    trainer.begin_stage();
    if (stage.epochs == 0) continue;
    const auto examples = make_examples(stage.data, dim);
    for (const double l : trainer.run_epochs(examples, stage.epochs, stage.learning_rate)) trace.push_back(l);
  }
  return {trainer.release(), std::move(trace)};
}

TrainSchedule read_schedule(const std::string& path) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(text::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  TrainSchedule schedule;
  const auto base = std::filesystem::path(path).parent_path();
  try {
    for (const auto& s : obj.at("stages")) {
      TrainStage stage;
      std::filesystem::path ds = s.at("dataset").get<std::string>();
      if (ds.is_relative()) ds = base / ds;
      stage.source = ds.string();
      const auto epochs = s.value("epochs", 1);
      if (epochs < 0) throw DataError(path + ": epochs must be >= 0");
      stage.epochs = static_cast<std::size_t>(epochs);
      stage.learning_rate = s.value("learning_rate", 0.1);
      stage.data = read_pairs(stage.source);
      schedule.stages.push_back(std::move(stage));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  if (schedule.stages.empty()) throw DataError(path + ": schedule has no stages");
  return schedule;
}

ScorerBackend ScorerBackend::builtin(std::shared_ptr<const LogRegModel> model) {
  if (!model) throw UsageError("builtin backend needs a model");
  return ScorerBackend(std::move(model));
}

ScorerBackend ScorerBackend::external(std::shared_ptr<ExternalScorer> scorer) {
  if (!scorer) throw UsageError("external backend needs a scorer");
  return ScorerBackend(std::move(scorer));
}

std::vector<double> predict_builtin(const LogRegModel& model, const std::vector<TextPair>& pairs) {
  std::vector<double> out(pairs.size());
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& [a, b] = pairs[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = model.predict(featurize(a, b, model.dim()));
  }
  return out;
}

std::vector<double> ScorerBackend::predict(const std::vector<TextPair>& pairs) const {
  if (const auto* m = std::get_if<std::shared_ptr<const LogRegModel>>(&variant_)) return predict_builtin(**m, pairs);
  return std::get<std::shared_ptr<ExternalScorer>>(variant_)->score(pairs);
}

std::vector<Matrix> score_matrices(const ScorerBackend& backend, const std::vector<std::string>& query_paragraphs,
                                   const std::vector<std::vector<std::string>>& candidates) {
  std::vector<TextPair> pairs;
  std::size_t total = 0;
  for (const auto& c : candidates) total += query_paragraphs.size() * c.size();
  pairs.reserve(total);
  for (const auto& c : candidates) {
    for (const auto& q : query_paragraphs) {
      for (const auto& p : c) pairs.emplace_back(q, p);
    }
  }
  const auto scores = backend.predict(pairs);
  std::vector<Matrix> out;
  out.reserve(candidates.size());
  std::size_t at = 0;
  for (const auto& c : candidates) {
    const std::size_t n = query_paragraphs.size() * c.size();
    out.emplace_back(query_paragraphs.size(), c.size(),
                     std::vector<double>(scores.begin() + static_cast<std::ptrdiff_t>(at),
                                         scores.begin() + static_cast<std::ptrdiff_t>(at + n)));
    at += n;
  }
  return out;
}

Matrix score_matrix(const ScorerBackend& backend, const std::vector<std::string>& query_paragraphs,
                    const std::vector<std::string>& candidate_paragraphs) {
  if (query_paragraphs.empty() || candidate_paragraphs.empty()) throw DataError("score_matrix needs N >= 1 and M >= 1");
  return std::move(score_matrices(backend, query_paragraphs, {candidate_paragraphs}).front());
}

namespace serial {

std::vector<double> predict_builtin(const LogRegModel& model, const std::vector<TextPair>& pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [a, b] : pairs) out.push_back(model.predict(featurize(a, b, model.dim())));
  return out;
}

Matrix score_matrix(const LogRegModel& model, const std::vector<std::string>& query_paragraphs,
                    const std::vector<std::string>& candidate_paragraphs) {
  Matrix m(query_paragraphs.size(), candidate_paragraphs.size());
  for (std::size_t i = 0; i < query_paragraphs.size(); ++i) {
    for (std::size_t j = 0; j < candidate_paragraphs.size(); ++j) {
      m(i, j) = model.predict(featurize(query_paragraphs[i], candidate_paragraphs[j], model.dim()));
    }
  }
  return m;
}

}  // namespace serial

}  // namespace lexent::scorer
