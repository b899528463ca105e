#include "lexent/selflabel.hpp"

#include "json.hpp"
#include "lexent/error.hpp"
#include "lexent/text.hpp"

namespace lexent::selflabel {

Relabel relabel(const std::vector<bool>& labels, const std::vector<double>& predictions, double threshold) {
  if (labels.size() != predictions.size()) throw DataError("relabel: labels and predictions differ in length");
  Relabel r;
  r.labels = labels;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] && !(predictions[i] >= threshold)) {
      r.labels[i] = false;
      r.flipped.push_back(i);
    }
  }
  return r;
}

namespace {

std::vector<double> predict_all(const scorer::LogRegModel& model, const std::vector<scorer::Example>& data) {
  std::vector<double> out(data.size());
  const auto n = static_cast<std::ptrdiff_t>(data.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = model.predict(data[static_cast<std::size_t>(i)].x);
  return out;
}

}  // namespace

SelfLabelResult run_self_label(const std::vector<LabeledPair>& pairs, const std::vector<bool>& initial_labels,
                               const SelfLabelConfig& config, std::uint64_t seed) {
  if (pairs.empty()) throw DataError("self-labeling needs at least one example");
  if (pairs.size() != initial_labels.size()) throw DataError("self-labeling: |X| != |y0|");
  if (config.rounds == 0) throw UsageError("self-labeling needs rounds >= 1");

  auto examples = scorer::make_examples(pairs, config.dim);
  for (std::size_t i = 0; i < examples.size(); ++i) examples[i].y = initial_labels[i];

  scorer::Trainer trainer(scorer::LogRegModel(config.dim, seed), seed);
  trainer.begin_stage();
  trainer.run_epochs(examples, config.e1, config.learning_rate);

  SelfLabelResult result{scorer::LogRegModel(config.dim, seed), initial_labels, {}, {}};
  std::vector<bool> flipped_any(pairs.size(), false);
  for (std::size_t round = 0; round < config.rounds; ++round) {
    result.predictions = predict_all(trainer.model(), examples);
    auto r = relabel(result.labels, result.predictions, config.decision_threshold);
    for (const auto i : r.flipped) flipped_any[i] = true;
    result.labels = std::move(r.labels);
    for (std::size_t i = 0; i < examples.size(); ++i) examples[i].y = result.labels[i];
    trainer.run_epochs(examples, config.e2, config.learning_rate);
  }
  for (std::size_t i = 0; i < flipped_any.size(); ++i) {
    if (flipped_any[i]) result.flipped.push_back(i);
  }
  result.model = trainer.release();
  return result;
}

void write_flip_report(const std::string& path, const std::vector<std::size_t>& flipped) {
  std::string out;
  for (const auto i : flipped) {
    out += nlohmann::json{{"index", i}, {"old", true}, {"new", false}}.dump();
    out += '\n';
  }
  text::write_file(path, out);
}

}  // namespace lexent::selflabel
