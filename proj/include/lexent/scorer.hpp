#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "lexent/matrix.hpp"
#include "lexent/pairs.hpp"
#include "lexent/rng.hpp"

namespace lexent::scorer {

inline constexpr std::uint32_t kDefaultDim = 1u << 20;

/// Sorted, duplicate-free sparse vector.
struct SparseVector {
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  std::size_t size() const { return index.size(); }
  bool operator==(const SparseVector&) const = default;
};

/// Hashed term-frequency features in three namespaces: "a:" for tokens of
/// text_a, "b:" for text_b, "x:" for tokens present in both (count = the
/// smaller of the two frequencies). L2-normalized. `dim` must be a power of two.
SparseVector featurize(std::string_view text_a, std::string_view text_b, std::uint32_t dim = kDefaultDim);

/// 64-bit FNV-1a; the feature hash.
std::uint64_t fnv1a(std::string_view s);

double sigmoid(double z);

/// Logistic regression over hashed features.
class LogRegModel {
 public:
  explicit LogRegModel(std::uint32_t dim = kDefaultDim, std::uint64_t seed = 0);

  std::uint32_t dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  double bias() const { return bias_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& mutable_weights() { return weights_; }
  void set_bias(double b) { bias_ = b; }

  double margin(const SparseVector& x) const;
  /// sigmoid(margin), kept strictly inside (0, 1).
  double predict(const SparseVector& x) const;

  /// "LOGREGv1 <dim> <bias> <seed>" then "<index>\t<weight>" per non-zero weight.
  std::string serialize() const;
  static LogRegModel deserialize(std::string_view data);
  void save(const std::string& path) const;
  static LogRegModel load(const std::string& path);

  bool operator==(const LogRegModel&) const = default;

 private:
  std::uint32_t dim_;
  std::uint64_t seed_;
  std::vector<double> weights_;
  double bias_ = 0.0;
};

struct Example {
  SparseVector x;
  bool y = false;
  double weight = 1.0;
};

/// Featurizes pairs (parallel); labels and weights are copied over.
std::vector<Example> make_examples(const std::vector<LabeledPair>& pairs, std::uint32_t dim);

/// Weighted logistic loss of one example: -w * [y log p + (1-y) log(1-p)].
double example_loss(const LogRegModel& model, const Example& ex);

/// Analytic gradient of example_loss: d/dw_i at the feature indices of
/// ex.x (aligned with ex.x.index) and d/dbias.
struct Gradient {
  std::vector<double> weights;
  double bias = 0.0;
};
Gradient loss_gradient(const LogRegModel& model, const Example& ex);

double mean_loss(const LogRegModel& model, const std::vector<Example>& data);

struct TrainStage {
  std::vector<LabeledPair> data;
  std::size_t epochs = 1;
  double learning_rate = 0.1;
  std::string source;  // file the data came from, informational
};

/// Stages are applied in order to one model (e.g. silver data, then gold).
struct TrainSchedule {
  std::vector<TrainStage> stages;
};

/// JSON: {"stages":[{"dataset":"<pair file>","epochs":N,"learning_rate":R}, ...]}.
/// Relative dataset paths resolve against the schedule file's directory.
TrainSchedule read_schedule(const std::string& path);

/// Plain SGD (batch 1) on logistic loss. The step size in the k-th epoch of a
/// stage is learning_rate / sqrt(k). Examples are reshuffled every epoch from
/// a single seeded stream, so a run is reproducible bit for bit.
class Trainer {
 public:
  Trainer(LogRegModel init, std::uint64_t seed);

  /// Starts a new stage: the step-size decay restarts at epoch 1.
  void begin_stage();

  /// Runs `epochs` more epochs of the current stage; returns the mean loss
  /// over `data` after each epoch.
  std::vector<double> run_epochs(const std::vector<Example>& data, std::size_t epochs, double learning_rate);

  const LogRegModel& model() const { return model_; }
  LogRegModel release() { return std::move(model_); }

 private:
  LogRegModel model_;
  std::uint64_t seed_;
  Rng rng_;
  std::size_t stage_epoch_ = 0;
};

struct TrainResult {
  LogRegModel model;
  std::vector<double> loss_trace;  // one entry per epoch across stages
};

TrainResult train(const TrainSchedule& schedule, std::uint64_t seed, std::uint32_t dim = kDefaultDim);

class ExternalScorer;

using TextPair = std::pair<std::string, std::string>;

/// Either the built-in classifier or an external scorer process/endpoint.
class ScorerBackend {
 public:
  static ScorerBackend builtin(std::shared_ptr<const LogRegModel> model);
  static ScorerBackend external(std::shared_ptr<ExternalScorer> scorer);

  bool is_builtin() const { return std::holds_alternative<std::shared_ptr<const LogRegModel>>(variant_); }

  /// One score in (0, 1) per pair, in input order.
  std::vector<double> predict(const std::vector<TextPair>& pairs) const;

 private:
  explicit ScorerBackend(std::variant<std::shared_ptr<const LogRegModel>, std::shared_ptr<ExternalScorer>> v)
      : variant_(std::move(v)) {}
  std::variant<std::shared_ptr<const LogRegModel>, std::shared_ptr<ExternalScorer>> variant_;
};

/// Built-in predictions; parallel across pairs.
std::vector<double> predict_builtin(const LogRegModel& model, const std::vector<TextPair>& pairs);

/// N x M matrix with entry (i, j) = predict(query_i, candidate_j).
Matrix score_matrix(const ScorerBackend& backend, const std::vector<std::string>& query_paragraphs,
                    const std::vector<std::string>& candidate_paragraphs);

/// One matrix per candidate, scored in a single predict call.
std::vector<Matrix> score_matrices(const ScorerBackend& backend, const std::vector<std::string>& query_paragraphs,
                                   const std::vector<std::vector<std::string>>& candidates);

namespace serial {
std::vector<double> predict_builtin(const LogRegModel& model, const std::vector<TextPair>& pairs);
Matrix score_matrix(const LogRegModel& model, const std::vector<std::string>& query_paragraphs,
                    const std::vector<std::string>& candidate_paragraphs);
}  // namespace serial

}  // namespace lexent::scorer
