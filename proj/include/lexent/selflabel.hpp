#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lexent/pairs.hpp"
#include "lexent/scorer.hpp"

namespace lexent::selflabel {

/// Written <e1>/<e2>: epochs before and after the relabel pass.
struct SelfLabelConfig {
  std::size_t e1 = 2;
  std::size_t e2 = 1;
  double decision_threshold = 0.5;
  double learning_rate = 0.1;
  std::size_t rounds = 1;
  std::uint32_t dim = scorer::kDefaultDim;
};

struct Relabel {
  std::vector<bool> labels;
  std::vector<std::size_t> flipped;  // ascending
};

/// Positive labels whose prediction falls below the threshold become
/// negative. Negative labels are never touched.
Relabel relabel(const std::vector<bool>& labels, const std::vector<double>& predictions, double threshold);

struct SelfLabelResult {
  scorer::LogRegModel model;
  std::vector<bool> labels;          // y after the last relabel pass
  std::vector<std::size_t> flipped;  // indices flipped positive -> negative, over all rounds
  std::vector<double> predictions;   // scores used by the last relabel pass
};

/// Train e1 epochs on (X, y0); predict; flip positives predicted negative;
/// continue training the same model e2 more epochs on the new labels.
/// With rounds > 1 the predict/relabel/train-e2 step repeats.
SelfLabelResult run_self_label(const std::vector<LabeledPair>& pairs, const std::vector<bool>& initial_labels,
                               const SelfLabelConfig& config, std::uint64_t seed);

/// Flip report lines: {"index":i,"old":true,"new":false}.
void write_flip_report(const std::string& path, const std::vector<std::size_t>& flipped);

}  // namespace lexent::selflabel
