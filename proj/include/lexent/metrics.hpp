#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lexent::metrics {

/// query id -> set of document ids.
using IdSets = std::map<std::string, std::set<std::string>>;

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

/// Macro (unweighted per-query mean) precision and recall over the gold
/// queries. A gold query without predictions contributes P = R = 0.
/// Predictions for a query that has no gold entry are a DataError.
PrecisionRecall macro_pr(const IdSets& predictions, const IdSets& gold);

/// (1 + b^2) P R / (b^2 P + R); 0 when P = R = 0.
double f_beta(double precision, double recall, double beta);

/// Fraction of positions where the two label lists agree.
double accuracy(const std::vector<bool>& predictions, const std::vector<bool>& gold);

struct MetricsReport {
  double p_macro = 0.0;
  double r_macro = 0.0;
  double f2 = 0.0;
  double f1 = 0.0;
  std::optional<double> accuracy;
  std::size_t return_count = 0;     // predicted ids over all gold queries
  std::size_t retrieved_count = 0;  // correctly predicted ids

  /// Stable key order, fixed precision; for byte-identical reruns.
  std::string to_json() const;
};

/// F2 and F1 are computed from the macro P and R.
MetricsReport evaluate(const IdSets& predictions, const IdSets& gold);

}  // namespace lexent::metrics
