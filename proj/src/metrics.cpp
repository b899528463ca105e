#include "lexent/metrics.hpp"

#include <cstdio>

#include "lexent/error.hpp"

namespace lexent::metrics {

namespace {

std::size_t overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t n = 0;
  for (const auto& x : a) n += b.count(x);
  return n;
}

void check_known_queries(const IdSets& predictions, const IdSets& gold) {
  for (const auto& [q, ids] : predictions) {
    if (gold.count(q) == 0) throw DataError("prediction for query '" + q + "' which has no gold entry");
  }
}

}  // namespace

PrecisionRecall macro_pr(const IdSets& predictions, const IdSets& gold) {
  check_known_queries(predictions, gold);
  if (gold.empty()) throw DataError("no gold queries to evaluate");
  double p_sum = 0.0, r_sum = 0.0;
  for (const auto& [q, gold_ids] : gold) {
    if (gold_ids.empty()) throw DataError("gold query '" + q + "' has no relevant ids");
    const auto it = predictions.find(q);
    if (it == predictions.end() || it->second.empty()) continue;
    const double hits = static_cast<double>(overlap(it->second, gold_ids));
    p_sum += hits / static_cast<double>(it->second.size());
    r_sum += hits / static_cast<double>(gold_ids.size());
  }
  const double n = static_cast<double>(gold.size());
  return {p_sum / n, r_sum / n};
}

double f_beta(double precision, double recall, double beta) {
  const double b2 = beta * beta;
  const double denom = b2 * precision + recall;
  if (denom <= 0.0) return 0.0;
  return (1.0 + b2) * precision * recall / denom;
}

double accuracy(const std::vector<bool>& predictions, const std::vector<bool>& gold) {
  if (predictions.size() != gold.size()) throw DataError("accuracy: prediction and gold lists differ in length");
  if (gold.empty()) throw DataError("accuracy: empty label lists");
  std::size_t agree = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) agree += predictions[i] == gold[i] ? 1 : 0;
  return static_cast<double>(agree) / static_cast<double>(gold.size());
}

MetricsReport evaluate(const IdSets& predictions, const IdSets& gold) {
  const auto pr = macro_pr(predictions, gold);
  MetricsReport r;
  r.p_macro = pr.precision;
  r.r_macro = pr.recall;
  r.f2 = f_beta(pr.precision, pr.recall, 2.0);
  r.f1 = f_beta(pr.precision, pr.recall, 1.0);
  for (const auto& [q, gold_ids] : gold) {
    const auto it = predictions.find(q);
    if (it == predictions.end()) continue;
    r.return_count += it->second.size();
    r.retrieved_count += overlap(it->second, gold_ids);
  }
  return r;
}

std::string MetricsReport::to_json() const {
  char buf[512];
  std::string acc = "null";
  if (accuracy) {
    char a[32];
    std::snprintf(a, sizeof a, "%.6f", *accuracy);
    acc = a;
  }
  std::snprintf(buf, sizeof buf,
                "{\"p_macro\":%.6f,\"r_macro\":%.6f,\"f2\":%.6f,\"f1\":%.6f,\"accuracy\":%s,"
                "\"return_count\":%zu,\"retrieved_count\":%zu}",
                p_macro, r_macro, f2, f1, acc.c_str(), return_count, retrieved_count);
  return buf;
}

}  // namespace lexent::metrics
