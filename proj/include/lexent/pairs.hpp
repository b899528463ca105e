#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lexent {

enum class Provenance { gold, silver, augmented, chunk_derived };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view s);

/// One (text_a, text_b, label) training or evaluation unit.
struct LabeledPair {
  std::string query_id;
  std::string text_a;
  std::string text_b;
  bool label = false;
  Provenance provenance = Provenance::gold;
  double weight = 1.0;
  std::optional<std::string> article_id;
  std::optional<std::size_t> chunk_index;

  bool operator==(const LabeledPair&) const = default;
};

/// Pair files are JSON lines:
/// {"query_id","text_a","text_b","label","provenance","article_id","chunk_index"}
/// plus "weight" when it differs from 1.
std::vector<LabeledPair> read_pairs(const std::string& path);
void write_pairs(const std::string& path, const std::vector<LabeledPair>& pairs);
std::string pair_to_json_line(const LabeledPair& pair);

/// Annotation files: JSON lines {"query_id","positive_ids":[...]}.
struct Annotation {
  std::string query_id;
  std::vector<std::string> positive_ids;
};

std::vector<Annotation> read_annotations(const std::string& path);
void write_annotations(const std::string& path, const std::vector<Annotation>& annotations);

}  // namespace lexent
