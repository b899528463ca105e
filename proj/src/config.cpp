#include "lexent/config.hpp"

#include <cstdlib>

#include "lexent/error.hpp"
#include "lexent/text.hpp"

namespace lexent {

using nlohmann::json;

const json& Config::defaults() {
  static const json d = {
      {"corpus", {{"data_dir", ""}, {"stopwords_en", ""}, {"stopwords_fr", ""}, {"abbreviations", ""},
                  {"filter_language", false}}},
      {"bm25", {{"k1", 1.5}, {"b", 0.75}, {"k", 100}}},
      {"chunk", {{"window", 150}, {"stride", 50}}},
      {"datagen",
       {{"cap", 150}, {"augment_n", 5}, {"neg_ratio", 1.0}, {"sample_rate", 1.0}, {"language", "english"}, {"rules", ""}}},
      {"paralaw", {{"lang_a", "en"}, {"lang_b", "ja"}, {"train_fraction", 0.9}}},
      {"fusion",
       {{"w_sem", 0.3},
        {"aggregation", "mean_row_max"},
        {"normalize_lex", true},
        {"normalize_scope", "query"},
        {"strategy", "relative:0.9"}}},
      {"scorer", {{"dim", 1 << 20}, {"epochs", 3}, {"learning_rate", 0.1}, {"external", ""}, {"timeout_ms", 120000}}},
      {"selflabel", {{"e1", 2}, {"e2", 1}, {"threshold", 0.5}, {"learning_rate", 0.1}, {"rounds", 1}}},
      {"eval", {{"beta", 2.0}, {"strategy", ""}}},
      {"seed", 0},
  };
  return d;
}

Config::Config() : tree_(defaults()) {}

void Config::merge(const json& overlay) {
  if (!overlay.is_object()) throw DataError("configuration must be a JSON object");
  tree_.merge_patch(overlay);
}

void Config::merge_file(const std::string& path) {
  json overlay;
  try {
    overlay = json::parse(text::read_file(path));
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  merge(overlay);
}

void Config::set(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) throw UsageError("--set expects key=value, got '" + std::string(assignment) + "'");
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &tree_;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw UsageError("bad configuration key '" + key + "'");
    if (!node->is_object()) throw UsageError("configuration key '" + key + "' descends into a non-object");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

void Config::apply_environment() {
  if (const char* env = std::getenv("LEXENT_SCORER"); env != nullptr && *env != '\0') tree_["scorer"]["external"] = env;
}

const json& Config::at(std::string_view dotted) const {
  const json* node = &tree_;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string part(dotted.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (!node->is_object() || !node->contains(part)) throw UsageError("missing configuration key '" + std::string(dotted) + "'");
    node = &(*node)[part];
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return *node;
}

void Config::throw_bad_type(std::string_view key, const char* what) {
  throw UsageError("configuration key '" + std::string(key) + "' has the wrong type: " + what);
}

}  // namespace lexent
