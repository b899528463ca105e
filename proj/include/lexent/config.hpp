#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

namespace lexent {

/// JSON configuration tree with built-in defaults. Sections: corpus, bm25,
/// chunk, datagen, paralaw, fusion, scorer, selflabel, eval.
class Config {
 public:
  Config();

  static const nlohmann::json& defaults();

  /// Deep-merges a JSON file over the current tree.
  void merge_file(const std::string& path);
  void merge(const nlohmann::json& overlay);

  /// "section.key=value"; value is parsed as JSON, falling back to a string.
  void set(std::string_view assignment);

  /// LEXENT_SCORER overrides scorer.external.
  void apply_environment();

  const nlohmann::json& at(std::string_view dotted) const;

  template <typename T>
  T get(std::string_view dotted) const {
    try {
      return at(dotted).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw_bad_type(dotted, e.what());
    }
  }

  const nlohmann::json& tree() const { return tree_; }

 private:
  [[noreturn]] static void throw_bad_type(std::string_view key, const char* what);
  nlohmann::json tree_;
};

}  // namespace lexent
