#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexent/corpus.hpp"
#include "lexent/lexical.hpp"
#include "lexent/pairs.hpp"

namespace lexent::datagen {

struct Article {
  std::string id;
  std::string text;
};

struct Question {
  std::string id;
  std::string text;
  std::vector<std::string> positive_ids;
};

inline constexpr std::size_t kDefaultNegativeCap = 150;

/// Positives are every annotated (question, article) pair. Negatives are the
/// top-`cap` non-positive articles by tf-idf cosine (ties by ascending id).
/// Output per question: positives in annotation order, then negatives by rank.
std::vector<LabeledPair> build_retrieval_pairs(const std::vector<Question>& questions,
                                               const std::vector<Article>& articles, const lexical::IdfTable& idf,
                                               std::size_t cap = kDefaultNegativeCap);

/// Gold articles, then the `n` pool articles most similar to the question
/// that are not already gold.
std::vector<Article> augment_relevant(std::string_view question, const std::vector<Article>& gold,
                                      const std::vector<Article>& pool, std::size_t n,
                                      const lexical::IdfTable& idf);

enum class RuleLanguage { english, japanese };

std::string_view to_string(RuleLanguage lang);
RuleLanguage parse_rule_language(std::string_view s);

/// Pattern edges that are ASCII alphanumerics only match at word boundaries;
/// other edges match literally.
struct NegationRule {
  int priority = 0;
  RuleLanguage language = RuleLanguage::english;
  std::string pattern;
  std::string replacement;
};

struct Negation {
  std::string text;
  int priority = 0;
};

/// JSON lines {"priority","language","pattern","replacement"}. Validates
/// non-empty patterns and unique priorities per language.
std::vector<NegationRule> read_rules(const std::string& path);
void validate_rules(const std::vector<NegationRule>& rules);

/// Rules of one language sorted by priority.
std::vector<NegationRule> rules_for(const std::vector<NegationRule>& rules, RuleLanguage lang);

/// Byte offset of the leftmost match of `rule` in `text`, if any.
std::optional<std::size_t> find_match(std::string_view text, const NegationRule& rule);

/// Applies the lowest-priority matching rule once, at its leftmost match.
/// The caller flips the pair label on success.
std::optional<Negation> negate(std::string_view text, std::span<const NegationRule> rules);

struct SilverConfig {
  double neg_ratio = 1.0;
  double sample_rate = 1.0;
  std::uint64_t seed = 0;
};

/// Positives: consecutive sentences of one paragraph. Each positive gets
/// neg_ratio negatives (fractional part as a coin flip) pairing its first
/// sentence with a uniformly drawn sentence of a different case.
/// Deterministic given the seed; cases use independent RNG substreams.
std::vector<LabeledPair> build_silver_supporting(const std::vector<corpus::Document>& cases,
                                                 const SilverConfig& config);

}  // namespace lexent::datagen
