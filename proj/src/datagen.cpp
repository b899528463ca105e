#include "lexent/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "lexent/error.hpp"
#include "lexent/rng.hpp"
#include "lexent/text.hpp"

namespace lexent::datagen {

namespace {

std::vector<lexical::TfidfVector> vectorize(const std::vector<Article>& articles, const lexical::IdfTable& idf) {
  std::vector<lexical::TfidfVector> out(articles.size());
  const auto n = static_cast<std::ptrdiff_t>(articles.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out[idx] = lexical::tfidf_vector(lexical::tokenize(articles[idx].text), idf);
  }
  return out;
}

// Indices sorted by descending similarity, ties by ascending id.
std::vector<std::size_t> similarity_order(const std::vector<double>& sims, const std::vector<Article>& articles) {
  std::vector<std::size_t> order(articles.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sims[a] != sims[b]) return sims[a] > sims[b];
    return articles[a].id < articles[b].id;
  });
  return order;
}

}  // namespace

std::vector<LabeledPair> build_retrieval_pairs(const std::vector<Question>& questions,
                                               const std::vector<Article>& articles, const lexical::IdfTable& idf,
                                               std::size_t cap) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < articles.size(); ++i) {
    if (!by_id.emplace(articles[i].id, i).second) throw DataError("duplicate article id '" + articles[i].id + "'");
  }
  const auto vectors = vectorize(articles, idf);

  std::vector<LabeledPair> out;
  for (const auto& q : questions) {
    if (q.positive_ids.empty()) throw DataError("question '" + q.id + "' has no annotated positive article");
    std::unordered_set<std::string> positives;
    for (const auto& pid : q.positive_ids) {
      const auto it = by_id.find(pid);
      if (it == by_id.end()) throw DataError("question '" + q.id + "' annotates unknown article '" + pid + "'");
      if (!positives.insert(pid).second) continue;
      LabeledPair p;
      p.query_id = q.id;
      p.text_a = q.text;
      p.text_b = articles[it->second].text;
      p.label = true;
      p.provenance = Provenance::gold;
      p.article_id = pid;
      out.push_back(std::move(p));
    }

    const auto qvec = lexical::tfidf_vector(lexical::tokenize(q.text), idf);
    const auto sims = lexical::tfidf_cosines(qvec, vectors);
    std::size_t taken = 0;
    for (const auto i : similarity_order(sims, articles)) {
      if (taken >= cap) break;
      if (positives.count(articles[i].id) != 0) continue;
      LabeledPair p;
      p.query_id = q.id;
      p.text_a = q.text;
      p.text_b = articles[i].text;
      p.label = false;
      p.provenance = Provenance::gold;
      p.article_id = articles[i].id;
      out.push_back(std::move(p));
      ++taken;
    }
  }
  return out;
}

std::vector<Article> augment_relevant(std::string_view question, const std::vector<Article>& gold,
                                      const std::vector<Article>& pool, std::size_t n,
                                      const lexical::IdfTable& idf) {
  std::vector<Article> out = gold;
  std::unordered_set<std::string> used;
  for (const auto& a : gold) used.insert(a.id);
  if (n == 0) return out;

  const auto qvec = lexical::tfidf_vector(lexical::tokenize(question), idf);
  const auto sims = lexical::tfidf_cosines(qvec, vectorize(pool, idf));
  std::size_t added = 0;
  for (const auto i : similarity_order(sims, pool)) {
    if (added >= n) break;
    if (!used.insert(pool[i].id).second) continue;
    out.push_back(pool[i]);
    ++added;
  }
  return out;
}

std::string_view to_string(RuleLanguage lang) { return lang == RuleLanguage::english ? "english" : "japanese"; }

RuleLanguage parse_rule_language(std::string_view s) {
  if (s == "english" || s == "en") return RuleLanguage::english;
  if (s == "japanese" || s == "ja") return RuleLanguage::japanese;
  throw DataError("unknown rule language '" + std::string(s) + "'");
}

void validate_rules(const std::vector<NegationRule>& rules) {
  std::map<std::pair<RuleLanguage, int>, const NegationRule*> seen;
  for (const auto& r : rules) {
    if (r.pattern.empty()) throw DataError("negation rule " + std::to_string(r.priority) + " has an empty pattern");
    if (!seen.emplace(std::make_pair(r.language, r.priority), &r).second) {
      throw DataError("duplicate negation priority " + std::to_string(r.priority) + " for " +
                      std::string(to_string(r.language)));
    }
  }
}

std::vector<NegationRule> read_rules(const std::string& path) {
  using nlohmann::json;
  std::vector<NegationRule> rules;
  std::size_t lineno = 0;
  for (const auto& line : text::read_lines(path)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    try {
      const auto obj = json::parse(line);
      NegationRule r;
      r.priority = obj.at("priority").get<int>();
      r.language = parse_rule_language(obj.at("language").get<std::string>());
      r.pattern = obj.at("pattern").get<std::string>();
      r.replacement = obj.at("replacement").get<std::string>();
      rules.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  validate_rules(rules);
  return rules;
}

std::vector<NegationRule> rules_for(const std::vector<NegationRule>& rules, RuleLanguage lang) {
  std::vector<NegationRule> out;
  for (const auto& r : rules) {
    if (r.language == lang) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.priority < b.priority; });
  return out;
}

namespace {

bool ascii_word(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

}  // namespace

std::optional<std::size_t> find_match(std::string_view s, const NegationRule& rule) {
  const std::string_view pat = rule.pattern;
  if (pat.empty()) return std::nullopt;
  const bool left_edge = ascii_word(pat.front());
  const bool right_edge = ascii_word(pat.back());
  std::size_t from = 0;
  while (true) {
    const std::size_t at = s.find(pat, from);
    if (at == std::string_view::npos) return std::nullopt;
    const bool left_ok = !left_edge || at == 0 || !ascii_word(s[at - 1]);
    const std::size_t end = at + pat.size();
    const bool right_ok = !right_edge || end == s.size() || !ascii_word(s[end]);
    if (left_ok && right_ok) return at;
    from = at + 1;
  }
}

std::optional<Negation> negate(std::string_view s, std::span<const NegationRule> rules) {
  std::vector<const NegationRule*> ordered;
  ordered.reserve(rules.size());
  for (const auto& r : rules) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->priority < b->priority; });

  for (const auto* rule : ordered) {
    const auto at = find_match(s, *rule);
    if (!at) continue;
    Negation n;
    n.text.reserve(s.size() + rule->replacement.size());
    n.text.append(s.substr(0, *at));
    n.text.append(rule->replacement);
    n.text.append(s.substr(*at + rule->pattern.size()));
    n.priority = rule->priority;
    return n;
  }
  return std::nullopt;
}

std::vector<LabeledPair> build_silver_supporting(const std::vector<corpus::Document>& cases,
                                                 const SilverConfig& config) {
  if (!(config.neg_ratio >= 0.0) || !std::isfinite(config.neg_ratio)) throw UsageError("neg_ratio must be >= 0");
  if (!(config.sample_rate > 0.0 && config.sample_rate <= 1.0)) throw UsageError("sample_rate must be in (0, 1]");

  // Flat sentence pool; each case owns a contiguous range.
  std::vector<const std::string*> pool;
  std::vector<std::size_t> offset(cases.size()), count(cases.size());
  for (std::size_t c = 0; c < cases.size(); ++c) {
    offset[c] = pool.size();
    for (const auto& p : cases[c].paragraphs) {
      for (const auto& s : p.sentences) pool.push_back(&s);
    }
    count[c] = pool.size() - offset[c];
  }

  const auto whole = static_cast<std::size_t>(std::floor(config.neg_ratio));
  const double fraction = config.neg_ratio - static_cast<double>(whole);

  std::vector<std::vector<LabeledPair>> per_case(cases.size());
  const auto n_cases = static_cast<std::ptrdiff_t>(cases.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ci = 0; ci < n_cases; ++ci) {
    const auto c = static_cast<std::size_t>(ci);
    Rng rng(substream_seed(config.seed, c));
    const std::size_t others = pool.size() - count[c];
    auto& out = per_case[c];
    for (const auto& para : cases[c].paragraphs) {
      for (std::size_t k = 0; k + 1 < para.sentences.size(); ++k) {
        if (config.sample_rate < 1.0 && uniform_real(rng) >= config.sample_rate) continue;
        const std::string qid = cases[c].id + "#p" + std::to_string(para.index) + "s" + std::to_string(k);
        LabeledPair pos;
        pos.query_id = qid;
        pos.text_a = para.sentences[k];
        pos.text_b = para.sentences[k + 1];
        pos.label = true;
        pos.provenance = Provenance::silver;
        pos.article_id = cases[c].id;
        out.push_back(pos);

        std::size_t negatives = whole;
        if (fraction > 0.0 && uniform_real(rng) < fraction) ++negatives;
        if (others == 0) negatives = 0;
        for (std::size_t n = 0; n < negatives; ++n) {
          std::size_t r = uniform_index(rng, others);
          if (r >= offset[c]) r += count[c];
          LabeledPair neg;
          neg.query_id = qid;
          neg.text_a = para.sentences[k];
          neg.text_b = *pool[r];
          neg.label = false;
          neg.provenance = Provenance::silver;
          neg.article_id = cases[c].id;
          out.push_back(std::move(neg));
        }
      }
    }
  }

  std::vector<LabeledPair> all;
  for (auto& v : per_case) {
    for (auto& p : v) all.push_back(std::move(p));
  }
  return all;
}

}  // namespace lexent::datagen
