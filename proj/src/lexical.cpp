#include "lexent/lexical.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <unordered_set>

#include "lexent/error.hpp"
#include "lexent/text.hpp"

namespace lexent::lexical {

Tokens tokenize(std::string_view s) {
  Tokens out;
  std::string word;
  std::vector<char32_t> cjk_run;

  auto flush_word = [&] {
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
  };
  auto flush_cjk = [&] {
    if (cjk_run.size() == 1) {
      std::string t;
      text::append_utf8(t, cjk_run[0]);
      out.push_back(std::move(t));
    } else {
      for (std::size_t i = 0; i + 1 < cjk_run.size(); ++i) {
        std::string t;
        text::append_utf8(t, cjk_run[i]);
        text::append_utf8(t, cjk_run[i + 1]);
        out.push_back(std::move(t));
      }
    }
    cjk_run.clear();
  };

  std::size_t pos = 0;
  while (pos < s.size()) {
    const char32_t cp = text::next_code_point(s, pos);
    if (text::is_cjk(cp)) {
      flush_word();
      cjk_run.push_back(cp);
    } else if (text::is_word_char(cp)) {
      flush_cjk();
      text::append_utf8(word, text::to_lower(cp));
    } else {
      flush_word();
      flush_cjk();
    }
  }
  flush_word();
  flush_cjk();
  return out;
}

Bm25Index Bm25Index::build(const std::vector<std::pair<std::string, Tokens>>& docs, Bm25Params params) {
  if (docs.empty()) throw DataError("cannot build a BM25 index over an empty corpus");
  if (!(params.k1 >= 0.0) || !(params.b >= 0.0 && params.b <= 1.0)) {
    throw UsageError("BM25 parameters out of range (need k1 >= 0, 0 <= b <= 1)");
  }
  Bm25Index idx;
  idx.params_ = params;
  idx.doc_ids_.reserve(docs.size());
  idx.doc_len_.reserve(docs.size());
  for (const auto& [id, tokens] : docs) {
    const auto doc = static_cast<std::uint32_t>(idx.doc_ids_.size());
    if (!idx.doc_pos_.emplace(id, doc).second) throw DataError("duplicate doc id '" + id + "'");
    idx.doc_ids_.push_back(id);
    idx.doc_len_.push_back(static_cast<std::uint32_t>(tokens.size()));
    std::unordered_map<std::string_view, std::uint32_t> tf;
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [term, count] : tf) idx.postings_[std::string(term)].push_back({doc, count});
  }
  idx.finalize();
  return idx;
}

void Bm25Index::finalize() {
  double total = 0.0;
  for (auto len : doc_len_) total += len;
  avgdl_ = doc_ids_.empty() ? 0.0 : total / static_cast<double>(doc_ids_.size());
  for (auto& [term, list] : postings_) {
    std::sort(list.begin(), list.end(), [](const Posting& a, const Posting& b) { return a.doc < b.doc; });
  }
}

double Bm25Index::idf(std::size_t n_docs, std::size_t df) {
  const double n = static_cast<double>(n_docs);
  const double d = static_cast<double>(df);
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double Bm25Index::idf(std::string_view term) const {
  const auto* list = postings(term);
  return idf(n_docs(), list == nullptr ? 0 : list->size());
}

const std::vector<Posting>* Bm25Index::postings(std::string_view term) const {
  const auto it = postings_.find(std::string(term));
  return it == postings_.end() ? nullptr : &it->second;
}

std::size_t Bm25Index::position(std::string_view doc_id) const {
  const auto it = doc_pos_.find(std::string(doc_id));
  return it == doc_pos_.end() ? npos : it->second;
}

std::vector<double> Bm25Index::scores(std::span<const std::string> query) const {
  std::vector<double> out(doc_ids_.size(), 0.0);
  const double k1 = params_.k1;
  const double b = params_.b;
  // avgdl is 0 only when every document is empty; then no postings exist.
  const double inv_avgdl = avgdl_ > 0.0 ? 1.0 / avgdl_ : 0.0;
  for (const auto& term : query) {
    const auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double term_idf = idf(doc_ids_.size(), it->second.size());
    for (const auto& p : it->second) {
      const double tf = p.tf;
      const double norm = k1 * (1.0 - b + b * static_cast<double>(doc_len_[p.doc]) * inv_avgdl);
      out[p.doc] += term_idf * (tf * (k1 + 1.0)) / (tf + norm);
    }
  }
  return out;
}

std::unordered_map<std::string, double> Bm25Index::score_map(std::span<const std::string> query) const {
  const auto s = scores(query);
  std::unordered_map<std::string, double> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out.emplace(doc_ids_[i], s[i]);
  return out;
}

std::vector<ScoredDoc> rank_scores(const std::vector<std::string>& ids, const std::vector<double>& scores,
                                   std::size_t k) {
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  };
  const std::size_t n = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(), better);
  std::vector<ScoredDoc> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({ids[order[i]], scores[order[i]]});
  return out;
}

std::vector<ScoredDoc> Bm25Index::top_k(std::span<const std::string> query, std::size_t k) const {
  if (k == 0) throw UsageError("top_k needs k >= 1");
  return rank_scores(doc_ids_, scores(query), k);
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool has_reserved_char(std::string_view id) {
  return id.find_first_of("\t\n\r,") != std::string_view::npos || id.empty();
}

template <typename T>
T parse_number(std::string_view s, std::size_t lineno) {
  T v{};
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars for double is available in libstdc++ 11.
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw DataError("index line " + std::to_string(lineno) + ": bad number '" + std::string(s) + "'");
    }
  } else {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw DataError("index line " + std::to_string(lineno) + ": bad integer '" + std::string(s) + "'");
    }
  }
  return v;
}

std::vector<std::string_view> split_view(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = s.find(sep, start);
    if (end == std::string_view::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

}  // namespace

std::string Bm25Index::serialize() const {
  std::string out = "BM25v1 " + format_double(params_.k1) + " " + format_double(params_.b) + " " +
                    std::to_string(doc_ids_.size()) + " " + format_double(avgdl_) + "\n";
  for (const auto& id : doc_ids_) {
    if (has_reserved_char(id)) throw DataError("doc id '" + id + "' cannot be stored (empty or contains tab, newline or comma)");
  }
  std::map<std::string_view, const std::vector<Posting>*> sorted;
  for (const auto& [term, list] : postings_) sorted.emplace(term, &list);
  for (const auto& [term, list] : sorted) {
    out += term;
    out += '\t';
    for (std::size_t i = 0; i < list->size(); ++i) {
      if (i > 0) out += ',';
      out += doc_ids_[(*list)[i].doc];
      out += ':';
      out += std::to_string((*list)[i].tf);
    }
    out += '\n';
  }
  out += "DOCS\n";
  for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
    out += doc_ids_[i];
    out += '\t';
    out += std::to_string(doc_len_[i]);
    out += '\n';
  }
  return out;
}

Bm25Index Bm25Index::deserialize(std::string_view data) {
  std::vector<std::string_view> lines = split_view(data, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw DataError("empty index file");

  const auto header = split_view(lines[0], ' ');
  if (header.size() != 5 || header[0] != "BM25v1") throw DataError("index line 1: expected 'BM25v1 <k1> <b> <n_docs> <avgdl>'");
  Bm25Index idx;
  idx.params_.k1 = parse_number<double>(header[1], 1);
  idx.params_.b = parse_number<double>(header[2], 1);
  const auto n_docs = parse_number<std::size_t>(header[3], 1);
  const double avgdl = parse_number<double>(header[4], 1);

  std::size_t docs_line = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i] == "DOCS") {
      docs_line = i;
      break;
    }
  }
  if (docs_line == 0) throw DataError("index has no DOCS section");
  for (std::size_t i = docs_line + 1; i < lines.size(); ++i) {
    const auto cols = split_view(lines[i], '\t');
    if (cols.size() != 2) throw DataError("index line " + std::to_string(i + 1) + ": expected '<doc_id>\\t<len>'");
    const std::string id(cols[0]);
    if (!idx.doc_pos_.emplace(id, static_cast<std::uint32_t>(idx.doc_ids_.size())).second) {
      throw DataError("index line " + std::to_string(i + 1) + ": duplicate doc id '" + id + "'");
    }
    idx.doc_ids_.push_back(id);
    idx.doc_len_.push_back(parse_number<std::uint32_t>(cols[1], i + 1));
  }
  if (idx.doc_ids_.size() != n_docs) throw DataError("index header declares " + std::to_string(n_docs) + " docs, DOCS lists " + std::to_string(idx.doc_ids_.size()));
  if (n_docs == 0) throw DataError("index has no documents");

  for (std::size_t i = 1; i < docs_line; ++i) {
    const auto cols = split_view(lines[i], '\t');
    if (cols.size() != 2 || cols[0].empty()) throw DataError("index line " + std::to_string(i + 1) + ": expected '<term>\\t<postings>'");
    auto& list = idx.postings_[std::string(cols[0])];
    if (!list.empty()) throw DataError("index line " + std::to_string(i + 1) + ": duplicate term");
    for (const auto entry : split_view(cols[1], ',')) {
      const auto colon = entry.rfind(':');
      if (colon == std::string_view::npos) throw DataError("index line " + std::to_string(i + 1) + ": bad posting '" + std::string(entry) + "'");
      const auto pos = idx.position(entry.substr(0, colon));
      if (pos == npos) throw DataError("index line " + std::to_string(i + 1) + ": posting for unknown doc '" + std::string(entry.substr(0, colon)) + "'");
      const auto tf = parse_number<std::uint32_t>(entry.substr(colon + 1), i + 1);
      if (tf == 0) throw DataError("index line " + std::to_string(i + 1) + ": term frequency must be >= 1");
      list.push_back({static_cast<std::uint32_t>(pos), tf});
    }
  }
  idx.finalize();
  if (std::fabs(idx.avgdl_ - avgdl) > 1e-9 * std::max(1.0, avgdl)) {
    throw DataError("index header avgdl does not match the DOCS section");
  }
  return idx;
}

void Bm25Index::save(const std::string& path) const { text::write_file(path, serialize()); }

Bm25Index Bm25Index::load(const std::string& path) { return deserialize(text::read_file(path)); }

std::vector<std::vector<double>> bm25_scores_batch(const Bm25Index& index, const std::vector<Tokens>& queries) {
  std::vector<std::vector<double>> out(queries.size());
  const auto n = static_cast<std::ptrdiff_t>(queries.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t q = 0; q < n; ++q) {
    out[static_cast<std::size_t>(q)] = index.scores(queries[static_cast<std::size_t>(q)]);
  }
  return out;
}

IdfTable compute_idf(const std::vector<Tokens>& docs) {
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::unordered_set<std::string_view> seen(doc.begin(), doc.end());
    for (const auto& t : seen) ++df[std::string(t)];
  }
  const double n = static_cast<double>(docs.size());
  IdfTable idf;
  idf.reserve(df.size());
  for (const auto& [term, count] : df) idf.emplace(term, std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  return idf;
}

TfidfVector tfidf_vector(std::span<const std::string> tokens, const IdfTable& idf) {
  TfidfVector v;
  std::map<std::string_view, double> tf;  // ordered so the norm is summed deterministically
  for (const auto& t : tokens) tf[t] += 1.0;
  double sq = 0.0;
  for (const auto& [term, count] : tf) {
    const auto it = idf.find(std::string(term));
    if (it == idf.end() || it->second <= 0.0) continue;
    const double w = count * it->second;
    v.weights.emplace(std::string(term), w);
    sq += w * w;
  }
  v.norm = std::sqrt(sq);
  if (v.norm > 0.0) {
    for (auto& [term, w] : v.weights) w /= v.norm;
  }
  return v;
}

double cosine(const TfidfVector& a, const TfidfVector& b) {
  if (a.norm == 0.0 || b.norm == 0.0) return 0.0;
  const auto& small = a.weights.size() <= b.weights.size() ? a.weights : b.weights;
  const auto& large = a.weights.size() <= b.weights.size() ? b.weights : a.weights;
  // Sum in term order so the result does not depend on hash-table layout.
  std::map<std::string_view, double> products;
  for (const auto& [term, w] : small) {
    const auto it = large.find(term);
    if (it != large.end()) products.emplace(term, w * it->second);
  }
  double dot = 0.0;
  for (const auto& [term, p] : products) dot += p;
  return std::clamp(dot, 0.0, 1.0);
}

double tfidf_cosine(std::span<const std::string> a, std::span<const std::string> b, const IdfTable& idf) {
  return cosine(tfidf_vector(a, idf), tfidf_vector(b, idf));
}

std::vector<double> tfidf_cosines(const TfidfVector& query, const std::vector<TfidfVector>& docs) {
  std::vector<double> out(docs.size(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = cosine(query, docs[static_cast<std::size_t>(i)]);
  return out;
}

namespace serial {

std::vector<std::vector<double>> bm25_scores_batch(const Bm25Index& index, const std::vector<Tokens>& queries) {
  std::vector<std::vector<double>> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(index.scores(q));
  return out;
}

std::vector<double> tfidf_cosines(const TfidfVector& query, const std::vector<TfidfVector>& docs) {
  std::vector<double> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(cosine(query, d));
  return out;
}

}  // namespace serial

}  // namespace lexent::lexical
