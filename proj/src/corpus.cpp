#include "lexent/corpus.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include "json.hpp"

#include "lexent/error.hpp"
#include "lexent/lexical.hpp"
#include "lexent/text.hpp"

namespace lexent::corpus {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(DocKind kind) {
  switch (kind) {
    case DocKind::case_law: return "case";
    case DocKind::article: return "article";
    case DocKind::question: return "question";
  }
  return "case";
}

DocKind parse_kind(std::string_view s) {
  if (s == "case") return DocKind::case_law;
  if (s == "article") return DocKind::article;
  if (s == "question") return DocKind::question;
  throw DataError("unknown document kind '" + std::string(s) + "'");
}

std::string Document::full_text() const {
  std::string out;
  for (const auto& p : paragraphs) {
    if (!out.empty()) out += "\n\n";
    out += p.text;
  }
  return out;
}

namespace {

bool is_blank(std::string_view line) { return text::trim(line).empty(); }

bool opens_with_marker(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  if (i >= line.size() || line[i] != '[') return false;
  ++i;
  const std::size_t digits_start = i;
  while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
  return i > digits_start && i < line.size() && line[i] == ']';
}

}  // namespace

std::vector<Paragraph> segment_paragraphs(std::string_view raw, std::string_view parent_id) {
  std::vector<Paragraph> out;
  std::string current;
  auto flush = [&] {
    const auto t = text::trim(current);
    if (!t.empty()) {
      Paragraph p;
      p.parent_id = std::string(parent_id);
      p.index = out.size();
      p.text = std::string(t);
      out.push_back(std::move(p));
    }
    current.clear();
  };

  std::size_t start = 0;
  while (start <= raw.size()) {
    std::size_t end = raw.find('\n', start);
    if (end == std::string_view::npos) end = raw.size();
    std::string_view line = raw.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (is_blank(line)) {
      flush();
    } else {
      if (opens_with_marker(line)) flush();
      if (!current.empty()) current += '\n';
      current += line;
    }
    if (end == raw.size()) break;
    start = end + 1;
  }
  flush();
  return out;
}

SentenceSplitter::SentenceSplitter(std::vector<std::string> abbreviations)
    : abbreviations_(abbreviations.begin(), abbreviations.end()) {}

SentenceSplitter SentenceSplitter::from_file(const std::string& path) {
  return SentenceSplitter(text::read_word_list(path));
}

void SentenceSplitter::add_abbreviations(const std::vector<std::string>& extra) {
  abbreviations_.insert(extra.begin(), extra.end());
}

namespace {

bool is_space(char32_t cp) { return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == 0x3000; }

bool is_terminator(char32_t cp) {
  return cp == '.' || cp == '?' || cp == '!' || cp == 0xFF1F || cp == 0xFF01 || cp == 0x3002;
}

bool is_closer(char32_t cp) {
  return cp == '"' || cp == '\'' || cp == ')' || cp == ']' || cp == 0x201D || cp == 0x2019 || cp == 0x300D ||
         cp == 0x300F || cp == 0xFF09;
}

}  // namespace

std::vector<std::string> SentenceSplitter::split(std::string_view s) const {
  std::vector<std::string> out;
  std::size_t sentence_start = 0;
  std::size_t word_start = 0;  // byte offset of the current whitespace-delimited word
  std::size_t pos = 0;

  auto emit = [&](std::size_t end) {
    const auto t = text::trim(s.substr(sentence_start, end - sentence_start));
    if (!t.empty()) out.emplace_back(t);
    sentence_start = end;
  };

  while (pos < s.size()) {
    const std::size_t cp_start = pos;
    const char32_t cp = text::next_code_point(s, pos);
    if (is_space(cp)) {
      word_start = pos;
      continue;
    }
    if (!is_terminator(cp)) continue;

    const bool ideographic = cp == 0x3002;
    bool saw_period = cp == '.';
    std::size_t period_end = saw_period ? pos : std::string_view::npos;
    // Absorb runs like "?!" or '."' into the same boundary.
    std::size_t end = pos;
    while (end < s.size()) {
      std::size_t probe = end;
      const char32_t next = text::next_code_point(s, probe);
      if (is_terminator(next) || is_closer(next)) {
        if (next == '.' && !saw_period) {
          saw_period = true;
          period_end = probe;
        }
        end = probe;
      } else {
        break;
      }
    }
    (void)cp_start;

    bool boundary = ideographic;
    if (!boundary) {
      if (end >= s.size()) {
        boundary = true;
      } else {
        std::size_t probe = end;
        boundary = is_space(text::next_code_point(s, probe));
      }
    }
    if (boundary && cp == '.' && period_end != std::string_view::npos) {
      const std::string word(s.substr(word_start, period_end - word_start));
      if (abbreviations_.count(word) != 0) boundary = false;
    }
    pos = end;
    if (boundary) {
      emit(end);
      word_start = end;
    }
  }
  emit(s.size());
  return out;
}

Paragraph split_sentences(Paragraph p, const SentenceSplitter& splitter) {
  p.sentences = splitter.split(p.text);
  return p;
}

LanguageFilter::LanguageFilter(const std::vector<std::string>& english, const std::vector<std::string>& french) {
  std::unordered_set<std::string> en, fr;
  for (const auto& w : english) {
    for (auto& t : lexical::tokenize(w)) en.insert(std::move(t));
  }
  for (const auto& w : french) {
    for (auto& t : lexical::tokenize(w)) fr.insert(std::move(t));
  }
  for (const auto& w : en) {
    if (fr.count(w) == 0) english_.insert(w);
  }
  for (const auto& w : fr) {
    if (en.count(w) == 0) french_.insert(w);
  }
}

LanguageFilter LanguageFilter::from_files(const std::string& english_path, const std::string& french_path) {
  return LanguageFilter(text::read_word_list(english_path), text::read_word_list(french_path));
}

namespace {

double stopword_ratio(std::string_view s, const std::unordered_set<std::string>& words) {
  const auto tokens = lexical::tokenize(s);
  if (tokens.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& t : tokens) hits += words.count(t);
  return static_cast<double>(hits) / static_cast<double>(tokens.size());
}

}  // namespace

double LanguageFilter::english_ratio(std::string_view s) const { return stopword_ratio(s, english_); }

double LanguageFilter::french_ratio(std::string_view s) const { return stopword_ratio(s, french_); }

bool LanguageFilter::is_foreign(std::string_view s) const {
  const double en = english_ratio(s);
  return en < kMinEnglishRatio && french_ratio(s) > en;
}

std::vector<Paragraph> filter_language(const std::vector<Paragraph>& paragraphs, const LanguageFilter& filter,
                                       Language keep) {
  std::vector<Paragraph> kept;
  kept.reserve(paragraphs.size());
  for (const auto& p : paragraphs) {
    if (filter.is_foreign(p.text) == (keep == Language::french)) kept.push_back(p);
  }
  return kept;
}

Document make_document(std::string id, DocKind kind, std::string_view raw, const SentenceSplitter& splitter) {
  Document doc;
  doc.kind = kind;
  doc.paragraphs = segment_paragraphs(raw, id);
  for (auto& p : doc.paragraphs) p = split_sentences(std::move(p), splitter);
  doc.id = std::move(id);
  return doc;
}

std::vector<Document> ingest_collection(const std::string& dir, DocKind kind, const SentenceSplitter& splitter) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw DataError("not a readable directory: " + dir);

  std::map<std::string, fs::path> by_id;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (name.empty() || name.front() == '.') continue;
    const auto id = entry.path().stem().string();
    auto [it, inserted] = by_id.emplace(id, entry.path());
    if (!inserted) {
      throw DataError("duplicate document id '" + id + "' from " + it->second.filename().string() + " and " + name);
    }
  }
  if (ec) throw DataError("cannot list " + dir + ": " + ec.message());

  std::vector<Document> docs;
  docs.reserve(by_id.size());
  for (const auto& [id, path] : by_id) {
    const std::string raw = text::read_file(path.string());
    if (!text::is_valid_utf8(raw)) throw DataError(path.filename().string() + ": content is not valid UTF-8");
    docs.push_back(make_document(id, kind, raw, splitter));
  }
  return docs;
}

std::vector<Document> read_corpus_jsonl(const std::string& path, const SentenceSplitter& splitter) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::size_t lineno = 0;
  for (const auto& line : text::read_lines(path)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (!text::is_valid_utf8(line)) throw DataError(where + ": not valid UTF-8");
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string()) throw DataError(where + ": missing \"id\"");
    const std::string id = obj["id"].get<std::string>();
    if (!seen.insert(id).second) throw DataError(where + ": duplicate document id '" + id + "'");
    const DocKind kind = parse_kind(obj.value("kind", std::string("case")));

    Document doc;
    if (obj.contains("paragraphs") && obj["paragraphs"].is_array()) {
      doc.id = id;
      doc.kind = kind;
      for (const auto& pj : obj["paragraphs"]) {
        Paragraph p;
        p.parent_id = id;
        p.index = doc.paragraphs.size();
        p.text = pj.value("text", std::string());
        if (pj.contains("sentences")) {
          p.sentences = pj["sentences"].get<std::vector<std::string>>();
        } else {
          p = split_sentences(std::move(p), splitter);
        }
        doc.paragraphs.push_back(std::move(p));
      }
    } else {
      if (!obj.contains("text") || !obj["text"].is_string()) throw DataError(where + ": missing \"text\"");
      doc = make_document(id, kind, obj["text"].get<std::string>(), splitter);
    }
    if (obj.contains("title") && obj["title"].is_string()) doc.title = obj["title"].get<std::string>();
    docs.push_back(std::move(doc));
  }
  std::sort(docs.begin(), docs.end(), [](const Document& a, const Document& b) { return a.id < b.id; });
  return docs;
}

void write_corpus_jsonl(const std::string& path, const std::vector<Document>& docs) {
  std::string out;
  for (const auto& doc : docs) {
    json obj;
    obj["id"] = doc.id;
    obj["kind"] = to_string(doc.kind);
    if (doc.title) obj["title"] = *doc.title;
    obj["text"] = doc.full_text();
    json paras = json::array();
    for (const auto& p : doc.paragraphs) {
      paras.push_back({{"index", p.index}, {"text", p.text}, {"sentences", p.sentences}});
    }
    obj["paragraphs"] = std::move(paras);
    out += obj.dump();
    out += '\n';
  }
  text::write_file(path, out);
}

std::string default_data_dir() {
  if (const char* env = std::getenv("LEXENT_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return LEXENT_DATA_DIR;
}

}  // namespace lexent::corpus
