#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace lexent::corpus {

enum class DocKind { case_law, article, question };

std::string_view to_string(DocKind kind);
DocKind parse_kind(std::string_view s);

struct Paragraph {
  std::string parent_id;
  std::size_t index = 0;
  std::string text;
  std::vector<std::string> sentences;

  bool operator==(const Paragraph&) const = default;
};

struct Document {
  std::string id;
  DocKind kind = DocKind::case_law;
  std::optional<std::string> title;
  std::vector<Paragraph> paragraphs;

  /// Paragraph texts joined by blank lines.
  std::string full_text() const;

  bool operator==(const Document&) const = default;
};

/// Splits raw text on blank lines and on lines that open with a "[<digits>]"
/// marker. Markers stay in the paragraph text; empty segments are dropped.
std::vector<Paragraph> segment_paragraphs(std::string_view raw, std::string_view parent_id = {});

/// Rule-based sentence splitter. Splits after . ? ! (and their fullwidth
/// forms) when followed by whitespace or end of text, and directly after 。.
/// A '.' that ends a guarded abbreviation does not split.
class SentenceSplitter {
 public:
  SentenceSplitter() = default;
  explicit SentenceSplitter(std::vector<std::string> abbreviations);

  /// Loads one abbreviation per line (e.g. "v.", "Mr.").
  static SentenceSplitter from_file(const std::string& path);

  void add_abbreviations(const std::vector<std::string>& extra);

  std::vector<std::string> split(std::string_view text) const;

 private:
  std::unordered_set<std::string> abbreviations_;
};

Paragraph split_sentences(Paragraph p, const SentenceSplitter& splitter);

enum class Language { english, french };

/// Stopword-ratio language detector. Tokens that appear in both lists are
/// ignored, so only language-distinctive stopwords are counted.
class LanguageFilter {
 public:
  static constexpr double kMinEnglishRatio = 0.05;

  LanguageFilter(const std::vector<std::string>& english, const std::vector<std::string>& french);
  static LanguageFilter from_files(const std::string& english_path, const std::string& french_path);

  double english_ratio(std::string_view text) const;
  double french_ratio(std::string_view text) const;

  /// True when the text should be dropped under keep = english.
  bool is_foreign(std::string_view text) const;

 private:
  std::unordered_set<std::string> english_;
  std::unordered_set<std::string> french_;
};

std::vector<Paragraph> filter_language(const std::vector<Paragraph>& paragraphs, const LanguageFilter& filter,
                                       Language keep = Language::english);

/// Builds a document from raw text: segment, then split sentences.
Document make_document(std::string id, DocKind kind, std::string_view raw, const SentenceSplitter& splitter);

/// One document per regular file in `dir`; id = file name without its last
/// extension. Sorted by id.
std::vector<Document> ingest_collection(const std::string& dir, DocKind kind, const SentenceSplitter& splitter);

/// JSON lines, one object per document. Input objects need {"id","kind","text"};
/// a "paragraphs" array, when present, is taken verbatim.
std::vector<Document> read_corpus_jsonl(const std::string& path, const SentenceSplitter& splitter);
void write_corpus_jsonl(const std::string& path, const std::vector<Document>& docs);

/// Default data directory for stopword and abbreviation lists; the
/// LEXENT_DATA_DIR environment variable overrides the build-time location.
std::string default_data_dir();

}  // namespace lexent::corpus
