#include "doctest.h"
#include "lexent/corpus.hpp"
#include "lexent/error.hpp"
#include "lexent/text.hpp"
#include "test_support.hpp"

#include <filesystem>

using namespace lexent;
using namespace lexent::corpus;
using lexent::testing::TempDir;

namespace {

LanguageFilter shipped_filter() {
  const auto dir = std::filesystem::path(default_data_dir());
  return LanguageFilter::from_files((dir / "stopwords_en.txt").string(), (dir / "stopwords_fr.txt").string());
}

}  // namespace

TEST_CASE("segment_paragraphs") {
  CHECK(segment_paragraphs("").empty());

  const auto numbered = segment_paragraphs("[10] A.\n[15] B.", "c1");
  REQUIRE(numbered.size() == 2);
  CHECK(numbered[0].index == 0);
  CHECK(numbered[1].index == 1);
  CHECK(numbered[0].text == "[10] A.");
  CHECK(numbered[1].text == "[15] B.");
  CHECK(numbered[0].parent_id == "c1");

  CHECK(segment_paragraphs("para1\n\npara2").size() == 2);
  CHECK(segment_paragraphs("\n\n  \n").empty());
  CHECK(segment_paragraphs("line one\nline two").size() == 1);
}

TEST_CASE("sentence splitting") {
  const auto splitter = lexent::testing::default_splitter();
  CHECK(splitter.split("A. B?") == std::vector<std::string>{"A.", "B?"});
  CHECK(splitter.split("Mr. Smith left.") == std::vector<std::string>{"Mr. Smith left."});
  CHECK(splitter.split("").empty());
  CHECK(splitter.split("See Smith v. Jones at para. 4. Then stop.") ==
        std::vector<std::string>{"See Smith v. Jones at para. 4.", "Then stop."});
  CHECK(splitter.split("いい天気ね。お出掛けしよ？") == std::vector<std::string>{"いい天気ね。", "お出掛けしよ？"});
  CHECK(splitter.split("He said \"no.\" She left.") == std::vector<std::string>{"He said \"no.\"", "She left."});
  CHECK(splitter.split("Value 3.5 is fine.") == std::vector<std::string>{"Value 3.5 is fine."});

  SentenceSplitter bare;
  CHECK(bare.split("Mr. Smith left.").size() == 2);
}

TEST_CASE("language filter with shipped stopword lists") {
  const auto filter = shipped_filter();
  CHECK_FALSE(filter.is_foreign("The court found the evidence sufficient."));
  CHECK(filter.is_foreign("Le tribunal a conclu que la preuve est suffisante."));
  CHECK(filter_language({}, filter).empty());

  std::vector<Paragraph> paras{{"d", 0, "The court found the evidence sufficient.", {}},
                               {"d", 1, "Le tribunal a conclu que la preuve est suffisante.", {}}};
  const auto kept = filter_language(paras, filter);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].index == 0);
  const auto french = filter_language(paras, filter, Language::french);
  REQUIRE(french.size() == 1);
  CHECK(french[0].index == 1);
}

TEST_CASE("ingest_collection") {
  TempDir dir("corpus");
  CHECK(ingest_collection(dir.path().string(), DocKind::case_law, {}).empty());

  text::write_file(dir.file("b.txt"), "[1] Second. Doc.\n");
  text::write_file(dir.file("a.txt"), "First para.\n\nSecond para.\n");
  text::write_file(dir.file(".hidden"), "ignored");
  const auto docs = ingest_collection(dir.path().string(), DocKind::case_law, {});
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "a");
  CHECK(docs[1].id == "b");
  CHECK(docs[0].paragraphs.size() == 2);
  CHECK(docs[1].paragraphs[0].sentences == std::vector<std::string>{"[1] Second.", "Doc."});

  text::write_file(dir.file("a.md"), "duplicate id");
  CHECK_THROWS_AS(ingest_collection(dir.path().string(), DocKind::case_law, {}), DataError);
}

TEST_CASE("ingest rejects invalid UTF-8 naming the file") {
  TempDir dir("corpus");
  text::write_file(dir.file("bad.txt"), std::string("abc\xff\xfe"));
  try {
    ingest_collection(dir.path().string(), DocKind::article, {});
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("bad.txt") != std::string::npos);
  }
}

TEST_CASE("corpus jsonl round trip") {
  TempDir dir("corpus");
  const auto splitter = lexent::testing::default_splitter();
  std::vector<Document> docs{make_document("x1", DocKind::question, "Is it so? Yes.\n\nAnother.", splitter),
                             make_document("x2", DocKind::article, "[1] Art. 5 applies. Done.", splitter)};
  docs[0].title = "A title";
  write_corpus_jsonl(dir.file("c.jsonl"), docs);
  const auto back = read_corpus_jsonl(dir.file("c.jsonl"), splitter);
  CHECK(back == docs);
  CHECK(docs[1].paragraphs[0].sentences == std::vector<std::string>{"[1] Art. 5 applies.", "Done."});
  CHECK(docs[0].full_text() == "Is it so? Yes.\n\nAnother.");

  text::write_file(dir.file("dup.jsonl"), "{\"id\":\"a\",\"kind\":\"case\",\"text\":\"x\"}\n{\"id\":\"a\",\"kind\":\"case\",\"text\":\"y\"}\n");
  CHECK_THROWS_AS(read_corpus_jsonl(dir.file("dup.jsonl"), splitter), DataError);
}

TEST_CASE("document kinds") {
  CHECK(parse_kind("case") == DocKind::case_law);
  CHECK(parse_kind("article") == DocKind::article);
  CHECK(parse_kind("question") == DocKind::question);
  CHECK(to_string(DocKind::case_law) == "case");
  CHECK_THROWS(parse_kind("statute"));
}
