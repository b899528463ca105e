#include "doctest.h"
#include "lexent/chunker.hpp"
#include "lexent/error.hpp"
#include "oracles.hpp"

using namespace lexent;
using namespace lexent::chunker;

namespace {

lexical::Tokens numbered(std::size_t n) {
  lexical::Tokens t;
  for (std::size_t i = 0; i < n; ++i) t.push_back("t" + std::to_string(i));
  return t;
}

}  // namespace

TEST_CASE("chunk windows") {
  const ChunkSpec spec{150, 50};
  const auto one = chunk_tokens(numbered(150), spec);
  REQUIRE(one.size() == 1);
  CHECK(one[0].start_token == 0);
  CHECK(one[0].end_token == 150);

  const auto two = chunk_tokens(numbered(200), spec);
  REQUIRE(two.size() == 2);
  CHECK(two[0].start_token == 0);
  CHECK(two[0].end_token == 150);
  CHECK(two[1].start_token == 50);
  CHECK(two[1].end_token == 200);

  CHECK(chunk_tokens(numbered(626), spec).size() == 11);
  CHECK(chunk_count(626, spec) == 11);
  CHECK(chunk_tokens(numbered(0), spec).empty());
}

TEST_CASE("chunk text and indices") {
  const auto chunks = chunk_tokens(numbered(5), ChunkSpec{3, 2}, "art9");
  REQUIRE(chunks.size() == 2);
  CHECK(chunks[0].text == "t0 t1 t2");
  CHECK(chunks[1].text == "t2 t3 t4");
  CHECK(chunks[1].chunk_index == 1);
  CHECK(chunks[1].article_id == "art9");
}

TEST_CASE("chunk count law on a small grid") {
  for (std::size_t w = 1; w <= 12; ++w) {
    for (std::size_t s = 1; s <= w; ++s) {
      for (std::size_t len = 1; len <= 40; ++len) {
        const ChunkSpec spec{w, s};
        const auto chunks = chunk_tokens(numbered(len), spec);
        const std::size_t extra = len > w ? len - w : 0;
        REQUIRE(chunks.size() == 1 + oracle::ceil_div(extra, s));
        CHECK(chunks.back().end_token == len);
      }
    }
  }
}

TEST_CASE("chunk spec parsing and validation") {
  const auto spec = ChunkSpec::parse("110/20");
  CHECK(spec.window == 110);
  CHECK(spec.stride == 20);
  CHECK_THROWS_AS(ChunkSpec::parse("10"), UsageError);
  CHECK_THROWS_AS((ChunkSpec{10, 0}.validate()), UsageError);
  CHECK_THROWS_AS((ChunkSpec{10, 11}.validate()), UsageError);
}

TEST_CASE("expand_pairs inherits the label") {
  const ChunkSpec spec{150, 50};
  CHECK(expand_pairs("q", "question", "a", numbered(100), true, spec).size() == 1);

  const auto positives = expand_pairs("q", "question", "a", numbered(250), true, spec);
  REQUIRE(positives.size() == 3);
  for (std::size_t i = 0; i < positives.size(); ++i) {
    CHECK(positives[i].label);
    CHECK(positives[i].provenance == Provenance::chunk_derived);
    CHECK(positives[i].chunk_index == i);
    CHECK(positives[i].article_id == "a");
    CHECK(positives[i].text_a == "question");
  }
  const auto negatives = expand_pairs("q", "question", "a", numbered(200), false, spec);
  REQUIRE(negatives.size() == 2);
  CHECK_FALSE(negatives[0].label);
  CHECK_FALSE(negatives[1].label);
  CHECK_THROWS_AS(expand_pairs("q", "question", "a", {}, true, spec), DataError);
}
