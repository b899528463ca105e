#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lexent/lexical.hpp"
#include "lexent/pairs.hpp"

namespace lexent::chunker {

/// Sliding-window settings in tokens, written <window>/<stride>.
struct ChunkSpec {
  std::size_t window = 150;
  std::size_t stride = 50;

  bool valid() const { return stride > 0 && stride <= window; }
  /// Throws UsageError unless 0 < stride <= window.
  void validate() const;
  /// Parses "150/50".
  static ChunkSpec parse(std::string_view s);
};

struct Chunk {
  std::string article_id;
  std::size_t chunk_index = 0;
  std::size_t start_token = 0;
  std::size_t end_token = 0;  // exclusive
  std::string text;
};

/// 1 + ceil(max(0, L - window) / stride) for L > 0, else 0.
std::size_t chunk_count(std::size_t length, const ChunkSpec& spec);

/// Windows start at 0, stride, 2*stride, ...; each covers
/// [start, min(start + window, L)). Stops after the first window that
/// reaches L. Chunk text is the window's tokens joined by single spaces.
std::vector<Chunk> chunk_tokens(const lexical::Tokens& tokens, const ChunkSpec& spec,
                                std::string_view article_id = {});

/// One (question, chunk) pair per chunk; each inherits the article label.
std::vector<LabeledPair> expand_pairs(std::string_view query_id, std::string_view question,
                                      std::string_view article_id, const lexical::Tokens& article_tokens,
                                      bool label, const ChunkSpec& spec);

}  // namespace lexent::chunker
