#include "lexent/chunker.hpp"

#include <charconv>

#include "lexent/error.hpp"

namespace lexent::chunker {

void ChunkSpec::validate() const {
  if (!valid()) {
    throw UsageError("invalid chunk spec " + std::to_string(window) + "/" + std::to_string(stride) +
                     " (need 0 < stride <= window)");
  }
}

ChunkSpec ChunkSpec::parse(std::string_view s) {
  const auto slash = s.find('/');
  ChunkSpec spec;
  auto parse_part = [&](std::string_view part, std::size_t& out) {
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty()) {
      throw UsageError("chunk spec must look like <window>/<stride>, got '" + std::string(s) + "'");
    }
  };
  if (slash == std::string_view::npos) throw UsageError("chunk spec must look like <window>/<stride>, got '" + std::string(s) + "'");
  parse_part(s.substr(0, slash), spec.window);
  parse_part(s.substr(slash + 1), spec.stride);
  spec.validate();
  return spec;
}

std::size_t chunk_count(std::size_t length, const ChunkSpec& spec) {
  spec.validate();
  if (length == 0) return 0;
  const std::size_t excess = length > spec.window ? length - spec.window : 0;
  return 1 + (excess + spec.stride - 1) / spec.stride;
}

std::vector<Chunk> chunk_tokens(const lexical::Tokens& tokens, const ChunkSpec& spec, std::string_view article_id) {
  spec.validate();
  std::vector<Chunk> chunks;
  const std::size_t length = tokens.size();
  for (std::size_t start = 0; start < length; start += spec.stride) {
    Chunk c;
    c.article_id = std::string(article_id);
    c.chunk_index = chunks.size();
    c.start_token = start;
    c.end_token = std::min(start + spec.window, length);
    for (std::size_t i = c.start_token; i < c.end_token; ++i) {
      if (i > c.start_token) c.text += ' ';
      c.text += tokens[i];
    }
    const bool reached_end = c.end_token == length;
    chunks.push_back(std::move(c));
    if (reached_end) break;
  }
  return chunks;
}

std::vector<LabeledPair> expand_pairs(std::string_view query_id, std::string_view question,
                                      std::string_view article_id, const lexical::Tokens& article_tokens,
                                      bool label, const ChunkSpec& spec) {
  if (article_tokens.empty()) throw DataError("article '" + std::string(article_id) + "' has no tokens to chunk");
  std::vector<LabeledPair> pairs;
  for (auto& chunk : chunk_tokens(article_tokens, spec, article_id)) {
    LabeledPair p;
    p.query_id = std::string(query_id);
    p.text_a = std::string(question);
    p.text_b = std::move(chunk.text);
    p.label = label;
    p.provenance = Provenance::chunk_derived;
    p.article_id = std::string(article_id);
    p.chunk_index = chunk.chunk_index;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace lexent::chunker
