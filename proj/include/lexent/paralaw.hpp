#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lexent/error.hpp"
#include "lexent/rng.hpp"

namespace lexent::paralaw {

/// One sentence and its translation at position `pos` of a parallel document.
struct AlignedPair {
  std::size_t pos = 0;
  std::string text_a;
  std::string text_b;
};

struct ParallelDoc {
  std::string id;
  std::vector<AlignedPair> pairs;
};

struct Sentence {
  std::string text;
  std::string language;

  bool operator==(const Sentence&) const = default;
};

/// NMSP classes: 0 = random second sentence, 1 = next, 2 = previous.
/// NFSP (binary) is only defined for cross-lingual pairs with NMSP 0 or 1,
/// and then equals NMSP.
struct NspSample {
  Sentence first;
  Sentence second;
  std::optional<int> nfsp;
  int nmsp = 0;

  bool operator==(const NspSample&) const = default;
};

struct Languages {
  std::string a = "en";
  std::string b = "ja";
};

/// The twelve samples built from sentence i, sentence i+1 and a distractor,
/// in this fixed order (A/B = language, i = current, n = next, r = random):
///   NMSP 2: (An,Ai) (Bn,Bi) (Bn,Ai) (An,Bi)
///   NMSP 1: (Bi,Bn) (Ai,An) (Ai,Bn)* (Bi,An)*
///   NMSP 0: (Ai,Br)* (Bi,Ar)* (Ai,Ar) (Bi,Br)
/// Starred rows carry an NFSP label. Throws DataError if the distractor has
/// the same texts as the next pair.
std::vector<NspSample> generate_samples(const AlignedPair& current, const AlignedPair& next,
                                        const AlignedPair& distractor, const Languages& langs = {});

/// Checks the NFSP-presence and first != second invariants.
bool sample_is_consistent(const NspSample& s);

/// Every adjacent pair of every document, with a distractor drawn uniformly
/// from the other documents (or, for a single-document corpus, from the same
/// document away from i and i+1). Output is shuffled by the seed.
std::vector<NspSample> build_dataset(const std::vector<ParallelDoc>& corpus, std::uint64_t seed,
                                     const Languages& langs = {});

/// TSV rows doc_id, pos, text_a, text_b. Documents are sorted by id and
/// positions must run 0..n-1 within each document.
std::vector<ParallelDoc> read_parallel_tsv(const std::string& path);

std::string sample_to_json_line(const NspSample& s);
void write_samples(const std::string& path, const std::vector<NspSample>& samples);

/// Seeded shuffle, then the first round(train_fraction * n) items go to train.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> split(const std::vector<T>& items, std::uint64_t seed,
                                                double train_fraction = 0.9) {
  if (items.size() < 10) throw DataError("split needs at least 10 samples, got " + std::to_string(items.size()));
  Rng rng(substream_seed(seed, 0x5b1177ULL));
  const auto order = shuffled_indices(items.size(), rng);
  const auto n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(items.size())));
  std::pair<std::vector<T>, std::vector<T>> out;
  out.first.reserve(n_train);
  out.second.reserve(items.size() - n_train);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? out.first : out.second).push_back(items[order[i]]);
  }
  return out;
}

}  // namespace lexent::paralaw
