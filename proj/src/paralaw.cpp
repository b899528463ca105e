#include "lexent/paralaw.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "json.hpp"
#include "lexent/text.hpp"

namespace lexent::paralaw {

std::vector<NspSample> generate_samples(const AlignedPair& current, const AlignedPair& next,
                                        const AlignedPair& distractor, const Languages& langs) {
  if (distractor.text_a == next.text_a && distractor.text_b == next.text_b) {
    throw DataError("distractor pair equals the next pair; the random samples would be mislabeled");
  }
  const Sentence ai{current.text_a, langs.a}, bi{current.text_b, langs.b};
  const Sentence an{next.text_a, langs.a}, bn{next.text_b, langs.b};
  const Sentence ar{distractor.text_a, langs.a}, br{distractor.text_b, langs.b};
  const std::optional<int> none;

  return {
      {an, ai, none, 2}, {bn, bi, none, 2}, {bn, ai, none, 2}, {an, bi, none, 2},
      {bi, bn, none, 1}, {ai, an, none, 1}, {ai, bn, 1, 1},    {bi, an, 1, 1},
      {ai, br, 0, 0},    {bi, ar, 0, 0},    {ai, ar, none, 0}, {bi, br, none, 0},
  };
}

bool sample_is_consistent(const NspSample& s) {
  if (s.nmsp < 0 || s.nmsp > 2) return false;
  if (s.first == s.second) return false;
  const bool cross = s.first.language != s.second.language;
  const bool should_have_nfsp = cross && s.nmsp <= 1;
  if (s.nfsp.has_value() != should_have_nfsp) return false;
  return !s.nfsp || *s.nfsp == s.nmsp;
}

namespace {

struct PairRef {
  std::size_t doc;
  std::size_t pos;
};

}  // namespace

std::vector<NspSample> build_dataset(const std::vector<ParallelDoc>& corpus, std::uint64_t seed,
                                     const Languages& langs) {
  std::vector<PairRef> all;
  std::vector<std::size_t> offset(corpus.size());
  std::size_t adjacencies = 0;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    offset[d] = all.size();
    for (std::size_t p = 0; p < corpus[d].pairs.size(); ++p) all.push_back({d, p});
    if (corpus[d].pairs.size() >= 2) adjacencies += corpus[d].pairs.size() - 1;
  }
  if (adjacencies == 0) throw DataError("parallel corpus has no document with two or more aligned pairs");

  std::vector<std::vector<NspSample>> per_doc(corpus.size());
  std::vector<std::string> errors(corpus.size());
  const auto n_docs = static_cast<std::ptrdiff_t>(corpus.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t di = 0; di < n_docs; ++di) {
    const auto d = static_cast<std::size_t>(di);
    const auto& doc = corpus[d];
    if (doc.pairs.size() < 2) continue;
    Rng rng(substream_seed(seed, d));
    const std::size_t own = doc.pairs.size();
    const std::size_t others = all.size() - own;
    try {
      for (std::size_t i = 0; i + 1 < own; ++i) {
        const AlignedPair& next = doc.pairs[i + 1];
        // Candidate pool: other documents, or this document minus {i, i+1}.
        const AlignedPair* distractor = nullptr;
        const std::size_t pool = others > 0 ? others : (own > 2 ? own - 2 : 0);
        if (pool == 0) throw DataError("document '" + doc.id + "' has no distractor candidates");
        std::size_t r = uniform_index(rng, pool);
        for (std::size_t attempt = 0; attempt < pool; ++attempt, r = (r + 1) % pool) {
          const AlignedPair* cand;
          if (others > 0) {
            std::size_t flat = r >= offset[d] ? r + own : r;
            cand = &corpus[all[flat].doc].pairs[all[flat].pos];
          } else {
            std::size_t p = r;
            if (p >= i) p += 2;
            cand = &doc.pairs[p];
          }
          if (cand->text_a == next.text_a && cand->text_b == next.text_b) continue;
          distractor = cand;
          break;
        }
        if (distractor == nullptr) throw DataError("no usable distractor for document '" + doc.id + "'");
        auto samples = generate_samples(doc.pairs[i], next, *distractor, langs);
        for (auto& s : samples) per_doc[d].push_back(std::move(s));
      }
    } catch (const std::exception& e) {
      errors[d] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw DataError(e);
  }

  std::vector<NspSample> out;
  out.reserve(adjacencies * 12);
  for (auto& v : per_doc) {
    for (auto& s : v) out.push_back(std::move(s));
  }
  Rng shuffle_rng(substream_seed(seed, corpus.size() + 0x51ULL));
  shuffle_in_place(out, shuffle_rng);
  return out;
}

std::vector<ParallelDoc> read_parallel_tsv(const std::string& path) {
  std::map<std::string, std::vector<AlignedPair>> docs;
  std::size_t lineno = 0;
  for (const auto& line : text::read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (!text::is_valid_utf8(line)) throw DataError(where + ": not valid UTF-8");
    std::vector<std::string_view> cols;
    std::string_view rest = line;
    while (true) {
      const auto tab = rest.find('\t');
      cols.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (cols.size() != 4) throw DataError(where + ": expected 4 tab-separated columns, got " + std::to_string(cols.size()));
    AlignedPair p;
    const auto [ptr, ec] = std::from_chars(cols[1].data(), cols[1].data() + cols[1].size(), p.pos);
    if (ec != std::errc() || ptr != cols[1].data() + cols[1].size()) throw DataError(where + ": bad position '" + std::string(cols[1]) + "'");
    p.text_a = std::string(cols[2]);
    p.text_b = std::string(cols[3]);
    if (text::trim(p.text_a).empty() || text::trim(p.text_b).empty()) throw DataError(where + ": empty sentence");
    docs[std::string(cols[0])].push_back(std::move(p));
  }
  std::vector<ParallelDoc> out;
  for (auto& [id, pairs] : docs) {
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.pos < b.pos; });
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (pairs[i].pos != i) throw DataError(path + ": positions of document '" + id + "' are not consecutive from 0");
    }
    out.push_back({id, std::move(pairs)});
  }
  return out;
}

std::string sample_to_json_line(const NspSample& s) {
  nlohmann::json obj;
  obj["first"] = s.first.text;
  obj["first_lang"] = s.first.language;
  obj["second"] = s.second.text;
  obj["second_lang"] = s.second.language;
  obj["nfsp"] = s.nfsp ? nlohmann::json(*s.nfsp) : nlohmann::json(nullptr);
  obj["nmsp"] = s.nmsp;
  return obj.dump();
}

void write_samples(const std::string& path, const std::vector<NspSample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    out += sample_to_json_line(s);
    out += '\n';
  }
  text::write_file(path, out);
}

}  // namespace lexent::paralaw
