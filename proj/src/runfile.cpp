#include "lexent/runfile.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "lexent/error.hpp"
#include "lexent/text.hpp"

namespace lexent::runfile {

void validate(const std::vector<RunRecord>& records) {
  std::set<std::string> finished;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const bool continues = i > 0 && records[i - 1].query_id == r.query_id;
    if (!continues) {
      if (!finished.insert(r.query_id).second) throw DataError("run records for query '" + r.query_id + "' are not contiguous");
      if (r.rank != 1) throw DataError("ranks for query '" + r.query_id + "' must start at 1");
    } else {
      if (r.rank != records[i - 1].rank + 1) {
        throw DataError("ranks for query '" + r.query_id + "' are not consecutive (" + std::to_string(records[i - 1].rank) +
                        " then " + std::to_string(r.rank) + ")");
      }
      if (r.score > records[i - 1].score) throw DataError("scores for query '" + r.query_id + "' increase with rank");
    }
    for (const auto* field : {&r.query_id, &r.doc_id, &r.run_tag}) {
      if (field->find_first_of("\t\n\r") != std::string::npos) throw DataError("run field contains a tab or newline");
    }
    if (r.query_id.empty() || r.doc_id.empty()) throw DataError("run record with an empty id");
    if (!std::isfinite(r.score)) throw DataError("run record with a non-finite score");
  }
}

std::string format_run(const std::vector<RunRecord>& records) {
  validate(records);
  std::string out;
  char buf[64];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%.17g", r.score);
    out += r.query_id + '\t' + r.doc_id + '\t' + std::to_string(r.rank) + '\t' + buf + '\t' + r.run_tag + '\n';
  }
  return out;
}

void write_run(const std::string& path, const std::vector<RunRecord>& records) {
  text::write_file(path, format_run(records));
}

std::vector<RunRecord> parse_run(const std::string& data, const std::string& name) {
  std::vector<RunRecord> records;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start < data.size()) {
    std::size_t end = data.find('\n', start);
    if (end == std::string::npos) end = data.size();
    std::string_view line(data.data() + start, end - start);
    start = end + 1;
    ++lineno;
    if (line.empty()) continue;
    const std::string where = name + " line " + std::to_string(lineno);
    std::vector<std::string_view> cols;
    for (std::size_t s = 0;;) {
      const auto tab = line.find('\t', s);
      cols.push_back(line.substr(s, tab == std::string_view::npos ? std::string_view::npos : tab - s));
      if (tab == std::string_view::npos) break;
      s = tab + 1;
    }
    if (cols.size() != 5) throw DataError(where + ": expected 5 tab-separated columns, got " + std::to_string(cols.size()));
    RunRecord r;
    r.query_id = std::string(cols[0]);
    r.doc_id = std::string(cols[1]);
    {
      const auto [p, ec] = std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), r.rank);
      if (ec != std::errc() || p != cols[2].data() + cols[2].size()) throw DataError(where + ": non-numeric rank '" + std::string(cols[2]) + "'");
    }
    {
      const auto [p, ec] = std::from_chars(cols[3].data(), cols[3].data() + cols[3].size(), r.score);
      if (ec != std::errc() || p != cols[3].data() + cols[3].size()) throw DataError(where + ": non-numeric score '" + std::string(cols[3]) + "'");
    }
    r.run_tag = std::string(cols[4]);
    records.push_back(std::move(r));
  }
  validate(records);
  return records;
}

std::vector<RunRecord> read_run(const std::string& path) { return parse_run(text::read_file(path), path); }

std::vector<RunRecord> to_records(const std::string& query_id, const std::vector<lexical::ScoredDoc>& ranked,
                                  const std::string& run_tag) {
  std::vector<RunRecord> out;
  out.reserve(ranked.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) out.push_back({query_id, ranked[i].doc_id, i + 1, ranked[i].score, run_tag});
  return out;
}

std::map<std::string, std::vector<lexical::ScoredDoc>> by_query(const std::vector<RunRecord>& records) {
  std::map<std::string, std::vector<lexical::ScoredDoc>> out;
  for (const auto& r : records) out[r.query_id].push_back({r.doc_id, r.score});
  return out;
}

}  // namespace lexent::runfile
