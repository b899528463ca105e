#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "lexent/lexical.hpp"

namespace lexent::runfile {

struct RunRecord {
  std::string query_id;
  std::string doc_id;
  std::size_t rank = 1;
  double score = 0.0;
  std::string run_tag;

  bool operator==(const RunRecord&) const = default;
};

/// Ranks start at 1 and run consecutively within each query; scores do not
/// increase with rank; a query's records are contiguous.
void validate(const std::vector<RunRecord>& records);

/// TSV "<query_id>\t<doc_id>\t<rank>\t<score>\t<run_tag>", LF-terminated.
/// Scores are written with 17 significant digits so reading is exact.
std::string format_run(const std::vector<RunRecord>& records);
void write_run(const std::string& path, const std::vector<RunRecord>& records);
std::vector<RunRecord> parse_run(const std::string& data, const std::string& name = "run");
std::vector<RunRecord> read_run(const std::string& path);

std::vector<RunRecord> to_records(const std::string& query_id, const std::vector<lexical::ScoredDoc>& ranked,
                                  const std::string& run_tag);

/// query id -> ranked list, in file order.
std::map<std::string, std::vector<lexical::ScoredDoc>> by_query(const std::vector<RunRecord>& records);

}  // namespace lexent::runfile
