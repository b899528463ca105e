#include "lexent/pairs.hpp"

#include <cmath>
#include <unordered_set>

#include "json.hpp"
#include "lexent/error.hpp"
#include "lexent/text.hpp"

namespace lexent {

using nlohmann::json;

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::gold: return "gold";
    case Provenance::silver: return "silver";
    case Provenance::augmented: return "augmented";
    case Provenance::chunk_derived: return "chunk-derived";
  }
  return "gold";
}

Provenance parse_provenance(std::string_view s) {
  if (s == "gold") return Provenance::gold;
  if (s == "silver") return Provenance::silver;
  if (s == "augmented") return Provenance::augmented;
  if (s == "chunk-derived") return Provenance::chunk_derived;
  throw DataError("unknown provenance '" + std::string(s) + "'");
}

std::string pair_to_json_line(const LabeledPair& p) {
  json obj;
  obj["query_id"] = p.query_id;
  obj["text_a"] = p.text_a;
  obj["text_b"] = p.text_b;
  obj["label"] = p.label;
  obj["provenance"] = to_string(p.provenance);
  obj["article_id"] = p.article_id ? json(*p.article_id) : json(nullptr);
  obj["chunk_index"] = p.chunk_index ? json(*p.chunk_index) : json(nullptr);
  if (p.weight != 1.0) obj["weight"] = p.weight;
  return obj.dump();
}

namespace {

template <typename Fn>
void for_each_json_line(const std::string& path, Fn&& fn) {
  std::size_t lineno = 0;
  for (const auto& line : text::read_lines(path)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
    if (!obj.is_object()) throw DataError(where + ": expected a JSON object");
    try {
      fn(obj, where);
    } catch (const json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
}

}  // namespace

std::vector<LabeledPair> read_pairs(const std::string& path) {
  std::vector<LabeledPair> pairs;
  for_each_json_line(path, [&](const json& obj, const std::string& where) {
    LabeledPair p;
    if (!obj.contains("text_a") || !obj.contains("text_b") || !obj.contains("label")) {
      throw DataError(where + ": pair needs text_a, text_b and label");
    }
    p.query_id = obj.value("query_id", std::string());
    p.text_a = obj.at("text_a").get<std::string>();
    p.text_b = obj.at("text_b").get<std::string>();
    const auto& label = obj.at("label");
    if (label.is_boolean()) {
      p.label = label.get<bool>();
    } else if (label.is_number_integer() && (label.get<int>() == 0 || label.get<int>() == 1)) {
      p.label = label.get<int>() == 1;
    } else {
      throw DataError(where + ": label must be a boolean or 0/1");
    }
    p.provenance = parse_provenance(obj.value("provenance", std::string("gold")));
    p.weight = obj.value("weight", 1.0);
    if (!(p.weight > 0.0) || !std::isfinite(p.weight)) throw DataError(where + ": weight must be positive");
    if (obj.contains("article_id") && obj["article_id"].is_string()) p.article_id = obj["article_id"].get<std::string>();
    if (obj.contains("chunk_index") && obj["chunk_index"].is_number_unsigned()) {
      p.chunk_index = obj["chunk_index"].get<std::size_t>();
    }
    pairs.push_back(std::move(p));
  });
  return pairs;
}

void write_pairs(const std::string& path, const std::vector<LabeledPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += pair_to_json_line(p);
    out += '\n';
  }
  text::write_file(path, out);
}

std::vector<Annotation> read_annotations(const std::string& path) {
  std::vector<Annotation> out;
  std::unordered_set<std::string> seen;
  for_each_json_line(path, [&](const json& obj, const std::string& where) {
    Annotation a;
    a.query_id = obj.at("query_id").get<std::string>();
    a.positive_ids = obj.at("positive_ids").get<std::vector<std::string>>();
    if (!seen.insert(a.query_id).second) throw DataError(where + ": duplicate query_id '" + a.query_id + "'");
    out.push_back(std::move(a));
  });
  return out;
}

void write_annotations(const std::string& path, const std::vector<Annotation>& annotations) {
  std::string out;
  for (const auto& a : annotations) {
    out += json{{"query_id", a.query_id}, {"positive_ids", a.positive_ids}}.dump();
    out += '\n';
  }
  text::write_file(path, out);
}

}  // namespace lexent
