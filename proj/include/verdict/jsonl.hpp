#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "verdict/dataset.hpp"
#include "verdict/errors.hpp"
#include "verdict/metrics.hpp"

namespace verdict {

// JSONL interchange, one object per line, UTF-8.
//
// Dataset line:
//   {"claim_id": 1, "label": "SUPPORTS", "features": [0.5, -1.25],
//    "gold_evidence": [[["Page", 0]]], "retrieved": [["Page", 0], ["Other", 3]]}
// Prediction line:
//   {"claim_id": 1, "gold": "SUPPORTS", "predicted": "REFUTES",
//    "gold_evidence": ..., "retrieved": ...}
//
// The evidence fields are optional in both. Unknown fields are rejected
// unless `lenient` is set.

namespace detail {

using json = nlohmann::json;

inline json parse_line(const std::string& path, std::size_t line_no, const std::string& line) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(path, line_no, std::string("malformed JSON: ") + e.what());
  }
}

inline void check_known_fields(const std::string& path, std::size_t line_no, const json& obj,
                               const std::vector<std::string>& known, bool lenient) {
  if (!obj.is_object()) throw ParseError(path, line_no, "expected a JSON object");
  if (lenient) return;
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ParseError(path, line_no, "unknown field \"" + key + "\"");
    }
  }
}

inline long long read_claim_id(const std::string& path, std::size_t line_no, const json& obj) {
  if (!obj.contains("claim_id") || !obj["claim_id"].is_number_integer()) {
    throw ParseError(path, line_no, "field \"claim_id\" must be an integer");
  }
  return obj["claim_id"].get<long long>();
}

inline VerdictLabel read_label(const std::string& path, std::size_t line_no, const json& obj,
                               const char* field) {
  if (!obj.contains(field) || !obj[field].is_string()) {
    throw ParseError(path, line_no, "field \"" + std::string(field) + "\" must be a string");
  }
  const auto label = try_label_from_string(obj[field].get<std::string>());
  if (!label) {
    throw ParseError(path, line_no,
                     "field \"" + std::string(field) + "\": unknown verdict label \"" +
                         obj[field].get<std::string>() + "\"");
  }
  return *label;
}

inline EvidenceItem read_evidence_item(const std::string& path, std::size_t line_no,
                                       const json& node, const char* field) {
  if (!node.is_array() || node.size() != 2 || !node[0].is_string() ||
      !node[1].is_number_integer()) {
    throw ParseError(path, line_no,
                     "field \"" + std::string(field) + "\": evidence item must be [page, index]");
  }
  EvidenceItem item{node[0].get<std::string>(), node[1].get<long long>()};
  if (item.page.empty()) {
    throw ParseError(path, line_no, "field \"" + std::string(field) + "\": page must be non-empty");
  }
  if (item.sentence_index < 0) {
    throw ParseError(path, line_no,
                     "field \"" + std::string(field) + "\": sentence index must be >= 0");
  }
  return item;
}

inline std::vector<EvidenceItem> read_retrieved(const std::string& path, std::size_t line_no,
                                                const json& obj) {
  std::vector<EvidenceItem> items;
  if (!obj.contains("retrieved")) return items;
  if (!obj["retrieved"].is_array()) {
    throw ParseError(path, line_no, "field \"retrieved\" must be an array");
  }
  std::unordered_set<EvidenceItem, EvidenceItemHash> seen;
  for (const auto& node : obj["retrieved"]) {
    EvidenceItem item = read_evidence_item(path, line_no, node, "retrieved");
    if (!seen.insert(item).second) {
      throw ParseError(path, line_no, "field \"retrieved\": duplicate evidence item");
    }
    items.push_back(std::move(item));
  }
  return items;
}

inline std::vector<std::vector<EvidenceItem>> read_gold_evidence(const std::string& path,
                                                                 std::size_t line_no,
                                                                 const json& obj) {
  std::vector<std::vector<EvidenceItem>> sets;
  if (!obj.contains("gold_evidence")) return sets;
  if (!obj["gold_evidence"].is_array()) {
    throw ParseError(path, line_no, "field \"gold_evidence\" must be an array of evidence sets");
  }
  for (const auto& set_node : obj["gold_evidence"]) {
    if (!set_node.is_array()) {
      throw ParseError(path, line_no, "field \"gold_evidence\": each gold set must be an array");
    }
    std::vector<EvidenceItem> set;
    for (const auto& node : set_node) {
      set.push_back(read_evidence_item(path, line_no, node, "gold_evidence"));
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

inline json evidence_to_json(const std::vector<EvidenceItem>& items) {
  json arr = json::array();
  for (const EvidenceItem& item : items) arr.push_back({item.page, item.sentence_index});
  return arr;
}

inline json gold_evidence_to_json(const std::vector<std::vector<EvidenceItem>>& sets) {
  json arr = json::array();
  for (const auto& set : sets) arr.push_back(evidence_to_json(set));
  return arr;
}

template <typename PerLine>
inline void for_each_jsonl_line(const std::string& path, PerLine&& per_line) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    per_line(line_no, line);
  }
}

}  // namespace detail

inline Dataset load_dataset_jsonl(const std::string& path, bool lenient = false) {
  Dataset dataset;
  std::unordered_set<long long> seen_ids;
  detail::for_each_jsonl_line(path, [&](std::size_t line_no, const std::string& line) {
    const auto obj = detail::parse_line(path, line_no, line);
    detail::check_known_fields(path, line_no, obj,
                               {"claim_id", "label", "features", "gold_evidence", "retrieved"},
                               lenient);
    Sample sample;
    sample.claim_id = detail::read_claim_id(path, line_no, obj);
    if (!seen_ids.insert(sample.claim_id).second) {
      throw ParseError(path, line_no,
                       "duplicate claim_id " + std::to_string(sample.claim_id));
    }
    sample.gold = detail::read_label(path, line_no, obj, "label");
    if (!obj.contains("features") || !obj["features"].is_array()) {
      throw ParseError(path, line_no, "field \"features\" must be an array of numbers");
    }
    for (const auto& v : obj["features"]) {
      if (!v.is_number()) {
        throw ParseError(path, line_no, "field \"features\" must contain only numbers");
      }
      const double x = v.get<double>();
      if (!std::isfinite(x)) {
        throw ParseError(path, line_no, "field \"features\" must contain only finite numbers");
      }
      sample.features.push_back(x);
    }
    if (!dataset.samples.empty() &&
        sample.features.size() != dataset.samples.front().features.size()) {
      throw ParseError(path, line_no,
                       "field \"features\": dimension " + std::to_string(sample.features.size()) +
                           " differs from earlier lines (" +
                           std::to_string(dataset.samples.front().features.size()) + ")");
    }
    sample.gold_evidence = detail::read_gold_evidence(path, line_no, obj);
    sample.retrieved = detail::read_retrieved(path, line_no, obj);
    dataset.samples.push_back(std::move(sample));
  });
  return dataset;
}

inline std::vector<PredictionRecord> load_predictions_jsonl(const std::string& path,
                                                            bool lenient = false) {
  std::vector<PredictionRecord> records;
  std::unordered_set<long long> seen_ids;
  detail::for_each_jsonl_line(path, [&](std::size_t line_no, const std::string& line) {
    const auto obj = detail::parse_line(path, line_no, line);
    detail::check_known_fields(path, line_no, obj,
                               {"claim_id", "gold", "predicted", "gold_evidence", "retrieved"},
                               lenient);
    PredictionRecord record;
    record.claim_id = detail::read_claim_id(path, line_no, obj);
    if (!seen_ids.insert(record.claim_id).second) {
      throw ParseError(path, line_no,
                       "duplicate claim_id " + std::to_string(record.claim_id));
    }
    record.gold = detail::read_label(path, line_no, obj, "gold");
    record.predicted = detail::read_label(path, line_no, obj, "predicted");
    record.gold_evidence = detail::read_gold_evidence(path, line_no, obj);
    record.retrieved = detail::read_retrieved(path, line_no, obj);
    records.push_back(std::move(record));
  });
  return records;
}

inline void save_dataset_jsonl(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const Sample& sample : dataset.samples) {
    detail::json obj;
    obj["claim_id"] = sample.claim_id;
    obj["label"] = std::string(label_to_string(sample.gold));
    obj["features"] = sample.features;
    if (!sample.gold_evidence.empty()) {
      obj["gold_evidence"] = detail::gold_evidence_to_json(sample.gold_evidence);
    }
    if (!sample.retrieved.empty()) {
      obj["retrieved"] = detail::evidence_to_json(sample.retrieved);
    }
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("failed while writing " + path);
}

inline void save_predictions_jsonl(std::span<const PredictionRecord> records,
                                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const PredictionRecord& record : records) {
    detail::json obj;
    obj["claim_id"] = record.claim_id;
    obj["gold"] = std::string(label_to_string(record.gold));
    obj["predicted"] = std::string(label_to_string(record.predicted));
    if (!record.gold_evidence.empty()) {
      obj["gold_evidence"] = detail::gold_evidence_to_json(record.gold_evidence);
    }
    if (!record.retrieved.empty()) {
      obj["retrieved"] = detail::evidence_to_json(record.retrieved);
    }
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("failed while writing " + path);
}

}  // namespace verdict
