// Copyright 2026 The crowdbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Responses, corpora and sampling units, plus the line-delimited corpus file
// reader/writer.
//
// A corpus file holds one JSON object per line:
//   {"id": "r1", "source": "human", "task_family": "slogans",
//    "condition": "phone", "text": "Think different", "participant": "p7"}
// Optional keys: participant, synopsis, bucket, protocol. Unknown keys are
// ignored and reported as warnings.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "crowdbench/error.hpp"

namespace crowdbench {

inline constexpr const char* kHumanSource = "human";

struct Response {
  std::string id;
  std::string source;
  std::string task_family;
  std::string condition_id;
  std::optional<std::string> participant_id;
  std::string text;
  std::optional<std::string> synopsis;
  std::optional<std::int64_t> bucket_id;
  std::optional<std::string> protocol;

  bool is_human() const { return source == kHumanSource; }

  // Model-condition label: generations are pooled by source plus protocol.
  std::string source_label() const {
    return protocol ? source + "@" + *protocol : source;
  }

  friend bool operator==(const Response&, const Response&) = default;
};

struct ConditionMeta {
  std::string task_family;
  std::string prompt;
};

struct Corpus {
  std::vector<Response> responses;
  std::map<std::string, ConditionMeta> conditions;
  std::vector<std::string> warnings;

  bool empty() const { return responses.empty(); }

  // Distinct source labels in first-appearance order.
  std::vector<std::string> source_labels() const {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& r : responses) {
      auto label = r.source_label();
      if (seen.insert(label).second) out.push_back(std::move(label));
    }
    return out;
  }

  std::vector<const Response*> group(const std::string& source_label,
                                     const std::string& condition) const {
    std::vector<const Response*> out;
    for (const auto& r : responses) {
      if (r.condition_id == condition && r.source_label() == source_label) {
        out.push_back(&r);
      }
    }
    return out;
  }

  const Response* find(const std::string& id) const {
    for (const auto& r : responses) {
      if (r.id == id) return &r;
    }
    return nullptr;
  }
};

struct SamplingUnit {
  std::string unit_id;
  std::vector<Response> responses;
};

namespace detail {

inline std::string require_string(const nlohmann::json& rec, const char* key,
                                  std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) {
    throw parse_error("line " + std::to_string(line) +
                      ": missing required field '" + key + "'");
  }
  if (!it->is_string()) {
    throw parse_error("line " + std::to_string(line) + ": field '" + key +
                      "' must be a string");
  }
  return it->get<std::string>();
}

inline std::optional<std::string> optional_string(const nlohmann::json& rec,
                                                  const char* key,
                                                  std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  throw parse_error("line " + std::to_string(line) + ": field '" + key +
                    "' must be a string");
}

inline bool is_known_key(const std::string& key) {
  static const std::set<std::string> kKnown = {
      "id",          "source",   "task_family", "condition", "text",
      "participant", "synopsis", "bucket",      "protocol"};
  return kKnown.count(key) > 0;
}

}  // namespace detail

inline Response parse_response(const std::string& line_text, std::size_t line,
                               std::vector<std::string>* warnings) {
  nlohmann::json rec;
  try {
    rec = nlohmann::json::parse(line_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error("line " + std::to_string(line) +
                      ": malformed record: " + e.what());
  }
  if (!rec.is_object()) {
    throw parse_error("line " + std::to_string(line) +
                      ": record must be a JSON object");
  }
  Response r;
  r.id = detail::require_string(rec, "id", line);
  r.source = detail::require_string(rec, "source", line);
  r.task_family = detail::require_string(rec, "task_family", line);
  r.condition_id = detail::require_string(rec, "condition", line);
  r.text = detail::require_string(rec, "text", line);
  if (r.id.empty()) {
    throw parse_error("line " + std::to_string(line) + ": empty id");
  }
  if (r.source.empty()) {
    throw parse_error("line " + std::to_string(line) + ": empty source");
  }
  if (r.condition_id.empty()) {
    throw parse_error("line " + std::to_string(line) + ": empty condition");
  }
  r.participant_id = detail::optional_string(rec, "participant", line);
  r.synopsis = detail::optional_string(rec, "synopsis", line);
  r.protocol = detail::optional_string(rec, "protocol", line);
  if (auto it = rec.find("bucket"); it != rec.end() && !it->is_null()) {
    if (!it->is_number_integer()) {
      throw parse_error("line " + std::to_string(line) +
                        ": field 'bucket' must be an integer");
    }
    r.bucket_id = it->get<std::int64_t>();
  }
  if (warnings != nullptr) {
    for (const auto& item : rec.items()) {
      if (!detail::is_known_key(item.key())) {
        warnings->push_back("line " + std::to_string(line) +
                            ": unknown key '" + item.key() + "' ignored");
      }
    }
  }
  return r;
}

// Appends a response, enforcing id uniqueness and a single task family per
// condition.
inline void add_response(Corpus& corpus, Response r,
                         std::unordered_set<std::string>& ids,
                         const std::string& where) {
  if (!ids.insert(r.id).second) {
    throw validation_error(where + ": duplicate id '" + r.id + "'");
  }
  auto [it, inserted] =
      corpus.conditions.try_emplace(r.condition_id, ConditionMeta{});
  if (inserted) {
    it->second.task_family = r.task_family;
  } else if (it->second.task_family != r.task_family) {
    throw validation_error(where + ": condition '" + r.condition_id +
                           "' assigned to task families '" +
                           it->second.task_family + "' and '" +
                           r.task_family + "'");
  }
  corpus.responses.push_back(std::move(r));
}

inline Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  std::unordered_set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    Response r = parse_response(text, line, &corpus.warnings);
    add_response(corpus, std::move(r), ids, "line " + std::to_string(line));
  }
  return corpus;
}

inline Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open corpus file '" + path + "'");
  try {
    return parse_corpus(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

// Concatenates corpora; ids must stay unique across all inputs because
// embedding tables are keyed by response id.
inline Corpus merge_corpora(const std::vector<Corpus>& parts) {
  Corpus merged;
  std::unordered_set<std::string> ids;
  for (const auto& part : parts) {
    for (const auto& r : part.responses) add_response(merged, r, ids, "merge");
    for (const auto& [cond, meta] : part.conditions) {
      if (!meta.prompt.empty()) merged.conditions[cond].prompt = meta.prompt;
    }
    merged.warnings.insert(merged.warnings.end(), part.warnings.begin(),
                           part.warnings.end());
  }
  return merged;
}

inline nlohmann::json to_json(const Response& r) {
  nlohmann::json rec;
  rec["id"] = r.id;
  rec["source"] = r.source;
  rec["task_family"] = r.task_family;
  rec["condition"] = r.condition_id;
  rec["text"] = r.text;
  if (r.participant_id) rec["participant"] = *r.participant_id;
  if (r.synopsis) rec["synopsis"] = *r.synopsis;
  if (r.bucket_id) rec["bucket"] = *r.bucket_id;
  if (r.protocol) rec["protocol"] = *r.protocol;
  return rec;
}

inline void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& r : corpus.responses) out << to_json(r).dump() << '\n';
}

inline void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write corpus file '" + path + "'");
  write_corpus(out, corpus);
}

// Participant units when every response carries a participant id, singleton
// units when none does. Mixed groups are an error.
inline std::vector<SamplingUnit> partition_group(
    const std::vector<const Response*>& group, const std::string& label) {
  if (group.empty()) {
    throw validation_error("empty group " + label);
  }
  const auto with_participant = std::count_if(
      group.begin(), group.end(),
      [](const Response* r) { return r->participant_id.has_value(); });
  std::map<std::string, SamplingUnit> units;
  if (with_participant == 0) {
    for (const Response* r : group) {
      auto& unit = units[r->id];
      unit.unit_id = r->id;
      unit.responses.push_back(*r);
    }
  } else if (static_cast<std::size_t>(with_participant) == group.size()) {
    for (const Response* r : group) {
      auto& unit = units[*r->participant_id];
      unit.unit_id = *r->participant_id;
      unit.responses.push_back(*r);
    }
  } else {
    throw validation_error(
        "group " + label +
        " mixes responses with and without participant ids (" +
        std::to_string(with_participant) + " of " +
        std::to_string(group.size()) + " have one)");
  }
  std::vector<SamplingUnit> out;
  out.reserve(units.size());
  for (auto& [id, unit] : units) out.push_back(std::move(unit));
  return out;
}

inline std::vector<SamplingUnit> partition_units(const Corpus& corpus,
                                                 const std::string& source,
                                                 const std::string& condition) {
  return partition_group(corpus.group(source, condition),
                         "(" + source + ", " + condition + ")");
}

// Wraps loose responses (e.g. model generations) as singleton units.
inline std::vector<SamplingUnit> singleton_units(
    const std::vector<Response>& responses) {
  std::vector<SamplingUnit> out;
  out.reserve(responses.size());
  for (const auto& r : responses) out.push_back(SamplingUnit{r.id, {r}});
  return out;
}

struct GroupReport {
  std::string source;
  std::string condition;
  std::string task_family;
  std::size_t units = 0;
  std::size_t responses = 0;
  std::size_t unique_texts = 0;
  bool estimable = false;
  std::string issue;
};

struct ValidationReport {
  std::vector<GroupReport> groups;

  bool all_estimable() const {
    return std::all_of(groups.begin(), groups.end(),
                       [](const GroupReport& g) { return g.estimable; });
  }
};

inline ValidationReport validate_corpus(const Corpus& corpus) {
  ValidationReport report;
  std::map<std::pair<std::string, std::string>, std::vector<const Response*>>
      groups;
  for (const auto& r : corpus.responses) {
    groups[{r.source_label(), r.condition_id}].push_back(&r);
  }
  for (const auto& [key, members] : groups) {
    GroupReport g;
    g.source = key.first;
    g.condition = key.second;
    g.task_family = members.front()->task_family;
    g.responses = members.size();
    std::unordered_set<std::string> texts;
    for (const Response* r : members) texts.insert(r->text);
    g.unique_texts = texts.size();
    try {
      g.units = partition_group(members, "").size();
      g.estimable = g.units >= 2;
      if (!g.estimable) g.issue = "fewer than 2 sampling units";
    } catch (const Error& e) {
      g.estimable = false;
      g.issue = "mixed participant ids";
    }
    report.groups.push_back(std::move(g));
  }
  return report;
}

}  // namespace crowdbench
