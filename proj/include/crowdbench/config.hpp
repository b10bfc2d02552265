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

// Run configuration: one JSON file plus command-line overrides.
//
//   {
//     "human": "humans.jsonl",                 // path or list of paths
//     "models": ["models.jsonl"],
//     "embeddings": "embeddings.jsonl",        // or {"endpoint": url, ...}
//     "kernels": ["semantic", {"kind": "bucket", "families": ["aut"]}],
//     "stopwords": "en-basic-v1.txt",          // optional
//     "estimator": {"replicates": 1000, "ci_level": 0.95, "seed": 7},
//     "rarefaction": {"grid": [5, 10], "repeats": 200, "drift": [[40, 50]]},
//     "adoption": {"gamma": 1, "exposures": [1, 5, 10, 25], "rows": [...]},
//     "compare": {"baseline": "", "variant": "persona", "sweep": [...]},
//     "output": {"dir": "out", "formats": ["csv", "markdown", "svg"]}
//   }
//
// Relative paths resolve against the directory holding the config file.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "crowdbench/embeddings.hpp"
#include "crowdbench/error.hpp"
#include "crowdbench/estimators.hpp"
#include "crowdbench/kernel_spec.hpp"
#include "crowdbench/report.hpp"

namespace crowdbench {

struct EmbeddingSource {
  std::string path;      // local embedding file
  std::string endpoint;  // remote service URL
  std::string cache;     // optional file for fetched vectors
  RemoteOptions remote;

  bool declared() const { return !path.empty() || !endpoint.empty(); }
};

struct RarefactionSettings {
  std::vector<std::size_t> grid;  // empty: default grid per group
  int repeats = 200;
  std::vector<std::pair<std::size_t, std::size_t>> drift;  // empty: default
};

struct AdoptionRow {
  std::string model;
  std::string task;
  std::optional<double> delta;
  std::optional<double> rho;
  std::optional<double> kappa_h;
};

struct AdoptionSettings {
  double gamma = 1.0;
  std::vector<std::uint64_t> exposures = {1, 5, 10, 25};
  std::vector<std::uint64_t> populations = {5, 50, 500};
  std::vector<double> probabilities = {0.1, 0.5, 0.9};
  std::uint64_t max_exposure = 50;  // right end of plotted curves
  std::vector<AdoptionRow> rows;    // empty: rows come from estimation
};

struct SweepPoint {
  std::string protocol;
  double value = 0.0;
};

struct CompareSettings {
  std::string baseline;  // protocol label; empty means unlabeled responses
  std::string variant;
  std::vector<SweepPoint> sweep;
};

struct RunConfig {
  std::filesystem::path base_dir;
  std::vector<std::string> human;
  std::vector<std::string> models;
  EmbeddingSource embeddings;
  std::vector<KernelSpec> kernels = {KernelSpec{}};
  // Kernel name -> task families it applies to; absent means all families.
  std::map<std::string, std::set<std::string>> kernel_families;
  std::string stopwords_path;
  std::string stopwords_id;
  EstimatorConfig estimator;
  RarefactionSettings rarefaction;
  AdoptionSettings adoption;
  CompareSettings compare;
  std::string output_dir = "crowdbench-out";
  FormatSet formats = all_formats();

  std::filesystem::path resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }

  bool kernel_applies(const KernelSpec& k, const std::string& family) const {
    auto it = kernel_families.find(std::string(kernel_name(k.kind)));
    return it == kernel_families.end() || it->second.count(family) > 0;
  }

  bool needs_embeddings() const {
    for (const auto& k : kernels) {
      if (crowdbench::needs_embeddings(k.kind)) return true;
    }
    return false;
  }

  // Checks that corpus-based commands have what they need.
  void require_corpora() const {
    if (human.empty()) throw validation_error("config names no human corpus");
    if (models.empty()) {
      throw validation_error("config needs at least one model corpus");
    }
    if (needs_embeddings() && !embeddings.declared()) {
      throw validation_error(
          "an embedding kernel is selected but the config declares neither an "
          "embedding file nor an endpoint");
    }
  }
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> kernel;
  std::optional<std::string> out;
  std::optional<std::size_t> workers;
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::string& where,
                           std::initializer_list<const char*> known) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) {
      throw validation_error("unknown config key '" + key + "' in " + where);
    }
  }
}

inline std::vector<std::string> string_or_list(const nlohmann::json& v,
                                               const std::string& key) {
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) {
    throw validation_error("'" + key + "' must be a string or list of strings");
  }
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) {
      throw validation_error("'" + key + "' entries must be strings");
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

template <typename T>
T get_as(const nlohmann::json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw validation_error("config key '" + std::string(key) + "' in " + where +
                           " has the wrong type");
  }
}

template <typename T>
void read_opt(const nlohmann::json& obj, const char* key, T& out,
              const std::string& where) {
  if (obj.contains(key)) out = get_as<T>(obj, key, where);
}

inline void parse_embeddings_source(const nlohmann::json& v,
                                    EmbeddingSource& out) {
  if (v.is_string()) {
    out.path = v.get<std::string>();
    return;
  }
  if (!v.is_object()) {
    throw validation_error("'embeddings' must be a path or an object");
  }
  reject_unknown(v, "embeddings",
                 {"path", "endpoint", "cache", "model", "batch", "attempts",
                  "timeout_s", "backoff_ms", "parallelism"});
  read_opt(v, "path", out.path, "embeddings");
  read_opt(v, "endpoint", out.endpoint, "embeddings");
  read_opt(v, "cache", out.cache, "embeddings");
  read_opt(v, "model", out.remote.model_name, "embeddings");
  read_opt(v, "batch", out.remote.batch, "embeddings");
  read_opt(v, "attempts", out.remote.attempts, "embeddings");
  read_opt(v, "parallelism", out.remote.parallelism, "embeddings");
  if (v.contains("timeout_s")) {
    out.remote.timeout =
        std::chrono::seconds(get_as<long>(v, "timeout_s", "embeddings"));
  }
  if (v.contains("backoff_ms")) {
    out.remote.initial_backoff =
        std::chrono::milliseconds(get_as<long>(v, "backoff_ms", "embeddings"));
  }
  if (!out.path.empty() && !out.endpoint.empty()) {
    throw validation_error("'embeddings' sets both a path and an endpoint");
  }
}

inline AdoptionRow parse_adoption_row(const nlohmann::json& v) {
  reject_unknown(v, "adoption.rows", {"model", "task", "delta", "rho", "kappa_h"});
  AdoptionRow row;
  read_opt(v, "model", row.model, "adoption.rows");
  read_opt(v, "task", row.task, "adoption.rows");
  if (v.contains("delta")) row.delta = get_as<double>(v, "delta", "adoption.rows");
  if (v.contains("rho")) row.rho = get_as<double>(v, "rho", "adoption.rows");
  if (v.contains("kappa_h")) {
    row.kappa_h = get_as<double>(v, "kappa_h", "adoption.rows");
  }
  if (row.delta.has_value() == (row.rho.has_value() || row.kappa_h.has_value())) {
    throw validation_error(
        "each adoption row needs either 'delta' or both 'rho' and 'kappa_h'");
  }
  if (row.rho.has_value() != row.kappa_h.has_value()) {
    throw validation_error("adoption row with 'rho' also needs 'kappa_h'");
  }
  return row;
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir) {
  using detail::get_as;
  using detail::read_opt;
  if (!j.is_object()) throw validation_error("config must be a JSON object");
  detail::reject_unknown(j, "config",
                         {"human", "models", "embeddings", "kernels", "kernel",
                          "stopwords", "estimator", "rarefaction", "adoption",
                          "compare", "output"});
  RunConfig cfg;
  cfg.base_dir = base_dir;
  if (j.contains("human")) cfg.human = detail::string_or_list(j["human"], "human");
  if (j.contains("models")) {
    cfg.models = detail::string_or_list(j["models"], "models");
  }
  if (j.contains("embeddings")) {
    detail::parse_embeddings_source(j["embeddings"], cfg.embeddings);
  }
  if (j.contains("kernels") && j.contains("kernel")) {
    throw validation_error("config sets both 'kernel' and 'kernels'");
  }
  if (j.contains("kernels") || j.contains("kernel")) {
    nlohmann::json list = j.contains("kernels") ? j["kernels"] : j["kernel"];
    if (!list.is_array()) list = nlohmann::json::array({list});
    if (list.empty()) throw validation_error("'kernels' is empty");
    cfg.kernels.clear();
    for (const auto& k : list) {
      if (k.is_string()) {
        cfg.kernels.push_back({parse_kernel_kind(k.get<std::string>())});
        continue;
      }
      if (!k.is_object()) {
        throw validation_error("kernel entries must be names or objects");
      }
      detail::reject_unknown(k, "kernels", {"kind", "families"});
      const KernelSpec spec{
          parse_kernel_kind(get_as<std::string>(k, "kind", "kernels"))};
      cfg.kernels.push_back(spec);
      if (k.contains("families")) {
        const auto fams = detail::string_or_list(k["families"], "families");
        cfg.kernel_families[std::string(kernel_name(spec.kind))] =
            std::set<std::string>(fams.begin(), fams.end());
      }
    }
    for (std::size_t a = 0; a < cfg.kernels.size(); ++a) {
      for (std::size_t b = a + 1; b < cfg.kernels.size(); ++b) {
        if (cfg.kernels[a].kind == cfg.kernels[b].kind) {
          throw validation_error("kernel '" +
                                 std::string(kernel_name(cfg.kernels[a].kind)) +
                                 "' is listed twice");
        }
      }
    }
  }
  if (j.contains("stopwords")) {
    const auto& s = j["stopwords"];
    if (s.is_string()) {
      cfg.stopwords_path = s.get<std::string>();
    } else {
      detail::reject_unknown(s, "stopwords", {"path", "id"});
      read_opt(s, "path", cfg.stopwords_path, "stopwords");
      read_opt(s, "id", cfg.stopwords_id, "stopwords");
    }
  }
  if (j.contains("estimator")) {
    const auto& e = j["estimator"];
    detail::reject_unknown(e, "estimator",
                           {"replicates", "ci_level", "seed", "workers",
                            "kappa_h_ceiling", "max_flagged_fraction"});
    read_opt(e, "replicates", cfg.estimator.replicates, "estimator");
    read_opt(e, "ci_level", cfg.estimator.ci_level, "estimator");
    read_opt(e, "seed", cfg.estimator.seed, "estimator");
    read_opt(e, "workers", cfg.estimator.workers, "estimator");
    read_opt(e, "kappa_h_ceiling", cfg.estimator.kappa_h_ceiling, "estimator");
    read_opt(e, "max_flagged_fraction", cfg.estimator.max_flagged_fraction,
             "estimator");
  }
  if (j.contains("rarefaction")) {
    const auto& r = j["rarefaction"];
    detail::reject_unknown(r, "rarefaction", {"grid", "repeats", "drift"});
    read_opt(r, "grid", cfg.rarefaction.grid, "rarefaction");
    read_opt(r, "repeats", cfg.rarefaction.repeats, "rarefaction");
    read_opt(r, "drift", cfg.rarefaction.drift, "rarefaction");
  }
  if (j.contains("adoption")) {
    const auto& a = j["adoption"];
    detail::reject_unknown(a, "adoption",
                           {"gamma", "exposures", "populations",
                            "probabilities", "max_exposure", "rows"});
    read_opt(a, "gamma", cfg.adoption.gamma, "adoption");
    read_opt(a, "exposures", cfg.adoption.exposures, "adoption");
    read_opt(a, "populations", cfg.adoption.populations, "adoption");
    read_opt(a, "probabilities", cfg.adoption.probabilities, "adoption");
    read_opt(a, "max_exposure", cfg.adoption.max_exposure, "adoption");
    if (a.contains("rows")) {
      for (const auto& row : a["rows"]) {
        cfg.adoption.rows.push_back(detail::parse_adoption_row(row));
      }
    }
  }
  if (j.contains("compare")) {
    const auto& c = j["compare"];
    detail::reject_unknown(c, "compare", {"baseline", "variant", "sweep"});
    read_opt(c, "baseline", cfg.compare.baseline, "compare");
    read_opt(c, "variant", cfg.compare.variant, "compare");
    if (c.contains("sweep")) {
      for (const auto& p : c["sweep"]) {
        detail::reject_unknown(p, "compare.sweep", {"protocol", "value"});
        cfg.compare.sweep.push_back(
            {get_as<std::string>(p, "protocol", "compare.sweep"),
             get_as<double>(p, "value", "compare.sweep")});
      }
    }
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    detail::reject_unknown(o, "output", {"dir", "formats"});
    read_opt(o, "dir", cfg.output_dir, "output");
    if (o.contains("formats")) {
      cfg.formats.clear();
      for (const auto& f : detail::string_or_list(o["formats"], "formats")) {
        cfg.formats.insert(parse_output_format(f));
      }
    }
  }
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error("config '" + path + "': " + e.what());
  }
  auto dir = std::filesystem::absolute(path).parent_path();
  return parse_run_config(j, dir);
}

inline void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.seed) cfg.estimator.seed = *o.seed;
  if (o.kernel) {
    cfg.kernels = {KernelSpec{parse_kernel_kind(*o.kernel)}};
    const std::string name(kernel_name(cfg.kernels.front().kind));
    std::erase_if(cfg.kernel_families,
                  [&](const auto& kv) { return kv.first != name; });
  }
  if (o.out) {
    cfg.output_dir = std::filesystem::absolute(*o.out).string();
  }
  if (o.workers) cfg.estimator.workers = *o.workers;
}

// Effective configuration with all defaults spelled out and paths made
// absolute, so the echo can be re-run from any directory.
inline nlohmann::json to_json(const RunConfig& cfg) {
  auto abs = [&](const std::string& p) {
    return p.empty() ? p : cfg.resolve(p).lexically_normal().string();
  };
  nlohmann::json j;
  j["human"] = nlohmann::json::array();
  for (const auto& p : cfg.human) j["human"].push_back(abs(p));
  j["models"] = nlohmann::json::array();
  for (const auto& p : cfg.models) j["models"].push_back(abs(p));
  nlohmann::json emb = nlohmann::json::object();
  if (!cfg.embeddings.path.empty()) emb["path"] = abs(cfg.embeddings.path);
  if (!cfg.embeddings.endpoint.empty()) {
    emb["endpoint"] = cfg.embeddings.endpoint;
    emb["model"] = cfg.embeddings.remote.model_name;
    emb["batch"] = cfg.embeddings.remote.batch;
    emb["attempts"] = cfg.embeddings.remote.attempts;
    emb["timeout_s"] = cfg.embeddings.remote.timeout.count();
    emb["backoff_ms"] = cfg.embeddings.remote.initial_backoff.count();
    emb["parallelism"] = cfg.embeddings.remote.parallelism;
    if (!cfg.embeddings.cache.empty()) emb["cache"] = abs(cfg.embeddings.cache);
  }
  j["embeddings"] = emb;
  j["kernels"] = nlohmann::json::array();
  for (const auto& k : cfg.kernels) {
    const std::string name(kernel_name(k.kind));
    auto it = cfg.kernel_families.find(name);
    if (it == cfg.kernel_families.end()) {
      j["kernels"].push_back(name);
    } else {
      j["kernels"].push_back({{"kind", name}, {"families", it->second}});
    }
  }
  j["stopwords"] = {{"path", abs(cfg.stopwords_path)},
                    {"id", cfg.kernels.front().stopword_list_id}};
  j["estimator"] = {{"replicates", cfg.estimator.replicates},
                    {"ci_level", cfg.estimator.ci_level},
                    {"seed", cfg.estimator.seed},
                    {"workers", cfg.estimator.workers},
                    {"kappa_h_ceiling", cfg.estimator.kappa_h_ceiling},
                    {"max_flagged_fraction", cfg.estimator.max_flagged_fraction}};
  j["rarefaction"] = {{"grid", cfg.rarefaction.grid},
                      {"repeats", cfg.rarefaction.repeats},
                      {"drift", cfg.rarefaction.drift}};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : cfg.adoption.rows) {
    nlohmann::json row = {{"model", r.model}, {"task", r.task}};
    if (r.delta) row["delta"] = *r.delta;
    if (r.rho) row["rho"] = *r.rho;
    if (r.kappa_h) row["kappa_h"] = *r.kappa_h;
    rows.push_back(row);
  }
  j["adoption"] = {{"gamma", cfg.adoption.gamma},
                   {"exposures", cfg.adoption.exposures},
                   {"populations", cfg.adoption.populations},
                   {"probabilities", cfg.adoption.probabilities},
                   {"max_exposure", cfg.adoption.max_exposure},
                   {"rows", rows}};
  nlohmann::json sweep = nlohmann::json::array();
  for (const auto& p : cfg.compare.sweep) {
    sweep.push_back({{"protocol", p.protocol}, {"value", p.value}});
  }
  j["compare"] = {{"baseline", cfg.compare.baseline},
                  {"variant", cfg.compare.variant},
                  {"sweep", sweep}};
  std::vector<std::string> formats;
  if (cfg.formats.count(OutputFormat::kCsv)) formats.push_back("csv");
  if (cfg.formats.count(OutputFormat::kMarkdown)) formats.push_back("markdown");
  if (cfg.formats.count(OutputFormat::kSvg)) formats.push_back("svg");
  j["output"] = {{"dir", abs(cfg.output_dir)}, {"formats", formats}};
  return j;
}

}  // namespace crowdbench
