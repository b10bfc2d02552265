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

// Embedding tables: response id -> unit-norm vector.
//
// File format, one JSON object per line:
//   {"meta": {"dim": 768, "model": "all-mpnet-base-v2"}}   (optional, first)
//   {"id": "r1", "vector": [0.1, ...]}
// Synopsis embeddings share the table under "<id>#synopsis".

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <mutex>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "crowdbench/corpus.hpp"
#include "crowdbench/error.hpp"
#include "crowdbench/kernel_spec.hpp"

namespace crowdbench {

inline constexpr double kUnitNormTolerance = 1e-6;
inline constexpr double kRenormalizeWarnThreshold = 1e-3;

class UnitVector {
 public:
  UnitVector() = default;

  // Scales `raw` to unit length. `original_norm` receives the input norm.
  static UnitVector normalized(std::vector<double> raw,
                               double* original_norm = nullptr) {
    double sq = 0.0;
    for (double x : raw) {
      if (!std::isfinite(x)) throw validation_error("non-finite component");
      sq += x * x;
    }
    const double norm = std::sqrt(sq);
    if (original_norm != nullptr) *original_norm = norm;
    if (norm == 0.0) throw validation_error("zero vector");
    for (double& x : raw) x /= norm;
    UnitVector v;
    v.components_ = std::move(raw);
    return v;
  }

  // Accepts `raw` as-is after checking its norm is 1 within tolerance.
  static UnitVector checked(std::vector<double> raw,
                            double tolerance = kUnitNormTolerance) {
    double sq = 0.0;
    for (double x : raw) sq += x * x;
    if (!(std::abs(std::sqrt(sq) - 1.0) <= tolerance)) {
      throw kernel_error("vector norm " + std::to_string(std::sqrt(sq)) +
                         " is not 1");
    }
    UnitVector v;
    v.components_ = std::move(raw);
    return v;
  }

  std::size_t dimension() const { return components_.size(); }
  std::span<const double> components() const { return components_; }
  double operator[](std::size_t i) const { return components_[i]; }

 private:
  std::vector<double> components_;
};

struct EmbeddingProvenance {
  std::string model;
  bool normalized_on_load = true;
};

class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return order_.size(); }
  bool empty() const { return order_.empty(); }
  const EmbeddingProvenance& provenance() const { return provenance_; }
  EmbeddingProvenance& provenance() { return provenance_; }
  const std::vector<std::string>& ids() const { return order_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  bool contains(const std::string& id) const { return entries_.count(id) > 0; }

  const UnitVector& at(const std::string& id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) {
      throw kernel_error("no embedding for '" + id + "'");
    }
    return it->second;
  }

  const UnitVector* find(const std::string& id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
  }

  // Normalizes and inserts; records a warning when the input norm is off by
  // more than 1e-3.
  void insert(const std::string& id, std::vector<double> raw) {
    if (id.empty()) throw validation_error("embedding with empty id");
    if (raw.empty()) {
      throw validation_error("embedding '" + id + "' has no components");
    }
    if (dimension_ == 0) {
      dimension_ = raw.size();
    } else if (raw.size() != dimension_) {
      throw validation_error("dimension mismatch for '" + id + "': got " +
                             std::to_string(raw.size()) + ", expected " +
                             std::to_string(dimension_));
    }
    if (entries_.count(id) > 0) {
      throw validation_error("duplicate embedding id '" + id + "'");
    }
    double norm = 0.0;
    UnitVector v;
    try {
      v = UnitVector::normalized(std::move(raw), &norm);
    } catch (const Error& e) {
      throw validation_error("embedding '" + id + "': " + e.what());
    }
    if (std::abs(norm - 1.0) > kRenormalizeWarnThreshold) {
      std::ostringstream msg;
      msg << "embedding '" << id << "' had norm " << norm
          << "; renormalized to 1";
      warnings_.push_back(msg.str());
    }
    entries_.emplace(id, std::move(v));
    order_.push_back(id);
  }

  void require_dimension(std::size_t dim) {
    if (dimension_ != 0 && dimension_ != dim) {
      throw validation_error("table dimension " + std::to_string(dimension_) +
                             " does not match declared " +
                             std::to_string(dim));
    }
    dimension_ = dim;
  }

 private:
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, UnitVector> entries_;
  std::vector<std::string> order_;
  std::vector<std::string> warnings_;
  EmbeddingProvenance provenance_;
};

inline std::vector<double> json_vector(const nlohmann::json& value,
                                       const std::string& where) {
  if (!value.is_array()) throw parse_error(where + ": 'vector' must be an array");
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& x : value) {
    if (!x.is_number()) {
      throw parse_error(where + ": vector components must be numbers");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

inline EmbeddingTable parse_embeddings(std::istream& in) {
  EmbeddingTable table;
  std::string text;
  std::size_t line = 0;
  bool seen_record = false;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw parse_error(where + ": malformed record: " + e.what());
    }
    if (!rec.is_object()) throw parse_error(where + ": expected an object");
    if (auto meta = rec.find("meta"); meta != rec.end()) {
      if (seen_record) {
        throw parse_error(where + ": meta line must come first");
      }
      if (auto dim = meta->find("dim"); dim != meta->end()) {
        if (!dim->is_number_integer() || dim->get<std::int64_t>() <= 0) {
          throw parse_error(where + ": meta.dim must be a positive integer");
        }
        table.require_dimension(dim->get<std::size_t>());
      }
      if (auto model = meta->find("model");
          model != meta->end() && model->is_string()) {
        table.provenance().model = model->get<std::string>();
      }
      seen_record = true;
      continue;
    }
    seen_record = true;
    auto id = rec.find("id");
    auto vec = rec.find("vector");
    if (id == rec.end() || !id->is_string()) {
      throw parse_error(where + ": missing string field 'id'");
    }
    if (vec == rec.end()) throw parse_error(where + ": missing field 'vector'");
    try {
      table.insert(id->get<std::string>(), json_vector(*vec, where));
    } catch (const Error& e) {
      throw Error(e.kind(), where + ": " + e.what());
    }
  }
  return table;
}

inline EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open embedding file '" + path + "'");
  try {
    return parse_embeddings(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

inline void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  nlohmann::json meta;
  meta["meta"]["dim"] = table.dimension();
  meta["meta"]["model"] = table.provenance().model;
  out << meta.dump() << '\n';
  for (const auto& id : table.ids()) {
    const auto comps = table.at(id).components();
    nlohmann::json rec;
    rec["id"] = id;
    rec["vector"] = std::vector<double>(comps.begin(), comps.end());
    out << rec.dump() << '\n';
  }
}

inline void save_embeddings(const std::string& path,
                            const EmbeddingTable& table) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write embedding file '" + path + "'");
  write_embeddings(out, table);
}

struct CoverageReport {
  std::vector<std::string> missing;  // response ids without a required vector
  bool complete() const { return missing.empty(); }
};

// Response ids whose required vector (text embedding for semantic, the
// "#synopsis" entry for plot_synopsis) is absent. Other kernels need none.
inline CoverageReport coverage_check(const Corpus& corpus,
                                     const EmbeddingTable& table,
                                     const KernelSpec& spec) {
  CoverageReport report;
  if (!needs_embeddings(spec.kind)) return report;
  for (const auto& r : corpus.responses) {
    if (!table.contains(embedding_key(spec.kind, r.id))) {
      report.missing.push_back(r.id);
    }
  }
  return report;
}

// --- Remote fetch ----------------------------------------------------------
//
// POST {"version": 1, "texts": [{"id":..., "text":...}]}
//   -> {"version": 1, "vectors": [{"id":..., "vector":[...]}]}
// Vectors must come back in request order with the same count.

struct RemoteOptions {
  std::size_t batch = 64;
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::seconds timeout{30};
  std::size_t parallelism = 1;
  std::string model_name;
};

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // request path, defaults to "/"

  static Endpoint parse(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
      throw validation_error("endpoint '" + url + "' has no scheme");
    }
    const auto path_begin = url.find('/', scheme_end + 3);
    Endpoint e;
    if (path_begin == std::string::npos) {
      e.base = url;
      e.path = "/";
    } else {
      e.base = url.substr(0, path_begin);
      e.path = url.substr(path_begin);
    }
    return e;
  }
};

namespace detail {

inline bool is_transient_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

inline std::vector<std::vector<double>> fetch_batch(
    const Endpoint& endpoint,
    std::span<const std::pair<std::string, std::string>> batch,
    const RemoteOptions& opts) {
  nlohmann::json body;
  body["version"] = 1;
  body["texts"] = nlohmann::json::array();
  for (const auto& [id, text] : batch) {
    body["texts"].push_back({{"id", id}, {"text", text}});
  }
  const std::string payload = body.dump();

  std::string last_failure;
  auto backoff = opts.initial_backoff;
  for (int attempt = 1; attempt <= opts.attempts; ++attempt) {
    httplib::Client client(endpoint.base);
    client.set_connection_timeout(opts.timeout);
    client.set_read_timeout(opts.timeout);
    client.set_write_timeout(opts.timeout);
    auto res = client.Post(endpoint.path, payload, "application/json");
    if (!res) {
      last_failure = "request failed: " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      nlohmann::json reply;
      try {
        reply = nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::parse_error& e) {
        throw remote_error(std::string("malformed response body: ") +
                           e.what());
      }
      if (reply.value("version", 0) != 1) {
        throw remote_error("unsupported response version");
      }
      const auto& vectors = reply.at("vectors");
      if (!vectors.is_array() || vectors.size() != batch.size()) {
        throw remote_error(
            "count mismatch: sent " + std::to_string(batch.size()) +
            " texts, received " +
            std::to_string(vectors.is_array() ? vectors.size() : 0) +
            " vectors");
      }
      std::vector<std::vector<double>> out;
      out.reserve(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& item = vectors[i];
        if (item.value("id", std::string()) != batch[i].first) {
          throw remote_error("response order mismatch at position " +
                             std::to_string(i) + ": expected id '" +
                             batch[i].first + "'");
        }
        out.push_back(json_vector(item.at("vector"), "remote"));
      }
      return out;
    } else if (is_transient_status(res->status)) {
      last_failure = "status " + std::to_string(res->status);
    } else {
      throw remote_error("endpoint returned status " +
                         std::to_string(res->status));
    }
    if (attempt < opts.attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw remote_error("giving up after " + std::to_string(opts.attempts) +
                     " attempts: " + last_failure);
}

}  // namespace detail

inline EmbeddingTable fetch_embeddings_remote(
    const std::string& endpoint_url,
    const std::vector<std::pair<std::string, std::string>>& texts,
    const RemoteOptions& opts = {}) {
  if (opts.batch == 0) throw validation_error("batch size must be >= 1");
  EmbeddingTable table;
  table.provenance().model = opts.model_name;
  if (texts.empty()) return table;

  const Endpoint endpoint = Endpoint::parse(endpoint_url);
  const std::size_t batches = (texts.size() + opts.batch - 1) / opts.batch;
  std::vector<std::vector<std::vector<double>>> results(batches);
  std::vector<std::string> failures(batches);

  auto run = [&](std::size_t b) {
    const std::size_t begin = b * opts.batch;
    const std::size_t count = std::min(opts.batch, texts.size() - begin);
    try {
      results[b] = detail::fetch_batch(
          endpoint,
          std::span<const std::pair<std::string, std::string>>(
              texts.data() + begin, count),
          opts);
    } catch (const std::exception& e) {
      failures[b] = e.what();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, opts.parallelism);
  if (workers == 1) {
    for (std::size_t b = 0; b < batches; ++b) {
      run(b);
      if (!failures[b].empty()) break;
    }
  } else {
    std::vector<std::thread> pool;
    std::mutex mu;
    std::size_t next = 0;
    for (std::size_t w = 0; w < std::min(workers, batches); ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t b;
          {
            std::lock_guard<std::mutex> lock(mu);
            if (next >= batches) return;
            b = next++;
          }
          run(b);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (std::size_t b = 0; b < batches; ++b) {
    if (!failures[b].empty()) {
      throw remote_error("batch " + std::to_string(b) + ": " + failures[b]);
    }
  }
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t i = 0; i < results[b].size(); ++i) {
      table.insert(texts[b * opts.batch + i].first, std::move(results[b][i]));
    }
  }
  return table;
}

}  // namespace crowdbench
