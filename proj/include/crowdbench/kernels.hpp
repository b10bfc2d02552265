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

// Crowding kernels K(x, y) in [0, 1].
//
//   semantic              (1 + cos(f(x), f(y))) / 2 over text embeddings
//   plot_synopsis         the same, over synopsis embeddings ("<id>#synopsis")
//   word_jaccard          Jaccard of non-stopword token sets
//   char_trigram_jaccard  Jaccard of character-trigram sets
//   bucket                1 if both responses share a concept bucket
//
// The lexical kernels operate on normalize_text() output. Both-empty sets
// score 1 (the outputs are identical), exactly one empty set scores 0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowdbench/corpus.hpp"
#include "crowdbench/embeddings.hpp"
#include "crowdbench/error.hpp"
#include "crowdbench/kernel_spec.hpp"
#include "crowdbench/text.hpp"

namespace crowdbench {

namespace detail {

inline double dot(std::span<const double> u, std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

// cos = <u,v> / sqrt(|u|^2 |v|^2). Dividing by the recomputed norms makes
// K(x, x) = 1 and K(u, -u) = 0 exact for any stored unit vector.
inline double semantic_from_parts(double uv, double uu, double vv) {
  double cos = uv / std::sqrt(uu * vv);
  cos = std::clamp(cos, -1.0, 1.0);
  return (1.0 + cos) / 2.0;
}

inline void check_unit(double sq_norm) {
  if (!(std::abs(std::sqrt(sq_norm) - 1.0) <= kUnitNormTolerance)) {
    throw kernel_error("semantic kernel input is not unit-norm (norm " +
                       std::to_string(std::sqrt(sq_norm)) + ")");
  }
}

}  // namespace detail

inline double semantic_kernel(std::span<const double> u,
                              std::span<const double> v) {
  if (u.size() != v.size()) {
    throw kernel_error("dimension mismatch: " + std::to_string(u.size()) +
                       " vs " + std::to_string(v.size()));
  }
  const double uu = detail::dot(u, u);
  const double vv = detail::dot(v, v);
  detail::check_unit(uu);
  detail::check_unit(vv);
  return detail::semantic_from_parts(detail::dot(u, v), uu, vv);
}

inline double semantic_kernel(const UnitVector& u, const UnitVector& v) {
  return semantic_kernel(u.components(), v.components());
}

// Jaccard index of two sorted, duplicate-free ranges.
template <typename T>
double sorted_set_jaccard(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  std::size_t i = 0, j = 0, common = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++common;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::size_t unions = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(unions);
}

// Non-stopword tokens of the normalized text, as a sorted set.
inline std::vector<std::string> content_token_set(
    std::string_view text, const StopwordList& stopwords) {
  const std::string normalized = normalize_text(text);
  std::vector<std::string> tokens;
  std::size_t begin = 0;
  while (begin < normalized.size()) {
    std::size_t end = normalized.find(' ', begin);
    if (end == std::string::npos) end = normalized.size();
    std::string token = normalized.substr(begin, end - begin);
    if (!token.empty() && !stopwords.contains(token)) {
      tokens.push_back(std::move(token));
    }
    begin = end + 1;
  }
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

// Character trigrams of the normalized text (spaces count as characters).
// Strings shorter than three code points form a single gram.
inline std::vector<std::u32string> trigram_set(std::string_view text) {
  const std::u32string chars = to_code_points(normalize_text(text));
  std::vector<std::u32string> grams;
  if (chars.empty()) return grams;
  if (chars.size() < 3) {
    grams.push_back(chars);
    return grams;
  }
  grams.reserve(chars.size() - 2);
  for (std::size_t i = 0; i + 3 <= chars.size(); ++i) {
    grams.push_back(chars.substr(i, 3));
  }
  std::sort(grams.begin(), grams.end());
  grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
  return grams;
}

inline double word_jaccard(std::string_view x, std::string_view y,
                           const StopwordList& stopwords = default_stopwords()) {
  return sorted_set_jaccard(content_token_set(x, stopwords),
                            content_token_set(y, stopwords));
}

inline double char_trigram_jaccard(std::string_view x, std::string_view y) {
  return sorted_set_jaccard(trigram_set(x), trigram_set(y));
}

inline double bucket_kernel(std::int64_t bx, std::int64_t by) {
  return bx == by ? 1.0 : 0.0;
}

inline double bucket_kernel(std::optional<std::int64_t> bx,
                            std::optional<std::int64_t> by) {
  if (!bx || !by) throw kernel_error("bucket kernel: missing bucket id");
  return bucket_kernel(*bx, *by);
}

// Per-response data a kernel needs, extracted once so that pairwise sweeps do
// not renormalize or retokenize.
struct KernelFeatures {
  std::string id;
  std::string condition_id;
  const UnitVector* vector = nullptr;
  double sq_norm = 0.0;
  std::vector<std::string> tokens;
  std::vector<std::u32string> grams;
  std::int64_t bucket = 0;
};

inline KernelFeatures extract_features(const KernelSpec& spec,
                                       const Response& r,
                                       const EmbeddingTable* table,
                                       const StopwordList& stopwords) {
  KernelFeatures f;
  f.id = r.id;
  f.condition_id = r.condition_id;
  switch (spec.kind) {
    case KernelKind::kSemantic:
    case KernelKind::kPlotSynopsis: {
      if (spec.kind == KernelKind::kPlotSynopsis && !r.synopsis) {
        throw kernel_error("response '" + r.id + "' has no synopsis");
      }
      if (table == nullptr) {
        throw kernel_error(std::string(kernel_name(spec.kind)) +
                           " kernel requires an embedding table");
      }
      const std::string key = embedding_key(spec.kind, r.id);
      f.vector = table->find(key);
      if (f.vector == nullptr) {
        throw kernel_error("no embedding '" + key + "' for response '" +
                           r.id + "'");
      }
      f.sq_norm = detail::dot(f.vector->components(), f.vector->components());
      detail::check_unit(f.sq_norm);
      break;
    }
    case KernelKind::kWordJaccard:
      if (stopwords.id() != spec.stopword_list_id) {
        throw kernel_error("kernel expects stopword list '" +
                           spec.stopword_list_id + "' but '" +
                           stopwords.id() + "' was supplied");
      }
      f.tokens = content_token_set(r.text, stopwords);
      break;
    case KernelKind::kCharTrigramJaccard:
      f.grams = trigram_set(r.text);
      break;
    case KernelKind::kBucket:
      if (!r.bucket_id) {
        throw kernel_error("response '" + r.id + "' has no bucket id");
      }
      f.bucket = *r.bucket_id;
      break;
  }
  return f;
}

inline double evaluate_kernel(KernelKind kind, const KernelFeatures& a,
                              const KernelFeatures& b) {
  switch (kind) {
    case KernelKind::kSemantic:
    case KernelKind::kPlotSynopsis: {
      const auto u = a.vector->components();
      const auto v = b.vector->components();
      if (u.size() != v.size()) throw kernel_error("dimension mismatch");
      return detail::semantic_from_parts(detail::dot(u, v), a.sq_norm,
                                         b.sq_norm);
    }
    case KernelKind::kWordJaccard:
      return sorted_set_jaccard(a.tokens, b.tokens);
    case KernelKind::kCharTrigramJaccard:
      return sorted_set_jaccard(a.grams, b.grams);
    case KernelKind::kBucket:
      if (a.condition_id != b.condition_id) {
        throw kernel_error("bucket ids of '" + a.id + "' and '" + b.id +
                           "' belong to different conditions");
      }
      return bucket_kernel(a.bucket, b.bucket);
  }
  return 0.0;
}

inline double kernel_for(const KernelSpec& spec, const Response& a,
                         const Response& b,
                         const EmbeddingTable* table = nullptr,
                         const StopwordList& stopwords = default_stopwords()) {
  return evaluate_kernel(spec.kind,
                         extract_features(spec, a, table, stopwords),
                         extract_features(spec, b, table, stopwords));
}

// Ids of responses lacking the non-embedding data a kernel requires
// (synopsis text for plot_synopsis, bucket id for bucket).
inline std::vector<std::string> missing_kernel_fields(const Corpus& corpus,
                                                      const KernelSpec& spec) {
  std::vector<std::string> out;
  for (const auto& r : corpus.responses) {
    if ((spec.kind == KernelKind::kPlotSynopsis && !r.synopsis) ||
        (spec.kind == KernelKind::kBucket && !r.bucket_id)) {
      out.push_back(r.id);
    }
  }
  return out;
}

// (1 / n(n-1)) * sum_{i != j} k(i, j), summed row by row.
template <typename PairFn>
double mean_offdiagonal(std::size_t n, PairFn&& k) {
  if (n < 2) {
    throw estimation_error("pairwise crowding needs at least 2 items, got " +
                           std::to_string(n));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) sum += k(i, j);
    }
  }
  return sum / (static_cast<double>(n) * static_cast<double>(n - 1));
}

// Dense kernel matrix over a pool of responses. Resamples index into it.
class KernelMatrix {
 public:
  KernelMatrix() = default;

  KernelMatrix(const KernelSpec& spec, std::span<const Response> pool,
               const EmbeddingTable* table,
               const StopwordList& stopwords = default_stopwords())
      : n_(pool.size()), values_(n_ * n_) {
    std::vector<KernelFeatures> features;
    features.reserve(n_);
    for (const auto& r : pool) {
      features.push_back(extract_features(spec, r, table, stopwords));
    }
    for (std::size_t i = 0; i < n_; ++i) {
      values_[i * n_ + i] = evaluate_kernel(spec.kind, features[i], features[i]);
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double k = evaluate_kernel(spec.kind, features[i], features[j]);
        values_[i * n_ + j] = k;
        values_[j * n_ + i] = k;
      }
    }
  }

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const {
    return values_[i * n_ + j];
  }

  // Mean off-diagonal crowding over resample slots; slots may repeat a pool
  // index, in which case the diagonal value K(x, x) is included.
  double mean_over(std::span<const std::size_t> slots) const {
    return mean_offdiagonal(slots.size(), [&](std::size_t i, std::size_t j) {
      return values_[slots[i] * n_ + slots[j]];
    });
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

inline double pairwise_mean_crowding(
    std::span<const Response> items, const KernelSpec& spec,
    const EmbeddingTable* table = nullptr,
    const StopwordList& stopwords = default_stopwords()) {
  if (items.size() < 2) {
    throw estimation_error("pairwise crowding needs at least 2 items, got " +
                           std::to_string(items.size()));
  }
  std::vector<KernelFeatures> features;
  features.reserve(items.size());
  for (const auto& r : items) {
    features.push_back(extract_features(spec, r, table, stopwords));
  }
  return mean_offdiagonal(features.size(), [&](std::size_t i, std::size_t j) {
    return evaluate_kernel(spec.kind, features[i], features[j]);
  });
}

inline double pairwise_mean_crowding(std::span<const UnitVector> vectors) {
  return mean_offdiagonal(vectors.size(), [&](std::size_t i, std::size_t j) {
    return semantic_kernel(vectors[i], vectors[j]);
  });
}

inline double pairwise_mean_crowding(std::span<const std::int64_t> buckets) {
  return mean_offdiagonal(buckets.size(), [&](std::size_t i, std::size_t j) {
    return bucket_kernel(buckets[i], buckets[j]);
  });
}

}  // namespace crowdbench
