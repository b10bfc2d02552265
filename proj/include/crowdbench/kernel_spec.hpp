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

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "crowdbench/error.hpp"

namespace crowdbench {

enum class KernelKind {
  kSemantic,
  kPlotSynopsis,
  kWordJaccard,
  kCharTrigramJaccard,
  kBucket,
};

inline constexpr std::array<KernelKind, 5> kAllKernelKinds = {
    KernelKind::kSemantic, KernelKind::kPlotSynopsis, KernelKind::kWordJaccard,
    KernelKind::kCharTrigramJaccard, KernelKind::kBucket};

inline std::string_view kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::kSemantic: return "semantic";
    case KernelKind::kPlotSynopsis: return "plot_synopsis";
    case KernelKind::kWordJaccard: return "word_jaccard";
    case KernelKind::kCharTrigramJaccard: return "char_trigram_jaccard";
    case KernelKind::kBucket: return "bucket";
  }
  return "unknown";
}

inline KernelKind parse_kernel_kind(std::string_view name) {
  for (KernelKind kind : kAllKernelKinds) {
    if (kernel_name(kind) == name) return kind;
  }
  throw validation_error("unknown kernel '" + std::string(name) +
                         "' (expected semantic, plot_synopsis, word_jaccard, "
                         "char_trigram_jaccard or bucket)");
}

inline bool needs_embeddings(KernelKind kind) {
  return kind == KernelKind::kSemantic || kind == KernelKind::kPlotSynopsis;
}

struct KernelSpec {
  KernelKind kind = KernelKind::kSemantic;
  // Only consulted by word_jaccard; reported in every output table.
  std::string stopword_list_id = "en-basic-v1";
};

inline constexpr const char* kSynopsisSuffix = "#synopsis";

// Embedding-table key holding the vector a kernel needs for a response.
inline std::string embedding_key(KernelKind kind, const std::string& id) {
  return kind == KernelKind::kPlotSynopsis ? id + kSynopsisSuffix : id;
}

}  // namespace crowdbench
