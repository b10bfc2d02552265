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

// Text normalization and stopword lists shared by the lexical kernels.

#include <algorithm>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/locid.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "crowdbench/error.hpp"

namespace crowdbench {

// Lowercases, removes every Unicode punctuation character (categories Pc, Pd,
// Ps, Pe, Pi, Pf, Po), collapses whitespace runs to one space and trims.
// Punctuation is deleted rather than replaced: "A-B" becomes "ab".
inline std::string normalize_text(std::string_view text) {
  icu::UnicodeString lowered = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  lowered.toLower(icu::Locale::getRoot());

  icu::UnicodeString out;
  bool pending_space = false;
  for (int32_t i = 0; i < lowered.length();) {
    const UChar32 c = lowered.char32At(i);
    i += U16_LENGTH(c);
    if (u_ispunct(c)) continue;
    if (u_isUWhiteSpace(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.isEmpty()) out.append(static_cast<UChar>(' '));
    pending_space = false;
    out.append(c);
  }
  std::string result;
  out.toUTF8String(result);
  return result;
}

// Code points of a UTF-8 string.
inline std::u32string to_code_points(std::string_view text) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  std::u32string out;
  out.reserve(static_cast<std::size_t>(s.countChar32()));
  for (int32_t i = 0; i < s.length();) {
    const UChar32 c = s.char32At(i);
    i += U16_LENGTH(c);
    out.push_back(static_cast<char32_t>(c));
  }
  return out;
}

// Sorted, deduplicated list of words that the word-Jaccard kernel ignores.
class StopwordList {
 public:
  StopwordList() = default;
  StopwordList(std::string id, std::vector<std::string> words)
      : id_(std::move(id)) {
    for (auto& w : words) {
      auto normalized = normalize_text(w);
      if (!normalized.empty()) words_.push_back(std::move(normalized));
    }
    std::sort(words_.begin(), words_.end());
    words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
  }

  const std::string& id() const { return id_; }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  bool contains(std::string_view token) const {
    return std::binary_search(words_.begin(), words_.end(), token);
  }

 private:
  std::string id_;
  std::vector<std::string> words_;
};

inline constexpr const char* kDefaultStopwordListId = "en-basic-v1";

// Built-in copy of data/stopwords/en-basic-v1.txt.
inline const StopwordList& default_stopwords() {
  static const StopwordList list(
      kDefaultStopwordListId,
      {
          "a", "about", "above", "after", "again", "against", "all", "am", "an",
          "and", "any", "are", "arent", "as", "at", "be", "because", "been",
          "before", "being", "below", "between", "both", "but", "by", "can",
          "cant", "cannot", "could", "couldnt", "did", "didnt", "do", "does",
          "doesnt", "doing", "dont", "down", "during", "each", "few", "for",
          "from", "further", "had", "hadnt", "has", "hasnt", "have", "havent",
          "having", "he", "hed", "hell", "hes", "her", "here", "heres", "hers",
          "herself", "him", "himself", "his", "how", "hows", "i", "id", "ill",
          "im", "ive", "if", "in", "into", "is", "isnt", "it", "its", "itself",
          "just", "lets", "me", "more", "most", "mustnt", "my", "myself", "no",
          "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other",
          "ought", "our", "ours", "ourselves", "out", "over", "own", "same",
          "shant", "she", "shed", "shell", "shes", "should", "shouldnt", "so",
          "some", "such", "than", "that", "thats", "the", "their", "theirs",
          "them", "themselves", "then", "there", "theres", "these", "they",
          "theyd", "theyll", "theyre", "theyve", "this", "those", "through",
          "to", "too", "under", "until", "up", "very", "was", "wasnt", "we",
          "wed", "well", "were", "weve", "werent", "what", "whats", "when",
          "whens", "where", "wheres", "which", "while", "who", "whos", "whom",
          "why", "whys", "will", "with", "wont", "would", "wouldnt", "you",
          "youd", "youll", "youre", "youve", "your", "yours", "yourself",
          "yourselves",
      });
  return list;
}

// One token per line; '#' starts a comment line. The list id is taken from
// the file name stem unless given explicitly.
inline StopwordList load_stopwords(const std::string& path,
                                   std::string id = {}) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open stopword list '" + path + "'");
  if (id.empty()) {
    auto slash = path.find_last_of('/');
    id = path.substr(slash == std::string::npos ? 0 : slash + 1);
    if (auto dot = id.rfind('.'); dot != std::string::npos && dot > 0) {
      id.resize(dot);
    }
  }
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto begin = line.find_first_not_of(" \t");
    if (begin == std::string::npos || line[begin] == '#') continue;
    auto end = line.find_last_not_of(" \t");
    words.push_back(line.substr(begin, end - begin + 1));
  }
  return StopwordList(std::move(id), std::move(words));
}

}  // namespace crowdbench
