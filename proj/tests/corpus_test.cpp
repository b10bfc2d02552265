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

// Tests for corpus.hpp: loading, partitioning into sampling units and
// validation reports.

#include "crowdbench/corpus.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "test_support.hpp"

namespace crowdbench {
namespace {

using testing::make_response;

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in);
}

TEST(LoadCorpusTest, ThreeValidRecords) {
  testing::TempDir dir;
  testing::write_text(
      dir.file("c.jsonl"),
      R"({"id":"a","source":"human","task_family":"slogans","condition":"phone","text":"Think big","participant":"p1"})"
      "\n"
      R"({"id":"b","source":"human","task_family":"slogans","condition":"phone","text":"Think big","participant":"p2"})"
      "\n"
      R"({"id":"c","source":"gpt","task_family":"slogans","condition":"phone","text":"Smart future","protocol":"neutral-T1.0"})"
      "\n");
  const Corpus corpus = load_corpus(dir.file("c.jsonl"));
  ASSERT_EQ(corpus.responses.size(), 3u);
  EXPECT_EQ(corpus.responses[0].id, "a");
  EXPECT_EQ(corpus.responses[2].source_label(), "gpt@neutral-T1.0");
  EXPECT_EQ(corpus.conditions.at("phone").task_family, "slogans");
  EXPECT_TRUE(corpus.warnings.empty());
}

TEST(LoadCorpusTest, DuplicateIdNamesTheId) {
  const std::string text =
      R"({"id":"r1","source":"human","task_family":"f","condition":"c","text":"x"})"
      "\n"
      R"({"id":"r1","source":"human","task_family":"f","condition":"c","text":"y"})";
  try {
    parse(text);
    FAIL() << "expected duplicate-id error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate id 'r1'"), std::string::npos);
  }
}

TEST(LoadCorpusTest, MalformedRecordReportsLineNumber) {
  const std::string text =
      R"({"id":"a","source":"human","task_family":"f","condition":"c","text":"x"})"
      "\n{not json\n";
  try {
    parse(text);
    FAIL() << "expected parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(LoadCorpusTest, MissingRequiredField) {
  EXPECT_THROW(parse(R"({"id":"a","source":"human","condition":"c","text":"x"})"),
               Error);
  EXPECT_THROW(parse(R"({"id":"","source":"human","task_family":"f","condition":"c","text":"x"})"),
               Error);
}

TEST(LoadCorpusTest, UnknownKeysWarn) {
  const Corpus corpus = parse(
      R"({"id":"a","source":"human","task_family":"f","condition":"c","text":"x","rating":5})");
  ASSERT_EQ(corpus.warnings.size(), 1u);
  EXPECT_NE(corpus.warnings[0].find("rating"), std::string::npos);
}

TEST(LoadCorpusTest, OptionalFields) {
  const Corpus corpus = parse(
      R"({"id":"a","source":"human","task_family":"aut","condition":"shoe","text":"hamster bed","participant":12,"bucket":7,"synopsis":"s"})");
  const Response& r = corpus.responses.at(0);
  EXPECT_EQ(r.participant_id, "12");
  EXPECT_EQ(r.bucket_id, 7);
  EXPECT_EQ(r.synopsis, "s");
  EXPECT_THROW(parse(R"({"id":"a","source":"human","task_family":"aut","condition":"shoe","text":"x","bucket":"7"})"),
               Error);
}

TEST(LoadCorpusTest, ConditionMustKeepOneFamily) {
  EXPECT_THROW(
      parse(R"({"id":"a","source":"human","task_family":"f","condition":"c","text":"x"})"
            "\n"
            R"({"id":"b","source":"human","task_family":"g","condition":"c","text":"x"})"),
      Error);
}

TEST(LoadCorpusTest, SloganBaselineShape) {
  testing::TempDir dir;
  save_corpus(dir.file("slogans.jsonl"), testing::slogan_baseline_shape());
  const Corpus corpus = load_corpus(dir.file("slogans.jsonl"));
  EXPECT_EQ(corpus.responses.size(), 659u);
  EXPECT_EQ(partition_units(corpus, "human", "smartphone").size(), 95u);
}

TEST(LoadCorpusTest, RoundTripPreservesDuplicates) {
  const Corpus original = testing::slogan_baseline_shape();
  std::ostringstream out;
  write_corpus(out, original);
  std::istringstream in(out.str());
  const Corpus reloaded = parse_corpus(in);
  EXPECT_EQ(reloaded.responses, original.responses);
}

TEST(PartitionUnitsTest, GroupsByParticipant) {
  Corpus corpus;
  std::unordered_set<std::string> ids;
  for (int i = 0; i < 6; ++i) {
    add_response(corpus,
                 make_response("r" + std::to_string(i), "human", "c", "t",
                               "p" + std::to_string(i % 3)),
                 ids, "test");
  }
  const auto units = partition_units(corpus, "human", "c");
  ASSERT_EQ(units.size(), 3u);
  for (const auto& u : units) EXPECT_EQ(u.responses.size(), 2u);
  EXPECT_EQ(units[0].unit_id, "p0");
  EXPECT_EQ(units[2].unit_id, "p2");
}

TEST(PartitionUnitsTest, SingletonsWithoutParticipants) {
  Corpus corpus;
  std::unordered_set<std::string> ids;
  for (int i = 0; i < 35; ++i) {
    add_response(corpus,
                 make_response("story" + std::to_string(i), "human", "horror",
                               "story text"),
                 ids, "test");
  }
  const auto units = partition_units(corpus, "human", "horror");
  ASSERT_EQ(units.size(), 35u);
  EXPECT_TRUE(std::is_sorted(units.begin(), units.end(),
                             [](const auto& a, const auto& b) {
                               return a.unit_id < b.unit_id;
                             }));
}

TEST(PartitionUnitsTest, MixedParticipantIdsAreAnError) {
  Corpus corpus;
  std::unordered_set<std::string> ids;
  add_response(corpus, make_response("a", "human", "c", "t", "p1"), ids, "t");
  add_response(corpus, make_response("b", "human", "c", "t"), ids, "t");
  EXPECT_THROW(partition_units(corpus, "human", "c"), Error);
}

TEST(PartitionUnitsTest, EmptyGroupIsAnError) {
  Corpus corpus;
  EXPECT_THROW(partition_units(corpus, "human", "c"), Error);
}

TEST(PartitionUnitsTest, SizesSumAndOrderIndependence) {
  Corpus corpus = testing::slogan_baseline_shape();
  const auto units = partition_units(corpus, "human", "smartphone");
  std::size_t total = 0;
  for (const auto& u : units) total += u.responses.size();
  EXPECT_EQ(total, corpus.responses.size());

  // Reverse the input order: the unit structure is unchanged.
  Corpus reversed = corpus;
  std::reverse(reversed.responses.begin(), reversed.responses.end());
  const auto units_rev = partition_units(reversed, "human", "smartphone");
  ASSERT_EQ(units_rev.size(), units.size());
  for (std::size_t i = 0; i < units.size(); ++i) {
    EXPECT_EQ(units_rev[i].unit_id, units[i].unit_id);
    EXPECT_EQ(units_rev[i].responses.size(), units[i].responses.size());
  }
}

TEST(ValidateCorpusTest, FlagsSingleUnitGroup) {
  Corpus corpus;
  std::unordered_set<std::string> ids;
  add_response(corpus, make_response("a", "human", "c", "t", "p1"), ids, "t");
  add_response(corpus, make_response("b", "human", "c", "u", "p1"), ids, "t");
  const auto report = validate_corpus(corpus);
  ASSERT_EQ(report.groups.size(), 1u);
  EXPECT_EQ(report.groups[0].units, 1u);
  EXPECT_FALSE(report.groups[0].estimable);
  EXPECT_FALSE(report.all_estimable());
}

TEST(ValidateCorpusTest, SloganBaselineCounts) {
  const Corpus corpus = testing::slogan_baseline_shape();
  const auto report = validate_corpus(corpus);
  ASSERT_EQ(report.groups.size(), 1u);
  EXPECT_EQ(report.groups[0].units, 95u);
  EXPECT_EQ(report.groups[0].responses, 659u);
  EXPECT_EQ(report.groups[0].unique_texts, 650u);
  EXPECT_TRUE(report.groups[0].estimable);
}

TEST(ValidateCorpusTest, EmptyCorpusGivesEmptyReport) {
  EXPECT_TRUE(validate_corpus(Corpus{}).groups.empty());
}

TEST(ValidateCorpusTest, MixedGroupReportedNotThrown) {
  Corpus corpus;
  std::unordered_set<std::string> ids;
  add_response(corpus, make_response("a", "human", "c", "t", "p1"), ids, "t");
  add_response(corpus, make_response("b", "human", "c", "t"), ids, "t");
  const auto report = validate_corpus(corpus);
  ASSERT_EQ(report.groups.size(), 1u);
  EXPECT_FALSE(report.groups[0].estimable);
  EXPECT_EQ(report.groups[0].issue, "mixed participant ids");
}

TEST(MergeCorporaTest, IdsMustStayUnique) {
  Corpus a, b;
  std::unordered_set<std::string> ia, ib;
  add_response(a, make_response("x", "human", "c", "t"), ia, "t");
  add_response(b, make_response("x", "gpt", "c", "t"), ib, "t");
  EXPECT_THROW(merge_corpora({a, b}), Error);
}

}  // namespace
}  // namespace crowdbench
