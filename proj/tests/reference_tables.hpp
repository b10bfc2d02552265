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

// Published benchmark values used as fixtures by the unit and acceptance
// tests. Values are rounded to three decimals.

#include <array>
#include <cstdint>

namespace crowdbench::testing {

struct BenchmarkRow {
  const char* model;
  const char* task;
  double kappa_h;
  double kappa_a;
  double delta;
  double rho;
};

inline constexpr std::array<BenchmarkRow, 9> kBenchmarkRows = {{
    {"GPT-5.4", "stories", 0.706, 0.892, 0.186, 0.372},
    {"Claude Sonnet 4.5", "stories", 0.706, 0.857, 0.151, 0.485},
    {"Gemini 2.5 Flash", "stories", 0.705, 0.869, 0.164, 0.446},
    {"GPT-5.4", "aut", 0.601, 0.791, 0.190, 0.525},
    {"Claude Sonnet 4.5", "aut", 0.601, 0.877, 0.275, 0.309},
    {"Gemini 2.5 Flash", "aut", 0.601, 0.743, 0.142, 0.645},
    {"GPT-5.4", "slogans", 0.597, 0.928, 0.331, 0.179},
    {"Claude Sonnet 4.5", "slogans", 0.597, 0.729, 0.132, 0.672},
    {"Gemini 2.5 Flash", "slogans", 0.597, 0.733, 0.136, 0.662},
}};

inline constexpr std::array<std::uint64_t, 4> kThresholdExposures = {1, 5, 10,
                                                                     25};

struct ThresholdFixture {
  double delta;
  std::array<double, 4> thresholds;
};

// Same row order as kBenchmarkRows.
inline constexpr std::array<ThresholdFixture, 9> kThresholdRows = {{
    {0.186, {0.170, 0.605, 0.844, 0.990}},
    {0.151, {0.140, 0.530, 0.779, 0.977}},
    {0.164, {0.151, 0.560, 0.806, 0.983}},
    {0.190, {0.173, 0.613, 0.850, 0.991}},
    {0.275, {0.240, 0.747, 0.936, 0.999}},
    {0.142, {0.132, 0.508, 0.758, 0.971}},
    {0.331, {0.282, 0.809, 0.964, 1.000}},
    {0.132, {0.124, 0.483, 0.733, 0.963}},
    {0.136, {0.127, 0.493, 0.743, 0.967}},
}};

}  // namespace crowdbench::testing
