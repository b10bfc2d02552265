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

// Rarefaction: crowding estimated on subsamples of increasing size, drawn
// without replacement, one response per sampling unit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "crowdbench/corpus.hpp"
#include "crowdbench/error.hpp"
#include "crowdbench/estimators.hpp"
#include "crowdbench/kernels.hpp"
#include "crowdbench/rng.hpp"

namespace crowdbench {

struct RarefactionCurve {
  std::vector<std::size_t> grid;
  std::vector<double> means;
  std::vector<double> lo;  // percentile band
  std::vector<double> hi;
  int repeats = 0;
  std::uint64_t seed = 0;
  double ci_level = 0.95;
  // Pairwise means per grid point, in repeat order.
  std::vector<std::vector<double>> samples;

  double at(std::size_t n) const {
    auto it = std::find(grid.begin(), grid.end(), n);
    if (it == grid.end()) {
      throw validation_error("n = " + std::to_string(n) +
                             " is not on the rarefaction grid");
    }
    return means[static_cast<std::size_t>(it - grid.begin())];
  }
};

// {step, 2*step, ..., min(max_n, available)}; falls back to {available} when
// fewer than `step` units exist.
inline std::vector<std::size_t> default_rarefaction_grid(std::size_t available,
                                                         std::size_t max_n = 50,
                                                         std::size_t step = 5) {
  std::vector<std::size_t> grid;
  const std::size_t top = std::min(max_n, available);
  for (std::size_t n = step; n <= top; n += step) grid.push_back(n);
  if (grid.empty() && available >= 2) grid.push_back(available);
  return grid;
}

inline RarefactionCurve rarefaction_curve(
    std::span<const SamplingUnit> units, const KernelSpec& spec,
    std::vector<std::size_t> grid, int repeats, std::uint64_t seed,
    const EmbeddingTable* table = nullptr,
    const StopwordList& stopwords = default_stopwords(),
    double ci_level = 0.95, std::size_t workers = 1,
    const std::string& stream_key = "rarefaction") {
  if (grid.empty()) throw validation_error("rarefaction grid is empty");
  if (repeats < 1) throw validation_error("rarefaction repeats must be >= 1");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0 && grid[i] <= grid[i - 1]) {
      throw validation_error("rarefaction grid must be strictly increasing");
    }
  }
  if (grid.front() < 2) {
    throw validation_error("rarefaction grid values must be >= 2");
  }
  if (grid.back() > units.size()) {
    throw validation_error("rarefaction grid value " +
                           std::to_string(grid.back()) + " exceeds the " +
                           std::to_string(units.size()) +
                           " available sampling units");
  }

  std::vector<Response> pool;
  std::vector<std::size_t> unit_begin, unit_size;
  for (const auto& unit : units) {
    unit_begin.push_back(pool.size());
    unit_size.push_back(unit.responses.size());
    pool.insert(pool.end(), unit.responses.begin(), unit.responses.end());
  }
  const KernelMatrix matrix(spec, pool, table, stopwords);
  const StreamFactory streams(seed, stream_key);

  const std::size_t per_n = static_cast<std::size_t>(repeats);
  std::vector<double> values(grid.size() * per_n);
  detail::for_each_replicate(
      static_cast<int>(values.size()), workers, [&](int flat) {
        const std::size_t g = static_cast<std::size_t>(flat) / per_n;
        const std::size_t r = static_cast<std::size_t>(flat) % per_n;
        const std::size_t n = grid[g];
        auto rng = streams.stream(n, r);
        // Partial Fisher-Yates: the first n entries are a uniform n-subset.
        std::vector<std::size_t> idx(units.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < n; ++i) {
          std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
        }
        idx.resize(n);
        std::sort(idx.begin(), idx.end());
        std::vector<std::size_t> slots(n);
        for (std::size_t i = 0; i < n; ++i) {
          slots[i] = unit_begin[idx[i]] + rng.below(unit_size[idx[i]]);
        }
        values[static_cast<std::size_t>(flat)] = matrix.mean_over(slots);
      });

  RarefactionCurve curve;
  curve.grid = std::move(grid);
  curve.repeats = repeats;
  curve.seed = seed;
  curve.ci_level = ci_level;
  for (std::size_t g = 0; g < curve.grid.size(); ++g) {
    curve.samples.emplace_back(values.begin() + g * per_n,
                               values.begin() + (g + 1) * per_n);
    const Stat s = summarize(curve.samples.back(), ci_level);
    curve.means.push_back(s.mean);
    curve.lo.push_back(std::min(s.lo, s.mean));
    curve.hi.push_back(std::max(s.hi, s.mean));
  }
  return curve;
}

// Equal-weight mean of curves sharing a grid and repeat count. Repeats are
// paired by index; the band is the percentile interval of the paired means.
inline RarefactionCurve aggregate_curves(std::span<const RarefactionCurve> curves) {
  if (curves.empty()) throw validation_error("no rarefaction curves to aggregate");
  const RarefactionCurve& first = curves.front();
  for (const auto& c : curves) {
    if (c.grid != first.grid || c.repeats != first.repeats ||
        c.samples.size() != c.grid.size()) {
      throw validation_error(
          "rarefaction curves to aggregate must share grid and repeats");
    }
  }
  RarefactionCurve out;
  out.grid = first.grid;
  out.repeats = first.repeats;
  out.seed = first.seed;
  out.ci_level = first.ci_level;
  const double m = static_cast<double>(curves.size());
  for (std::size_t g = 0; g < out.grid.size(); ++g) {
    std::vector<double> paired(static_cast<std::size_t>(out.repeats), 0.0);
    for (const auto& c : curves) {
      for (std::size_t r = 0; r < paired.size(); ++r) paired[r] += c.samples[g][r];
    }
    for (double& v : paired) v /= m;
    double mean = 0.0;
    for (const auto& c : curves) mean += c.means[g];
    mean /= m;
    const Stat s = summarize(paired, out.ci_level);
    out.means.push_back(mean);
    out.lo.push_back(std::min(s.lo, mean));
    out.hi.push_back(std::max(s.hi, mean));
    out.samples.push_back(std::move(paired));
  }
  return out;
}

// |k(high) - k(low)| / |k(high)| as a percentage.
inline double relative_drift(double kappa_low, double kappa_high) {
  if (kappa_high == 0.0) {
    throw validation_error("relative drift undefined: kappa(n_high) is 0");
  }
  return std::abs(kappa_high - kappa_low) / std::abs(kappa_high) * 100.0;
}

inline double relative_drift(const RarefactionCurve& curve, std::size_t n_low,
                             std::size_t n_high) {
  return relative_drift(curve.at(n_low), curve.at(n_high));
}

}  // namespace crowdbench
