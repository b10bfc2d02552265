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

// Matched-sample bootstrap estimation of human and model crowding.
//
// Each replicate draws b = min(#human units, #model generations) human units
// with replacement, one response uniformly from each drawn unit, and b model
// generations with replacement. From the two resamples it computes
//
//   kappa_h, kappa_a   mean off-diagonal kernel value
//   delta              max{0, kappa_a - kappa_h}
//   rho                (1 - kappa_a) / (1 - kappa_h)
//
// Point estimates are replicate means; intervals are percentile intervals.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "crowdbench/corpus.hpp"
#include "crowdbench/embeddings.hpp"
#include "crowdbench/error.hpp"
#include "crowdbench/kernels.hpp"
#include "crowdbench/rng.hpp"

namespace crowdbench {

struct EstimatorConfig {
  int replicates = 1000;
  double ci_level = 0.95;
  std::uint64_t seed = 0;
  double kappa_h_ceiling = 1e-9;
  // Fraction of replicates allowed to have an undefined rho.
  double max_flagged_fraction = 0.01;
  std::size_t workers = 1;

  void validate() const {
    if (replicates < 100) {
      throw validation_error("replicates must be >= 100 for interval output");
    }
    if (!(ci_level > 0.5 && ci_level < 1.0)) {
      throw validation_error("ci_level must lie in (0.5, 1)");
    }
    if (!(kappa_h_ceiling > 0.0)) {
      throw validation_error("kappa_h ceiling must be positive");
    }
  }
};

struct Stat {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = std::numeric_limits<double>::quiet_NaN();

  bool contains(double x) const { return lo <= x && x <= hi; }
};

// Statistics of one pair of crowding values. rho is NaN (and `flagged` set)
// when kappa_h is too close to 1 for the ratio to be defined.
struct CrowdingPair {
  double kappa_h = 0.0;
  double kappa_a = 0.0;
  double delta = 0.0;
  double rho = 0.0;
  bool flagged = false;
};

// Delta and rho are both formed from the diversity complements 1 - kappa so
// that delta == 0 exactly when rho >= 1.
inline CrowdingPair crowding_pair(double kappa_h, double kappa_a,
                                  double ceiling = 1e-9) {
  CrowdingPair p;
  p.kappa_h = kappa_h;
  p.kappa_a = kappa_a;
  const double div_h = 1.0 - kappa_h;
  const double div_a = 1.0 - kappa_a;
  p.delta = std::max(0.0, div_h - div_a);
  if (kappa_h >= 1.0 - ceiling) {
    p.flagged = true;
    p.rho = std::numeric_limits<double>::quiet_NaN();
  } else {
    p.rho = div_a / div_h;
  }
  return p;
}

inline bool parity_consistent(const CrowdingPair& p) {
  return p.flagged || ((p.delta == 0.0) == (p.rho >= 1.0));
}

// Percentile of `sorted` (ascending) with linear interpolation between order
// statistics (Hyndman-Fan type 7).
inline double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (sorted.size() == 1) return sorted.front();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Mean (in index order) and percentile interval of the finite values.
inline Stat summarize(std::span<const double> values, double ci_level) {
  std::vector<double> finite;
  finite.reserve(values.size());
  double sum = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) {
      finite.push_back(v);
      sum += v;
    }
  }
  Stat s;
  if (finite.empty()) return s;
  std::sort(finite.begin(), finite.end());
  // Rounding can push the sum-based mean just outside [min, max].
  s.mean = std::clamp(sum / static_cast<double>(finite.size()), finite.front(),
                      finite.back());
  const double tail = (1.0 - ci_level) / 2.0;
  s.lo = percentile_sorted(finite, tail);
  s.hi = percentile_sorted(finite, 1.0 - tail);
  return s;
}

inline double sample_sd(std::span<const double> values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++n;
    }
  }
  if (n < 2) return 0.0;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) ss += (v - mean) * (v - mean);
  }
  return std::sqrt(ss / static_cast<double>(n - 1));
}

struct ConditionEstimate {
  std::string condition_id;
  std::string task_family;
  std::size_t b = 0;
  std::size_t human_units = 0;
  std::size_t model_generations = 0;
  Stat kappa_h, kappa_a, delta, rho;
  // Unclamped mean difference: mean(kappa_a) - mean(kappa_h).
  double delta_unclamped = 0.0;
  // Plug-in values formed from the mean kappas.
  double delta_plugin = 0.0;
  double rho_plugin = 0.0;
  std::size_t flagged = 0;
  std::vector<CrowdingPair> replicates;
};

struct FamilyEstimate {
  std::string task_family;
  std::vector<ConditionEstimate> conditions;
  Stat kappa_h, kappa_a, delta, rho;
  // Equal-weight mean of per-condition delta (same as delta.mean).
  double delta_meanofconds = 0.0;
  // max{0, aggregated kappa_a - aggregated kappa_h}.
  double delta_of_aggregates = 0.0;
  double rho_plugin = 0.0;
  std::size_t min_b = 0;
  std::vector<CrowdingPair> replicates;
};

namespace detail {

inline void for_each_replicate(int replicates, std::size_t workers,
                               const std::function<void(int)>& body) {
  workers = std::max<std::size_t>(1, workers);
  if (workers == 1 || replicates < 2) {
    for (int r = 0; r < replicates; ++r) body(r);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int r = static_cast<int>(w); r < replicates;
             r += static_cast<int>(workers)) {
          body(r);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline void fill_point_estimates(ConditionEstimate& est,
                                 const EstimatorConfig& cfg) {
  const std::size_t n = est.replicates.size();
  std::vector<double> kh(n), ka(n), d(n), rho(n);
  for (std::size_t r = 0; r < n; ++r) {
    kh[r] = est.replicates[r].kappa_h;
    ka[r] = est.replicates[r].kappa_a;
    d[r] = est.replicates[r].delta;
    rho[r] = est.replicates[r].rho;
  }
  est.kappa_h = summarize(kh, cfg.ci_level);
  est.kappa_a = summarize(ka, cfg.ci_level);
  est.delta = summarize(d, cfg.ci_level);
  est.rho = summarize(rho, cfg.ci_level);
  est.delta_unclamped = est.kappa_a.mean - est.kappa_h.mean;
  const CrowdingPair plug =
      crowding_pair(est.kappa_h.mean, est.kappa_a.mean, cfg.kappa_h_ceiling);
  est.delta_plugin = plug.delta;
  est.rho_plugin = plug.rho;
  if (!parity_consistent(plug)) {
    throw estimation_error("parity equivalence violated for condition '" +
                           est.condition_id + "'");
  }
}

}  // namespace detail

// Participant-aware matched bootstrap for one condition. `stream_key`
// selects the random streams (defaults to the condition id).
inline ConditionEstimate bootstrap_condition(
    std::span<const SamplingUnit> humans, std::span<const Response> models,
    const KernelSpec& spec, const EstimatorConfig& cfg,
    const EmbeddingTable* table = nullptr,
    const StopwordList& stopwords = default_stopwords(),
    std::string stream_key = {}) {
  cfg.validate();
  if (humans.size() < 2 || models.size() < 2) {
    throw estimation_error(
        "degenerate group sizes: " + std::to_string(humans.size()) +
        " human units, " + std::to_string(models.size()) +
        " model generations (need >= 2 each)");
  }

  std::vector<Response> human_pool;
  std::vector<std::size_t> unit_begin, unit_size;
  for (const auto& unit : humans) {
    if (unit.responses.empty()) {
      throw estimation_error("sampling unit '" + unit.unit_id + "' is empty");
    }
    unit_begin.push_back(human_pool.size());
    unit_size.push_back(unit.responses.size());
    human_pool.insert(human_pool.end(), unit.responses.begin(),
                      unit.responses.end());
  }

  ConditionEstimate est;
  est.condition_id = human_pool.front().condition_id;
  est.task_family = human_pool.front().task_family;
  for (const auto& r : human_pool) {
    if (r.condition_id != est.condition_id) {
      throw estimation_error("human units span conditions '" +
                             est.condition_id + "' and '" + r.condition_id +
                             "'");
    }
  }
  for (const auto& r : models) {
    if (r.condition_id != est.condition_id) {
      throw estimation_error("model generation '" + r.id +
                             "' belongs to condition '" + r.condition_id +
                             "', expected '" + est.condition_id + "'");
    }
  }
  est.human_units = humans.size();
  est.model_generations = models.size();
  est.b = std::min(humans.size(), models.size());

  const KernelMatrix human_k(spec, human_pool, table, stopwords);
  const KernelMatrix model_k(spec, models, table, stopwords);
  const StreamFactory streams(
      cfg.seed, stream_key.empty() ? est.condition_id : stream_key);
  const std::size_t b = est.b;
  const std::size_t n_units = humans.size();
  const std::size_t n_models = models.size();

  est.replicates.resize(static_cast<std::size_t>(cfg.replicates));
  detail::for_each_replicate(cfg.replicates, cfg.workers, [&](int r) {
    std::vector<std::size_t> slots(b);
    auto human_rng = streams.stream(static_cast<std::uint64_t>(r), 0);
    for (std::size_t s = 0; s < b; ++s) {
      const std::size_t unit = human_rng.below(n_units);
      slots[s] = unit_begin[unit] + human_rng.below(unit_size[unit]);
    }
    const double kh = human_k.mean_over(slots);
    auto model_rng = streams.stream(static_cast<std::uint64_t>(r), 1);
    for (std::size_t s = 0; s < b; ++s) slots[s] = model_rng.below(n_models);
    const double ka = model_k.mean_over(slots);
    est.replicates[static_cast<std::size_t>(r)] =
        crowding_pair(kh, ka, cfg.kappa_h_ceiling);
  });

  for (const auto& p : est.replicates) {
    if (p.flagged) ++est.flagged;
    if (!parity_consistent(p)) {
      throw estimation_error("parity equivalence violated in a replicate of '" +
                             est.condition_id + "'");
    }
  }
  if (static_cast<double>(est.flagged) >
      cfg.max_flagged_fraction * static_cast<double>(cfg.replicates)) {
    throw estimation_error(
        "condition '" + est.condition_id + "': human crowding reached 1 in " +
        std::to_string(est.flagged) + " of " +
        std::to_string(cfg.replicates) + " replicates; rho is undefined");
  }
  detail::fill_point_estimates(est, cfg);
  return est;
}

// Equal-weight aggregation across conditions of one task family. Replicates
// are paired by index across conditions.
inline FamilyEstimate aggregate_family(std::vector<ConditionEstimate> conditions,
                                       double ci_level = 0.95,
                                       double ceiling = 1e-9) {
  if (conditions.empty()) {
    throw estimation_error("aggregate_family needs at least one condition");
  }
  FamilyEstimate fam;
  fam.task_family = conditions.front().task_family;
  const std::size_t reps = conditions.front().replicates.size();
  fam.min_b = conditions.front().b;
  for (const auto& c : conditions) {
    if (c.task_family != fam.task_family) {
      throw estimation_error("cannot aggregate conditions of families '" +
                             fam.task_family + "' and '" + c.task_family +
                             "'");
    }
    if (c.replicates.size() != reps) {
      throw estimation_error("conditions have different replicate counts");
    }
    fam.min_b = std::min(fam.min_b, c.b);
  }
  const double m = static_cast<double>(conditions.size());

  fam.replicates.resize(reps);
  std::vector<double> kh(reps), ka(reps), d(reps), rho(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    CrowdingPair agg{};
    for (const auto& c : conditions) {
      const auto& p = c.replicates[r];
      agg.kappa_h += p.kappa_h;
      agg.kappa_a += p.kappa_a;
      agg.delta += p.delta;
      agg.rho += p.rho;  // NaN propagates for flagged replicates
      agg.flagged = agg.flagged || p.flagged;
    }
    agg.kappa_h /= m;
    agg.kappa_a /= m;
    agg.delta /= m;
    agg.rho /= m;
    fam.replicates[r] = agg;
    kh[r] = agg.kappa_h;
    ka[r] = agg.kappa_a;
    d[r] = agg.delta;
    rho[r] = agg.rho;
  }
  fam.kappa_h = summarize(kh, ci_level);
  fam.kappa_a = summarize(ka, ci_level);
  fam.delta = summarize(d, ci_level);
  fam.rho = summarize(rho, ci_level);

  // Point values are the unweighted means of the condition point values.
  auto mean_of = [&](auto field) {
    double sum = 0.0;
    for (const auto& c : conditions) sum += field(c);
    return sum / m;
  };
  fam.kappa_h.mean = mean_of([](const ConditionEstimate& c) { return c.kappa_h.mean; });
  fam.kappa_a.mean = mean_of([](const ConditionEstimate& c) { return c.kappa_a.mean; });
  fam.delta.mean = mean_of([](const ConditionEstimate& c) { return c.delta.mean; });
  fam.rho.mean = mean_of([](const ConditionEstimate& c) { return c.rho.mean; });
  fam.delta_meanofconds = fam.delta.mean;
  const CrowdingPair plug =
      crowding_pair(fam.kappa_h.mean, fam.kappa_a.mean, ceiling);
  fam.delta_of_aggregates = plug.delta;
  fam.rho_plugin = plug.rho;
  fam.conditions = std::move(conditions);
  return fam;
}

struct ProtocolDifference {
  std::string task_family;
  double rho_a = 0.0;
  double rho_b = 0.0;
  Stat diff;  // rho_b - rho_a
  double delta_a = 0.0;
  double delta_b = 0.0;
};

// rho_b - rho_a with a percentile interval over index-paired replicate
// differences.
inline ProtocolDifference compare_protocols(const FamilyEstimate& a,
                                            const FamilyEstimate& b,
                                            double ci_level = 0.95) {
  if (a.task_family != b.task_family) {
    throw estimation_error("cannot compare families '" + a.task_family +
                           "' and '" + b.task_family + "'");
  }
  if (a.replicates.size() != b.replicates.size()) {
    throw estimation_error(
        "mismatched replicate counts: " + std::to_string(a.replicates.size()) +
        " vs " + std::to_string(b.replicates.size()));
  }
  std::vector<double> diffs(a.replicates.size());
  for (std::size_t r = 0; r < diffs.size(); ++r) {
    diffs[r] = b.replicates[r].rho - a.replicates[r].rho;
  }
  ProtocolDifference out;
  out.task_family = a.task_family;
  out.rho_a = a.rho.mean;
  out.rho_b = b.rho.mean;
  out.delta_a = a.delta.mean;
  out.delta_b = b.delta.mean;
  out.diff = summarize(diffs, ci_level);
  out.diff.mean = b.rho.mean - a.rho.mean;
  return out;
}

inline std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

// Spearman rank correlation with average ranks for ties. std::nullopt when
// either input is constant.
inline std::optional<double> spearman_rank(std::span<const double> xs,
                                           std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw validation_error("spearman_rank: length mismatch (" +
                           std::to_string(xs.size()) + " vs " +
                           std::to_string(ys.size()) + ")");
  }
  if (xs.size() < 2) {
    throw validation_error("spearman_rank needs at least 2 points");
  }
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace crowdbench
