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

// Closed-form adoption-game quantities.
//
//   redundancy cost     C(X)        = gamma * (1 - exp(-X * delta))
//   critical benefit    B_crit / gamma = 1 - exp(-X * delta)
//   expected cost       E[C]        = gamma * (1 - (1 - p + p e^{-delta})^{N-1})
//                                     with X ~ Binomial(N - 1, p)
//   delta from rho      delta       = max{0, (1 - rho)(1 - kappa_h)}
//
// Adoption is rational iff the private benefit B exceeds C(X).

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "crowdbench/error.hpp"
#include "crowdbench/estimators.hpp"
#include "crowdbench/rng.hpp"

namespace crowdbench {

struct AdoptionScenario {
  double gamma = 1.0;
  double delta = 0.0;
  std::uint64_t exposure = 0;
  std::uint64_t population = 1;
  double adoption_prob = 0.0;
  double private_benefit = 0.0;

  void validate() const {
    if (!(gamma >= 0.0)) throw validation_error("gamma must be >= 0");
    if (!(delta >= 0.0)) throw validation_error("delta must be >= 0");
    if (population < 1) throw validation_error("population must be >= 1");
    if (!(adoption_prob >= 0.0 && adoption_prob <= 1.0)) {
      throw validation_error("adoption probability must lie in [0, 1]");
    }
  }
};

namespace detail {

inline void require_nonnegative(double value, const char* name) {
  if (!(value >= 0.0)) {
    throw validation_error(std::string(name) + " must be >= 0, got " +
                           std::to_string(value));
  }
}

}  // namespace detail

inline double delta_from_rho(double rho, double kappa_h) {
  if (!(kappa_h < 1.0)) {
    throw validation_error("delta_from_rho requires kappa_h < 1");
  }
  return std::max(0.0, (1.0 - rho) * (1.0 - kappa_h));
}

inline double critical_benefit(double delta, std::uint64_t exposure) {
  detail::require_nonnegative(delta, "delta");
  return -std::expm1(-static_cast<double>(exposure) * delta);
}

inline double redundancy_cost(double gamma, double delta,
                              std::uint64_t exposure) {
  detail::require_nonnegative(gamma, "gamma");
  return gamma * critical_benefit(delta, exposure);
}

inline bool adoption_rational(const AdoptionScenario& s) {
  s.validate();
  return s.private_benefit > redundancy_cost(s.gamma, s.delta, s.exposure);
}

inline double expected_cost(double gamma, double delta, std::uint64_t population,
                            double p) {
  detail::require_nonnegative(gamma, "gamma");
  detail::require_nonnegative(delta, "delta");
  if (population < 1) throw validation_error("population must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw validation_error("adoption probability must lie in [0, 1]");
  }
  if (p == 0.0) return 0.0;
  // Degenerate binomial: every other creator adopts.
  if (p == 1.0) return redundancy_cost(gamma, delta, population - 1);
  const double others = static_cast<double>(population - 1);
  return -gamma * std::expm1(others * std::log1p(p * std::expm1(-delta)));
}

struct MonteCarloEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::uint64_t trials = 0;
};

// Mean of gamma * (1 - exp(-X delta)) over X ~ Binomial(N - 1, p), formed as
// gamma * (1 - mean of exp(-X delta)). Draws are
// tallied per exposure value, so degenerate p gives the closed form exactly.
inline MonteCarloEstimate monte_carlo_expected_cost(
    double gamma, double delta, std::uint64_t population, double p,
    std::uint64_t trials, std::uint64_t seed, std::size_t workers = 1) {
  if (trials < 10000) {
    throw validation_error("Monte Carlo oracle needs >= 10^4 trials");
  }
  AdoptionScenario{gamma, delta, 0, population, p, 0.0}.validate();

  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t blocks = (trials + kBlock - 1) / kBlock;
  const std::uint64_t others = population - 1;
  std::vector<std::vector<std::uint64_t>> tallies(
      blocks, std::vector<std::uint64_t>(others + 1, 0));
  const StreamFactory streams(seed, "monte-carlo-expected-cost");

  detail::for_each_replicate(static_cast<int>(blocks), workers, [&](int b) {
    auto rng = streams.stream(static_cast<std::uint64_t>(b));
    std::binomial_distribution<std::uint64_t> draw(others, p);
    const std::uint64_t begin = static_cast<std::uint64_t>(b) * kBlock;
    const std::uint64_t count = std::min(kBlock, trials - begin);
    auto& tally = tallies[static_cast<std::size_t>(b)];
    for (std::uint64_t t = 0; t < count; ++t) ++tally[draw(rng)];
  });

  std::vector<std::uint64_t> counts(others + 1, 0);
  for (const auto& tally : tallies) {
    for (std::uint64_t x = 0; x <= others; ++x) counts[x] += tally[x];
  }
  const double n = static_cast<double>(trials);
  std::size_t support = 0;
  std::uint64_t only = 0;
  double survival = 0.0;
  for (std::uint64_t x = 0; x <= others; ++x) {
    if (counts[x] != 0) {
      ++support;
      only = x;
      survival += (static_cast<double>(counts[x]) / n) *
                  std::exp(-static_cast<double>(x) * delta);
    }
  }
  double ss = 0.0;
  for (std::uint64_t x = 0; x <= others; ++x) {
    if (counts[x] != 0) {
      const double dev = std::exp(-static_cast<double>(x) * delta) - survival;
      ss += static_cast<double>(counts[x]) * dev * dev;
    }
  }
  const double mean = support == 1 ? redundancy_cost(gamma, delta, only)
                                   : gamma * (1.0 - survival);
  ss *= gamma * gamma;
  MonteCarloEstimate out;
  out.estimate = mean;
  out.standard_error = std::sqrt(ss / (n - 1.0) / n);
  out.trials = trials;
  return out;
}

struct ParityReport {
  double delta = 0.0;
  double rho = 0.0;
  bool parity = false;
};

// Delta, rho and the parity flag; throws if delta == 0 and rho >= 1 disagree.
inline ParityReport parity_check(double kappa_h, double kappa_a) {
  if (!(kappa_h < 1.0)) {
    throw validation_error("parity_check requires kappa_h < 1");
  }
  const CrowdingPair p = crowding_pair(kappa_h, kappa_a, 0.0);
  ParityReport out{p.delta, p.rho, p.rho >= 1.0};
  if ((out.delta == 0.0) != out.parity) {
    throw estimation_error("parity equivalence violated at kappa_h = " +
                           std::to_string(kappa_h) +
                           ", kappa_a = " + std::to_string(kappa_a));
  }
  return out;
}

struct ThresholdRow {
  std::string model;
  std::string task;
  double delta = 0.0;
  std::vector<double> thresholds;  // B_crit / gamma, one per exposure
};

inline std::vector<ThresholdRow> threshold_table(
    const std::vector<std::pair<std::string, std::string>>& labels,
    const std::vector<double>& deltas,
    const std::vector<std::uint64_t>& exposures) {
  if (labels.size() != deltas.size()) {
    throw validation_error("threshold_table: labels and deltas differ in size");
  }
  std::vector<ThresholdRow> rows;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    ThresholdRow row{labels[i].first, labels[i].second, deltas[i], {}};
    for (auto x : exposures) row.thresholds.push_back(critical_benefit(deltas[i], x));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace crowdbench
