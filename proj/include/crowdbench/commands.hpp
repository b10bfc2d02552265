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

// The five crowdbench commands. Each takes a resolved RunConfig, writes its
// tables and plots under <output dir>/<command>/, and returns a process exit
// status: 0 success, 2 invalid input, 3 estimation failure.

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crowdbench/adoption.hpp"
#include "crowdbench/config.hpp"
#include "crowdbench/corpus.hpp"
#include "crowdbench/embeddings.hpp"
#include "crowdbench/error.hpp"
#include "crowdbench/estimators.hpp"
#include "crowdbench/kernels.hpp"
#include "crowdbench/rarefaction.hpp"
#include "crowdbench/report.hpp"
#include "crowdbench/text.hpp"

namespace crowdbench {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitEstimation = 3;

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse:
    case ErrorKind::kValidation:
    case ErrorKind::kIo:
      return kExitValidation;
    case ErrorKind::kKernel:
    case ErrorKind::kEstimation:
    case ErrorKind::kRemote:
      return kExitEstimation;
  }
  return kExitEstimation;
}

struct Inputs {
  Corpus corpus;
  std::optional<EmbeddingTable> table;
  StopwordList stopwords = default_stopwords();

  const EmbeddingTable* table_ptr() const { return table ? &*table : nullptr; }
};

namespace detail {

inline std::vector<std::filesystem::path> resolve_all(
    const RunConfig& cfg, const std::vector<std::string>& paths) {
  std::vector<std::filesystem::path> out;
  for (const auto& p : paths) out.push_back(cfg.resolve(p));
  return out;
}

inline EmbeddingTable obtain_embeddings(const RunConfig& cfg,
                                        const Corpus& corpus) {
  const EmbeddingSource& src = cfg.embeddings;
  if (!src.path.empty()) return load_embeddings(cfg.resolve(src.path).string());
  if (!src.cache.empty() && std::filesystem::exists(cfg.resolve(src.cache))) {
    return load_embeddings(cfg.resolve(src.cache).string());
  }
  bool synopses = false;
  for (const auto& k : cfg.kernels) {
    synopses = synopses || k.kind == KernelKind::kPlotSynopsis;
  }
  std::vector<std::pair<std::string, std::string>> texts;
  for (const auto& r : corpus.responses) {
    texts.emplace_back(r.id, r.text);
    if (synopses && r.synopsis) {
      texts.emplace_back(r.id + kSynopsisSuffix, *r.synopsis);
    }
  }
  EmbeddingTable table = fetch_embeddings_remote(src.endpoint, texts, src.remote);
  if (!src.cache.empty()) save_embeddings(cfg.resolve(src.cache).string(), table);
  return table;
}

}  // namespace detail

// Loads corpora, stopwords and (when an embedding kernel is selected) the
// embedding table. Sets each kernel's stopword list id from the loaded list.
inline Inputs load_inputs(RunConfig& cfg) {
  cfg.require_corpora();
  Inputs in;
  std::vector<Corpus> parts;
  for (const auto& p : detail::resolve_all(cfg, cfg.human)) {
    parts.push_back(load_corpus(p.string()));
  }
  for (const auto& p : detail::resolve_all(cfg, cfg.models)) {
    parts.push_back(load_corpus(p.string()));
  }
  in.corpus = merge_corpora(parts);
  if (!cfg.stopwords_path.empty()) {
    in.stopwords = load_stopwords(cfg.resolve(cfg.stopwords_path).string(),
                                  cfg.stopwords_id);
  }
  for (auto& k : cfg.kernels) k.stopword_list_id = in.stopwords.id();
  if (cfg.needs_embeddings()) {
    in.table = detail::obtain_embeddings(cfg, in.corpus);
  }
  return in;
}

inline std::set<std::string> kernel_scope(const RunConfig& cfg,
                                          const KernelSpec& spec) {
  auto it = cfg.kernel_families.find(std::string(kernel_name(spec.kind)));
  return it == cfg.kernel_families.end() ? std::set<std::string>{} : it->second;
}

// Non-human source labels in first-appearance order.
inline std::vector<std::string> model_labels(const Corpus& corpus) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : corpus.responses) {
    if (!r.is_human() && seen.insert(r.source_label()).second) {
      out.push_back(r.source_label());
    }
  }
  return out;
}

// --- validate ----------------------------------------------------------------

struct Issue {
  std::string kind;
  std::string detail;
};

struct ValidationOutcome {
  ValidationReport groups;
  std::vector<Issue> issues;    // estimation-blocking
  std::vector<Issue> warnings;  // informational

  bool ok() const { return issues.empty(); }
};

namespace detail {

inline std::string id_list(const std::vector<std::string>& ids,
                           std::size_t limit = 20) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < limit; ++i) {
    if (i) out += " ";
    out += ids[i];
  }
  if (ids.size() > limit) {
    out += " ... (" + std::to_string(ids.size()) + " total)";
  }
  return out;
}

}  // namespace detail

inline ValidationOutcome check_inputs(const RunConfig& cfg, const Inputs& in) {
  ValidationOutcome v;
  v.groups = validate_corpus(in.corpus);
  std::set<std::string> human_conditions;
  for (const auto& r : in.corpus.responses) {
    if (r.is_human()) human_conditions.insert(r.condition_id);
  }
  for (const auto& g : v.groups.groups) {
    if (!g.estimable) {
      v.issues.push_back({"group", "source '" + g.source + "' condition '" +
                                       g.condition + "': " + g.issue});
    }
    if (g.source.rfind(kHumanSource, 0) != 0 &&
        !human_conditions.count(g.condition)) {
      v.issues.push_back({"group", "condition '" + g.condition +
                                       "' has generations from '" + g.source +
                                       "' but no human responses"});
    }
  }
  for (const auto& k : cfg.kernels) {
    const std::string name(kernel_name(k.kind));
    Corpus scoped;
    for (const auto& r : in.corpus.responses) {
      if (cfg.kernel_applies(k, r.task_family)) scoped.responses.push_back(r);
    }
    if (scoped.empty()) {
      v.issues.push_back({"kernels", name + ": no response belongs to the "
                                            "families the kernel is scoped to"});
      continue;
    }
    if (in.table) {
      const CoverageReport cov = coverage_check(scoped, *in.table, k);
      if (!cov.complete()) {
        v.issues.push_back({"embeddings", name + ": " +
                                              std::to_string(cov.missing.size()) +
                                              " response(s) lack vectors: " +
                                              detail::id_list(cov.missing)});
      }
    }
    const auto missing = missing_kernel_fields(scoped, k);
    if (!missing.empty()) {
      v.issues.push_back({"fields", name + ": " + std::to_string(missing.size()) +
                                        " response(s) lack the kernel's field: " +
                                        detail::id_list(missing)});
    }
  }
  for (const auto& w : in.corpus.warnings) v.warnings.push_back({"corpus", w});
  if (in.table) {
    for (const auto& w : in.table->warnings()) {
      v.warnings.push_back({"embeddings", w});
    }
  }
  return v;
}

namespace detail {

inline std::filesystem::path command_dir(const RunConfig& cfg,
                                         const std::string& command) {
  return cfg.resolve(cfg.output_dir) / command;
}

inline void echo_config(const RunConfig& cfg, const std::filesystem::path& dir) {
  write_atomic(dir / "effective_config.json", to_json(cfg).dump(2) + "\n");
}

inline void report_validation(const ValidationOutcome& v,
                              const std::filesystem::path& dir,
                              const FormatSet& formats, std::ostream& err) {
  Table groups{{"source", "condition", "task_family", "units", "responses",
                "unique_texts", "estimable", "issue"},
               {}};
  for (const auto& g : v.groups.groups) {
    groups.add({g.source, g.condition, g.task_family, std::to_string(g.units),
                std::to_string(g.responses), std::to_string(g.unique_texts),
                g.estimable ? "yes" : "no", g.issue});
  }
  emit_table(dir, "groups", groups, formats);
  Table issues{{"severity", "kind", "detail"}, {}};
  for (const auto& i : v.issues) issues.add({"error", i.kind, i.detail});
  for (const auto& w : v.warnings) issues.add({"warning", w.kind, w.detail});
  emit_table(dir, "issues", issues, formats);
  for (const auto& i : v.issues) err << "error: " << i.detail << "\n";
  for (const auto& w : v.warnings) err << "warning: " << w.detail << "\n";
}

// Runs `body`, mapping crowdbench errors to exit codes.
inline int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

// Loads and validates inputs; writes the validation tables on failure.
inline std::optional<Inputs> prepare(RunConfig& cfg,
                                     const std::filesystem::path& dir,
                                     std::ostream& err) {
  cfg.estimator.validate();
  Inputs in = load_inputs(cfg);
  const ValidationOutcome v = check_inputs(cfg, in);
  if (!v.ok()) {
    report_validation(v, dir, cfg.formats, err);
    return std::nullopt;
  }
  for (const auto& w : v.warnings) err << "warning: " << w.detail << "\n";
  return in;
}

}  // namespace detail

inline int cmd_validate(RunConfig cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto dir = detail::command_dir(cfg, "validate");
    Inputs in = load_inputs(cfg);
    const ValidationOutcome v = check_inputs(cfg, in);
    detail::echo_config(cfg, dir);
    detail::report_validation(v, dir, cfg.formats, err);
    out << v.groups.groups.size() << " group(s), " << v.issues.size()
        << " blocking issue(s), " << v.warnings.size() << " warning(s)\n";
    return v.ok() ? kExitOk : kExitValidation;
  });
}

// --- estimate ----------------------------------------------------------------

struct ModelFamily {
  std::string model;
  FamilyEstimate family;
};

// Bootstraps every condition of every listed model label and aggregates by
// task family. Results are ordered by label, then family name.
// An empty `families` set means every family.
inline std::vector<ModelFamily> estimate_families(
    const Inputs& in, const KernelSpec& spec, const EstimatorConfig& est,
    const std::vector<std::string>& labels,
    const std::set<std::string>& families = {}) {
  std::vector<ModelFamily> out;
  for (const auto& label : labels) {
    std::map<std::string, std::vector<ConditionEstimate>> by_family;
    std::set<std::string> conditions;
    for (const auto& r : in.corpus.responses) {
      if (!r.is_human() && r.source_label() == label &&
          (families.empty() || families.count(r.task_family))) {
        conditions.insert(r.condition_id);
      }
    }
    for (const auto& c : conditions) {
      const auto units = partition_units(in.corpus, kHumanSource, c);
      std::vector<Response> models;
      for (const Response* r : in.corpus.group(label, c)) models.push_back(*r);
      ConditionEstimate ce =
          bootstrap_condition(units, models, spec, est, in.table_ptr(),
                              in.stopwords, c + "|" + label);
      by_family[ce.task_family].push_back(std::move(ce));
    }
    for (auto& [family, conds] : by_family) {
      out.push_back({label, aggregate_family(std::move(conds), est.ci_level,
                                             est.kappa_h_ceiling)});
    }
  }
  return out;
}

namespace detail {

inline std::vector<std::string> stat_cells(const Stat& s) {
  return {fmt(s.mean), fmt(s.lo), fmt(s.hi)};
}

inline const char* kEstimateHeader[] = {
    "condition", "b",       "kappa_h",  "kappa_h_lo", "kappa_h_hi", "kappa_a",
    "kappa_a_lo", "kappa_a_hi", "delta", "delta_lo",   "delta_hi",   "rho",
    "rho_lo",    "rho_hi",  "B",        "seed",       "kernel",     "stopword_list_id"};

}  // namespace detail

inline Table estimate_table(const std::vector<const FamilyEstimate*>& families,
                            const KernelSpec& spec, const EstimatorConfig& est) {
  Table t;
  t.header.assign(std::begin(detail::kEstimateHeader),
                  std::end(detail::kEstimateHeader));
  const std::string kernel(kernel_name(spec.kind));
  const std::string stop =
      spec.kind == KernelKind::kWordJaccard ? spec.stopword_list_id : "";
  auto row = [&](const std::string& cond, std::size_t b, const Stat& kh,
                 const Stat& ka, const Stat& d, const Stat& rho) {
    std::vector<std::string> cells = {cond, std::to_string(b)};
    for (const Stat* s : {&kh, &ka, &d, &rho}) {
      for (auto& c : detail::stat_cells(*s)) cells.push_back(std::move(c));
    }
    cells.push_back(std::to_string(est.replicates));
    cells.push_back(std::to_string(est.seed));
    cells.push_back(kernel);
    cells.push_back(stop);
    t.add(std::move(cells));
  };
  for (const FamilyEstimate* f : families) {
    for (const auto& c : f->conditions) {
      row(c.condition_id, c.b, c.kappa_h, c.kappa_a, c.delta, c.rho);
    }
    row("aggregate:" + f->task_family, f->min_b, f->kappa_h, f->kappa_a,
        f->delta, f->rho);
  }
  return t;
}

inline Table variants_table(const std::vector<const FamilyEstimate*>& families) {
  Table t{{"condition", "delta_meanofconds", "delta_of_aggregates",
           "delta_unclamped", "rho", "rho_plugin", "flagged_replicates"},
          {}};
  for (const FamilyEstimate* f : families) {
    std::size_t flagged = 0;
    for (const auto& c : f->conditions) {
      flagged += c.flagged;
      t.add({c.condition_id, fmt(c.delta.mean), fmt(c.delta_plugin),
             fmt(c.delta_unclamped), fmt(c.rho.mean), fmt(c.rho_plugin),
             std::to_string(c.flagged)});
    }
    t.add({"aggregate:" + f->task_family, fmt(f->delta_meanofconds),
           fmt(f->delta_of_aggregates),
           fmt(f->kappa_a.mean - f->kappa_h.mean), fmt(f->rho.mean),
           fmt(f->rho_plugin), std::to_string(flagged)});
  }
  return t;
}

inline Table family_table(const std::vector<ModelFamily>& results) {
  Table t{{"model", "task", "kappa_h", "kappa_a", "delta", "rho", "rho_lo",
           "rho_hi"},
          {}};
  for (const auto& r : results) {
    const auto& f = r.family;
    t.add({r.model, f.task_family, fmt(f.kappa_h.mean), fmt(f.kappa_a.mean),
           fmt(f.delta.mean), fmt(f.rho.mean), fmt(f.rho.lo), fmt(f.rho.hi)});
  }
  return t;
}

inline Plot rho_plot(const std::vector<ModelFamily>& results,
                     const std::string& kernel) {
  Plot p;
  p.title = "Human-relative diversity (" + kernel + ")";
  p.x_label = "model / task";
  p.y_label = "rho";
  p.references.push_back({1.0, false, "parity"});
  PlotSeries s;
  s.points = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& f = results[i].family;
    p.category_labels.push_back(results[i].model + " / " + f.task_family);
    s.xs.push_back(double(i));
    s.ys.push_back(f.rho.mean);
    s.lo.push_back(f.rho.lo);
    s.hi.push_back(f.rho.hi);
  }
  p.series.push_back(std::move(s));
  return p;
}

inline Plot kappa_plot(const std::vector<ModelFamily>& results,
                       const std::string& kernel) {
  Plot p;
  p.title = "Human versus model crowding (" + kernel + ")";
  p.x_label = "kappa_h";
  p.y_label = "kappa_a";
  p.references.push_back({0.0, true, "kappa_a = kappa_h"});
  std::map<std::string, std::size_t> index;
  for (const auto& r : results) {
    auto [it, inserted] = index.emplace(r.model, p.series.size());
    if (inserted) {
      PlotSeries s;
      s.label = r.model;
      s.points = true;
      p.series.push_back(std::move(s));
    }
    auto& s = p.series[it->second];
    s.xs.push_back(r.family.kappa_h.mean);
    s.ys.push_back(r.family.kappa_a.mean);
  }
  p.x_range = std::make_pair(0.0, 1.0);
  p.y_range = std::make_pair(0.0, 1.0);
  return p;
}

inline int cmd_estimate(RunConfig cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&]() -> int {
    const auto dir = detail::command_dir(cfg, "estimate");
    auto in = detail::prepare(cfg, dir, err);
    if (!in) return kExitValidation;
    detail::echo_config(cfg, dir);
    const auto labels = model_labels(in->corpus);
    for (const auto& spec : cfg.kernels) {
      const std::string kernel(kernel_name(spec.kind));
      const auto kdir = dir / kernel;
      const auto results = estimate_families(*in, spec, cfg.estimator, labels,
                                             kernel_scope(cfg, spec));
      for (const auto& label : labels) {
        std::vector<const FamilyEstimate*> fams;
        for (const auto& r : results) {
          if (r.model == label) fams.push_back(&r.family);
        }
        if (fams.empty()) continue;
        emit_table(kdir, file_slug(label), estimate_table(fams, spec, cfg.estimator),
                   cfg.formats);
        emit_table(kdir, file_slug(label) + "_variants", variants_table(fams),
                   cfg.formats);
      }
      emit_table(kdir, "family_table", family_table(results), cfg.formats);
      emit_plot(kdir, "rho", rho_plot(results, kernel), cfg.formats);
      emit_plot(kdir, "kappa", kappa_plot(results, kernel), cfg.formats);
      for (const auto& r : results) {
        const auto& f = r.family;
        out << kernel << "  " << r.model << "  " << f.task_family
            << "  rho=" << fmt(f.rho.mean, 3) << " [" << fmt(f.rho.lo, 3)
            << ", " << fmt(f.rho.hi, 3) << "]  delta=" << fmt(f.delta.mean, 3)
            << "\n";
      }
    }
    out << "wrote estimates to " << dir.string() << "\n";
    return kExitOk;
  });
}

// --- rarefy ------------------------------------------------------------------

struct TaskCurve {
  std::string source;  // "human" or "model"
  std::string model;   // source label
  std::string task;
  std::vector<std::pair<std::string, RarefactionCurve>> conditions;
  RarefactionCurve task_level;
};

// Drift pairs: configured, or (largest grid value <= top - 10, top).
inline std::vector<std::pair<std::size_t, std::size_t>> drift_pairs(
    const RarefactionSettings& s, const std::vector<std::size_t>& grid) {
  if (!s.drift.empty()) return s.drift;
  if (grid.size() < 2) return {};
  const std::size_t top = grid.back();
  std::size_t low = grid.front();
  for (std::size_t n : grid) {
    if (n + 10 <= top) low = n;
  }
  return {{low, top}};
}

inline std::vector<TaskCurve> rarefy_all(const Inputs& in, const KernelSpec& spec,
                                         const RunConfig& cfg) {
  std::vector<std::string> labels = {kHumanSource};
  for (const auto& l : model_labels(in.corpus)) labels.push_back(l);
  std::vector<TaskCurve> out;
  for (const auto& label : labels) {
    const bool human = label == kHumanSource;
    std::map<std::string, std::vector<std::pair<std::string, std::vector<SamplingUnit>>>>
        by_family;
    std::map<std::string, std::string> family_of;
    for (const auto& r : in.corpus.responses) {
      if (r.source_label() == label && cfg.kernel_applies(spec, r.task_family)) {
        family_of[r.condition_id] = r.task_family;
      }
    }
    for (const auto& [cond, family] : family_of) {
      std::vector<SamplingUnit> units;
      if (human) {
        units = partition_units(in.corpus, label, cond);
      } else {
        std::vector<Response> rs;
        for (const Response* r : in.corpus.group(label, cond)) rs.push_back(*r);
        units = singleton_units(rs);
      }
      by_family[family].emplace_back(cond, std::move(units));
    }
    for (auto& [family, conds] : by_family) {
      TaskCurve tc{human ? "human" : "model", label, family, {}, {}};
      std::vector<std::size_t> grid = cfg.rarefaction.grid;
      if (grid.empty()) {
        std::size_t smallest = SIZE_MAX;
        for (const auto& [c, units] : conds) smallest = std::min(smallest, units.size());
        grid = default_rarefaction_grid(smallest);
        if (grid.empty()) {
          throw validation_error("source '" + label + "' task '" + family +
                                 "' has fewer than 2 units in some condition");
        }
      }
      std::vector<RarefactionCurve> curves;
      for (const auto& [cond, units] : conds) {
        curves.push_back(rarefaction_curve(
            units, spec, grid, cfg.rarefaction.repeats, cfg.estimator.seed,
            in.table_ptr(), in.stopwords, cfg.estimator.ci_level,
            cfg.estimator.workers, "rarefaction|" + label + "|" + cond));
        tc.conditions.emplace_back(cond, curves.back());
      }
      tc.task_level = aggregate_curves(curves);
      out.push_back(std::move(tc));
    }
  }
  return out;
}

inline int cmd_rarefy(RunConfig cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&]() -> int {
    const auto dir = detail::command_dir(cfg, "rarefy");
    auto in = detail::prepare(cfg, dir, err);
    if (!in) return kExitValidation;
    detail::echo_config(cfg, dir);
    for (const auto& spec : cfg.kernels) {
      const std::string kernel(kernel_name(spec.kind));
      const auto kdir = dir / kernel;
      const auto curves = rarefy_all(*in, spec, cfg);
      Table ct{{"source", "model", "task", "condition", "n", "kappa_mean",
                "kappa_lo", "kappa_hi", "R", "seed"},
               {}};
      Table dt{{"source", "model", "task", "n_low", "n_high", "kappa_low",
                "kappa_high", "relative_drift_pct"},
               {}};
      std::map<std::string, Plot> plots;  // by task
      auto add_rows = [&](const TaskCurve& tc, const std::string& cond,
                          const RarefactionCurve& c) {
        for (std::size_t g = 0; g < c.grid.size(); ++g) {
          ct.add({tc.source, tc.model, tc.task, cond, std::to_string(c.grid[g]),
                  fmt(c.means[g]), fmt(c.lo[g]), fmt(c.hi[g]),
                  std::to_string(c.repeats), std::to_string(c.seed)});
        }
      };
      for (const auto& tc : curves) {
        for (const auto& [cond, c] : tc.conditions) add_rows(tc, cond, c);
        add_rows(tc, "aggregate:" + tc.task, tc.task_level);
        for (const auto& [lo, hi] : drift_pairs(cfg.rarefaction, tc.task_level.grid)) {
          const RarefactionCurve& c = tc.task_level;
          dt.add({tc.source, tc.model, tc.task, std::to_string(lo),
                  std::to_string(hi), fmt(c.at(lo)), fmt(c.at(hi)),
                  fmt(relative_drift(c, lo, hi), 4)});
        }
        Plot& plot = plots[tc.task];
        plot.title = "Rarefaction: " + tc.task + " (" + kernel + ")";
        plot.x_label = "n";
        plot.y_label = "mean pairwise crowding";
        PlotSeries s;
        s.label = tc.model;
        s.band = true;
        for (std::size_t g = 0; g < tc.task_level.grid.size(); ++g) {
          s.xs.push_back(double(tc.task_level.grid[g]));
        }
        s.ys = tc.task_level.means;
        s.lo = tc.task_level.lo;
        s.hi = tc.task_level.hi;
        plot.series.push_back(std::move(s));
      }
      emit_table(kdir, "curves", ct, cfg.formats);
      emit_table(kdir, "drift", dt, cfg.formats);
      for (const auto& [task, plot] : plots) {
        emit_plot(kdir, "rarefaction_" + file_slug(task), plot, cfg.formats);
      }
      for (const auto& row : dt.rows) {
        out << kernel << "  " << row[1] << "  " << row[2] << "  n=" << row[3]
            << "->" << row[4] << "  drift=" << row[7] << "%\n";
      }
    }
    out << "wrote rarefaction curves to " << dir.string() << "\n";
    return kExitOk;
  });
}

// --- adoption ----------------------------------------------------------------

struct ThresholdInput {
  std::string model;
  std::string task;
  double delta = 0.0;
};

inline std::vector<ThresholdInput> adoption_inputs(const AdoptionSettings& s) {
  std::vector<ThresholdInput> out;
  for (const auto& r : s.rows) {
    const double delta = r.delta ? *r.delta : delta_from_rho(*r.rho, *r.kappa_h);
    if (!(delta >= 0.0)) {
      throw validation_error("adoption row '" + r.model + "/" + r.task +
                             "' has negative delta");
    }
    out.push_back({r.model, r.task, delta});
  }
  return out;
}

inline Table threshold_csv(const std::vector<ThresholdInput>& rows,
                           const std::vector<std::uint64_t>& exposures) {
  Table t{{"model", "task", "delta"}, {}};
  for (auto x : exposures) t.header.push_back("X=" + std::to_string(x));
  std::vector<std::pair<std::string, std::string>> labels;
  std::vector<double> deltas;
  for (const auto& r : rows) {
    labels.emplace_back(r.model, r.task);
    deltas.push_back(r.delta);
  }
  for (const auto& row : threshold_table(labels, deltas, exposures)) {
    std::vector<std::string> cells = {row.model, row.task, fmt(row.delta)};
    for (double v : row.thresholds) cells.push_back(fmt(v));
    t.add(std::move(cells));
  }
  return t;
}

inline int write_adoption(const RunConfig& cfg,
                          const std::vector<ThresholdInput>& rows,
                          const std::filesystem::path& dir, std::ostream& out) {
  const AdoptionSettings& s = cfg.adoption;
  detail::require_nonnegative(s.gamma, "gamma");
  const Table thresholds = threshold_csv(rows, s.exposures);
  emit_table(dir, "thresholds", thresholds, cfg.formats);

  Table cost{{"model", "task", "delta", "gamma", "N", "p", "expected_cost"}, {}};
  for (const auto& r : rows) {
    for (auto n : s.populations) {
      for (double p : s.probabilities) {
        cost.add({r.model, r.task, fmt(r.delta), fmt(s.gamma), std::to_string(n),
                  fmt(p), fmt(expected_cost(s.gamma, r.delta, n, p))});
      }
    }
  }
  emit_table(dir, "expected_cost", cost, cfg.formats);

  Table curves{{"model", "task", "delta", "X", "bcrit_over_gamma"}, {}};
  Plot plot;
  plot.title = "Critical private benefit";
  plot.x_label = "exposure X";
  plot.y_label = "B_crit / gamma";
  plot.y_range = std::make_pair(0.0, 1.02);
  for (const auto& r : rows) {
    PlotSeries series;
    series.label = r.model + " / " + r.task;
    for (std::uint64_t x = 0; x <= s.max_exposure; ++x) {
      const double v = critical_benefit(r.delta, x);
      curves.add({r.model, r.task, fmt(r.delta), std::to_string(x), fmt(v)});
      series.xs.push_back(double(x));
      series.ys.push_back(v);
    }
    plot.series.push_back(std::move(series));
  }
  emit_table(dir, "threshold_curves", curves, cfg.formats);
  emit_plot(dir, "thresholds", plot, cfg.formats);
  out << to_markdown(thresholds);
  return kExitOk;
}

inline int cmd_adoption(RunConfig cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&]() -> int {
    const auto dir = detail::command_dir(cfg, "adoption");
    std::vector<ThresholdInput> rows;
    if (!cfg.adoption.rows.empty()) {
      rows = adoption_inputs(cfg.adoption);
    } else {
      auto in = detail::prepare(cfg, dir, err);
      if (!in) return kExitValidation;
      const KernelSpec& spec = cfg.kernels.front();
      for (const auto& r :
           estimate_families(*in, spec, cfg.estimator, model_labels(in->corpus),
                             kernel_scope(cfg, spec))) {
        rows.push_back({r.model, r.family.task_family, r.family.delta.mean});
      }
    }
    detail::echo_config(cfg, dir);
    const int rc = write_adoption(cfg, rows, dir, out);
    out << "wrote adoption tables to " << dir.string() << "\n";
    return rc;
  });
}

// --- compare -----------------------------------------------------------------

inline std::string protocol_label(const std::string& source,
                                  const std::string& protocol) {
  return protocol.empty() ? source : source + "@" + protocol;
}

inline int cmd_compare(RunConfig cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&]() -> int {
    const auto dir = detail::command_dir(cfg, "compare");
    const CompareSettings& cs = cfg.compare;
    if (cs.variant.empty() && cs.sweep.empty()) {
      throw validation_error(
          "compare needs 'compare.variant' or a 'compare.sweep' in the config");
    }
    if (!cs.variant.empty() && cs.variant == cs.baseline) {
      throw validation_error("compare baseline and variant are the same protocol");
    }
    auto in = detail::prepare(cfg, dir, err);
    if (!in) return kExitValidation;
    detail::echo_config(cfg, dir);

    std::vector<std::string> sources;
    std::set<std::string> labels_present;
    for (const auto& r : in->corpus.responses) {
      if (r.is_human()) continue;
      if (std::find(sources.begin(), sources.end(), r.source) == sources.end()) {
        sources.push_back(r.source);
      }
      labels_present.insert(r.source_label());
    }

    std::size_t compared = 0;
    for (const auto& spec : cfg.kernels) {
      const std::string kernel(kernel_name(spec.kind));
      const auto kdir = dir / kernel;
      std::map<std::string, std::vector<ModelFamily>> cache;
      auto families = [&](const std::string& label) -> const std::vector<ModelFamily>& {
        auto it = cache.find(label);
        if (it == cache.end()) {
          it = cache.emplace(label, estimate_families(*in, spec, cfg.estimator,
                                                      {label},
                                                      kernel_scope(cfg, spec)))
                   .first;
        }
        return it->second;
      };
      auto find_family = [](const std::vector<ModelFamily>& v,
                            const std::string& task) -> const FamilyEstimate* {
        for (const auto& m : v) {
          if (m.family.task_family == task) return &m.family;
        }
        return nullptr;
      };

      Table diff{{"task", "model", "baseline_rho", "variant_rho", "delta_rho",
                  "delta_rho_lo", "delta_rho_hi"},
                 {}};
      Table curves{{"task", "model", "protocol", "X", "bcrit_over_gamma"}, {}};
      Plot plot;
      plot.title = "Critical benefit: " +
                   (cs.baseline.empty() ? std::string("baseline") : cs.baseline) +
                   " (solid) vs " + cs.variant + " (dashed)";
      plot.x_label = "exposure X";
      plot.y_label = "B_crit / gamma";
      plot.y_range = std::make_pair(0.0, 1.02);
      int color = 0;

      if (!cs.variant.empty()) {
        for (const auto& src : sources) {
          const auto a_label = protocol_label(src, cs.baseline);
          const auto b_label = protocol_label(src, cs.variant);
          if (!labels_present.count(a_label) || !labels_present.count(b_label)) {
            err << "warning: '" << src << "' lacks the "
                << (labels_present.count(a_label) ? "variant" : "baseline")
                << " protocol; skipped\n";
            continue;
          }
          const auto& fa = families(a_label);
          for (const auto& m : fa) {
            const FamilyEstimate* fb = find_family(families(b_label),
                                                   m.family.task_family);
            if (!fb) continue;
            const ProtocolDifference d =
                compare_protocols(m.family, *fb, cfg.estimator.ci_level);
            ++compared;
            diff.add({d.task_family, src, fmt(d.rho_a), fmt(d.rho_b),
                      fmt(d.diff.mean), fmt(d.diff.lo), fmt(d.diff.hi)});
            for (int side = 0; side < 2; ++side) {
              const double delta = side == 0 ? d.delta_a : d.delta_b;
              const std::string& proto = side == 0 ? cs.baseline : cs.variant;
              PlotSeries s;
              s.label = side == 0 ? src + " / " + d.task_family : "";
              s.dashed = side == 1;
              s.color = color;
              for (std::uint64_t x = 0; x <= cfg.adoption.max_exposure; ++x) {
                const double v = critical_benefit(delta, x);
                curves.add({d.task_family, src, proto, std::to_string(x), fmt(v)});
                s.xs.push_back(double(x));
                s.ys.push_back(v);
              }
              plot.series.push_back(std::move(s));
            }
            ++color;
          }
        }
        emit_table(kdir, "protocol_difference", diff, cfg.formats);
        emit_table(kdir, "threshold_curves", curves, cfg.formats);
        emit_plot(kdir, "thresholds", plot, cfg.formats);
        out << to_markdown(diff);
      }

      if (!cs.sweep.empty()) {
        Table points{{"task", "model", "protocol", "value", "rho", "rho_lo",
                      "rho_hi", "delta", "delta_lo", "delta_hi"},
                     {}};
        Table mono{{"task", "model", "delta_rho", "spearman_rho", "delta_delta",
                    "spearman_delta"},
                   {}};
        for (const auto& src : sources) {
          std::map<std::string, std::vector<std::pair<double, const FamilyEstimate*>>>
              by_task;
          for (const auto& pt : cs.sweep) {
            const auto label = protocol_label(src, pt.protocol);
            if (!labels_present.count(label)) continue;
            for (const auto& m : families(label)) {
              by_task[m.family.task_family].emplace_back(pt.value, &m.family);
              points.add({m.family.task_family, src, pt.protocol, fmt(pt.value),
                          fmt(m.family.rho.mean), fmt(m.family.rho.lo),
                          fmt(m.family.rho.hi), fmt(m.family.delta.mean),
                          fmt(m.family.delta.lo), fmt(m.family.delta.hi)});
            }
          }
          for (auto& [task, pts] : by_task) {
            if (pts.size() < 2) continue;
            std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
              return a.first < b.first;
            });
            std::vector<double> xs, rhos, deltas;
            for (const auto& [v, f] : pts) {
              xs.push_back(v);
              rhos.push_back(f->rho.mean);
              deltas.push_back(f->delta.mean);
            }
            auto sp = [](const std::optional<double>& v) {
              return v ? fmt(*v, 4) : std::string("undefined");
            };
            ++compared;
            mono.add({task, src, fmt(rhos.back() - rhos.front()),
                      sp(spearman_rank(xs, rhos)),
                      fmt(deltas.back() - deltas.front()),
                      sp(spearman_rank(xs, deltas))});
          }
        }
        emit_table(kdir, "sweep_points", points, cfg.formats);
        emit_table(kdir, "monotonicity", mono, cfg.formats);
        out << to_markdown(mono);
      }
    }
    if (compared == 0) {
      throw validation_error(
          "no model has both protocols (or two sweep points) to compare");
    }
    out << "wrote comparisons to " << dir.string() << "\n";
    return kExitOk;
  });
}

}  // namespace crowdbench
