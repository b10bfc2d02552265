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

// crowdbench command-line interface.
//
//   crowdbench validate|estimate|rarefy|adoption|compare --config <path>
//              [--seed N] [--kernel K] [--out DIR] [--workers N]

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "crowdbench/commands.hpp"

namespace {

using crowdbench::RunConfig;

struct CommandOptions {
  std::string config;
  crowdbench::Overrides overrides;
};

void add_common(CLI::App* sub, CommandOptions& opts) {
  sub->add_option("--config", opts.config, "Run configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--seed", opts.overrides.seed, "Override the estimator seed");
  sub->add_option("--kernel", opts.overrides.kernel,
                  "Run a single kernel: semantic, plot_synopsis, word_jaccard, "
                  "char_trigram_jaccard or bucket");
  sub->add_option("--out", opts.overrides.out, "Override the output directory");
  sub->add_option("--workers", opts.overrides.workers,
                  "Worker threads for resampling")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Human-relative crowding benchmark toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "crowdbench 0.1.0");

  CommandOptions opts;
  using Command = int (*)(RunConfig, std::ostream&, std::ostream&);
  struct Entry {
    const char* name;
    const char* help;
    Command fn;
  };
  const Entry entries[] = {
      {"validate", "Check corpora, embeddings and kernel fields",
       crowdbench::cmd_validate},
      {"estimate", "Bootstrap crowding, delta and rho per condition and family",
       crowdbench::cmd_estimate},
      {"rarefy", "Rarefaction curves and drift table", crowdbench::cmd_rarefy},
      {"adoption", "Critical-benefit thresholds and expected cost",
       crowdbench::cmd_adoption},
      {"compare", "Protocol differences and sweep rank diagnostics",
       crowdbench::cmd_compare},
  };
  for (const auto& e : entries) add_common(app.add_subcommand(e.name, e.help), opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : crowdbench::kExitValidation;
  }

  for (const auto& e : entries) {
    if (!app.got_subcommand(e.name)) continue;
    try {
      RunConfig cfg = crowdbench::load_run_config(opts.config);
      crowdbench::apply_overrides(cfg, opts.overrides);
      return e.fn(std::move(cfg), std::cout, std::cerr);
    } catch (const crowdbench::Error& err) {
      std::cerr << "error: " << err.what() << "\n";
      return crowdbench::exit_code_for(err.kind());
    }
  }
  return crowdbench::kExitValidation;
}
