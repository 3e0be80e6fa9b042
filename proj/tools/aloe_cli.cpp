// Copyright 2026 The Aloe Authors
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

// Command-line front end. Links only the C API of the aloe shared library.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "aloe_c.h"

namespace {

int check(aloe_status status) {
  if (status == ALOE_OK) return 0;
  std::fprintf(stderr, "error: %s\n", aloe_last_error());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aloe: open-world pool-based active learning simulator"};
  app.require_subcommand(1);

  std::string spec_file, pool_out;
  auto* gen = app.add_subcommand(
      "gen-data", "Synthesize a long-tail pool and write it to a file");
  gen->add_option("spec-file", spec_file,
                  "Config file with pool.* keys (pool.source = synth)")
      ->required();
  gen->add_option("out", pool_out, "Output pool file (binary)")->required();

  std::string run_config, run_out = "out";
  auto* run = app.add_subcommand(
      "run", "Run all trials of a config and write logs + reports");
  run->add_option("config-file", run_config, "Experiment config file")
      ->required();
  run->add_option("--out", run_out, "Output directory")->required();

  std::string log_dir, report_out = "out";
  auto* report =
      app.add_subcommand("report", "Re-aggregate trial logs into reports");
  report->add_option("log-dir", log_dir, "Directory with trial_*.tsv logs")
      ->required();
  report->add_option("--out", report_out, "Output directory")->required();

  std::string score_pool_path, score_state, score_kind = "gradnorm";
  std::string score_out = "-";
  auto* score = app.add_subcommand(
      "score", "Train a head on the labeled ids and dump a score sheet");
  score->add_option("pool", score_pool_path, "Pool file (binary or text)")
      ->required();
  score->add_option("state", score_state,
                    "Labeled example ids, one per line")
      ->required();
  score->add_option("--ood", score_kind,
                    "energy|margin|gradnorm|mahalanobis|gradproj");
  score->add_option("--out", score_out, "Output file, or - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (gen->parsed()) {
    return check(aloe_gen_data(spec_file.c_str(), pool_out.c_str()));
  }
  if (run->parsed()) {
    return check(aloe_run(run_config.c_str(), run_out.c_str()));
  }
  if (report->parsed()) {
    return check(aloe_report(log_dir.c_str(), report_out.c_str()));
  }
  if (score->parsed()) {
    return check(aloe_score(score_pool_path.c_str(), score_state.c_str(),
                            score_kind.c_str(), score_out.c_str()));
  }
  return 2;
}
