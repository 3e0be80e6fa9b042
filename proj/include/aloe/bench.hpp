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

#ifndef ALOE_BENCH_HPP
#define ALOE_BENCH_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aloe/model.hpp"
#include "aloe/pool.hpp"
#include "aloe/strategy.hpp"

namespace aloe {

enum class StrategyKind {
  kAloe,
  kReverseAloe,
  kRandom,
  kMargin,
  kCoreset,
  kBadge,
  kTypiClust,
};

StrategyKind strategy_kind_from_name(const std::string& name);
std::string strategy_kind_name(StrategyKind kind);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::kAloe;
  AloeOptions aloe;  // ood / cluster / multiplier, used by the ALOE variants
  int typiclust_knn = 20;
};

struct ExperimentConfig {
  // Pool source: either a synthesis spec or a binary pool file path.
  bool synth = true;
  LongTailSpec pool_spec;
  std::string pool_path;

  std::vector<StrategyConfig> strategies;
  int batch_size = 50;   // B
  int rounds = 10;       // T: total budget levels (initial batch + T-1 queries)
  int k1 = 3;            // initially labeled classes
  TrainConfig train_cfg;
  std::vector<std::uint64_t> seeds;
  bool eval_final_only = false;
};

/// Line-oriented `key = value` config with dotted section keys and `#`
/// comments. See the repository README for the key reference.
ExperimentConfig parse_config(const std::string& path);

struct TrialRow {
  int t = 0;
  int budget = 0;           // |L_t|
  double balanced_acc = 0.0;
  int n_known = 0;          // |K_t|
};

struct TrialLog {
  std::string strategy;
  std::uint64_t seed = 0;
  std::vector<TrialRow> rows;
};

/// Mean per-class recall over all K classes; classes outside the model's
/// reach contribute zero. predictions align with pool.test_ids.
double balanced_accuracy(const std::vector<int>& predictions,
                         const EmbeddedPool& pool);

/// One seeded trial: init_label with (k1, B), then per round train from
/// scratch, evaluate, query, label. Truncates early if the pool runs dry.
TrialLog run_trial(const ExperimentConfig& cfg, const EmbeddedPool& pool,
                   const StrategyConfig& strategy, std::uint64_t seed);

struct ReportCell {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample sd / sqrt(#trials); 0 for one trial
};

struct ReportTable {
  // strategy -> budget grid + per-budget aggregated metrics.
  struct Series {
    std::vector<int> budgets;
    std::vector<ReportCell> accuracy;
    std::vector<ReportCell> n_known;
  };
  std::map<std::string, Series> series;
};

/// Aggregates trial logs (grouped by strategy name) into mean +- standard
/// error per budget level. Logs of one strategy must share a budget grid.
ReportTable aggregate(const std::vector<TrialLog>& logs);

/// Smallest budget whose mean accuracy reaches target; -1 when not reached.
int budget_to_reach(const ReportTable& report, const std::string& strategy,
                    double target_acc);

/// Writes one delimited-text table and one SVG line chart per metric.
void emit_report(const ReportTable& report, const std::string& out_dir);

void write_trial_log(const TrialLog& log, const std::string& path);
TrialLog read_trial_log(const std::string& path);

/// Runs every (strategy x seed) trial of the config — in parallel up to
/// ALOE_WORKERS — then writes per-trial logs, report tables, and charts
/// into out_dir. Byte-identical output for a fixed config regardless of the
/// worker count.
ReportTable run_experiment(const ExperimentConfig& cfg,
                           const std::string& out_dir);

/// Re-aggregates trial logs (trial_*.tsv) found in log_dir.
ReportTable reaggregate_logs(const std::string& log_dir,
                             const std::string& out_dir);

}  // namespace aloe

#endif  // ALOE_BENCH_HPP
