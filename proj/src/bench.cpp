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

#include "aloe/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "aloe/rng.hpp"

namespace fs = std::filesystem;

namespace aloe {

StrategyKind strategy_kind_from_name(const std::string& name) {
  if (name == "aloe") return StrategyKind::kAloe;
  if (name == "reverse_aloe") return StrategyKind::kReverseAloe;
  if (name == "random") return StrategyKind::kRandom;
  if (name == "margin") return StrategyKind::kMargin;
  if (name == "coreset") return StrategyKind::kCoreset;
  if (name == "badge") return StrategyKind::kBadge;
  if (name == "typiclust") return StrategyKind::kTypiClust;
  throw Error("unknown strategy: " + name);
}

std::string strategy_kind_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kAloe: return "aloe";
    case StrategyKind::kReverseAloe: return "reverse_aloe";
    case StrategyKind::kRandom: return "random";
    case StrategyKind::kMargin: return "margin";
    case StrategyKind::kCoreset: return "coreset";
    case StrategyKind::kBadge: return "badge";
    case StrategyKind::kTypiClust: return "typiclust";
  }
  throw Error("unknown strategy");
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class KeyValues {
 public:
  explicit KeyValues(const std::string& path) {
    std::ifstream f(path);
    require(static_cast<bool>(f), "cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      require(eq != std::string::npos,
              path + ":" + std::to_string(lineno) + ": expected `key = value`");
      map_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
  }

  bool has(const std::string& key) const { return map_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) const {
    const auto it = map_.find(key);
    return it == map_.end() ? fallback : it->second;
  }

  std::string str_required(const std::string& key) const {
    const auto it = map_.find(key);
    require(it != map_.end(), "config: missing required key `" + key + "`");
    return it->second;
  }

  long integer(const std::string& key, long fallback) const {
    const auto it = map_.find(key);
    if (it == map_.end()) return fallback;
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(it->second, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == it->second.size(),
            "config: bad integer for `" + key + "`: " + it->second);
    return v;
  }

  double real(const std::string& key, double fallback) const {
    const auto it = map_.find(key);
    if (it == map_.end()) return fallback;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(it->second, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == it->second.size(),
            "config: bad number for `" + key + "`: " + it->second);
    return v;
  }

 private:
  std::map<std::string, std::string> map_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& path) {
  const KeyValues kv(path);
  ExperimentConfig cfg;

  const std::string source = kv.str("pool.source", "synth");
  if (source == "synth") {
    cfg.synth = true;
    cfg.pool_spec.n_classes = static_cast<int>(kv.integer("pool.n_classes", 10));
    cfg.pool_spec.n0 = static_cast<int>(kv.integer("pool.n0", 100));
    cfg.pool_spec.alpha = kv.real("pool.alpha", 1.0);
    cfg.pool_spec.dim = static_cast<int>(kv.integer("pool.dim", 16));
    cfg.pool_spec.separation = kv.real("pool.separation", 6.0);
    cfg.pool_spec.seed =
        static_cast<std::uint64_t>(kv.integer("pool.seed", 0));
  } else if (source == "file") {
    cfg.synth = false;
    cfg.pool_path = kv.str_required("pool.path");
  } else {
    throw Error("config: pool.source must be `synth` or `file`, got " + source);
  }

  AloeOptions aloe_opts;
  aloe_opts.ood = score_kind_from_name(kv.str("strategy.ood", "gradnorm"));
  aloe_opts.cluster =
      cluster_kind_from_name(kv.str("strategy.cluster", "kmeans"));
  aloe_opts.multiplier = static_cast<int>(kv.integer("strategy.multiplier", 2));
  aloe_opts.append_logits = kv.integer("strategy.append_logits", 0) != 0;
  const int knn = static_cast<int>(kv.integer("strategy.knn", 20));

  for (const auto& name : split_list(kv.str("strategy.name", "aloe"))) {
    StrategyConfig sc;
    sc.kind = strategy_kind_from_name(name);
    sc.aloe = aloe_opts;
    sc.typiclust_knn = knn;
    cfg.strategies.push_back(sc);
  }
  require(!cfg.strategies.empty(), "config: no strategies listed");

  cfg.batch_size = static_cast<int>(kv.integer("run.B", 50));
  cfg.rounds = static_cast<int>(kv.integer("run.T", 10));
  cfg.k1 = static_cast<int>(kv.integer("run.k1", 3));
  cfg.eval_final_only = kv.integer("run.eval_final_only", 0) != 0;
  require(cfg.batch_size >= 1, "config: run.B must be >= 1");
  require(cfg.rounds >= 1, "config: run.T must be >= 1");
  require(cfg.k1 >= 1, "config: run.k1 must be >= 1");

  for (const auto& s : split_list(kv.str("run.seeds", "0"))) {
    try {
      std::size_t used = 0;
      const std::uint64_t v = std::stoull(s, &used);
      require(used == s.size(), "bad seed");
      cfg.seeds.push_back(v);
    } catch (const std::exception&) {
      throw Error("config: bad seed in run.seeds: " + s);
    }
  }
  require(!cfg.seeds.empty(), "config: run.seeds must list >= 1 seed");

  cfg.train_cfg.learning_rate = kv.real("train.learning_rate", 0.1);
  cfg.train_cfg.epochs = static_cast<int>(kv.integer("train.epochs", 100));
  cfg.train_cfg.minibatch = static_cast<int>(kv.integer("train.minibatch", 64));
  cfg.train_cfg.weight_decay = kv.real("train.weight_decay", 1e-4);
  return cfg;
}

double balanced_accuracy(const std::vector<int>& predictions,
                         const EmbeddedPool& pool) {
  require(predictions.size() == pool.test_ids.size(),
          "balanced_accuracy: prediction count mismatch");
  std::vector<int> total(pool.num_classes, 0), correct(pool.num_classes, 0);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int truth = pool.labels[pool.test_ids[i]];
    total[truth]++;
    if (predictions[i] == truth) correct[truth]++;
  }
  double sum = 0.0;
  for (int k = 0; k < pool.num_classes; ++k) {
    if (total[k] > 0) sum += static_cast<double>(correct[k]) / total[k];
  }
  return sum / pool.num_classes;
}

namespace {

QueryBatch run_strategy(const StrategyConfig& strategy,
                        const EmbeddedPool& pool, const RoundState& state,
                        const LinearHead& head, int b, std::uint64_t seed) {
  switch (strategy.kind) {
    case StrategyKind::kAloe:
      return aloe_select(pool, state, head, b, strategy.aloe, seed);
    case StrategyKind::kReverseAloe:
      return reverse_aloe_select(pool, state, head, b, strategy.aloe, seed);
    case StrategyKind::kRandom:
      return random_select(state, b, seed);
    case StrategyKind::kMargin:
      return margin_select(pool, state, head, b);
    case StrategyKind::kCoreset:
      return coreset_select(pool, state, b);
    case StrategyKind::kBadge:
      return badge_select(pool, state, head, b, seed);
    case StrategyKind::kTypiClust:
      return typiclust_select(pool, state, b, strategy.typiclust_knn, seed);
  }
  throw Error("unknown strategy");
}

double evaluate(const LinearHead& head, const EmbeddedPool& pool) {
  std::vector<int> predictions(pool.test_ids.size());
  for (std::size_t i = 0; i < pool.test_ids.size(); ++i) {
    predictions[i] =
        predict_class(head, pool.embeddings.row(pool.test_ids[i]).transpose());
  }
  return balanced_accuracy(predictions, pool);
}

}  // namespace

TrialLog run_trial(const ExperimentConfig& cfg, const EmbeddedPool& pool,
                   const StrategyConfig& strategy, std::uint64_t seed) {
  TrialLog log;
  log.strategy = strategy_kind_name(strategy.kind);
  log.seed = seed;

  RoundState state =
      init_label(pool, cfg.k1, cfg.batch_size, mix_seed(seed, 0xA0));
  for (int round = 1; round <= cfg.rounds; ++round) {
    TrainConfig tc = cfg.train_cfg;
    tc.seed = mix_seed(seed, 0xB000 + static_cast<std::uint64_t>(round));
    const LinearHead head = train(pool, state, tc);
    if (!cfg.eval_final_only || round == cfg.rounds) {
      log.rows.push_back({round, static_cast<int>(state.labeled_ids.size()),
                          evaluate(head, pool),
                          static_cast<int>(state.known_classes.size())});
    }
    if (round == cfg.rounds) break;
    if (state.unlabeled_ids.empty()) break;  // pool exhausted: truncate
    const QueryBatch batch = run_strategy(
        strategy, pool, state, head, cfg.batch_size,
        mix_seed(seed, 0xC000 + static_cast<std::uint64_t>(round)));
    state = oracle_label(pool, state, batch.ids);
  }
  return log;
}

ReportTable aggregate(const std::vector<TrialLog>& logs) {
  require(!logs.empty(), "aggregate: no trial logs");
  std::map<std::string, std::vector<const TrialLog*>> groups;
  for (const auto& log : logs) groups[log.strategy].push_back(&log);

  ReportTable report;
  for (const auto& [name, group] : groups) {
    const auto& first = *group.front();
    for (const auto* log : group) {
      require(log->rows.size() == first.rows.size(),
              "aggregate: mismatched budget grids for strategy " + name);
      for (std::size_t i = 0; i < log->rows.size(); ++i) {
        require(log->rows[i].budget == first.rows[i].budget,
                "aggregate: mismatched budget grids for strategy " + name);
      }
    }
    ReportTable::Series series;
    const int n = static_cast<int>(group.size());
    for (std::size_t i = 0; i < first.rows.size(); ++i) {
      series.budgets.push_back(first.rows[i].budget);
      const auto cell = [&](auto pick) {
        double mean = 0.0;
        for (const auto* log : group) mean += pick(log->rows[i]);
        mean /= n;
        double var = 0.0;
        for (const auto* log : group) {
          const double d = pick(log->rows[i]) - mean;
          var += d * d;
        }
        ReportCell c;
        c.mean = mean;
        c.stderr_ = n > 1 ? std::sqrt(var / (n - 1)) / std::sqrt(n) : 0.0;
        return c;
      };
      series.accuracy.push_back(
          cell([](const TrialRow& r) { return r.balanced_acc; }));
      series.n_known.push_back(
          cell([](const TrialRow& r) { return static_cast<double>(r.n_known); }));
    }
    report.series[name] = std::move(series);
  }
  return report;
}

int budget_to_reach(const ReportTable& report, const std::string& strategy,
                    double target_acc) {
  require(target_acc > 0.0 && target_acc <= 1.0,
          "budget_to_reach: target must be in (0, 1]");
  const auto it = report.series.find(strategy);
  require(it != report.series.end(),
          "budget_to_reach: unknown strategy " + strategy);
  for (std::size_t i = 0; i < it->second.budgets.size(); ++i) {
    if (it->second.accuracy[i].mean >= target_acc) {
      return it->second.budgets[i];
    }
  }
  return -1;
}

namespace {

std::string fmt(double v, const char* spec = "%.12g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

void write_metric_table(
    const ReportTable& report, const std::string& path,
    const std::vector<ReportCell> ReportTable::Series::* metric) {
  std::ofstream f(path);
  require(static_cast<bool>(f), "cannot write report table: " + path);
  f << "strategy\tbudget\tmean\tstderr\n";
  for (const auto& [name, series] : report.series) {
    for (std::size_t i = 0; i < series.budgets.size(); ++i) {
      const ReportCell& c = (series.*metric)[i];
      f << name << '\t' << series.budgets[i] << '\t' << fmt(c.mean) << '\t'
        << fmt(c.stderr_) << "\n";
    }
  }
  require(static_cast<bool>(f), "write failure: " + path);
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

/// Minimal static line chart: one stderr band polygon and one polyline per
/// strategy, plus axes and tick labels.
void write_metric_chart(
    const ReportTable& report, const std::string& path,
    const std::string& y_label,
    const std::vector<ReportCell> ReportTable::Series::* metric) {
  const double width = 640, height = 420;
  const double left = 70, right = 20, top = 40, bottom = 50;

  double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
  for (const auto& [name, series] : report.series) {
    for (std::size_t i = 0; i < series.budgets.size(); ++i) {
      const ReportCell& c = (series.*metric)[i];
      x_min = std::min(x_min, static_cast<double>(series.budgets[i]));
      x_max = std::max(x_max, static_cast<double>(series.budgets[i]));
      y_min = std::min(y_min, c.mean - c.stderr_);
      y_max = std::max(y_max, c.mean + c.stderr_);
    }
  }
  if (x_max <= x_min) x_max = x_min + 1;
  if (y_max <= y_min) y_max = y_min + 1;
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  const auto px = [&](double x) {
    return left + (x - x_min) / (x_max - x_min) * (width - left - right);
  };
  const auto py = [&](double y) {
    return height - bottom -
           (y - y_min) / (y_max - y_min) * (height - top - bottom);
  };

  std::ofstream f(path);
  require(static_cast<bool>(f), "cannot write chart: " + path);
  f << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
    << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
    << height << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // Axes.
  f << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\""
    << width - right << "\" y2=\"" << height - bottom
    << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
    << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double tx = x_min + tick * (x_max - x_min) / 4;
    const double ty = y_min + tick * (y_max - y_min) / 4;
    f << "<text x=\"" << fmt(px(tx), "%.2f") << "\" y=\"" << height - bottom + 18
      << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(tx, "%.6g")
      << "</text>\n";
    f << "<text x=\"" << left - 8 << "\" y=\"" << fmt(py(ty) + 4.0, "%.2f")
      << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(ty, "%.4g")
      << "</text>\n";
  }
  f << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12
    << "\" font-size=\"13\" text-anchor=\"middle\">budget</text>\n";
  f << "<text x=\"18\" y=\"" << (top + height - bottom) / 2
    << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << (top + height - bottom) / 2 << ")\">" << y_label << "</text>\n";

  int color = 0;
  double legend_x = left + 6;
  for (const auto& [name, series] : report.series) {
    const char* stroke = kPalette[color % 8];
    // stderr band
    std::ostringstream band;
    for (std::size_t i = 0; i < series.budgets.size(); ++i) {
      const ReportCell& c = (series.*metric)[i];
      band << fmt(px(series.budgets[i]), "%.2f") << ','
           << fmt(py(c.mean + c.stderr_), "%.2f") << ' ';
    }
    for (std::size_t i = series.budgets.size(); i-- > 0;) {
      const ReportCell& c = (series.*metric)[i];
      band << fmt(px(series.budgets[i]), "%.2f") << ','
           << fmt(py(c.mean - c.stderr_), "%.2f") << ' ';
    }
    f << "<polygon points=\"" << band.str() << "\" fill=\"" << stroke
      << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    // mean line
    f << "<polyline fill=\"none\" stroke=\"" << stroke
      << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series.budgets.size(); ++i) {
      f << fmt(px(series.budgets[i]), "%.2f") << ','
        << fmt(py((series.*metric)[i].mean), "%.2f") << ' ';
    }
    f << "\"/>\n";
    f << "<text x=\"" << fmt(legend_x, "%.2f") << "\" y=\"" << top - 16
      << "\" font-size=\"12\" fill=\"" << stroke << "\">" << name
      << "</text>\n";
    legend_x += 12.0 * (name.size() + 2);
    ++color;
  }
  f << "</svg>\n";
  require(static_cast<bool>(f), "write failure: " + path);
}

}  // namespace

void emit_report(const ReportTable& report, const std::string& out_dir) {
  fs::create_directories(out_dir);
  write_metric_table(report, out_dir + "/table_balanced_accuracy.tsv",
                     &ReportTable::Series::accuracy);
  write_metric_table(report, out_dir + "/table_n_known.tsv",
                     &ReportTable::Series::n_known);
  write_metric_chart(report, out_dir + "/chart_balanced_accuracy.svg",
                     "balanced accuracy", &ReportTable::Series::accuracy);
  write_metric_chart(report, out_dir + "/chart_n_known.svg",
                     "annotated classes", &ReportTable::Series::n_known);
}

void write_trial_log(const TrialLog& log, const std::string& path) {
  std::ofstream f(path);
  require(static_cast<bool>(f), "cannot write trial log: " + path);
  f << "# strategy=" << log.strategy << " seed=" << log.seed << "\n";
  f << "t\tbudget\tbalanced_accuracy\tn_known\n";
  for (const auto& row : log.rows) {
    // Round-trip precision: re-aggregating the written log must reproduce
    // the tables byte for byte.
    f << row.t << '\t' << row.budget << '\t' << fmt(row.balanced_acc, "%.17g")
      << '\t'
      << row.n_known << "\n";
  }
  require(static_cast<bool>(f), "write failure: " + path);
}

TrialLog read_trial_log(const std::string& path) {
  std::ifstream f(path);
  require(static_cast<bool>(f), "cannot open trial log: " + path);
  TrialLog log;
  std::string header;
  require(static_cast<bool>(std::getline(f, header)),
          "trial log: empty file: " + path);
  char name[128];
  unsigned long long seed = 0;
  require(std::sscanf(header.c_str(), "# strategy=%127s seed=%llu", name,
                      &seed) == 2,
          "trial log: malformed header: " + path);
  log.strategy = name;
  log.seed = seed;
  std::string line;
  std::getline(f, line);  // column header
  while (std::getline(f, line)) {
    if (trim(line).empty()) continue;
    TrialRow row;
    require(std::sscanf(line.c_str(), "%d %d %lf %d", &row.t, &row.budget,
                        &row.balanced_acc, &row.n_known) == 4,
            "trial log: malformed row in " + path + ": " + line);
    log.rows.push_back(row);
  }
  return log;
}

namespace {

int worker_count(int jobs) {
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ALOE_WORKERS")) {
    workers = std::atoi(env);
  }
  if (workers < 1) workers = 1;
  return std::min(workers, jobs);
}

}  // namespace

ReportTable run_experiment(const ExperimentConfig& cfg,
                           const std::string& out_dir) {
  const EmbeddedPool pool = cfg.synth
                                ? synth_longtail(cfg.pool_spec)
                                : ingest(cfg.pool_path, PoolFormat::kBinary);

  struct Job {
    const StrategyConfig* strategy;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& strategy : cfg.strategies) {
    for (std::uint64_t seed : cfg.seeds) jobs.push_back({&strategy, seed});
  }

  std::vector<TrialLog> logs(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mutex;
  const int workers = worker_count(static_cast<int>(jobs.size()));
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= jobs.size() || failed.load()) break;
        try {
          logs[i] = run_trial(cfg, pool, *jobs[i].strategy, jobs[i].seed);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!failed.exchange(true)) first_error = e.what();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failed.load()) throw Error("run_experiment: " + first_error);

  fs::create_directories(out_dir);
  for (const auto& log : logs) {
    write_trial_log(log, out_dir + "/trial_" + log.strategy + "_" +
                             std::to_string(log.seed) + ".tsv");
  }
  const ReportTable report = aggregate(logs);
  emit_report(report, out_dir);
  return report;
}

ReportTable reaggregate_logs(const std::string& log_dir,
                             const std::string& out_dir) {
  std::vector<std::string> paths;
  require(fs::is_directory(log_dir), "not a directory: " + log_dir);
  for (const auto& entry : fs::directory_iterator(log_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("trial_", 0) == 0 && name.ends_with(".tsv")) {
      paths.push_back(entry.path().string());
    }
  }
  require(!paths.empty(), "no trial_*.tsv logs in " + log_dir);
  std::sort(paths.begin(), paths.end());
  std::vector<TrialLog> logs;
  for (const auto& p : paths) logs.push_back(read_trial_log(p));
  const ReportTable report = aggregate(logs);
  emit_report(report, out_dir);
  return report;
}

}  // namespace aloe
