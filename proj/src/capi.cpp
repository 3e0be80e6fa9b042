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

#include "aloe_c.h"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>

#include "aloe/bench.hpp"
#include "aloe/model.hpp"
#include "aloe/ood.hpp"
#include "aloe/pool.hpp"

struct aloe_pool {
  aloe::EmbeddedPool impl;
};

namespace {

thread_local std::string g_last_error;

const char* set_error(const std::string& msg) {
  g_last_error = msg;
  return g_last_error.c_str();
}

template <typename Fn>
aloe_status guarded(Fn&& fn) {
  try {
    fn();
    return ALOE_OK;
  } catch (const aloe::Error& e) {
    set_error(e.what());
    return ALOE_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    set_error(e.what());
    return ALOE_ERR_INTERNAL;
  }
}

aloe::PoolFormat to_format(aloe_pool_format format) {
  return format == ALOE_POOL_BINARY ? aloe::PoolFormat::kBinary
                                    : aloe::PoolFormat::kDelimitedText;
}

/// Sniffs the pool file format from the magic bytes.
aloe::EmbeddedPool load_any(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  aloe::require(static_cast<bool>(f), "cannot open pool file: " + path);
  char magic[8] = {};
  f.read(magic, 8);
  f.close();
  const bool binary = std::string(magic, 8) == "ALOEPOOL";
  return aloe::ingest(path, binary ? aloe::PoolFormat::kBinary
                                   : aloe::PoolFormat::kDelimitedText);
}

}  // namespace

extern "C" {

const char* aloe_last_error(void) { return g_last_error.c_str(); }

aloe_status aloe_pool_synth(int32_t n_classes, int32_t n0, double alpha,
                            int32_t dim, double separation, uint64_t seed,
                            aloe_pool** out) {
  return guarded([&] {
    aloe::require(out != nullptr, "aloe_pool_synth: out is null");
    aloe::LongTailSpec spec;
    spec.n_classes = n_classes;
    spec.n0 = n0;
    spec.alpha = alpha;
    spec.dim = dim;
    spec.separation = separation;
    spec.seed = seed;
    *out = new aloe_pool{aloe::synth_longtail(spec)};
  });
}

aloe_status aloe_pool_load(const char* path, aloe_pool_format format,
                           aloe_pool** out) {
  return guarded([&] {
    aloe::require(path != nullptr && out != nullptr,
                  "aloe_pool_load: null argument");
    *out = new aloe_pool{aloe::ingest(path, to_format(format))};
  });
}

aloe_status aloe_pool_save(const aloe_pool* pool, const char* path,
                           aloe_pool_format format) {
  return guarded([&] {
    aloe::require(pool != nullptr && path != nullptr,
                  "aloe_pool_save: null argument");
    aloe::save_pool(pool->impl, path, to_format(format));
  });
}

void aloe_pool_free(aloe_pool* pool) { delete pool; }

int32_t aloe_pool_size(const aloe_pool* pool) {
  return pool ? pool->impl.size() : -1;
}

int32_t aloe_pool_dim(const aloe_pool* pool) {
  return pool ? pool->impl.dim() : -1;
}

int32_t aloe_pool_num_classes(const aloe_pool* pool) {
  return pool ? pool->impl.num_classes : -1;
}

aloe_status aloe_gen_data(const char* config_path, const char* out_path) {
  return guarded([&] {
    aloe::require(config_path != nullptr && out_path != nullptr,
                  "aloe_gen_data: null argument");
    const aloe::ExperimentConfig cfg = aloe::parse_config(config_path);
    aloe::require(cfg.synth, "aloe_gen_data: config pool.source is not synth");
    aloe::save_pool(aloe::synth_longtail(cfg.pool_spec), out_path,
                    aloe::PoolFormat::kBinary);
  });
}

aloe_status aloe_run(const char* config_path, const char* out_dir) {
  return guarded([&] {
    aloe::require(config_path != nullptr && out_dir != nullptr,
                  "aloe_run: null argument");
    aloe::run_experiment(aloe::parse_config(config_path), out_dir);
  });
}

aloe_status aloe_report(const char* log_dir, const char* out_dir) {
  return guarded([&] {
    aloe::require(log_dir != nullptr && out_dir != nullptr,
                  "aloe_report: null argument");
    aloe::reaggregate_logs(log_dir, out_dir);
  });
}

aloe_status aloe_score(const char* pool_path, const char* state_path,
                       const char* ood_kind, const char* out_path) {
  return guarded([&] {
    aloe::require(pool_path && state_path && ood_kind && out_path,
                  "aloe_score: null argument");
    const aloe::EmbeddedPool pool = load_any(pool_path);

    std::ifstream sf(state_path);
    aloe::require(static_cast<bool>(sf),
                  "cannot open state file: " + std::string(state_path));
    std::vector<char> is_train(pool.size(), 0), labeled(pool.size(), 0);
    for (int id : pool.train_ids) is_train[id] = 1;
    aloe::RoundState state;
    int id;
    while (sf >> id) {
      aloe::require(id >= 0 && id < pool.size() && is_train[id],
                    "state file: id is not a train example: " +
                        std::to_string(id));
      aloe::require(!labeled[id],
                    "state file: duplicate id: " + std::to_string(id));
      labeled[id] = 1;
      state.labeled_ids.push_back(id);
      state.known_classes.insert(pool.labels[id]);
    }
    aloe::require(!state.labeled_ids.empty(), "state file: no labeled ids");
    for (int tid : pool.train_ids) {
      if (!labeled[tid]) state.unlabeled_ids.push_back(tid);
    }
    aloe::require(!state.unlabeled_ids.empty(),
                  "state file: nothing left unlabeled to score");

    const aloe::ScoreKind kind = aloe::score_kind_from_name(ood_kind);
    const aloe::LinearHead head = aloe::train(pool, state, aloe::TrainConfig{});
    std::optional<aloe::ClassStats> stats;
    if (kind == aloe::ScoreKind::kMahalanobis) {
      stats = aloe::fit_class_stats(pool, state);
    }
    const aloe::ScoreSheet sheet =
        aloe::score_pool(kind, head, stats, pool, state);
    if (std::string(out_path) == "-") {
      aloe::write_scoresheet(sheet, state, std::cout);
    } else {
      aloe::write_scoresheet(sheet, state, std::string(out_path));
    }
  });
}

}  // extern "C"
