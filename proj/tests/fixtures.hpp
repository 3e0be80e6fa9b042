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

#ifndef ALOE_TESTS_FIXTURES_HPP
#define ALOE_TESTS_FIXTURES_HPP

#include <set>
#include <vector>

#include "aloe/pool.hpp"

namespace aloe_tests {

/// Hand-built pool: every row is a train example unless listed in test_ids.
/// Does not run validate(), so degenerate fixtures are allowed.
inline aloe::EmbeddedPool make_pool(const aloe::Mat& embeddings,
                                    const std::vector<int>& labels,
                                    int num_classes,
                                    const std::vector<int>& test_ids = {}) {
  aloe::EmbeddedPool pool;
  pool.embeddings = embeddings;
  pool.labels = labels;
  pool.num_classes = num_classes;
  pool.test_ids = test_ids;
  std::set<int> in_test(test_ids.begin(), test_ids.end());
  for (int i = 0; i < static_cast<int>(embeddings.rows()); ++i) {
    if (!in_test.count(i)) pool.train_ids.push_back(i);
  }
  return pool;
}

/// State with the given labeled train ids; everything else stays unlabeled.
inline aloe::RoundState make_state(const aloe::EmbeddedPool& pool,
                                   const std::vector<int>& labeled_ids) {
  aloe::RoundState state;
  state.labeled_ids = labeled_ids;
  std::set<int> labeled(labeled_ids.begin(), labeled_ids.end());
  for (int id : pool.train_ids) {
    if (!labeled.count(id)) state.unlabeled_ids.push_back(id);
  }
  for (int id : labeled_ids) state.known_classes.insert(pool.labels[id]);
  return state;
}

}  // namespace aloe_tests

#endif  // ALOE_TESTS_FIXTURES_HPP
