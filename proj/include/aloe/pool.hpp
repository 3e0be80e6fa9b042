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

#ifndef ALOE_POOL_HPP
#define ALOE_POOL_HPP

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "aloe/common.hpp"

namespace aloe {

/// A fixed pool of embedded examples with hidden ground-truth labels and a
/// held-out test split. Immutable after construction; safe to share across
/// threads.
struct EmbeddedPool {
  Mat embeddings;               // N x d
  std::vector<int> labels;      // ground truth, in [0, num_classes)
  int num_classes = 0;
  std::vector<int> test_ids;    // sorted, disjoint from train_ids
  std::vector<int> train_ids;   // sorted complement of test_ids

  int size() const { return static_cast<int>(embeddings.rows()); }
  int dim() const { return static_cast<int>(embeddings.cols()); }

  /// Checks every structural invariant; throws Error on violation.
  void validate() const;
};

/// Active-learning state at round t. Transitions produce new values; nothing
/// is mutated in place.
struct RoundState {
  int t = 1;                         // 1-based round index
  std::vector<int> labeled_ids;      // insertion order
  std::vector<int> unlabeled_ids;    // sorted
  std::set<int> known_classes;       // global class ids with >= 1 label
};

/// Parameters for synthetic long-tail pool generation. Class i receives
/// max(1, floor(n0 * alpha^(i/n_classes))) training examples.
struct LongTailSpec {
  int n_classes = 2;
  int n0 = 1;
  double alpha = 1.0;      // imbalance factor, in (0, 1]
  int dim = 2;
  double separation = 1.0; // mean inter-class-center distance
  std::uint64_t seed = 0;
};

/// Training size of class i under the long-tail formula.
int longtail_class_size(const LongTailSpec& spec, int i);

/// Deterministic synthetic pool: isotropic unit-variance Gaussian blobs
/// around class centers placed `separation` apart in expectation, plus a
/// stratified test split of max(1, ceil(0.2 * N_i)) examples per class.
/// Embedding values are quantized to float precision so file round trips
/// are lossless.
EmbeddedPool synth_longtail(const LongTailSpec& spec);

enum class PoolFormat { kBinary, kDelimitedText };

/// Reads a pool file (binary "ALOEPOOL" or delimited text + ".test"
/// companion). Malformed input is reported with the offending row.
EmbeddedPool ingest(const std::string& path, PoolFormat format);

void save_pool(const EmbeddedPool& pool, const std::string& path,
               PoolFormat format);

/// Initial labeling: the k1 largest training classes (ties to the smaller
/// class id) receive floor(b/k1) examples each, plus one extra for the first
/// (b mod k1) classes in descending-size order. Draws are uniform without
/// replacement per class.
RoundState init_label(const EmbeddedPool& pool, int k1, int b,
                      std::uint64_t seed);

/// Labels query_ids, advancing to round t+1. The input state is untouched.
RoundState oracle_label(const EmbeddedPool& pool, const RoundState& state,
                        const std::vector<int>& query_ids);

/// Per-class labeled counts; length num_classes, sums to |labeled_ids|.
std::vector<int> class_counts(const RoundState& state,
                              const EmbeddedPool& pool);

}  // namespace aloe

#endif  // ALOE_POOL_HPP
