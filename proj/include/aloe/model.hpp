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

#ifndef ALOE_MODEL_HPP
#define ALOE_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "aloe/common.hpp"
#include "aloe/pool.hpp"

namespace aloe {

/// A |K_t|-way linear softmax head over fixed embeddings. Immutable after
/// training; predict/head_gradient are pure.
struct LinearHead {
  Mat weights;                 // |K_t| x d
  Vec bias;                    // |K_t|
  std::vector<int> class_map;  // local output index -> global class id

  int num_outputs() const { return static_cast<int>(weights.rows()); }
  int dim() const { return static_cast<int>(weights.cols()); }
  /// Local index for a global class id, or -1 if the head cannot predict it.
  int local_index(int global_class) const;
};

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 100;
  int minibatch = 64;
  double weight_decay = 1e-4;
  std::uint64_t seed = 0;
};

struct Posterior {
  Vec logits;
  Vec probs;
};

/// Cold-start training: zero-initialized head, minibatch gradient descent on
/// softmax cross-entropy over the labeled examples. Deterministic given
/// cfg.seed.
LinearHead train(const EmbeddedPool& pool, const RoundState& state,
                 const TrainConfig& cfg);

Posterior predict(const LinearHead& head, const Vec& x);

/// Predicted global class id (argmax of the posterior through class_map).
int predict_class(const LinearHead& head, const Vec& x);

enum class GradTarget { kUniform, kOneHot, kPredicted };

/// Analytic gradient of cross-entropy against a target distribution q:
/// dL/dW = (p - q) x^T, dL/db = (p - q). Flattened W row-major, then b.
Vec head_gradient(const LinearHead& head, const Vec& x, GradTarget target,
                  int onehot_class = -1);

int gradient_length(const LinearHead& head);

/// Optional checkpoint dump, binary framing with magic "ALOEHEAD".
void save_head(const LinearHead& head, const std::string& path);
LinearHead load_head(const std::string& path);

}  // namespace aloe

#endif  // ALOE_MODEL_HPP
