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

#include "aloe/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "aloe/rng.hpp"

namespace aloe {

namespace {

Vec softmax(const Vec& logits) {
  const double m = logits.maxCoeff();
  Vec e = (logits.array() - m).exp();
  return e / e.sum();
}

}  // namespace

int LinearHead::local_index(int global_class) const {
  for (int j = 0; j < static_cast<int>(class_map.size()); ++j) {
    if (class_map[j] == global_class) return j;
  }
  return -1;
}

LinearHead train(const EmbeddedPool& pool, const RoundState& state,
                 const TrainConfig& cfg) {
  require(!state.labeled_ids.empty(), "train: no labeled examples");
  require(cfg.learning_rate > 0.0, "train: learning_rate must be > 0");
  require(cfg.epochs >= 1, "train: epochs must be >= 1");
  require(cfg.minibatch >= 1, "train: minibatch must be >= 1");
  require(cfg.weight_decay >= 0.0, "train: weight_decay must be >= 0");

  LinearHead head;
  head.class_map.assign(state.known_classes.begin(),
                        state.known_classes.end());
  const int k = static_cast<int>(head.class_map.size());
  const int d = pool.dim();
  head.weights = Mat::Zero(k, d);
  head.bias = Vec::Zero(k);

  std::vector<int> local_of(pool.num_classes, -1);
  for (int j = 0; j < k; ++j) local_of[head.class_map[j]] = j;

  const int m = static_cast<int>(state.labeled_ids.size());
  Mat x(m, d);
  std::vector<int> y(m);
  for (int i = 0; i < m; ++i) {
    const int id = state.labeled_ids[i];
    x.row(i) = pool.embeddings.row(id);
    y[i] = local_of[pool.labels[id]];
  }

  Rng rng(mix_seed(cfg.seed, 0x7e));
  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;

  Mat grad_w(k, d);
  Vec grad_b(k);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (int start = 0; start < m; start += cfg.minibatch) {
      const int stop = std::min(m, start + cfg.minibatch);
      const int bsize = stop - start;
      grad_w.setZero();
      grad_b.setZero();
      double loss = 0.0;
      for (int i = start; i < stop; ++i) {
        const int row = order[i];
        const Vec logits = head.weights * x.row(row).transpose() + head.bias;
        const Vec p = softmax(logits);
        loss -= std::log(std::max(p[y[row]], 1e-300));
        Vec delta = p;
        delta[y[row]] -= 1.0;
        grad_w.noalias() += delta * x.row(row);
        grad_b += delta;
      }
      require(std::isfinite(loss),
              "train: non-finite loss at epoch " + std::to_string(epoch));
      const double scale = cfg.learning_rate / bsize;
      head.weights -= scale * grad_w +
                      (cfg.learning_rate * cfg.weight_decay) * head.weights;
      head.bias -= scale * grad_b;
    }
  }
  return head;
}

Posterior predict(const LinearHead& head, const Vec& x) {
  require(x.size() == head.dim(), "predict: embedding dimension mismatch");
  Posterior post;
  post.logits = head.weights * x + head.bias;
  post.probs = softmax(post.logits);
  return post;
}

int predict_class(const LinearHead& head, const Vec& x) {
  const Posterior post = predict(head, x);
  int best = 0;
  post.probs.maxCoeff(&best);
  return head.class_map[best];
}

int gradient_length(const LinearHead& head) {
  return head.num_outputs() * (head.dim() + 1);
}

Vec head_gradient(const LinearHead& head, const Vec& x, GradTarget target,
                  int onehot_class) {
  require(x.size() == head.dim(),
          "head_gradient: embedding dimension mismatch");
  const int k = head.num_outputs();
  const int d = head.dim();
  const Vec p = predict(head, x).probs;

  Vec q = Vec::Zero(k);
  switch (target) {
    case GradTarget::kUniform:
      q.setConstant(1.0 / k);
      break;
    case GradTarget::kOneHot:
      require(onehot_class >= 0 && onehot_class < k,
              "head_gradient: one-hot class out of range");
      q[onehot_class] = 1.0;
      break;
    case GradTarget::kPredicted: {
      int best = 0;
      p.maxCoeff(&best);
      q[best] = 1.0;
      break;
    }
  }
  const Vec delta = p - q;
  Vec flat(k * (d + 1));
  for (int j = 0; j < k; ++j) {
    flat.segment(j * d, d) = delta[j] * x;
  }
  flat.tail(k) = delta;
  return flat;
}

namespace {
constexpr char kHeadMagic[8] = {'A', 'L', 'O', 'E', 'H', 'E', 'A', 'D'};

template <typename T>
void write_raw(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is, const char* what) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(static_cast<bool>(is), std::string("head file: truncated ") + what);
  return v;
}
}  // namespace

void save_head(const LinearHead& head, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), "cannot write head file: " + path);
  f.write(kHeadMagic, 8);
  write_raw<std::uint32_t>(f, 1);
  write_raw<std::uint32_t>(f, static_cast<std::uint32_t>(head.num_outputs()));
  write_raw<std::uint32_t>(f, static_cast<std::uint32_t>(head.dim()));
  for (int j = 0; j < head.num_outputs(); ++j) {
    for (int c = 0; c < head.dim(); ++c) write_raw<double>(f, head.weights(j, c));
  }
  for (int j = 0; j < head.num_outputs(); ++j) write_raw<double>(f, head.bias[j]);
  for (int cls : head.class_map) {
    write_raw<std::uint32_t>(f, static_cast<std::uint32_t>(cls));
  }
  require(static_cast<bool>(f), "write failure: " + path);
}

LinearHead load_head(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), "cannot open head file: " + path);
  char magic[8];
  f.read(magic, 8);
  require(static_cast<bool>(f) && std::memcmp(magic, kHeadMagic, 8) == 0,
          "head file: bad magic (expected ALOEHEAD): " + path);
  const auto version = read_raw<std::uint32_t>(f, "version");
  require(version == 1,
          "head file: unsupported version " + std::to_string(version));
  const auto k = read_raw<std::uint32_t>(f, "K");
  const auto d = read_raw<std::uint32_t>(f, "d");
  LinearHead head;
  head.weights.resize(k, d);
  head.bias.resize(k);
  for (std::uint32_t j = 0; j < k; ++j) {
    for (std::uint32_t c = 0; c < d; ++c) {
      head.weights(j, c) = read_raw<double>(f, "weight");
    }
  }
  for (std::uint32_t j = 0; j < k; ++j) head.bias[j] = read_raw<double>(f, "bias");
  head.class_map.resize(k);
  for (std::uint32_t j = 0; j < k; ++j) {
    head.class_map[j] = static_cast<int>(read_raw<std::uint32_t>(f, "class id"));
  }
  return head;
}

}  // namespace aloe
