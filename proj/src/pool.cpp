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

#include "aloe/pool.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "aloe/rng.hpp"

namespace aloe {

namespace {

constexpr char kPoolMagic[8] = {'A', 'L', 'O', 'E', 'P', 'O', 'O', 'L'};

std::vector<int> sorted_complement(const std::vector<int>& subset, int n) {
  std::vector<char> in(n, 0);
  for (int id : subset) in[id] = 1;
  std::vector<int> out;
  out.reserve(n - subset.size());
  for (int i = 0; i < n; ++i) {
    if (!in[i]) out.push_back(i);
  }
  return out;
}

}  // namespace

void EmbeddedPool::validate() const {
  const int n = size();
  require(num_classes >= 1, "pool: num_classes must be >= 1");
  require(static_cast<int>(labels.size()) == n, "pool: label count != N");
  for (int i = 0; i < n; ++i) {
    require(labels[i] >= 0 && labels[i] < num_classes,
            "pool: label out of range at row " + std::to_string(i));
    for (int j = 0; j < dim(); ++j) {
      require(std::isfinite(embeddings(i, j)),
              "pool: non-finite embedding at row " + std::to_string(i));
    }
  }
  std::vector<char> seen(n, 0);
  for (int id : test_ids) {
    require(id >= 0 && id < n, "pool: test id out of range");
    require(!seen[id], "pool: duplicate test id " + std::to_string(id));
    seen[id] = 1;
  }
  for (int id : train_ids) {
    require(id >= 0 && id < n, "pool: train id out of range");
    require(!seen[id], "pool: train/test overlap at id " + std::to_string(id));
    seen[id] = 1;
  }
  require(static_cast<int>(test_ids.size() + train_ids.size()) == n,
          "pool: train/test ids do not cover the pool");
  std::vector<char> in_train(num_classes, 0), in_test(num_classes, 0);
  for (int id : train_ids) in_train[labels[id]] = 1;
  for (int id : test_ids) in_test[labels[id]] = 1;
  for (int k = 0; k < num_classes; ++k) {
    require(in_train[k], "pool: class " + std::to_string(k) +
                             " missing from train split");
    require(in_test[k],
            "pool: class " + std::to_string(k) + " missing from test split");
  }
}

int longtail_class_size(const LongTailSpec& spec, int i) {
  const double raw =
      spec.n0 * std::pow(spec.alpha, static_cast<double>(i) / spec.n_classes);
  return std::max(1, static_cast<int>(std::floor(raw)));
}

EmbeddedPool synth_longtail(const LongTailSpec& spec) {
  require(spec.n_classes >= 2, "synth: n_classes must be >= 2");
  require(spec.n0 >= 1, "synth: n0 must be >= 1");
  require(std::isfinite(spec.alpha) && spec.alpha > 0.0 && spec.alpha <= 1.0,
          "synth: alpha must be in (0, 1]");
  require(spec.dim >= 2, "synth: dim must be >= 2");
  require(std::isfinite(spec.separation) && spec.separation >= 0.0,
          "synth: separation must be finite and nonnegative");

  const int n = spec.n_classes;
  const int d = spec.dim;

  std::vector<int> train_sizes(n), test_sizes(n);
  int total = 0;
  for (int i = 0; i < n; ++i) {
    train_sizes[i] = longtail_class_size(spec, i);
    test_sizes[i] = std::max(
        1, static_cast<int>(std::ceil(0.2 * train_sizes[i])));
    total += train_sizes[i] + test_sizes[i];
  }

  // Random isotropic centers: iid N(0, sigma^2) coordinates give expected
  // pairwise distance sigma * sqrt(2d).
  Rng center_rng(mix_seed(spec.seed, 0xC0));
  const double sigma_c = spec.separation / std::sqrt(2.0 * d);
  Mat centers(n, d);
  for (int c = 0; c < n; ++c) {
    for (int j = 0; j < d; ++j) centers(c, j) = sigma_c * center_rng.normal();
  }

  EmbeddedPool pool;
  pool.num_classes = n;
  pool.embeddings.resize(total, d);
  pool.labels.resize(total);
  int row = 0;
  for (int c = 0; c < n; ++c) {
    Rng rng(mix_seed(spec.seed, 0x1000 + static_cast<std::uint64_t>(c)));
    const int n_c = train_sizes[c] + test_sizes[c];
    for (int e = 0; e < n_c; ++e) {
      for (int j = 0; j < d; ++j) {
        // Quantize to float so binary f32 round trips are exact.
        pool.embeddings(row, j) =
            static_cast<double>(static_cast<float>(centers(c, j) + rng.normal()));
      }
      pool.labels[row] = c;
      if (e < train_sizes[c]) {
        pool.train_ids.push_back(row);
      } else {
        pool.test_ids.push_back(row);
      }
      ++row;
    }
  }
  pool.validate();
  return pool;
}

namespace {

template <typename T>
void write_raw(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is, const char* what) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(static_cast<bool>(is), std::string("pool file: truncated ") + what);
  return v;
}

EmbeddedPool ingest_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), "cannot open pool file: " + path);
  char magic[8];
  f.read(magic, 8);
  require(static_cast<bool>(f) && std::memcmp(magic, kPoolMagic, 8) == 0,
          "pool file: bad magic (expected ALOEPOOL): " + path);
  const auto version = read_raw<std::uint32_t>(f, "version");
  require(version == 1, "pool file: unsupported version " +
                            std::to_string(version));
  const auto n = read_raw<std::uint32_t>(f, "N");
  const auto d = read_raw<std::uint32_t>(f, "d");
  const auto k = read_raw<std::uint32_t>(f, "K");
  EmbeddedPool pool;
  pool.num_classes = static_cast<int>(k);
  pool.embeddings.resize(n, d);
  pool.labels.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < d; ++j) {
      const float v = read_raw<float>(f, "embedding");
      require(std::isfinite(v),
              "pool file: non-finite value at row " + std::to_string(i));
      pool.embeddings(i, j) = static_cast<double>(v);
    }
    const auto label = read_raw<std::uint32_t>(f, "label");
    require(label < k, "pool file: label " + std::to_string(label) +
                           " >= K at row " + std::to_string(i));
    pool.labels[i] = static_cast<int>(label);
  }
  const auto t_count = read_raw<std::uint32_t>(f, "test count");
  pool.test_ids.resize(t_count);
  for (std::uint32_t i = 0; i < t_count; ++i) {
    const auto id = read_raw<std::uint32_t>(f, "test id");
    require(id < n, "pool file: test id out of range: " + std::to_string(id));
    pool.test_ids[i] = static_cast<int>(id);
  }
  std::sort(pool.test_ids.begin(), pool.test_ids.end());
  pool.train_ids = sorted_complement(pool.test_ids, static_cast<int>(n));
  pool.validate();
  return pool;
}

EmbeddedPool ingest_text(const std::string& path) {
  std::ifstream f(path);
  require(static_cast<bool>(f), "cannot open pool file: " + path);
  std::string header;
  require(static_cast<bool>(std::getline(f, header)),
          "pool file: missing header line");
  int d = -1, k = -1;
  if (std::sscanf(header.c_str(), "d=%d K=%d", &d, &k) != 2 || d < 1 || k < 1) {
    throw Error("pool file: malformed header (want `d=<d> K=<K>`): " + header);
  }
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  int row_index = 0;
  while (std::getline(f, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::vector<double> values;
    double v;
    while (ls >> v) values.push_back(v);
    require(static_cast<int>(values.size()) == d + 1,
            "pool file: row " + std::to_string(row_index) + " has " +
                std::to_string(values.size()) + " fields, want " +
                std::to_string(d + 1));
    for (int j = 0; j < d; ++j) {
      require(std::isfinite(values[j]),
              "pool file: non-finite value at row " + std::to_string(row_index));
    }
    const double label_raw = values[d];
    const int label = static_cast<int>(label_raw);
    require(label_raw == label && label >= 0 && label < k,
            "pool file: bad label at row " + std::to_string(row_index));
    values.resize(d);
    rows.push_back(std::move(values));
    labels.push_back(label);
    ++row_index;
  }
  const int n = static_cast<int>(rows.size());
  require(n >= 1, "pool file: no example rows");

  EmbeddedPool pool;
  pool.num_classes = k;
  pool.embeddings.resize(n, d);
  pool.labels = labels;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      pool.embeddings(i, j) =
          static_cast<double>(static_cast<float>(rows[i][j]));
    }
  }
  std::ifstream tf(path + ".test");
  require(static_cast<bool>(tf), "missing test id file: " + path + ".test");
  int id;
  while (tf >> id) {
    require(id >= 0 && id < n,
            "test id file: id out of range: " + std::to_string(id));
    pool.test_ids.push_back(id);
  }
  std::sort(pool.test_ids.begin(), pool.test_ids.end());
  pool.train_ids = sorted_complement(pool.test_ids, n);
  pool.validate();
  return pool;
}

}  // namespace

EmbeddedPool ingest(const std::string& path, PoolFormat format) {
  return format == PoolFormat::kBinary ? ingest_binary(path)
                                       : ingest_text(path);
}

void save_pool(const EmbeddedPool& pool, const std::string& path,
               PoolFormat format) {
  if (format == PoolFormat::kBinary) {
    std::ofstream f(path, std::ios::binary);
    require(static_cast<bool>(f), "cannot write pool file: " + path);
    f.write(kPoolMagic, 8);
    write_raw<std::uint32_t>(f, 1);
    write_raw<std::uint32_t>(f, static_cast<std::uint32_t>(pool.size()));
    write_raw<std::uint32_t>(f, static_cast<std::uint32_t>(pool.dim()));
    write_raw<std::uint32_t>(f, static_cast<std::uint32_t>(pool.num_classes));
    for (int i = 0; i < pool.size(); ++i) {
      for (int j = 0; j < pool.dim(); ++j) {
        write_raw<float>(f, static_cast<float>(pool.embeddings(i, j)));
      }
      write_raw<std::uint32_t>(f, static_cast<std::uint32_t>(pool.labels[i]));
    }
    write_raw<std::uint32_t>(f,
                             static_cast<std::uint32_t>(pool.test_ids.size()));
    for (int id : pool.test_ids) {
      write_raw<std::uint32_t>(f, static_cast<std::uint32_t>(id));
    }
    require(static_cast<bool>(f), "write failure: " + path);
  } else {
    std::ofstream f(path);
    require(static_cast<bool>(f), "cannot write pool file: " + path);
    f << "d=" << pool.dim() << " K=" << pool.num_classes << "\n";
    char buf[64];
    for (int i = 0; i < pool.size(); ++i) {
      for (int j = 0; j < pool.dim(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.9g",
                      static_cast<double>(static_cast<float>(
                          pool.embeddings(i, j))));
        f << buf << ' ';
      }
      f << pool.labels[i] << "\n";
    }
    std::ofstream tf(path + ".test");
    require(static_cast<bool>(tf), "cannot write test id file: " + path);
    for (int id : pool.test_ids) tf << id << "\n";
  }
}

RoundState init_label(const EmbeddedPool& pool, int k1, int b,
                      std::uint64_t seed) {
  require(k1 >= 1 && k1 <= pool.num_classes, "init_label: k1 out of range");
  require(b >= k1, "init_label: b must be >= k1");

  std::vector<int> train_count(pool.num_classes, 0);
  std::vector<std::vector<int>> members(pool.num_classes);
  for (int id : pool.train_ids) {
    train_count[pool.labels[id]]++;
    members[pool.labels[id]].push_back(id);
  }
  // Largest k1 classes, ties broken by smaller class id.
  std::vector<int> order(pool.num_classes);
  for (int k = 0; k < pool.num_classes; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](int a, int c) {
    return train_count[a] > train_count[c];
  });
  order.resize(k1);

  const int base = b / k1;
  const int extra = b % k1;

  RoundState state;
  state.t = 1;
  Rng rng(mix_seed(seed, 0x11));
  for (int rank = 0; rank < k1; ++rank) {
    const int cls = order[rank];
    const int quota = base + (rank < extra ? 1 : 0);
    require(quota <= static_cast<int>(members[cls].size()),
            "init_label: class " + std::to_string(cls) + " has only " +
                std::to_string(members[cls].size()) + " train examples, need " +
                std::to_string(quota));
    const auto picks = rng.sample_without_replacement(members[cls].size(),
                                                      quota);
    for (int p : picks) state.labeled_ids.push_back(members[cls][p]);
    state.known_classes.insert(cls);
  }
  std::vector<char> labeled(pool.size(), 0);
  for (int id : state.labeled_ids) labeled[id] = 1;
  for (int id : pool.train_ids) {
    if (!labeled[id]) state.unlabeled_ids.push_back(id);
  }
  return state;
}

RoundState oracle_label(const EmbeddedPool& pool, const RoundState& state,
                        const std::vector<int>& query_ids) {
  std::vector<char> unlabeled(pool.size(), 0);
  for (int id : state.unlabeled_ids) unlabeled[id] = 1;
  std::vector<char> queried(pool.size(), 0);
  for (int id : query_ids) {
    require(id >= 0 && id < pool.size(),
            "oracle_label: id out of range: " + std::to_string(id));
    require(unlabeled[id],
            "oracle_label: id not unlabeled: " + std::to_string(id));
    require(!queried[id],
            "oracle_label: duplicate query id: " + std::to_string(id));
    queried[id] = 1;
  }
  RoundState next = state;
  next.t = state.t + 1;
  for (int id : query_ids) {
    next.labeled_ids.push_back(id);
    next.known_classes.insert(pool.labels[id]);
  }
  next.unlabeled_ids.clear();
  for (int id : state.unlabeled_ids) {
    if (!queried[id]) next.unlabeled_ids.push_back(id);
  }
  return next;
}

std::vector<int> class_counts(const RoundState& state,
                              const EmbeddedPool& pool) {
  std::vector<int> counts(pool.num_classes, 0);
  for (int id : state.labeled_ids) counts[pool.labels[id]]++;
  return counts;
}

}  // namespace aloe
