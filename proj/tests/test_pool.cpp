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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "aloe/pool.hpp"
#include "aloe/rng.hpp"

using namespace aloe;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("long-tail size formula at the extremes") {
  LongTailSpec spec;
  spec.n_classes = 100;
  spec.n0 = 500;
  spec.alpha = 0.01;
  CHECK(longtail_class_size(spec, 0) == 500);
  CHECK(longtail_class_size(spec, 99) == 5);
  // Direct formula evaluation as the oracle for a few interior classes.
  for (int i : {1, 10, 50, 80}) {
    const int expected = std::max(
        1, static_cast<int>(std::floor(500.0 * std::pow(0.01, i / 100.0))));
    CHECK(longtail_class_size(spec, i) == expected);
  }
}

TEST_CASE("synthesized class sizes match the formula") {
  LongTailSpec spec;
  spec.n_classes = 10;
  spec.n0 = 20;
  spec.alpha = 0.01;
  spec.dim = 4;
  spec.separation = 5.0;
  spec.seed = 7;
  const EmbeddedPool pool = synth_longtail(spec);
  std::vector<int> train_count(10, 0), test_count(10, 0);
  for (int id : pool.train_ids) train_count[pool.labels[id]]++;
  for (int id : pool.test_ids) test_count[pool.labels[id]]++;
  for (int c = 0; c < 10; ++c) {
    const int n_c = longtail_class_size(spec, c);
    CHECK(train_count[c] == n_c);
    CHECK(test_count[c] == std::max(1, static_cast<int>(std::ceil(0.2 * n_c))));
  }
}

TEST_CASE("binary and text encodings round-trip to the same pool") {
  LongTailSpec spec;
  spec.n_classes = 5;
  spec.n0 = 12;
  spec.alpha = 0.3;
  spec.dim = 3;
  spec.separation = 4.0;
  spec.seed = 21;
  const EmbeddedPool pool = synth_longtail(spec);

  const std::string bin = temp_path("aloe_pool_rt.bin");
  const std::string txt = temp_path("aloe_pool_rt.txt");
  save_pool(pool, bin, PoolFormat::kBinary);
  save_pool(pool, txt, PoolFormat::kDelimitedText);
  const EmbeddedPool a = ingest(bin, PoolFormat::kBinary);
  const EmbeddedPool b = ingest(txt, PoolFormat::kDelimitedText);

  CHECK(a.embeddings == pool.embeddings);
  CHECK(b.embeddings == pool.embeddings);
  CHECK(a.labels == pool.labels);
  CHECK(b.labels == pool.labels);
  CHECK(a.num_classes == pool.num_classes);
  CHECK(b.num_classes == pool.num_classes);
  CHECK(a.test_ids == pool.test_ids);
  CHECK(b.test_ids == pool.test_ids);
  CHECK(a.train_ids == pool.train_ids);
  CHECK(b.train_ids == pool.train_ids);
}

TEST_CASE("init_label spreads 50 over the 3 largest classes as 17/17/16") {
  LongTailSpec spec;
  spec.n_classes = 10;
  spec.n0 = 30;
  spec.alpha = 0.5;
  spec.dim = 3;
  spec.separation = 4.0;
  spec.seed = 3;
  const EmbeddedPool pool = synth_longtail(spec);
  const RoundState state = init_label(pool, 3, 50, 99);

  const std::vector<int> counts = class_counts(state, pool);
  // Classes 0..2 are the largest under the long-tail spec.
  CHECK(counts[0] == 17);
  CHECK(counts[1] == 17);
  CHECK(counts[2] == 16);
  for (int c = 3; c < 10; ++c) CHECK(counts[c] == 0);
  CHECK(state.labeled_ids.size() == 50);
  CHECK(state.known_classes == std::set<int>{0, 1, 2});
  CHECK(state.t == 1);
}

TEST_CASE("labeling the whole pool discovers every train class") {
  LongTailSpec spec;
  spec.n_classes = 6;
  spec.n0 = 10;
  spec.alpha = 0.2;
  spec.dim = 2;
  spec.separation = 3.0;
  spec.seed = 5;
  const EmbeddedPool pool = synth_longtail(spec);
  RoundState state = init_label(pool, 2, 4, 1);
  state = oracle_label(pool, state, state.unlabeled_ids);
  CHECK(state.unlabeled_ids.empty());
  CHECK(state.labeled_ids.size() == pool.train_ids.size());
  std::set<int> train_classes;
  for (int id : pool.train_ids) train_classes.insert(pool.labels[id]);
  CHECK(state.known_classes == train_classes);
}

}  // TEST_SUITE("oracle")

TEST_SUITE("unit") {

TEST_CASE("long-tail trivial sizes") {
  LongTailSpec spec;
  spec.n_classes = 10;
  spec.n0 = 20;
  spec.alpha = 1.0;
  for (int i = 0; i < 10; ++i) CHECK(longtail_class_size(spec, i) == 20);
}

TEST_CASE("text ingest echoes a tiny hand-written file") {
  const std::string path = temp_path("aloe_pool_tiny.txt");
  {
    std::ofstream f(path);
    f << "d=2 K=2\n0 0 0\n1 1 1\n0.5 0 0\n2 2 1\n";
    std::ofstream tf(path + ".test");
    tf << "2\n3\n";
  }
  const EmbeddedPool pool = ingest(path, PoolFormat::kDelimitedText);
  CHECK(pool.size() == 4);
  CHECK(pool.dim() == 2);
  CHECK(pool.num_classes == 2);
  CHECK(pool.labels == std::vector<int>{0, 1, 0, 1});
  CHECK(pool.test_ids == std::vector<int>{2, 3});
  CHECK(pool.train_ids == std::vector<int>{0, 1});
}

TEST_CASE("text ingest rejects an out-of-range label naming the row") {
  const std::string path = temp_path("aloe_pool_badlabel.txt");
  {
    std::ofstream f(path);
    f << "d=2 K=3\n0 0 0\n1 1 7\n";
    std::ofstream tf(path + ".test");
    tf << "0\n";
  }
  try {
    ingest(path, PoolFormat::kDelimitedText);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}

TEST_CASE("init_label degenerate splits") {
  LongTailSpec spec;
  spec.n_classes = 4;
  spec.n0 = 15;
  spec.alpha = 0.4;
  spec.dim = 2;
  spec.separation = 3.0;
  spec.seed = 11;
  const EmbeddedPool pool = synth_longtail(spec);

  SUBCASE("k1=1 takes everything from the single largest class") {
    const RoundState state = init_label(pool, 1, 5, 2);
    const auto counts = class_counts(state, pool);
    CHECK(counts[0] == 5);
    for (int c = 1; c < 4; ++c) CHECK(counts[c] == 0);
  }
  SUBCASE("k1=b gives exactly one example per selected class") {
    const RoundState state = init_label(pool, 4, 4, 2);
    const auto counts = class_counts(state, pool);
    for (int c = 0; c < 4; ++c) CHECK(counts[c] == 1);
  }
  SUBCASE("quota larger than the class errors") {
    CHECK_THROWS_AS(init_label(pool, 1, 1000, 2), Error);
  }
}

TEST_CASE("oracle_label trivial transitions") {
  LongTailSpec spec;
  spec.n_classes = 4;
  spec.n0 = 10;
  spec.alpha = 0.5;
  spec.dim = 2;
  spec.separation = 3.0;
  spec.seed = 13;
  const EmbeddedPool pool = synth_longtail(spec);
  const RoundState s1 = init_label(pool, 2, 6, 4);

  SUBCASE("empty query changes only t") {
    const RoundState s2 = oracle_label(pool, s1, {});
    CHECK(s2.t == s1.t + 1);
    CHECK(s2.labeled_ids == s1.labeled_ids);
    CHECK(s2.unlabeled_ids == s1.unlabeled_ids);
    CHECK(s2.known_classes == s1.known_classes);
  }
  SUBCASE("an unseen class grows known_classes") {
    int pick = -1;
    for (int id : s1.unlabeled_ids) {
      if (!s1.known_classes.count(pool.labels[id])) {
        pick = id;
        break;
      }
    }
    REQUIRE(pick >= 0);
    const RoundState s2 = oracle_label(pool, s1, {pick});
    CHECK(s2.known_classes.size() >= s1.known_classes.size() + 1);
  }
  SUBCASE("labeling a labeled id is rejected") {
    CHECK_THROWS_AS(oracle_label(pool, s1, {s1.labeled_ids[0]}), Error);
  }
  SUBCASE("duplicate query ids are rejected") {
    const int id = s1.unlabeled_ids[0];
    CHECK_THROWS_AS(oracle_label(pool, s1, {id, id}), Error);
  }
}

TEST_CASE("class_counts sums to the labeled size") {
  LongTailSpec spec;
  spec.n_classes = 5;
  spec.n0 = 10;
  spec.alpha = 0.5;
  spec.dim = 2;
  spec.separation = 3.0;
  spec.seed = 17;
  const EmbeddedPool pool = synth_longtail(spec);
  RoundState state = init_label(pool, 3, 9, 8);
  auto counts = class_counts(state, pool);
  int nonzero = 0, total = 0;
  for (int c : counts) {
    total += c;
    if (c > 0) nonzero++;
  }
  CHECK(nonzero == 3);
  CHECK(total == 9);

  state = oracle_label(pool, state, state.unlabeled_ids);
  counts = class_counts(state, pool);
  std::vector<int> train_count(pool.num_classes, 0);
  for (int id : pool.train_ids) train_count[pool.labels[id]]++;
  CHECK(counts == train_count);
}

}  // TEST_SUITE("unit")

TEST_SUITE("invariant") {

TEST_CASE("long-tail sizes are monotonically nonincreasing") {
  Rng rng(100);
  for (int trial = 0; trial < 20; ++trial) {
    LongTailSpec spec;
    spec.n_classes = 2 + static_cast<int>(rng.below(60));
    spec.n0 = 1 + static_cast<int>(rng.below(400));
    spec.alpha = 0.01 + 0.99 * rng.uniform01();
    int prev = longtail_class_size(spec, 0);
    for (int i = 1; i < spec.n_classes; ++i) {
      const int cur = longtail_class_size(spec, i);
      CHECK(cur <= prev);
      CHECK(cur >= 1);
      prev = cur;
    }
  }
}

TEST_CASE("labeled and unlabeled ids partition train_ids at every step") {
  LongTailSpec spec;
  spec.n_classes = 8;
  spec.n0 = 15;
  spec.alpha = 0.3;
  spec.dim = 3;
  spec.separation = 4.0;
  spec.seed = 23;
  const EmbeddedPool pool = synth_longtail(spec);
  RoundState state = init_label(pool, 3, 6, 9);

  Rng rng(42);
  const auto check_partition = [&](const RoundState& s) {
    std::vector<int> all = s.labeled_ids;
    all.insert(all.end(), s.unlabeled_ids.begin(), s.unlabeled_ids.end());
    std::sort(all.begin(), all.end());
    CHECK(all == pool.train_ids);
  };
  check_partition(state);
  while (!state.unlabeled_ids.empty()) {
    const std::size_t take =
        std::min<std::size_t>(1 + rng.below(4), state.unlabeled_ids.size());
    const auto picks =
        rng.sample_without_replacement(state.unlabeled_ids.size(), take);
    std::vector<int> query;
    for (int p : picks) query.push_back(state.unlabeled_ids[p]);
    state = oracle_label(pool, state, query);
    check_partition(state);
  }
}

TEST_CASE("synthesis is deterministic") {
  LongTailSpec spec;
  spec.n_classes = 7;
  spec.n0 = 25;
  spec.alpha = 0.2;
  spec.dim = 5;
  spec.separation = 6.0;
  spec.seed = 31;
  const EmbeddedPool a = synth_longtail(spec);
  const EmbeddedPool b = synth_longtail(spec);
  CHECK(a.embeddings == b.embeddings);
  CHECK(a.labels == b.labels);
  CHECK(a.test_ids == b.test_ids);
  CHECK(a.train_ids == b.train_ids);
}

TEST_CASE("stratified test split covers every class") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    LongTailSpec spec;
    spec.n_classes = 20;
    spec.n0 = 40;
    spec.alpha = 0.02;
    spec.dim = 2;
    spec.separation = 3.0;
    spec.seed = seed;
    const EmbeddedPool pool = synth_longtail(spec);
    std::vector<int> test_count(spec.n_classes, 0);
    for (int id : pool.test_ids) test_count[pool.labels[id]]++;
    CHECK(*std::min_element(test_count.begin(), test_count.end()) >= 1);
  }
}

}  // TEST_SUITE("invariant")
