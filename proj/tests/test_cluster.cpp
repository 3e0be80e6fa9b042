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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "aloe/cluster.hpp"
#include "aloe/rng.hpp"

using namespace aloe;

namespace {

/// Two tight blobs around (-off, 0) and (off, 0); first half is blob 0.
Mat two_blobs(int per_blob, double off, std::uint64_t seed) {
  Rng rng(seed);
  Mat points(2 * per_blob, 2);
  for (int i = 0; i < 2 * per_blob; ++i) {
    const double cx = i < per_blob ? -off : off;
    points(i, 0) = cx + 0.1 * rng.normal();
    points(i, 1) = 0.1 * rng.normal();
  }
  return points;
}

bool partitions_blobs(const std::vector<int>& assignment, int per_blob) {
  const int first = assignment[0];
  const int second = assignment[per_blob];
  if (first == second) return false;
  for (int i = 0; i < per_blob; ++i) {
    if (assignment[i] != first) return false;
  }
  for (int i = per_blob; i < 2 * per_blob; ++i) {
    if (assignment[i] != second) return false;
  }
  return true;
}

Mat random_points(Rng& rng, int m, int d, double scale = 1.0) {
  Mat points(m, d);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) points(i, j) = scale * rng.normal();
  }
  return points;
}

double wcss(const Mat& points, const ClusterModel& model) {
  double total = 0.0;
  for (int i = 0; i < points.rows(); ++i) {
    total += (points.row(i) - model.centroids.row(model.assignment[i]))
                 .squaredNorm();
  }
  return total;
}

double covering_radius(const Mat& points, const std::vector<int>& centers) {
  double radius = 0.0;
  for (int i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int c : centers) {
      best = std::min(best, (points.row(i) - points.row(c)).norm());
    }
    radius = std::max(radius, best);
  }
  return radius;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("k-means recovers two well-separated blobs") {
  const Mat points = two_blobs(20, 10.0, 1);
  const ClusterModel model = kmeans(points, 2, 7);
  CHECK(partitions_blobs(model.assignment, 20));
  // Final assignment must equal brute-force nearest-centroid assignment.
  for (int i = 0; i < points.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < model.k; ++c) {
      const double d = (points.row(i) - model.centroids.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    CHECK(model.assignment[i] == best);
  }
}

TEST_CASE("mini-batch k-means recovers the same blob partition") {
  const Mat points = two_blobs(20, 10.0, 2);
  const ClusterModel model = minibatch_kmeans(points, 2, 7, 16);
  CHECK(partitions_blobs(model.assignment, 20));
}

TEST_CASE("GMM hard assignment matches the blob partition") {
  const Mat points = two_blobs(20, 10.0, 3);
  const ClusterModel model = gmm_em(points, 2, 7);
  CHECK(partitions_blobs(model.assignment, 20));
}

TEST_CASE("k-center greedy picks the farthest point on a line") {
  Mat points(3, 1);
  points << 0.0, 1.0, 10.0;
  const auto picks = kcenter_greedy(points, 1, {0});
  REQUIRE(picks.size() == 1);
  CHECK(picks[0] == 2);
}

}  // TEST_SUITE("oracle")

TEST_SUITE("unit") {

TEST_CASE("k-means with k = M isolates every point") {
  Rng rng(5);
  const Mat points = random_points(rng, 8, 3);
  const ClusterModel model = kmeans(points, 8, 11);
  std::set<int> used(model.assignment.begin(), model.assignment.end());
  CHECK(used.size() == 8);
  CHECK(model.objective == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("k-means with k = 1 returns the global mean") {
  Rng rng(6);
  const Mat points = random_points(rng, 12, 2);
  const ClusterModel model = kmeans(points, 1, 11);
  const Eigen::RowVectorXd mean = points.colwise().mean();
  CHECK((model.centroids.row(0) - mean).norm() < 1e-12);
  double scatter = 0.0;
  for (int i = 0; i < 12; ++i) scatter += (points.row(i) - mean).squaredNorm();
  CHECK(model.objective == doctest::Approx(scatter).epsilon(1e-12));
}

TEST_CASE("mini-batch with batch >= M behaves full-batch on blobs") {
  const Mat points = two_blobs(15, 10.0, 4);
  const ClusterModel model = minibatch_kmeans(points, 2, 7, 1000);
  CHECK(partitions_blobs(model.assignment, 15));
}

TEST_CASE("GMM with k = 1 matches the sample mean and variances") {
  Rng rng(7);
  const Mat points = random_points(rng, 30, 2);
  const double reg = 1e-6;
  const ClusterModel model = gmm_em(points, 1, 3, 100, 1e-6, reg);
  const Eigen::RowVectorXd mean = points.colwise().mean();
  CHECK((model.centroids.row(0) - mean).norm() < 1e-9);
}

TEST_CASE("k-center exhausts the pool when budget covers everything") {
  Rng rng(8);
  const Mat points = random_points(rng, 10, 2);
  const auto picks = kcenter_greedy(points, 10, {});
  std::set<int> chosen(picks.begin(), picks.end());
  CHECK(chosen.size() == 10);
  CHECK(picks[0] == 0);  // no seeds: first pick is index 0
}

TEST_CASE("k-center never selects a duplicate of a chosen center") {
  Mat points(4, 1);
  points << 0.0, 0.0, 5.0, 9.0;
  const auto picks = kcenter_greedy(points, 2, {0});
  // Index 1 duplicates the seed; the two picks must be the distinct points.
  CHECK(std::set<int>(picks.begin(), picks.end()) == std::set<int>{2, 3});
}

TEST_CASE("k-center rejects a budget beyond the unchosen points") {
  Mat points(3, 1);
  points << 0.0, 1.0, 2.0;
  CHECK_THROWS_AS(kcenter_greedy(points, 3, {0}), Error);
}

}  // TEST_SUITE("unit")

TEST_SUITE("invariant") {

TEST_CASE("k-means objective is nonincreasing and converged on 50 fixtures") {
  Rng rng(900);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 10 + static_cast<int>(rng.below(30));
    const int d = 1 + static_cast<int>(rng.below(4));
    const int k = 1 + static_cast<int>(rng.below(5));
    const Mat points = random_points(rng, m, d, 2.0);
    const std::uint64_t seed = rng.next();

    // The iteration trajectory is deterministic given the seed, so capping
    // max_iter observes successive Lloyd objectives.
    double prev = std::numeric_limits<double>::infinity();
    for (int iters = 1; iters <= 6; ++iters) {
      const ClusterModel model = kmeans(points, k, seed, iters);
      CHECK(model.objective <= prev + 1e-9);
      prev = model.objective;
    }

    const ClusterModel model = kmeans(points, k, seed);
    CHECK(model.objective == doctest::Approx(wcss(points, model)).epsilon(1e-9));
    // Converged: assignment is exactly nearest-centroid.
    for (int i = 0; i < m; ++i) {
      double assigned =
          (points.row(i) - model.centroids.row(model.assignment[i]))
              .squaredNorm();
      for (int c = 0; c < model.k; ++c) {
        CHECK(assigned <=
              (points.row(i) - model.centroids.row(c)).squaredNorm() + 1e-9);
      }
    }
    // Empty-cluster repair: every cluster inhabited when k <= M.
    std::vector<int> count(model.k, 0);
    for (int a : model.assignment) count[a]++;
    for (int c = 0; c < model.k; ++c) CHECK(count[c] > 0);
  }
}

TEST_CASE("EM log-likelihood is nondecreasing") {
  Rng rng(901);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 20 + static_cast<int>(rng.below(20));
    const Mat points = random_points(rng, m, 2, 3.0);
    const std::uint64_t seed = rng.next();
    double prev = -std::numeric_limits<double>::infinity();
    for (int iters = 1; iters <= 6; ++iters) {
      const ClusterModel model = gmm_em(points, 3, seed, iters);
      CHECK(model.objective >= prev - 1e-7);
      prev = model.objective;
    }
  }
}

TEST_CASE("k-center covering radius shrinks with budget") {
  Rng rng(902);
  const Mat points = random_points(rng, 40, 3, 2.0);
  double prev = std::numeric_limits<double>::infinity();
  for (int budget = 1; budget <= 10; ++budget) {
    const auto picks = kcenter_greedy(points, budget, {});
    const double radius = covering_radius(points, picks);
    CHECK(radius <= prev + 1e-12);
    prev = radius;
  }
}

TEST_CASE("all four methods are deterministic given seed") {
  Rng rng(903);
  const Mat points = random_points(rng, 25, 3, 2.0);
  const ClusterModel k1 = kmeans(points, 4, 17);
  const ClusterModel k2 = kmeans(points, 4, 17);
  CHECK(k1.assignment == k2.assignment);
  CHECK(k1.centroids == k2.centroids);
  const ClusterModel m1 = minibatch_kmeans(points, 4, 17, 8);
  const ClusterModel m2 = minibatch_kmeans(points, 4, 17, 8);
  CHECK(m1.assignment == m2.assignment);
  CHECK(m1.centroids == m2.centroids);
  const ClusterModel g1 = gmm_em(points, 3, 17);
  const ClusterModel g2 = gmm_em(points, 3, 17);
  CHECK(g1.assignment == g2.assignment);
  CHECK(g1.centroids == g2.centroids);
  CHECK(kcenter_greedy(points, 5, {0}) == kcenter_greedy(points, 5, {0}));
}

}  // TEST_SUITE("invariant")
