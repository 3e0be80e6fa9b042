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

#ifndef ALOE_CLUSTER_HPP
#define ALOE_CLUSTER_HPP

#include <cstdint>
#include <vector>

#include "aloe/common.hpp"

namespace aloe {

struct ClusterModel {
  int k = 0;
  Mat centroids;                // k x d
  std::vector<int> assignment;  // per point, in [0, k)
  double objective = 0.0;       // WCSS for k-means family, LL for GMM
};

/// k-means++ seeding followed by Lloyd iterations. k is clamped to the point
/// count; empty clusters are repaired by moving in the point farthest from
/// its centroid. Deterministic given seed.
ClusterModel kmeans(const Mat& points, int k, std::uint64_t seed,
                    int max_iter = 100, double tol = 1e-6);

/// Mini-batch k-means with per-centroid counts as step sizes and a final
/// full-pass assignment. batch is clamped to the point count, in which case
/// updates are full-batch.
ClusterModel minibatch_kmeans(const Mat& points, int k, std::uint64_t seed,
                              int batch = 256, int max_iter = 100);

/// Diagonal-covariance Gaussian mixture EM initialized from a k-means run;
/// hard assignment by maximum responsibility. Log-likelihood is
/// nondecreasing per iteration.
ClusterModel gmm_em(const Mat& points, int k, std::uint64_t seed,
                    int max_iter = 100, double tol = 1e-6, double reg = 1e-6);

/// Greedy farthest-first (k-center) selection. seed_centers are indices into
/// points that count as already chosen; with no seeds the first pick is
/// index 0. Ties break to the lower index. Returns the `budget` selected
/// indices in pick order.
std::vector<int> kcenter_greedy(const Mat& points, int budget,
                                const std::vector<int>& seed_centers);

}  // namespace aloe

#endif  // ALOE_CLUSTER_HPP
