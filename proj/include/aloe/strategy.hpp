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

#ifndef ALOE_STRATEGY_HPP
#define ALOE_STRATEGY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "aloe/cluster.hpp"
#include "aloe/model.hpp"
#include "aloe/ood.hpp"
#include "aloe/pool.hpp"

namespace aloe {

enum class ClusterKind { kKMeans, kMiniBatchKMeans, kGmm, kKCenter };

ClusterKind cluster_kind_from_name(const std::string& name);
std::string cluster_kind_name(ClusterKind kind);

struct QueryDiagnostics {
  int cluster = -1;          // -1 when the strategy does not cluster
  double score = 0.0;        // OOD / strategy score of the pick
  double cluster_ratio = 0.0;
};

struct QueryBatch {
  std::vector<int> ids;  // distinct unlabeled ids, |ids| = min(B, |U_t|)
  std::vector<QueryDiagnostics> diagnostics;  // aligned with ids
};

/// Per-cluster OOD summary used for ranking: size, flagged count,
/// r_OOD = flagged/size, and mean score.
struct ClusterOodSummary {
  std::vector<int> size;
  std::vector<int> flagged;
  std::vector<double> ratio;
  std::vector<double> mean_score;
};

ClusterOodSummary summarize_clusters(const ScoreSheet& sheet,
                                     const std::vector<int>& assignment,
                                     int k);

struct AloeOptions {
  ScoreKind ood = ScoreKind::kGradNorm;
  ClusterKind cluster = ClusterKind::kKMeans;
  int multiplier = 2;
  // Concatenate head logits to the embeddings fed to clustering. Off by
  // default; approximates per-round feature drift.
  bool append_logits = false;
};

/// ALOE: cluster the unlabeled pool into multiplier * max(B, |K_t|) clusters,
/// rank clusters by OOD ratio (ties: mean score, then cluster index), then
/// take the highest-scored member of each of the top-B clusters. When fewer
/// nonempty clusters exist, continues round-robin with each cluster's
/// next-highest member.
QueryBatch aloe_select(const EmbeddedPool& pool, const RoundState& state,
                       const LinearHead& head, int b, const AloeOptions& opts,
                       std::uint64_t seed);

/// Reverse ALOE: threshold first (candidates with score > tau), then cluster
/// the candidates into B groups and take each group's highest-scored member.
/// Shortfall is filled with the highest-scored non-candidates.
QueryBatch reverse_aloe_select(const EmbeddedPool& pool,
                               const RoundState& state, const LinearHead& head,
                               int b, const AloeOptions& opts,
                               std::uint64_t seed);

QueryBatch random_select(const RoundState& state, int b, std::uint64_t seed);

/// Smallest raw margin p_max - p_second first (ties to the lower id).
QueryBatch margin_select(const EmbeddedPool& pool, const RoundState& state,
                         const LinearHead& head, int b);

/// Greedy k-center over unlabeled embeddings, seeded with the labeled set.
QueryBatch coreset_select(const EmbeddedPool& pool, const RoundState& state,
                          int b);

/// BADGE: D^2-weighted sequential (k-means++ style) sampling over
/// hypothetical-label gradient embeddings; first pick uniform.
QueryBatch badge_select(const EmbeddedPool& pool, const RoundState& state,
                        const LinearHead& head, int b, std::uint64_t seed);

/// TypiClust: k-means over all train embeddings into min(|L|+B, |train|)
/// clusters; from the largest uncovered clusters pick the unlabeled point of
/// highest typicality (inverse mean knn distance within the cluster).
QueryBatch typiclust_select(const EmbeddedPool& pool, const RoundState& state,
                            int b, int knn, std::uint64_t seed);

}  // namespace aloe

#endif  // ALOE_STRATEGY_HPP
