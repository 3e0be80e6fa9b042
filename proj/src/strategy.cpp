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

#include "aloe/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "aloe/rng.hpp"

namespace aloe {

namespace {

void check_selectable(const RoundState& state, int b) {
  require(b >= 1, "select: batch size must be >= 1");
  require(!state.unlabeled_ids.empty(), "select: unlabeled pool is empty");
}

int clamp_batch(const RoundState& state, int b) {
  return std::min<int>(b, static_cast<int>(state.unlabeled_ids.size()));
}

ScoreSheet make_scoresheet(ScoreKind kind, const LinearHead& head,
                           const EmbeddedPool& pool, const RoundState& state) {
  std::optional<ClassStats> stats;
  if (kind == ScoreKind::kMahalanobis) {
    stats = fit_class_stats(pool, state);
  }
  return score_pool(kind, head, stats, pool, state);
}

Mat cluster_features(const EmbeddedPool& pool, const LinearHead& head,
                     const std::vector<int>& ids, bool append_logits) {
  const int d = pool.dim();
  const int extra = append_logits ? head.num_outputs() : 0;
  Mat features(ids.size(), d + extra);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    features.block(i, 0, 1, d) = pool.embeddings.row(ids[i]);
    if (append_logits) {
      const Posterior post =
          predict(head, pool.embeddings.row(ids[i]).transpose());
      features.block(i, d, 1, extra) = post.logits.transpose();
    }
  }
  return features;
}

/// Partition `points` into k groups with the configured method. k-center is
/// exposed as a partitioner through nearest-chosen-center assignment.
std::vector<int> partition_points(const Mat& points, int k, ClusterKind kind,
                                  std::uint64_t seed) {
  switch (kind) {
    case ClusterKind::kKMeans:
      return kmeans(points, k, seed).assignment;
    case ClusterKind::kMiniBatchKMeans:
      return minibatch_kmeans(points, k, seed).assignment;
    case ClusterKind::kGmm:
      return gmm_em(points, k, seed).assignment;
    case ClusterKind::kKCenter: {
      const int m = static_cast<int>(points.rows());
      const int kk = std::min(k, m);
      const auto centers = kcenter_greedy(points, kk, {});
      std::vector<int> assignment(m);
      for (int i = 0; i < m; ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int c = 0; c < kk; ++c) {
          const double dd =
              (points.row(i) - points.row(centers[c])).squaredNorm();
          if (dd < best_d) {
            best_d = dd;
            best = c;
          }
        }
        assignment[i] = best;
      }
      return assignment;
    }
  }
  throw Error("unknown cluster kind");
}

/// Round-robin over clusters ranked by (ratio desc, mean score desc, index
/// asc), taking each cluster's next-highest-scored member, until `want` ids.
QueryBatch pick_from_ranked_clusters(const std::vector<int>& ids,
                                     const std::vector<double>& scores,
                                     const std::vector<int>& assignment, int k,
                                     const ClusterOodSummary& summary,
                                     int want) {
  std::vector<int> rank(k);
  std::iota(rank.begin(), rank.end(), 0);
  std::sort(rank.begin(), rank.end(), [&](int a, int b) {
    if (summary.ratio[a] != summary.ratio[b]) {
      return summary.ratio[a] > summary.ratio[b];
    }
    if (summary.mean_score[a] != summary.mean_score[b]) {
      return summary.mean_score[a] > summary.mean_score[b];
    }
    return a < b;
  });

  // Per-cluster member positions, best score first (ties to lower id).
  std::vector<std::vector<int>> members(k);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    members[assignment[i]].push_back(static_cast<int>(i));
  }
  for (auto& mem : members) {
    std::sort(mem.begin(), mem.end(), [&](int a, int b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return ids[a] < ids[b];
    });
  }

  QueryBatch batch;
  std::vector<std::size_t> cursor(k, 0);
  while (static_cast<int>(batch.ids.size()) < want) {
    bool advanced = false;
    for (int c : rank) {
      if (static_cast<int>(batch.ids.size()) >= want) break;
      if (cursor[c] >= members[c].size()) continue;
      const int pos = members[c][cursor[c]++];
      batch.ids.push_back(ids[pos]);
      batch.diagnostics.push_back(
          {assignment[pos], scores[pos], summary.ratio[assignment[pos]]});
      advanced = true;
    }
    if (!advanced) break;
  }
  return batch;
}

}  // namespace

ClusterKind cluster_kind_from_name(const std::string& name) {
  if (name == "kmeans") return ClusterKind::kKMeans;
  if (name == "minibatch_kmeans") return ClusterKind::kMiniBatchKMeans;
  if (name == "gmm") return ClusterKind::kGmm;
  if (name == "kcenter") return ClusterKind::kKCenter;
  throw Error("unknown cluster kind: " + name);
}

std::string cluster_kind_name(ClusterKind kind) {
  switch (kind) {
    case ClusterKind::kKMeans: return "kmeans";
    case ClusterKind::kMiniBatchKMeans: return "minibatch_kmeans";
    case ClusterKind::kGmm: return "gmm";
    case ClusterKind::kKCenter: return "kcenter";
  }
  throw Error("unknown cluster kind");
}

ClusterOodSummary summarize_clusters(const ScoreSheet& sheet,
                                     const std::vector<int>& assignment,
                                     int k) {
  ClusterOodSummary summary;
  summary.size.assign(k, 0);
  summary.flagged.assign(k, 0);
  summary.ratio.assign(k, 0.0);
  summary.mean_score.assign(k, 0.0);
  for (std::size_t i = 0; i < sheet.scores.size(); ++i) {
    const int c = assignment[i];
    summary.size[c]++;
    summary.mean_score[c] += sheet.scores[i];
    if (sheet.scores[i] > sheet.tau) summary.flagged[c]++;
  }
  for (int c = 0; c < k; ++c) {
    if (summary.size[c] > 0) {
      summary.ratio[c] =
          static_cast<double>(summary.flagged[c]) / summary.size[c];
      summary.mean_score[c] /= summary.size[c];
    } else {
      summary.mean_score[c] = -std::numeric_limits<double>::infinity();
    }
  }
  return summary;
}

QueryBatch aloe_select(const EmbeddedPool& pool, const RoundState& state,
                       const LinearHead& head, int b, const AloeOptions& opts,
                       std::uint64_t seed) {
  check_selectable(state, b);
  require(opts.multiplier >= 1, "aloe: multiplier must be >= 1");
  const int want = clamp_batch(state, b);
  const int u = static_cast<int>(state.unlabeled_ids.size());
  const int k = std::min(
      u, opts.multiplier *
             std::max(b, static_cast<int>(state.known_classes.size())));

  const Mat features =
      cluster_features(pool, head, state.unlabeled_ids, opts.append_logits);
  const auto assignment = partition_points(features, k, opts.cluster, seed);
  const ScoreSheet sheet = make_scoresheet(opts.ood, head, pool, state);
  const ClusterOodSummary summary = summarize_clusters(sheet, assignment, k);
  return pick_from_ranked_clusters(state.unlabeled_ids, sheet.scores,
                                   assignment, k, summary, want);
}

QueryBatch reverse_aloe_select(const EmbeddedPool& pool,
                               const RoundState& state, const LinearHead& head,
                               int b, const AloeOptions& opts,
                               std::uint64_t seed) {
  check_selectable(state, b);
  const int want = clamp_batch(state, b);
  const ScoreSheet sheet = make_scoresheet(opts.ood, head, pool, state);

  std::vector<int> cand_pos;
  for (std::size_t i = 0; i < sheet.scores.size(); ++i) {
    if (sheet.scores[i] > sheet.tau) cand_pos.push_back(static_cast<int>(i));
  }

  if (static_cast<int>(cand_pos.size()) >= want) {
    std::vector<int> cand_ids(cand_pos.size());
    std::vector<double> cand_scores(cand_pos.size());
    for (std::size_t i = 0; i < cand_pos.size(); ++i) {
      cand_ids[i] = state.unlabeled_ids[cand_pos[i]];
      cand_scores[i] = sheet.scores[cand_pos[i]];
    }
    const Mat features =
        cluster_features(pool, head, cand_ids, opts.append_logits);
    const auto assignment =
        partition_points(features, want, opts.cluster, seed);
    // All candidates are flagged, so every cluster ratio is 1; the ranking
    // degenerates to mean score / index, which only orders the picks.
    ScoreSheet cand_sheet;
    cand_sheet.kind = sheet.kind;
    cand_sheet.scores = cand_scores;
    cand_sheet.tau = sheet.tau;
    const ClusterOodSummary summary =
        summarize_clusters(cand_sheet, assignment, want);
    return pick_from_ranked_clusters(cand_ids, cand_scores, assignment, want,
                                     summary, want);
  }

  // Shortfall: all candidates, then the highest-scored non-candidates.
  QueryBatch batch;
  for (int pos : cand_pos) {
    batch.ids.push_back(state.unlabeled_ids[pos]);
    batch.diagnostics.push_back({-1, sheet.scores[pos], 1.0});
  }
  std::vector<int> rest;
  for (std::size_t i = 0; i < sheet.scores.size(); ++i) {
    if (sheet.scores[i] <= sheet.tau) rest.push_back(static_cast<int>(i));
  }
  std::sort(rest.begin(), rest.end(), [&](int a, int c) {
    if (sheet.scores[a] != sheet.scores[c]) {
      return sheet.scores[a] > sheet.scores[c];
    }
    return state.unlabeled_ids[a] < state.unlabeled_ids[c];
  });
  for (int pos : rest) {
    if (static_cast<int>(batch.ids.size()) >= want) break;
    batch.ids.push_back(state.unlabeled_ids[pos]);
    batch.diagnostics.push_back({-1, sheet.scores[pos], 0.0});
  }
  return batch;
}

QueryBatch random_select(const RoundState& state, int b, std::uint64_t seed) {
  check_selectable(state, b);
  const int want = clamp_batch(state, b);
  Rng rng(mix_seed(seed, 0x4d));
  const auto picks =
      rng.sample_without_replacement(state.unlabeled_ids.size(), want);
  QueryBatch batch;
  for (int p : picks) {
    batch.ids.push_back(state.unlabeled_ids[p]);
    batch.diagnostics.push_back({});
  }
  return batch;
}

QueryBatch margin_select(const EmbeddedPool& pool, const RoundState& state,
                         const LinearHead& head, int b) {
  check_selectable(state, b);
  const int want = clamp_batch(state, b);
  const int u = static_cast<int>(state.unlabeled_ids.size());
  std::vector<double> raw(u);
  for (int i = 0; i < u; ++i) {
    // Raw margin p_max - p_second; 1 for a single-output head.
    raw[i] = -score_margin(
        predict(head, pool.embeddings.row(state.unlabeled_ids[i]).transpose()));
  }
  std::vector<int> order(u);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int c) {
    if (raw[a] != raw[c]) return raw[a] < raw[c];
    return state.unlabeled_ids[a] < state.unlabeled_ids[c];
  });
  QueryBatch batch;
  for (int i = 0; i < want; ++i) {
    batch.ids.push_back(state.unlabeled_ids[order[i]]);
    batch.diagnostics.push_back({-1, raw[order[i]], 0.0});
  }
  return batch;
}

QueryBatch coreset_select(const EmbeddedPool& pool, const RoundState& state,
                          int b) {
  check_selectable(state, b);
  const int want = clamp_batch(state, b);
  const int l = static_cast<int>(state.labeled_ids.size());
  const int u = static_cast<int>(state.unlabeled_ids.size());
  Mat points(l + u, pool.dim());
  std::vector<int> seeds(l);
  for (int i = 0; i < l; ++i) {
    points.row(i) = pool.embeddings.row(state.labeled_ids[i]);
    seeds[i] = i;
  }
  for (int i = 0; i < u; ++i) {
    points.row(l + i) = pool.embeddings.row(state.unlabeled_ids[i]);
  }
  const auto selected = kcenter_greedy(points, want, seeds);
  QueryBatch batch;
  for (int s : selected) {
    batch.ids.push_back(state.unlabeled_ids[s - l]);
    batch.diagnostics.push_back({});
  }
  return batch;
}

QueryBatch badge_select(const EmbeddedPool& pool, const RoundState& state,
                        const LinearHead& head, int b, std::uint64_t seed) {
  check_selectable(state, b);
  const int want = clamp_batch(state, b);
  const int u = static_cast<int>(state.unlabeled_ids.size());
  const int p = gradient_length(head);
  Mat grads(u, p);
  for (int i = 0; i < u; ++i) {
    grads.row(i) =
        head_gradient(head, pool.embeddings.row(state.unlabeled_ids[i]).transpose(),
                      GradTarget::kPredicted);
  }

  Rng rng(mix_seed(seed, 0x8a));
  std::vector<char> picked(u, 0);
  std::vector<double> d2(u, 0.0);
  QueryBatch batch;
  for (int pick = 0; pick < want; ++pick) {
    int chosen;
    if (pick == 0) {
      chosen = static_cast<int>(rng.below(u));
    } else {
      double total = 0.0;
      for (int i = 0; i < u; ++i) total += d2[i];
      if (total > 0.0) {
        double target = rng.uniform01() * total;
        chosen = -1;
        for (int i = 0; i < u; ++i) {
          if (d2[i] <= 0.0) continue;
          target -= d2[i];
          chosen = i;
          if (target < 0.0) break;
        }
      } else {
        // All gradients coincide with the chosen set: uniform over the rest.
        int remaining = u - pick;
        int which = static_cast<int>(rng.below(remaining));
        chosen = -1;
        for (int i = 0; i < u; ++i) {
          if (picked[i]) continue;
          if (which-- == 0) {
            chosen = i;
            break;
          }
        }
      }
    }
    picked[chosen] = 1;
    batch.ids.push_back(state.unlabeled_ids[chosen]);
    batch.diagnostics.push_back({});
    for (int i = 0; i < u; ++i) {
      const double dd = (grads.row(i) - grads.row(chosen)).squaredNorm();
      if (pick == 0 || dd < d2[i]) d2[i] = dd;
    }
  }
  return batch;
}

QueryBatch typiclust_select(const EmbeddedPool& pool, const RoundState& state,
                            int b, int knn, std::uint64_t seed) {
  check_selectable(state, b);
  require(knn >= 1, "typiclust: knn must be >= 1");
  const int want = clamp_batch(state, b);

  const std::vector<int>& train = pool.train_ids;
  const int m = static_cast<int>(train.size());
  Mat points(m, pool.dim());
  std::vector<int> pos_of(pool.size(), -1);
  for (int i = 0; i < m; ++i) {
    points.row(i) = pool.embeddings.row(train[i]);
    pos_of[train[i]] = i;
  }
  std::vector<char> is_labeled(m, 0);
  for (int id : state.labeled_ids) is_labeled[pos_of[id]] = 1;

  const int k =
      std::min(m, static_cast<int>(state.labeled_ids.size()) + b);
  const ClusterModel clusters = kmeans(points, k, mix_seed(seed, 0x9b));

  std::vector<std::vector<int>> members(clusters.k);
  std::vector<int> labeled_count(clusters.k, 0);
  for (int i = 0; i < m; ++i) {
    members[clusters.assignment[i]].push_back(i);
    if (is_labeled[i]) labeled_count[clusters.assignment[i]]++;
  }
  std::vector<int> rank(clusters.k);
  std::iota(rank.begin(), rank.end(), 0);
  std::sort(rank.begin(), rank.end(), [&](int a, int c) {
    if (labeled_count[a] != labeled_count[c]) {
      return labeled_count[a] < labeled_count[c];
    }
    if (members[a].size() != members[c].size()) {
      return members[a].size() > members[c].size();
    }
    return a < c;
  });

  const auto typicality = [&](int i, const std::vector<int>& cluster) {
    if (cluster.size() <= 1) return 0.0;
    const int kk = std::min<int>(knn, static_cast<int>(cluster.size()) - 1);
    std::vector<double> dist;
    dist.reserve(cluster.size() - 1);
    for (int j : cluster) {
      if (j == i) continue;
      dist.push_back((points.row(i) - points.row(j)).norm());
    }
    std::nth_element(dist.begin(), dist.begin() + (kk - 1), dist.end());
    std::sort(dist.begin(), dist.begin() + kk);
    double mean = 0.0;
    for (int j = 0; j < kk; ++j) mean += dist[j];
    mean /= kk;
    return mean > 0.0 ? 1.0 / mean : std::numeric_limits<double>::infinity();
  };

  QueryBatch batch;
  std::vector<char> used(m, 0);
  for (int c : rank) {
    if (static_cast<int>(batch.ids.size()) >= want) break;
    int best = -1;
    double best_t = -1.0;
    for (int i : members[c]) {
      if (is_labeled[i] || used[i]) continue;
      const double t = typicality(i, members[c]);
      if (t > best_t) {
        best_t = t;
        best = i;
      }
    }
    if (best < 0) continue;  // no unlabeled member
    used[best] = 1;
    batch.ids.push_back(train[best]);
    batch.diagnostics.push_back({c, best_t, 0.0});
  }
  // Shortfall only happens when every remaining cluster is fully picked;
  // top up with the lowest-index unpicked unlabeled ids.
  for (int id : state.unlabeled_ids) {
    if (static_cast<int>(batch.ids.size()) >= want) break;
    if (used[pos_of[id]]) continue;
    used[pos_of[id]] = 1;
    batch.ids.push_back(id);
    batch.diagnostics.push_back({});
  }
  return batch;
}

}  // namespace aloe
