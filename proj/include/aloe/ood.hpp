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

#ifndef ALOE_OOD_HPP
#define ALOE_OOD_HPP

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "aloe/common.hpp"
#include "aloe/model.hpp"
#include "aloe/pool.hpp"

namespace aloe {

// All scores share one orientation: higher means more likely OOD.

enum class ScoreKind { kEnergy, kMargin, kGradNorm, kMahalanobis, kGradProj };

ScoreKind score_kind_from_name(const std::string& name);
std::string score_kind_name(ScoreKind kind);

/// Per-example OOD scores for the unlabeled pool, indexed in
/// state.unlabeled_ids order, with the 95%-TPR threshold tau fit on the
/// labeled scores. An example is flagged OOD iff its score exceeds tau.
struct ScoreSheet {
  ScoreKind kind = ScoreKind::kEnergy;
  std::vector<double> scores;  // unlabeled, in unlabeled_ids order
  double tau = 0.0;
};

/// Per-known-class embedding means and a pooled shared covariance.
struct ClassStats {
  Mat means;        // |K_t| x d, row order = known-class order
  Mat cov;          // d x d regularized covariance (cov + shrinkage * I)
  double shrinkage = 0.0;
};

/// Energy: -logsumexp(logits).
double score_energy(const Posterior& post);

/// Negated top-two probability margin; in [-1, 0].
double score_margin(const Posterior& post);

/// Negated L2 norm of the uniform-target cross-entropy gradient over (W, b).
double score_gradnorm(const LinearHead& head, const Vec& x);

/// Class means and pooled within-class covariance of the labeled embeddings,
/// regularized as cov + shrinkage * I.
ClassStats fit_class_stats(const EmbeddedPool& pool, const RoundState& state,
                           double shrinkage);

/// Default shrinkage: 1e-3 * trace(pooled cov) / d, floored at 1e-9 so a
/// zero-spread labeled set still factorizes.
ClassStats fit_class_stats(const EmbeddedPool& pool, const RoundState& state);

/// Minimum squared Mahalanobis distance to any known-class mean.
double score_mahalanobis(const ClassStats& stats, const Vec& z);

/// |projection| of each centered predicted-label gradient onto the top right
/// singular vector of the centered gradient matrix (power iteration).
std::vector<double> score_gradproj(const LinearHead& head,
                                   const EmbeddedPool& pool,
                                   const std::vector<int>& unlabeled_ids);

/// Nearest-rank 95th percentile: the ceil(0.95*m)-th smallest labeled score.
double fit_threshold(const std::vector<double>& labeled_scores);

/// Scores the whole unlabeled pool with the selected scorer and fits tau on
/// the labeled examples. stats is required iff kind == kMahalanobis.
ScoreSheet score_pool(ScoreKind kind, const LinearHead& head,
                      const std::optional<ClassStats>& stats,
                      const EmbeddedPool& pool, const RoundState& state);

/// Delimited-text export: a tau header line, then (id, score, flagged) rows.
void write_scoresheet(const ScoreSheet& sheet, const RoundState& state,
                      std::ostream& os);
void write_scoresheet(const ScoreSheet& sheet, const RoundState& state,
                      const std::string& path);

}  // namespace aloe

#endif  // ALOE_OOD_HPP
