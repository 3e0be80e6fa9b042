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

#include "aloe/ood.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <Eigen/Cholesky>

#include "aloe/rng.hpp"

namespace aloe {

ScoreKind score_kind_from_name(const std::string& name) {
  if (name == "energy") return ScoreKind::kEnergy;
  if (name == "margin") return ScoreKind::kMargin;
  if (name == "gradnorm") return ScoreKind::kGradNorm;
  if (name == "mahalanobis") return ScoreKind::kMahalanobis;
  if (name == "gradproj") return ScoreKind::kGradProj;
  throw Error("unknown OOD score kind: " + name);
}

std::string score_kind_name(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kEnergy: return "energy";
    case ScoreKind::kMargin: return "margin";
    case ScoreKind::kGradNorm: return "gradnorm";
    case ScoreKind::kMahalanobis: return "mahalanobis";
    case ScoreKind::kGradProj: return "gradproj";
  }
  throw Error("unknown OOD score kind");
}

double score_energy(const Posterior& post) {
  const double m = post.logits.maxCoeff();
  return -(m + std::log((post.logits.array() - m).exp().sum()));
}

double score_margin(const Posterior& post) {
  const int k = static_cast<int>(post.probs.size());
  if (k == 1) return -1.0;
  double top = -1.0, second = -1.0;
  for (int j = 0; j < k; ++j) {
    const double p = post.probs[j];
    if (p > top) {
      second = top;
      top = p;
    } else if (p > second) {
      second = p;
    }
  }
  return -(top - second);
}

double score_gradnorm(const LinearHead& head, const Vec& x) {
  return -head_gradient(head, x, GradTarget::kUniform).norm();
}

ClassStats fit_class_stats(const EmbeddedPool& pool, const RoundState& state,
                           double shrinkage) {
  require(shrinkage >= 0.0, "fit_class_stats: shrinkage must be >= 0");
  require(!state.known_classes.empty(), "fit_class_stats: no known classes");
  const int d = pool.dim();
  const int kt = static_cast<int>(state.known_classes.size());

  std::vector<int> classes(state.known_classes.begin(),
                           state.known_classes.end());
  std::vector<int> local_of(pool.num_classes, -1);
  for (int j = 0; j < kt; ++j) local_of[classes[j]] = j;

  ClassStats stats;
  stats.shrinkage = shrinkage;
  stats.means = Mat::Zero(kt, d);
  std::vector<int> count(kt, 0);
  for (int id : state.labeled_ids) {
    const int c = local_of[pool.labels[id]];
    stats.means.row(c) += pool.embeddings.row(id);
    count[c]++;
  }
  for (int c = 0; c < kt; ++c) {
    require(count[c] > 0, "fit_class_stats: known class without labels");
    stats.means.row(c) /= count[c];
  }

  Mat cov = Mat::Zero(d, d);
  for (int id : state.labeled_ids) {
    const int c = local_of[pool.labels[id]];
    const Eigen::RowVectorXd centered =
        pool.embeddings.row(id) - stats.means.row(c);
    cov.noalias() += centered.transpose() * centered;
  }
  const int denom =
      std::max(1, static_cast<int>(state.labeled_ids.size()) - kt);
  cov /= denom;
  stats.cov = cov + shrinkage * Mat::Identity(d, d);

  const Eigen::LLT<Mat> llt(stats.cov);
  require(llt.info() == Eigen::Success,
          "fit_class_stats: covariance not positive definite after "
          "regularization");
  return stats;
}

ClassStats fit_class_stats(const EmbeddedPool& pool, const RoundState& state) {
  std::vector<int> classes(state.known_classes.begin(),
                           state.known_classes.end());
  require(!classes.empty(), "fit_class_stats: no known classes");
  std::vector<int> local_of(pool.num_classes, -1);
  std::vector<Eigen::RowVectorXd> means(classes.size());
  std::vector<int> count(classes.size(), 0);
  for (std::size_t j = 0; j < classes.size(); ++j) {
    local_of[classes[j]] = static_cast<int>(j);
    means[j] = Eigen::RowVectorXd::Zero(pool.dim());
  }
  for (int id : state.labeled_ids) {
    const int c = local_of[pool.labels[id]];
    means[c] += pool.embeddings.row(id);
    count[c]++;
  }
  for (std::size_t j = 0; j < classes.size(); ++j) {
    require(count[j] > 0, "fit_class_stats: known class without labels");
    means[j] /= count[j];
  }
  double trace = 0.0;
  for (int id : state.labeled_ids) {
    const int c = local_of[pool.labels[id]];
    trace += (pool.embeddings.row(id) - means[c]).squaredNorm();
  }
  const int denom = std::max(
      1, static_cast<int>(state.labeled_ids.size() - classes.size()));
  trace /= denom;
  const double eps = std::max(1e-3 * trace / pool.dim(), 1e-9);
  return fit_class_stats(pool, state, eps);
}

double score_mahalanobis(const ClassStats& stats, const Vec& z) {
  const Eigen::LLT<Mat> llt(stats.cov);
  require(llt.info() == Eigen::Success,
          "score_mahalanobis: covariance factorization failed");
  double best = std::numeric_limits<double>::infinity();
  for (int c = 0; c < stats.means.rows(); ++c) {
    const Vec diff = z - stats.means.row(c).transpose();
    best = std::min(best, diff.dot(llt.solve(diff)));
  }
  return best;
}

namespace {

/// Top right singular vector of R (rows are centered gradients) by power
/// iteration on the Gram form v <- R^T (R v). Returns a zero vector when R
/// is (numerically) zero. Sign canonicalized: largest-magnitude entry
/// positive.
Vec top_right_singular_vector(const Mat& r, double tol = 1e-8,
                              int max_iter = 1000) {
  const int p = static_cast<int>(r.cols());
  Rng rng(0x5eed);
  Vec v(p);
  for (int j = 0; j < p; ++j) v[j] = rng.normal();
  v.normalize();
  for (int iter = 0; iter < max_iter; ++iter) {
    Vec w = r.transpose() * (r * v);
    const double norm = w.norm();
    if (!(norm > 1e-30)) return Vec::Zero(p);
    w /= norm;
    const double residual = std::min((w - v).norm(), (w + v).norm());
    v = w;
    if (residual < tol) break;
  }
  int arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v[arg] < 0.0) v = -v;
  return v;
}

struct GradProjection {
  Vec mean;  // mean unlabeled gradient
  Vec v;     // top singular direction of the centered gradient matrix
};

GradProjection fit_gradproj(const LinearHead& head, const EmbeddedPool& pool,
                            const std::vector<int>& unlabeled_ids) {
  require(unlabeled_ids.size() >= 2, "gradproj: need >= 2 unlabeled examples");
  const int n = static_cast<int>(unlabeled_ids.size());
  const int p = gradient_length(head);
  Mat grads(n, p);
  for (int i = 0; i < n; ++i) {
    grads.row(i) = head_gradient(head, pool.embeddings.row(unlabeled_ids[i]).transpose(),
                                 GradTarget::kPredicted);
  }
  GradProjection proj;
  proj.mean = grads.colwise().mean();
  grads.rowwise() -= proj.mean.transpose();
  proj.v = top_right_singular_vector(grads);
  return proj;
}

double gradproj_score(const GradProjection& proj, const LinearHead& head,
                      const Vec& x) {
  if (proj.v.isZero(0.0)) return 0.0;
  const Vec g = head_gradient(head, x, GradTarget::kPredicted);
  return std::abs((g - proj.mean).dot(proj.v));
}

}  // namespace

std::vector<double> score_gradproj(const LinearHead& head,
                                   const EmbeddedPool& pool,
                                   const std::vector<int>& unlabeled_ids) {
  const GradProjection proj = fit_gradproj(head, pool, unlabeled_ids);
  std::vector<double> scores(unlabeled_ids.size());
  for (std::size_t i = 0; i < unlabeled_ids.size(); ++i) {
    scores[i] =
        gradproj_score(proj, head, pool.embeddings.row(unlabeled_ids[i]).transpose());
  }
  return scores;
}

double fit_threshold(const std::vector<double>& labeled_scores) {
  require(!labeled_scores.empty(), "fit_threshold: no labeled scores");
  std::vector<double> sorted(labeled_scores);
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const std::size_t rank =
      static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(m)));
  return sorted[rank - 1];
}

ScoreSheet score_pool(ScoreKind kind, const LinearHead& head,
                      const std::optional<ClassStats>& stats,
                      const EmbeddedPool& pool, const RoundState& state) {
  require((kind == ScoreKind::kMahalanobis) == stats.has_value(),
          "score_pool: class stats required iff kind is mahalanobis");
  ScoreSheet sheet;
  sheet.kind = kind;
  std::vector<double> labeled_scores(state.labeled_ids.size());
  sheet.scores.resize(state.unlabeled_ids.size());

  const auto score_one = [&](int id) -> double {
    const Vec x = pool.embeddings.row(id).transpose();
    switch (kind) {
      case ScoreKind::kEnergy: return score_energy(predict(head, x));
      case ScoreKind::kMargin: return score_margin(predict(head, x));
      case ScoreKind::kGradNorm: return score_gradnorm(head, x);
      case ScoreKind::kMahalanobis: return score_mahalanobis(*stats, x);
      case ScoreKind::kGradProj: break;  // handled below
    }
    throw Error("score_pool: unreachable");
  };

  if (kind == ScoreKind::kGradProj) {
    const GradProjection proj = fit_gradproj(head, pool, state.unlabeled_ids);
    for (std::size_t i = 0; i < state.unlabeled_ids.size(); ++i) {
      sheet.scores[i] = gradproj_score(
          proj, head, pool.embeddings.row(state.unlabeled_ids[i]).transpose());
    }
    for (std::size_t i = 0; i < state.labeled_ids.size(); ++i) {
      labeled_scores[i] = gradproj_score(
          proj, head, pool.embeddings.row(state.labeled_ids[i]).transpose());
    }
  } else {
    for (std::size_t i = 0; i < state.unlabeled_ids.size(); ++i) {
      sheet.scores[i] = score_one(state.unlabeled_ids[i]);
    }
    for (std::size_t i = 0; i < state.labeled_ids.size(); ++i) {
      labeled_scores[i] = score_one(state.labeled_ids[i]);
    }
  }
  sheet.tau = fit_threshold(labeled_scores);
  return sheet;
}

void write_scoresheet(const ScoreSheet& sheet, const RoundState& state,
                      std::ostream& f) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", sheet.tau);
  f << "# kind=" << score_kind_name(sheet.kind) << " tau=" << buf << "\n";
  f << "id\tscore\tflagged\n";
  for (std::size_t i = 0; i < sheet.scores.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.12g", sheet.scores[i]);
    f << state.unlabeled_ids[i] << '\t' << buf << '\t'
      << (sheet.scores[i] > sheet.tau ? 1 : 0) << "\n";
  }
}

void write_scoresheet(const ScoreSheet& sheet, const RoundState& state,
                      const std::string& path) {
  std::ofstream f(path);
  require(static_cast<bool>(f), "cannot write scoresheet: " + path);
  write_scoresheet(sheet, state, f);
  require(static_cast<bool>(f), "write failure: " + path);
}

}  // namespace aloe
