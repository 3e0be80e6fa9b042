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

#include "aloe/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aloe/rng.hpp"

namespace aloe {

namespace {

void check_points(const Mat& points) {
  require(points.rows() >= 1, "cluster: empty point set");
  require(points.allFinite(), "cluster: non-finite points");
}

/// Nearest centroid with ties broken by lower index. Returns the index and
/// stores the squared distance.
int nearest_centroid(const Mat& centroids, const Eigen::RowVectorXd& x,
                     double* sq_dist) {
  int best = 0;
  double best_d = (x - centroids.row(0)).squaredNorm();
  for (int c = 1; c < centroids.rows(); ++c) {
    const double dd = (x - centroids.row(c)).squaredNorm();
    if (dd < best_d) {
      best_d = dd;
      best = c;
    }
  }
  *sq_dist = best_d;
  return best;
}

double assign_all(const Mat& points, const Mat& centroids,
                  std::vector<int>* assignment) {
  const int m = static_cast<int>(points.rows());
  assignment->resize(m);
  double objective = 0.0;
  for (int i = 0; i < m; ++i) {
    double dd;
    (*assignment)[i] = nearest_centroid(centroids, points.row(i), &dd);
    objective += dd;
  }
  return objective;
}

/// Moves the point farthest from its centroid into each empty cluster.
void repair_empty(const Mat& points, Mat* centroids,
                  std::vector<int>* assignment) {
  const int m = static_cast<int>(points.rows());
  const int k = static_cast<int>(centroids->rows());
  std::vector<int> size(k, 0);
  for (int a : *assignment) size[a]++;
  std::vector<char> moved(m, 0);
  for (int c = 0; c < k; ++c) {
    if (size[c] > 0) continue;
    int worst = -1;
    double worst_d = -1.0;
    for (int i = 0; i < m; ++i) {
      if (moved[i] || size[(*assignment)[i]] <= 1) continue;
      const double dd =
          (points.row(i) - centroids->row((*assignment)[i])).squaredNorm();
      if (dd > worst_d) {
        worst_d = dd;
        worst = i;
      }
    }
    if (worst < 0) continue;  // fewer distinct points than clusters
    size[(*assignment)[worst]]--;
    (*assignment)[worst] = c;
    size[c] = 1;
    centroids->row(c) = points.row(worst);
    moved[worst] = 1;
  }
}

Mat plusplus_seed(const Mat& points, int k, Rng& rng) {
  const int m = static_cast<int>(points.rows());
  Mat centroids(k, points.cols());
  centroids.row(0) = points.row(static_cast<int>(rng.below(m)));
  std::vector<double> d2(m);
  for (int c = 1; c < k; ++c) {
    for (int i = 0; i < m; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < c; ++j) {
        best = std::min(best, (points.row(i) - centroids.row(j)).squaredNorm());
      }
      d2[i] = best;
    }
    centroids.row(c) = points.row(static_cast<int>(rng.weighted(d2)));
  }
  return centroids;
}

Mat recompute_centroids(const Mat& points, const std::vector<int>& assignment,
                        const Mat& old_centroids) {
  const int k = static_cast<int>(old_centroids.rows());
  Mat sums = Mat::Zero(k, points.cols());
  std::vector<int> size(k, 0);
  for (int i = 0; i < points.rows(); ++i) {
    sums.row(assignment[i]) += points.row(i);
    size[assignment[i]]++;
  }
  for (int c = 0; c < k; ++c) {
    if (size[c] > 0) {
      sums.row(c) /= size[c];
    } else {
      sums.row(c) = old_centroids.row(c);
    }
  }
  return sums;
}

}  // namespace

ClusterModel kmeans(const Mat& points, int k, std::uint64_t seed, int max_iter,
                    double tol) {
  check_points(points);
  require(k >= 1, "kmeans: k must be >= 1");
  require(max_iter >= 1, "kmeans: max_iter must be >= 1");
  const int m = static_cast<int>(points.rows());
  k = std::min(k, m);

  Rng rng(mix_seed(seed, 0x2b));
  ClusterModel model;
  model.k = k;
  model.centroids = plusplus_seed(points, k, rng);
  for (int iter = 0; iter < max_iter; ++iter) {
    model.objective = assign_all(points, model.centroids, &model.assignment);
    repair_empty(points, &model.centroids, &model.assignment);
    Mat next = recompute_centroids(points, model.assignment, model.centroids);
    const double movement =
        (next - model.centroids).rowwise().norm().maxCoeff();
    model.centroids = next;
    if (movement < tol) break;
  }
  model.objective = assign_all(points, model.centroids, &model.assignment);
  repair_empty(points, &model.centroids, &model.assignment);
  return model;
}

ClusterModel minibatch_kmeans(const Mat& points, int k, std::uint64_t seed,
                              int batch, int max_iter) {
  check_points(points);
  require(k >= 1, "minibatch_kmeans: k must be >= 1");
  require(batch >= 1, "minibatch_kmeans: batch must be >= 1");
  require(max_iter >= 1, "minibatch_kmeans: max_iter must be >= 1");
  const int m = static_cast<int>(points.rows());
  k = std::min(k, m);
  batch = std::min(batch, m);

  Rng rng(mix_seed(seed, 0x3c));
  ClusterModel model;
  model.k = k;
  model.centroids = plusplus_seed(points, k, rng);

  std::vector<double> count(k, 0.0);
  for (int iter = 0; iter < max_iter; ++iter) {
    const auto sample = rng.sample_without_replacement(m, batch);
    for (int idx : sample) {
      double dd;
      const int c = nearest_centroid(model.centroids, points.row(idx), &dd);
      count[c] += 1.0;
      const double eta = 1.0 / count[c];
      model.centroids.row(c) +=
          eta * (points.row(idx) - model.centroids.row(c));
    }
  }
  model.objective = assign_all(points, model.centroids, &model.assignment);
  repair_empty(points, &model.centroids, &model.assignment);
  return model;
}

ClusterModel gmm_em(const Mat& points, int k, std::uint64_t seed, int max_iter,
                    double tol, double reg) {
  check_points(points);
  require(k >= 1, "gmm: k must be >= 1");
  require(reg > 0.0, "gmm: reg must be > 0");
  const int m = static_cast<int>(points.rows());
  const int d = static_cast<int>(points.cols());
  k = std::min(k, m);

  const ClusterModel init = kmeans(points, k, seed);
  Mat means = init.centroids;
  Mat vars(k, d);
  Vec weights = Vec::Zero(k);
  {
    Mat sq = Mat::Zero(k, d);
    std::vector<int> size(k, 0);
    for (int i = 0; i < m; ++i) {
      const int c = init.assignment[i];
      sq.row(c) += (points.row(i) - means.row(c)).array().square().matrix();
      size[c]++;
    }
    for (int c = 0; c < k; ++c) {
      weights[c] = std::max(size[c], 1) / static_cast<double>(m);
      if (size[c] > 0) {
        vars.row(c) = (sq.row(c) / size[c]).array() + reg;
      } else {
        vars.row(c).setConstant(1.0 + reg);
      }
    }
    weights /= weights.sum();
  }

  Mat log_resp(m, k);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iter; ++iter) {
    // E step.
    double ll = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int c = 0; c < k; ++c) {
        double lp = std::log(weights[c]);
        for (int j = 0; j < d; ++j) {
          const double diff = points(i, j) - means(c, j);
          lp -= 0.5 * (std::log(2.0 * M_PI * vars(c, j)) +
                       diff * diff / vars(c, j));
        }
        log_resp(i, c) = lp;
      }
      const double row_max = log_resp.row(i).maxCoeff();
      const double lse =
          row_max + std::log((log_resp.row(i).array() - row_max).exp().sum());
      ll += lse;
      log_resp.row(i) = (log_resp.row(i).array() - lse).exp();
    }
    // M step (log_resp now holds responsibilities).
    for (int c = 0; c < k; ++c) {
      const double nc = log_resp.col(c).sum();
      if (!(nc > 1e-12)) {
        throw Error("gmm: component " + std::to_string(c) +
                    " collapsed at iteration " + std::to_string(iter));
      }
      Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(d);
      for (int i = 0; i < m; ++i) mu += log_resp(i, c) * points.row(i);
      mu /= nc;
      Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(d);
      for (int i = 0; i < m; ++i) {
        var += log_resp(i, c) *
               (points.row(i) - mu).array().square().matrix();
      }
      means.row(c) = mu;
      vars.row(c) = (var / nc).array() + reg;
      weights[c] = nc / m;
    }
    weights /= weights.sum();
    if (ll - prev_ll < tol && iter > 0) {
      prev_ll = ll;
      break;
    }
    prev_ll = ll;
  }

  ClusterModel model;
  model.k = k;
  model.centroids = means;
  model.objective = prev_ll;
  model.assignment.resize(m);
  for (int i = 0; i < m; ++i) {
    int best = 0;
    double best_lp = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      double lp = std::log(weights[c]);
      for (int j = 0; j < d; ++j) {
        const double diff = points(i, j) - means(c, j);
        lp -= 0.5 * (std::log(2.0 * M_PI * vars(c, j)) +
                     diff * diff / vars(c, j));
      }
      if (lp > best_lp) {
        best_lp = lp;
        best = c;
      }
    }
    model.assignment[i] = best;
  }
  return model;
}

std::vector<int> kcenter_greedy(const Mat& points, int budget,
                                const std::vector<int>& seed_centers) {
  check_points(points);
  require(budget >= 1, "kcenter: budget must be >= 1");
  const int m = static_cast<int>(points.rows());
  std::vector<char> chosen(m, 0);
  int unchosen = m;
  std::vector<double> min_d2(m, std::numeric_limits<double>::infinity());
  for (int id : seed_centers) {
    require(id >= 0 && id < m, "kcenter: seed center out of range");
    if (chosen[id]) continue;
    chosen[id] = 1;
    --unchosen;
    for (int i = 0; i < m; ++i) {
      min_d2[i] =
          std::min(min_d2[i], (points.row(i) - points.row(id)).squaredNorm());
    }
  }
  require(budget <= unchosen, "kcenter: budget exceeds unchosen points");

  std::vector<int> selected;
  selected.reserve(budget);
  for (int pick = 0; pick < budget; ++pick) {
    int best = -1;
    double best_d = -1.0;
    for (int i = 0; i < m; ++i) {
      if (chosen[i]) continue;
      const double dd =
          seed_centers.empty() && selected.empty() ? 0.0 : min_d2[i];
      if (dd > best_d) {
        best_d = dd;
        best = i;
      }
    }
    chosen[best] = 1;
    selected.push_back(best);
    for (int i = 0; i < m; ++i) {
      min_d2[i] =
          std::min(min_d2[i], (points.row(i) - points.row(best)).squaredNorm());
    }
  }
  return selected;
}

}  // namespace aloe
