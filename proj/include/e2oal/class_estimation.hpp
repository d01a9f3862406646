#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "e2oal/hungarian.hpp"
#include "e2oal/kmeans.hpp"
#include "e2oal/rng.hpp"
#include "e2oal/types.hpp"

namespace e2oal {

struct EstimationResult {
  int u_hat = 0;
  double score = 0.0;
  std::vector<int> proxy_labels;  // per labeled-unknown sample, in [k, k+u_hat)
  Matrix unknown_centroids;       // u_hat x dim, ascending original cluster id
  int n_evaluations = 0;          // distinct cluster counts actually clustered
};

// Memoized integer ternary search for the maximum of a unimodal score over
// [lo, hi]; the residual interval (width <= 3) is swept exactly. Returns
// (argmax, max). Each distinct argument is evaluated once.
template <class F>
std::pair<int, double> ternary_search_max(int lo, int hi, F&& eval) {
  if (lo > hi) throw std::invalid_argument("empty search interval");
  std::map<int, double> cache;
  auto score = [&](int m) {
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    double s = eval(m);
    cache.emplace(m, s);
    return s;
  };
  int l = lo, r = hi;
  while (r - l > 2) {
    int d = r - l;
    int m1 = l + d / 3;
    int m2 = r - (d + 2) / 3;
    if (score(m1) < score(m2))
      l = m1;
    else
      r = m2;
  }
  int best = l;
  double best_score = score(l);
  for (int m = l + 1; m <= r; ++m) {
    double s = score(m);
    if (s > best_score) {
      best_score = s;
      best = m;
    }
  }
  return {best, best_score};
}

namespace detail {

struct F1Eval {
  double score = 0.0;
  std::vector<int> cluster_class;  // per cluster: class in [0,k) or k (unknown)
};

// Aligns k+1 clusters with the k known classes plus the unified unknown
// class by maximum overlap (Hungarian on negated counts), folds the
// leftover clusters into the unknown class, and scores the induced
// confusion by the product of per-class F1 values.
inline F1Eval f1_product_eval_full(const std::vector<int>& assignments,
                                   const std::vector<int>& labels, int k,
                                   std::size_t n_clusters) {
  if (assignments.size() != labels.size())
    throw std::invalid_argument("assignments/labels size mismatch");
  const std::size_t n_classes = static_cast<std::size_t>(k) + 1;
  if (n_clusters < n_classes) throw std::invalid_argument("insufficient clusters");

  Matrix overlap(n_classes, n_clusters);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    int cls = labels[i];
    if (cls < 0 || cls > k) throw std::invalid_argument("label out of range");
    overlap(static_cast<std::size_t>(cls), static_cast<std::size_t>(assignments[i])) += 1.0;
  }
  Matrix cost(n_classes, n_clusters);
  for (std::size_t r = 0; r < n_classes; ++r)
    for (std::size_t c = 0; c < n_clusters; ++c) cost(r, c) = -overlap(r, c);
  AssignmentResult match = hungarian_match(cost);

  F1Eval out;
  out.cluster_class.assign(n_clusters, k);  // unmatched clusters -> unknown
  for (std::size_t cls = 0; cls < n_classes; ++cls)
    out.cluster_class[match.row_to_col[cls]] = static_cast<int>(cls);

  std::vector<double> tp(n_classes, 0.0), fp(n_classes, 0.0), fn(n_classes, 0.0);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    int truth = labels[i];
    int pred = out.cluster_class[static_cast<std::size_t>(assignments[i])];
    if (pred == truth) {
      tp[static_cast<std::size_t>(truth)] += 1.0;
    } else {
      fp[static_cast<std::size_t>(pred)] += 1.0;
      fn[static_cast<std::size_t>(truth)] += 1.0;
    }
  }
  double product = 1.0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    double den = 2.0 * tp[c] + fp[c] + fn[c];
    double f1 = den > 0.0 ? 2.0 * tp[c] / den : 0.0;
    product *= f1;
  }
  out.score = product;
  return out;
}

}  // namespace detail

// Product of per-class F1 over the k known classes and the unified unknown
// class (label id k), after Hungarian alignment of clusters to classes.
inline double f1_product_evaluate(const ClusterAssignment& clustering,
                                  const std::vector<int>& labels, int k) {
  return detail::f1_product_eval_full(clustering.assignments, labels, k,
                                      clustering.centroids.rows())
      .score;
}

// Nearest unknown-cluster centroid for each sample; returned ids live in
// [k, k + n_centroids), ties broken by the lowest id.
inline std::vector<int> assign_proxy_labels(const Matrix& samples,
                                            const Matrix& unknown_centroids, int k) {
  if (unknown_centroids.rows() == 0) throw std::invalid_argument("no unknown clusters");
  std::vector<int> out(samples.rows());
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_c = 0;
    for (std::size_t c = 0; c < unknown_centroids.rows(); ++c) {
      double d = squared_distance(samples.row(i), unknown_centroids.row(c));
      if (d < best) {
        best = d;
        best_c = c;
      }
    }
    out[i] = k + static_cast<int>(best_c);
  }
  return out;
}

// Ternary search over the unknown-class count: candidate m clusters the
// labeled pool into k+m groups and is scored by the F1 product. Labels use
// id k for every labeled unknown. K-Means for candidate m is seeded by
// (seed, m) so repeated evaluation is bitwise identical.
inline EstimationResult estimate_unknown_classes(const Matrix& labeled_features,
                                                 const std::vector<int>& labels, int k,
                                                 int u_max, std::uint64_t seed,
                                                 int restarts = 1) {
  if (labeled_features.rows() != labels.size())
    throw std::invalid_argument("features/labels size mismatch");
  bool any_unknown = false;
  for (int l : labels)
    if (l == k) any_unknown = true;
  if (!any_unknown) throw std::invalid_argument("no labeled unknowns");
  if (u_max <= k) throw std::invalid_argument("u_max must exceed k");

  const int n = static_cast<int>(labeled_features.rows());
  int lo = k + 1;
  int hi = std::min(u_max, n - k);  // keep cluster count within sample count
  if (hi < lo) throw std::invalid_argument("too many clusters");

  std::map<int, ClusterAssignment> clusterings;
  int n_evals = 0;
  auto evaluate = [&](int m) {
    RngStream seeds(mix64(seed) ^ mix64(static_cast<std::uint64_t>(m)));
    ClusterAssignment ca =
        kmeans_best(labeled_features, static_cast<std::size_t>(k + m), seeds, restarts);
    double s = f1_product_evaluate(ca, labels, k);
    clusterings.emplace(m, std::move(ca));
    ++n_evals;
    return s;
  };
  auto [u_hat, score] = ternary_search_max(lo, hi, evaluate);

  const ClusterAssignment& best = clusterings.at(u_hat);
  detail::F1Eval aligned =
      detail::f1_product_eval_full(best.assignments, labels, k, best.centroids.rows());
  std::vector<std::size_t> unknown_ids;
  for (std::size_t c = 0; c < aligned.cluster_class.size(); ++c)
    if (aligned.cluster_class[c] == k) unknown_ids.push_back(c);

  EstimationResult res;
  res.u_hat = u_hat;
  res.score = score;
  res.n_evaluations = n_evals;
  res.unknown_centroids = Matrix(unknown_ids.size(), labeled_features.cols());
  for (std::size_t r = 0; r < unknown_ids.size(); ++r)
    for (std::size_t c = 0; c < labeled_features.cols(); ++c)
      res.unknown_centroids(r, c) = best.centroids(unknown_ids[r], c);

  std::size_t n_unknown = 0;
  for (int l : labels)
    if (l == k) ++n_unknown;
  Matrix unknown_feats(n_unknown, labeled_features.cols());
  std::size_t row = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != k) continue;
    for (std::size_t c = 0; c < labeled_features.cols(); ++c)
      unknown_feats(row, c) = labeled_features(i, c);
    ++row;
  }
  res.proxy_labels = assign_proxy_labels(unknown_feats, res.unknown_centroids, k);
  return res;
}

}  // namespace e2oal
