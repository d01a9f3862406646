#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "e2oal/rng.hpp"
#include "e2oal/types.hpp"

namespace e2oal {

struct ClusterAssignment {
  std::vector<int> assignments;  // per-sample cluster id in [0,C)
  Matrix centroids;              // C x dim
  double inertia = 0.0;
  std::vector<double> inertia_history;  // one entry per Lloyd iteration
  int iterations = 0;
};

namespace detail {

inline Matrix kmeanspp_init(const Matrix& pts, std::size_t n_clusters, RngStream& rng) {
  const std::size_t n = pts.rows();
  Matrix centroids(n_clusters, pts.cols());
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::size_t first = rng.below(n);
  for (std::size_t c = 0; c < pts.cols(); ++c) centroids(0, c) = pts(first, c);
  for (std::size_t k = 1; k < n_clusters; ++k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d2 = squared_distance(pts.row(i), centroids.row(k - 1));
      if (d2 < min_d2[i]) min_d2[i] = d2;
      total += min_d2[i];
    }
    std::size_t pick;
    if (total <= 0.0) {
      pick = rng.below(n);  // all points coincide with chosen centroids
    } else {
      double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += min_d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    }
    for (std::size_t c = 0; c < pts.cols(); ++c) centroids(k, c) = pts(pick, c);
  }
  return centroids;
}

}  // namespace detail

// Lloyd iterations from k-means++ seeds until the assignment reaches a
// fixpoint, at most max_iter rounds. Empty clusters are reseeded to the
// point currently farthest from its own centroid, which keeps per-iteration
// inertia non-increasing.
inline ClusterAssignment kmeans(const Matrix& pts, std::size_t n_clusters, RngStream rng,
                                int max_iter = 300) {
  const std::size_t n = pts.rows();
  const std::size_t d = pts.cols();
  if (n_clusters < 1) throw std::invalid_argument("need at least one cluster");
  if (n_clusters > n) throw std::invalid_argument("too many clusters");

  ClusterAssignment out;
  out.centroids = detail::kmeanspp_init(pts, n_clusters, rng);
  out.assignments.assign(n, -1);
  std::vector<int> prev(n, -1);
  std::vector<double> d2(n, 0.0);

  for (int iter = 0; iter < max_iter; ++iter) {
    // Assignment step; ties go to the lowest cluster id.
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (std::size_t c = 0; c < n_clusters; ++c) {
        double dist = squared_distance(pts.row(i), out.centroids.row(c));
        if (dist < best) {
          best = dist;
          best_c = static_cast<int>(c);
        }
      }
      out.assignments[i] = best_c;
      d2[i] = best;
    }

    // Reseed empty clusters to the worst-fitting point.
    std::vector<std::size_t> counts(n_clusters, 0);
    for (int a : out.assignments) ++counts[static_cast<std::size_t>(a)];
    for (std::size_t c = 0; c < n_clusters; ++c) {
      if (counts[c] != 0) continue;
      std::size_t worst = 0;
      double worst_d2 = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] > worst_d2 && counts[static_cast<std::size_t>(out.assignments[i])] > 1) {
          worst_d2 = d2[i];
          worst = i;
        }
      }
      if (worst_d2 < 0.0) continue;  // no donor cluster; stays empty
      --counts[static_cast<std::size_t>(out.assignments[worst])];
      for (std::size_t j = 0; j < d; ++j) out.centroids(c, j) = pts(worst, j);
      out.assignments[worst] = static_cast<int>(c);
      d2[worst] = 0.0;
      counts[c] = 1;
    }

    double inertia = 0.0;
    for (double v : d2) inertia += v;
    out.inertia_history.push_back(inertia);
    out.inertia = inertia;
    out.iterations = iter + 1;

    if (out.assignments == prev) break;
    prev = out.assignments;

    // Update step: centroid = mean of members.
    Matrix sums(n_clusters, d);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = pts.row(i);
      auto c = static_cast<std::size_t>(out.assignments[i]);
      for (std::size_t j = 0; j < d; ++j) sums(c, j) += row[j];
    }
    for (std::size_t c = 0; c < n_clusters; ++c) {
      if (counts[c] == 0) continue;  // keep previous centroid
      for (std::size_t j = 0; j < d; ++j)
        out.centroids(c, j) = sums(c, j) / static_cast<double>(counts[c]);
    }
  }
  return out;
}

// Best of `restarts` seeded runs by inertia.
inline ClusterAssignment kmeans_best(const Matrix& pts, std::size_t n_clusters,
                                     RngStream& seed_source, int restarts,
                                     int max_iter = 300) {
  ClusterAssignment best;
  for (int r = 0; r < restarts; ++r) {
    RngStream run_rng(seed_source.next_u64());
    ClusterAssignment cur = kmeans(pts, n_clusters, run_rng, max_iter);
    if (r == 0 || cur.inertia < best.inertia) best = std::move(cur);
  }
  return best;
}

}  // namespace e2oal
