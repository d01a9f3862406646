#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "e2oal/dataset.hpp"
#include "e2oal/rng.hpp"
#include "e2oal/types.hpp"

namespace e2oal {

// Isotropic Gaussian class clusters (unit within-class sigma) with
// centroids on a common sphere. cluster_separation is the mean pairwise
// centroid distance in sigmas, so it directly controls task hardness.
struct SyntheticSpec {
  int known_classes = 20;
  int unknown_classes = 30;
  int dim = 32;
  int samples_per_class = 200;
  double cluster_separation = 4.0;
  double test_fraction = 0.15;
  std::uint64_t seed = 1;

  void validate() const {
    if (known_classes < 2) throw std::invalid_argument("need at least 2 known classes");
    if (unknown_classes < 0) throw std::invalid_argument("unknown_classes must be >= 0");
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (samples_per_class < 1)
      throw std::invalid_argument("samples_per_class must be >= 1");
    if (!(cluster_separation > 0.0))
      throw std::invalid_argument("separation must be positive");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
      throw std::invalid_argument("test_fraction must be in (0,1)");
  }
};

struct SyntheticBench {
  DataSet data;
  PoolState initial_state;
  Matrix centroids;  // generating centroids, (k+u) x dim; handy for oracles
};

namespace detail {

// Unit directions scaled to a common radius chosen so the mean pairwise
// centroid distance equals the requested separation.
inline Matrix make_centroids(int n_classes, int dim, double separation, RngStream& rng) {
  Matrix c(static_cast<std::size_t>(n_classes), static_cast<std::size_t>(dim));
  for (std::size_t r = 0; r < c.rows(); ++r) {
    double norm2 = 0.0;
    for (std::size_t j = 0; j < c.cols(); ++j) {
      c(r, j) = rng.gaussian();
      norm2 += c(r, j) * c(r, j);
    }
    if (norm2 < 1e-24) {
      c(r, 0) = 1.0;  // astronomically unlikely all-zero draw
      norm2 = 1.0;
    }
    double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t j = 0; j < c.cols(); ++j) c(r, j) *= inv;
  }
  double mean_dist = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < c.rows(); ++a)
    for (std::size_t b = a + 1; b < c.rows(); ++b) {
      mean_dist += std::sqrt(squared_distance(c.row(a), c.row(b)));
      ++pairs;
    }
  if (pairs > 0) mean_dist /= static_cast<double>(pairs);
  if (pairs > 0 && mean_dist < 1e-12)
    throw std::invalid_argument("infeasible separation/dim combination");
  double scale = pairs > 0 ? separation / mean_dist : separation;
  for (std::size_t r = 0; r < c.rows(); ++r)
    for (std::size_t j = 0; j < c.cols(); ++j) c(r, j) *= scale;
  return c;
}

}  // namespace detail

// Samples are laid out class-major: class c occupies rows
// [c*samples_per_class, (c+1)*samples_per_class). The last
// round(test_fraction*samples_per_class) rows of each known class form the
// test split; unknown-class rows all stay in the pool.
inline DataSet make_dataset(const SyntheticSpec& spec) {
  spec.validate();
  const int n_classes = spec.known_classes + spec.unknown_classes;
  const std::size_t spc = static_cast<std::size_t>(spec.samples_per_class);
  const std::size_t n = static_cast<std::size_t>(n_classes) * spc;

  RngStream centroid_rng = derive_stream(spec.seed, 0, "centroids");
  Matrix centroids = detail::make_centroids(n_classes, spec.dim,
                                            spec.cluster_separation, centroid_rng);

  std::size_t n_test_per_class = static_cast<std::size_t>(
      std::llround(spec.test_fraction * static_cast<double>(spc)));
  if (n_test_per_class < 1 || n_test_per_class >= spc)
    throw std::invalid_argument("infeasible test split");

  DataSet data;
  data.features.matrix = Matrix(n, static_cast<std::size_t>(spec.dim));
  data.features.sample_ids.resize(n);
  data.true_class.resize(n);
  data.labels.k = spec.known_classes;
  if (spec.unknown_classes > 0) data.labels.u_true = spec.unknown_classes;

  RngStream sample_rng = derive_stream(spec.seed, 0, "samples");
  std::size_t row = 0;
  for (int c = 0; c < n_classes; ++c) {
    for (std::size_t i = 0; i < spc; ++i, ++row) {
      data.features.sample_ids[row] = static_cast<std::int64_t>(row);
      data.true_class[row] = c;
      for (std::size_t j = 0; j < static_cast<std::size_t>(spec.dim); ++j)
        data.features.matrix(row, j) =
            centroids(static_cast<std::size_t>(c), j) + sample_rng.gaussian();
      if (c < spec.known_classes && i >= spc - n_test_per_class) {
        data.test_rows.push_back(row);
        data.test_labels.push_back(c);
      }
    }
  }
  data.validate();
  return data;
}

// Seed labels are drawn uniformly from known-class pool rows only; the
// unlabeled pool keeps everything else in ascending row order.
inline PoolState make_initial_pool(const DataSet& data, double initial_fraction,
                                   std::uint64_t seed) {
  if (!(initial_fraction > 0.0 && initial_fraction < 1.0))
    throw std::invalid_argument("initial_fraction must be in (0,1)");
  std::vector<bool> is_test(data.features.size(), false);
  for (std::size_t r : data.test_rows) is_test[r] = true;

  std::vector<std::size_t> known_pool;
  for (std::size_t r = 0; r < data.features.size(); ++r)
    if (!is_test[r] && data.true_class[r] < data.labels.k) known_pool.push_back(r);
  if (known_pool.empty()) throw std::invalid_argument("no known-class pool rows");

  std::size_t n_init = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(
             initial_fraction * static_cast<double>(known_pool.size()))));
  n_init = std::min(n_init, known_pool.size());

  RngStream rng = derive_stream(seed, 0, "init-pool");
  std::vector<std::size_t> shuffled = known_pool;
  rng.shuffle(shuffled);
  std::vector<std::size_t> init(shuffled.begin(),
                                shuffled.begin() + static_cast<std::ptrdiff_t>(n_init));
  std::sort(init.begin(), init.end());

  std::vector<bool> taken(data.features.size(), false);
  for (std::size_t r : init) taken[r] = true;

  PoolState state;
  state.labeled_known = init;
  state.known_labels.reserve(init.size());
  for (std::size_t r : init) state.known_labels.push_back(data.true_class[r]);
  for (std::size_t r = 0; r < data.features.size(); ++r)
    if (!is_test[r] && !taken[r]) state.unlabeled.push_back(r);
  return state;
}

inline SyntheticBench generate_synthetic(const SyntheticSpec& spec,
                                         double initial_fraction = 0.05) {
  SyntheticBench bench;
  bench.data = make_dataset(spec);
  RngStream centroid_rng = derive_stream(spec.seed, 0, "centroids");
  bench.centroids = detail::make_centroids(spec.known_classes + spec.unknown_classes,
                                           spec.dim, spec.cluster_separation,
                                           centroid_rng);
  bench.initial_state = make_initial_pool(bench.data, initial_fraction, spec.seed);
  return bench;
}

}  // namespace e2oal
