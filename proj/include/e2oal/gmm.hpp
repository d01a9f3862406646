#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "e2oal/rng.hpp"

namespace e2oal {

// Three-component univariate Gaussian mixture over purity scores.
// Components are stored sorted by mean ascending; index 2 is the
// high-purity component used for pool posteriors.
struct Gmm1d {
  std::array<double, 3> weights{};
  std::array<double, 3> means{};
  std::array<double, 3> variances{};
  double log_likelihood = -std::numeric_limits<double>::infinity();
  std::vector<double> log_likelihood_history;
};

namespace detail {

inline double log_normal_pdf(double x, double mean, double var) {
  const double log_two_pi = 1.8378770664093454836;
  double d = x - mean;
  return -0.5 * (log_two_pi + std::log(var)) - d * d / (2.0 * var);
}

inline double log_sum_exp3(const std::array<double, 3>& v) {
  double m = std::max({v[0], v[1], v[2]});
  if (!std::isfinite(m)) return m;
  return m + std::log(std::exp(v[0] - m) + std::exp(v[1] - m) + std::exp(v[2] - m));
}

}  // namespace detail

// EM fit from quantile-based initialization (means at the 1/6, 3/6, 5/6
// quantiles, equal weights, pooled variance). Stops when the total
// log-likelihood improves by less than 1e-8 or after 500 iterations.
// The seed only matters when quantile means collide and need spreading.
inline Gmm1d fit_gmm_1d(std::span<const double> scores, std::uint64_t seed) {
  const std::size_t n = scores.size();
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t distinct = n == 0 ? 0 : 1;
  for (std::size_t i = 1; i < n; ++i)
    if (sorted[i] != sorted[i - 1]) ++distinct;
  if (distinct < 3) throw std::invalid_argument("degenerate scores");

  double mean_all = 0.0;
  for (double v : sorted) mean_all += v;
  mean_all /= static_cast<double>(n);
  double var_all = 0.0;
  for (double v : sorted) var_all += (v - mean_all) * (v - mean_all);
  var_all /= static_cast<double>(n);
  const double var_floor = 1e-6 * var_all;

  Gmm1d g;
  g.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  g.means = {sorted[n / 6], sorted[n / 2], sorted[(5 * n) / 6]};
  g.variances = {var_all, var_all, var_all};
  if (g.means[0] == g.means[1] || g.means[1] == g.means[2]) {
    // Quantiles landed on duplicated values; spread the means across the
    // data range with a touch of seeded jitter so EM can break symmetry.
    RngStream jitter(mix64(seed) ^ 0x9d1b0f3655a1cbe5ULL);
    double lo = sorted.front(), hi = sorted.back();
    double span_w = hi - lo;
    for (int j = 0; j < 3; ++j)
      g.means[static_cast<std::size_t>(j)] =
          lo + span_w * ((2.0 * j + 1.0) / 6.0 + 0.01 * (jitter.uniform() - 0.5));
  }

  std::vector<std::array<double, 3>> resp(n);
  for (int iter = 0; iter < 500; ++iter) {
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::array<double, 3> lw;
      for (int j = 0; j < 3; ++j) {
        std::size_t ju = static_cast<std::size_t>(j);
        lw[ju] = g.weights[ju] > 0.0
                     ? std::log(g.weights[ju]) +
                           detail::log_normal_pdf(sorted[i], g.means[ju], g.variances[ju])
                     : -std::numeric_limits<double>::infinity();
      }
      double norm = detail::log_sum_exp3(lw);
      ll += norm;
      for (int j = 0; j < 3; ++j)
        resp[i][static_cast<std::size_t>(j)] = std::exp(lw[static_cast<std::size_t>(j)] - norm);
    }
    bool converged = !g.log_likelihood_history.empty() &&
                     ll - g.log_likelihood_history.back() < 1e-8;
    g.log_likelihood_history.push_back(ll);
    g.log_likelihood = ll;
    if (converged) break;

    for (int j = 0; j < 3; ++j) {
      std::size_t ju = static_cast<std::size_t>(j);
      double nj = 0.0, sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        nj += resp[i][ju];
        sum += resp[i][ju] * sorted[i];
      }
      g.weights[ju] = nj / static_cast<double>(n);
      if (nj < 1e-12) continue;  // dead component keeps its parameters
      double mu = sum / nj;
      double sq = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        sq += resp[i][ju] * (sorted[i] - mu) * (sorted[i] - mu);
      g.means[ju] = mu;
      g.variances[ju] = std::max(sq / nj, var_floor);
    }
  }

  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return g.means[static_cast<std::size_t>(a)] <
                                       g.means[static_cast<std::size_t>(b)]; });
  Gmm1d out = g;
  for (int j = 0; j < 3; ++j) {
    std::size_t ju = static_cast<std::size_t>(j);
    std::size_t src = static_cast<std::size_t>(order[ju]);
    out.weights[ju] = g.weights[src];
    out.means[ju] = g.means[src];
    out.variances[ju] = g.variances[src];
  }
  return out;
}

// Posterior probability that a score belongs to the high-mean component.
inline double high_posterior(const Gmm1d& gmm, double score) {
  std::array<double, 3> lw;
  for (int j = 0; j < 3; ++j) {
    std::size_t ju = static_cast<std::size_t>(j);
    lw[ju] = gmm.weights[ju] > 0.0
                 ? std::log(gmm.weights[ju]) +
                       detail::log_normal_pdf(score, gmm.means[ju], gmm.variances[ju])
                 : -std::numeric_limits<double>::infinity();
  }
  double norm = detail::log_sum_exp3(lw);
  return std::exp(lw[2] - norm);
}

}  // namespace e2oal
