#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace e2oal {

// Logit-margin purity: best known-class logit minus best unknown-class
// logit of the auxiliary head. In the first round the head has no unknown
// slots yet, so the score degenerates to the best known logit. Callers with
// a k-way head in later rounds pass round_t = 1 to select that variant.
inline double purity_score(std::span<const double> aux_logits, int k, int round_t) {
  if (static_cast<std::size_t>(k) > aux_logits.size() || k < 1)
    throw std::invalid_argument("bad known-class count");
  for (double v : aux_logits)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite logit");
  double best_known = aux_logits[0];
  for (int c = 1; c < k; ++c)
    best_known = std::max(best_known, aux_logits[static_cast<std::size_t>(c)]);
  if (round_t <= 1) return best_known;
  if (aux_logits.size() == static_cast<std::size_t>(k))
    throw std::invalid_argument("no unknown classes");
  double best_unknown = aux_logits[static_cast<std::size_t>(k)];
  for (std::size_t c = static_cast<std::size_t>(k) + 1; c < aux_logits.size(); ++c)
    best_unknown = std::max(best_unknown, aux_logits[c]);
  return best_known - best_unknown;
}

namespace detail {

inline void check_distribution(std::span<const double> p) {
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0) throw std::invalid_argument("negative probability entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw std::invalid_argument("probabilities must sum to 1");
}

}  // namespace detail

// Jensen-Shannon divergence in bits: 1/2 KL(p||m) + 1/2 KL(q||m) with
// m = (p+q)/2 and base-2 logs, so the value lies in [0,1].
inline double js_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("length mismatch");
  if (p.empty()) throw std::invalid_argument("empty distribution");
  detail::check_distribution(p);
  detail::check_distribution(q);
  const double inv_log2 = 1.4426950408889634074;  // 1/ln 2
  double js = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) js += 0.5 * p[i] * std::log(p[i] / m) * inv_log2;
    if (q[i] > 0.0) js += 0.5 * q[i] * std::log(q[i] / m) * inv_log2;
  }
  return std::max(0.0, js);
}

// S_info = JS(p || uniform) * JS(p || onehot(argmax p)). Vanishes at both
// the uniform and the one-hot extremes and peaks at moderate uncertainty.
inline double informativeness(std::span<const double> primary_probs) {
  if (primary_probs.empty()) throw std::invalid_argument("empty distribution");
  detail::check_distribution(primary_probs);
  const std::size_t n = primary_probs.size();
  std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
  std::size_t arg = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (primary_probs[i] > primary_probs[arg]) arg = i;  // ties -> lowest index
  std::vector<double> onehot(n, 0.0);
  onehot[arg] = 1.0;
  return js_divergence(primary_probs, uniform) * js_divergence(primary_probs, onehot);
}

}  // namespace e2oal
