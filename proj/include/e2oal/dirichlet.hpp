#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "e2oal/special_functions.hpp"

namespace e2oal {

inline double clamp_logit(double o, double bound) {
  return std::min(bound, std::max(-bound, o));
}

// Evidence e = exp(o) mapped to Dirichlet concentrations alpha = e/gamma + 1.
// Logits are clipped to [-clamp, clamp] before exponentiation; the bound is
// wide enough that trained logits never touch it.
inline std::vector<double> alpha_from_logits(std::span<const double> logits, double gamma,
                                             double clamp = 30.0) {
  if (gamma <= 0.0) throw std::invalid_argument("gamma must be positive");
  std::vector<double> alpha(logits.size());
  for (std::size_t c = 0; c < logits.size(); ++c)
    alpha[c] = std::exp(clamp_logit(logits[c], clamp)) / gamma + 1.0;
  return alpha;
}

// Translation-aware softmax: P(y|x) = (e^{o_y} + gamma) / sum_c (e^{o_c} + gamma).
inline std::vector<double> calibrated_softmax(std::span<const double> logits, double gamma,
                                              double clamp = 30.0) {
  if (gamma <= 0.0) throw std::invalid_argument("gamma must be positive");
  if (logits.empty()) throw std::invalid_argument("empty logit vector");
  std::vector<double> p(logits.size());
  double den = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    p[c] = std::exp(clamp_logit(logits[c], clamp)) + gamma;
    den += p[c];
  }
  for (double& v : p) v /= den;
  return p;
}

// Expected class probability of Dir(alpha): p_y = alpha_y / sum(alpha).
inline std::vector<double> dirichlet_expected_prob(std::span<const double> alpha) {
  if (alpha.empty()) throw std::invalid_argument("invalid concentration");
  double sum = 0.0;
  for (double a : alpha) {
    if (!(a > 0.0)) throw std::invalid_argument("invalid concentration");
    sum += a;
  }
  std::vector<double> p(alpha.size());
  for (std::size_t c = 0; c < alpha.size(); ++c) p[c] = alpha[c] / sum;
  return p;
}

inline double loss_nll(std::span<const double> alpha, std::size_t true_class) {
  if (true_class >= alpha.size()) throw std::invalid_argument("class out of range");
  double sum = 0.0;
  for (double a : alpha) {
    if (!(a > 0.0)) throw std::invalid_argument("invalid concentration");
    sum += a;
  }
  return std::log(sum) - std::log(alpha[true_class]);
}

// KL(Dir(at) || Dir(1)) in closed form:
//   log Gamma(S) - log Gamma(C) - sum log Gamma(at_j)
//   + sum (at_j - 1) (psi(at_j) - psi(S)),  S = sum at_j.
inline double kl_dirichlet_uniform(std::span<const double> alpha_tilde) {
  if (alpha_tilde.empty()) throw std::invalid_argument("invalid concentration");
  double sum = 0.0;
  for (double a : alpha_tilde) {
    if (!(a > 0.0)) throw std::invalid_argument("invalid concentration");
    sum += a;
  }
  double kl = special_log_gamma(sum) - special_log_gamma(static_cast<double>(alpha_tilde.size()));
  double psi_sum = special_digamma(sum);
  for (double a : alpha_tilde)
    kl += -special_log_gamma(a) + (a - 1.0) * (special_digamma(a) - psi_sum);
  return kl;
}

// at = y + (1 - y) (.) alpha: the true-class entry is pinned to 1 so only
// misplaced evidence is pushed toward the uniform prior.
inline std::vector<double> deflated_alpha(std::span<const double> alpha, std::size_t true_class) {
  if (true_class >= alpha.size()) throw std::invalid_argument("class out of range");
  std::vector<double> at(alpha.begin(), alpha.end());
  at[true_class] = 1.0;
  return at;
}

inline double loss_kl(std::span<const double> alpha, std::size_t true_class) {
  auto at = deflated_alpha(alpha, true_class);
  return kl_dirichlet_uniform(at);
}

// NLL + KL value and its gradient with respect to the raw logits, with
// alpha = exp(o)/gamma + 1. The KL part differentiates to trigamma terms;
// the digamma terms cancel.
struct EdlGrad {
  double loss = 0.0;
  std::vector<double> d_logits;
};

inline EdlGrad edl_loss_grad(std::span<const double> logits, std::size_t true_class,
                             double gamma, double clamp = 30.0) {
  const std::size_t n = logits.size();
  if (true_class >= n) throw std::invalid_argument("class out of range");
  std::vector<double> alpha(n), evidence(n);
  std::vector<bool> active(n);
  double alpha_sum = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    double oc = clamp_logit(logits[c], clamp);
    active[c] = (logits[c] > -clamp && logits[c] < clamp);
    evidence[c] = std::exp(oc);
    alpha[c] = evidence[c] / gamma + 1.0;
    alpha_sum += alpha[c];
  }

  double nll = std::log(alpha_sum) - std::log(alpha[true_class]);

  // alpha_tilde differs from alpha only at the true class (pinned to 1).
  double at_sum = alpha_sum - alpha[true_class] + 1.0;
  double kl = special_log_gamma(at_sum) - special_log_gamma(static_cast<double>(n));
  double psi_at_sum = special_digamma(at_sum);
  for (std::size_t c = 0; c < n; ++c) {
    double at = (c == true_class) ? 1.0 : alpha[c];
    kl += -special_log_gamma(at) + (at - 1.0) * (special_digamma(at) - psi_at_sum);
  }

  double excess = at_sum - static_cast<double>(n);  // sum (at_j - 1)
  double tri_sum = special_trigamma(at_sum);
  EdlGrad out;
  out.loss = nll + kl;
  out.d_logits.assign(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    double d_alpha = 1.0 / alpha_sum;  // from log(sum alpha)
    if (c == true_class) d_alpha -= 1.0 / alpha[c];
    if (c != true_class)
      d_alpha += (alpha[c] - 1.0) * special_trigamma(alpha[c]) - excess * tri_sum;
    double d_o = active[c] ? d_alpha * evidence[c] / gamma : 0.0;
    out.d_logits[c] = d_o;
  }
  return out;
}

}  // namespace e2oal
