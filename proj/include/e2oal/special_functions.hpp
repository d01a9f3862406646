#pragma once

#include <cmath>
#include <stdexcept>

namespace e2oal {

// log Gamma for x > 0. std::lgamma meets the accuracy needed here; this
// wrapper adds the domain contract.
inline double special_log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("domain: log_gamma requires x > 0");
  return std::lgamma(x);
}

// Digamma via upward recurrence to x >= 10, then the Bernoulli asymptotic
// series. Relative error stays below 1e-12 on (0, 1e4].
inline double special_digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("domain: digamma requires x > 0");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  double inv = 1.0 / x;
  double inv2 = inv * inv;
  // ln x - 1/(2x) - sum B_2n / (2n x^2n)
  double series = inv2 * (1.0 / 12.0 -
                   inv2 * (1.0 / 120.0 -
                    inv2 * (1.0 / 252.0 -
                     inv2 * (1.0 / 240.0 -
                      inv2 * (1.0 / 132.0 -
                       inv2 * (691.0 / 32760.0 -
                        inv2 * (1.0 / 12.0)))))));
  return result + std::log(x) - 0.5 * inv - series;
}

// Trigamma (psi'), same recurrence + asymptotic scheme as digamma.
inline double special_trigamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("domain: trigamma requires x > 0");
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  double inv = 1.0 / x;
  double inv2 = inv * inv;
  // 1/x + 1/(2x^2) + sum B_2n / x^(2n+1)
  double series = inv * (1.0 / 6.0 -
                   inv2 * (1.0 / 30.0 -
                    inv2 * (1.0 / 42.0 -
                     inv2 * (1.0 / 30.0 -
                      inv2 * (5.0 / 66.0 -
                       inv2 * (691.0 / 2730.0 -
                        inv2 * (7.0 / 6.0)))))));
  return result + inv + 0.5 * inv2 + inv2 * series;
}

}  // namespace e2oal
