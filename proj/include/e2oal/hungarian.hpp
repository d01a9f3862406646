#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "e2oal/types.hpp"

namespace e2oal {

struct AssignmentResult {
  std::vector<std::size_t> row_to_col;  // length = rows, each a distinct column
  double total_cost = 0.0;
};

// Minimum-cost assignment of r rows to r of c columns (r <= c), shortest
// augmenting paths with dual potentials, O(r^2 c). With integer-valued
// costs all arithmetic is exact, so the optimum is exact too.
inline AssignmentResult hungarian_match(const Matrix& cost) {
  const std::size_t r = cost.rows();
  const std::size_t c = cost.cols();
  if (r > c) throw std::invalid_argument("rows exceed columns");
  if (r == 0) return {};
  for (std::size_t i = 0; i < r; ++i)
    for (double v : cost.row(i))
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite cost entry");

  const double inf = std::numeric_limits<double>::infinity();
  // 1-based with a virtual row/column 0.
  std::vector<double> u(r + 1, 0.0), v(c + 1, 0.0);
  std::vector<std::size_t> match(c + 1, 0);  // column -> row (0 = free)
  std::vector<std::size_t> way(c + 1, 0);

  for (std::size_t i = 1; i <= r; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(c + 1, inf);
    std::vector<bool> used(c + 1, false);
    do {
      used[j0] = true;
      std::size_t i0 = match[j0], j1 = 0;
      double delta = inf;
      for (std::size_t j = 1; j <= c; ++j) {
        if (used[j]) continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= c; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  AssignmentResult res;
  res.row_to_col.assign(r, 0);
  for (std::size_t j = 1; j <= c; ++j)
    if (match[j] != 0) res.row_to_col[match[j] - 1] = j - 1;
  for (std::size_t i = 0; i < r; ++i) res.total_cost += cost(i, res.row_to_col[i]);
  return res;
}

}  // namespace e2oal
