#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "graphmatch/core.hpp"
#include "graphmatch/matrix.hpp"

namespace graphmatch {

/// Exact maximum-score linear assignment for an n x n' score matrix with
/// n <= n': every row gets a distinct column. Shortest augmenting path
/// formulation with potentials, O(n'^3); deterministic for a given input.
inline Matching linear_assignment(const MatrixD& score) {
  const std::size_t n = score.rows();
  const std::size_t n_prime = score.cols();
  detail::require(n >= 1 && n_prime >= 1, "linear_assignment: empty matrix");
  detail::require(n <= n_prime,
                  "linear_assignment: more rows than columns; orient the pair "
                  "query -> target");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n_prime; ++j)
      detail::require(std::isfinite(score(i, j)),
                      "linear_assignment: non-finite score entry");

  // Minimize negated scores on a square matrix; dummy rows cost zero.
  const std::size_t s = n_prime;
  const double inf = std::numeric_limits<double>::infinity();
  auto cost = [&](std::size_t i, std::size_t j) {
    return i < n ? -score(i, j) : 0.0;
  };

  // 1-based potentials/links per the classic augmenting-path scheme.
  std::vector<double> u(s + 1, 0.0), v(s + 1, 0.0);
  std::vector<std::size_t> match(s + 1, 0), way(s + 1, 0);
  for (std::size_t i = 1; i <= s; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(s + 1, inf);
    std::vector<char> used(s + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= s; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= s; ++j) {
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
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> target_of(n, -1);
  for (std::size_t j = 1; j <= s; ++j) {
    const std::size_t i = match[j];
    if (i >= 1 && i <= n) target_of[i - 1] = static_cast<int>(j - 1);
  }
  return Matching::from_assignments(target_of, n_prime);
}

/// Score of a matching under a unary table, summed in row order. Kept as a
/// single code path so exact-equality comparisons across solvers are
/// meaningful.
inline double assignment_score(const MatrixD& score, const Matching& y) {
  detail::require(y.assign.rows() == score.rows() && y.assign.cols() == score.cols(),
                  "assignment_score: shape mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < score.rows(); ++i)
    for (std::size_t j = 0; j < score.cols(); ++j)
      if (y.assign(i, j)) total += score(i, j);
  return total;
}

}  // namespace graphmatch
