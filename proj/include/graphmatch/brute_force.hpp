#pragma once

#include <cstddef>
#include <vector>

#include "graphmatch/core.hpp"

namespace graphmatch {

/// Visits every injection [0..n) -> [0..n') in lexicographic order of the
/// target vector. The callback receives the current row -> column map.
template <typename Visitor>
inline void for_each_injection(std::size_t n, std::size_t n_prime, Visitor&& visit) {
  detail::require(n >= 1 && n <= n_prime, "for_each_injection: need 1 <= n <= n'");
  std::vector<int> target_of(n, -1);
  std::vector<char> used(n_prime, 0);
  std::size_t row = 0;
  int col = 0;
  while (true) {
    if (col == static_cast<int>(n_prime)) {
      if (row == 0) return;
      --row;
      col = target_of[row];
      used[col] = 0;
      target_of[row] = -1;
      ++col;
      continue;
    }
    if (used[col]) {
      ++col;
      continue;
    }
    target_of[row] = col;
    used[col] = 1;
    if (row + 1 == n) {
      visit(const_cast<const std::vector<int>&>(target_of));
      used[col] = 0;
      target_of[row] = -1;
      ++col;
    } else {
      ++row;
      col = 0;
    }
  }
}

/// Exhaustive maximization of the matching objective over all injections.
/// Ties break toward the lexicographically smallest assignment. Guarded to
/// n <= 8 query nodes; this is the reference oracle, not a production path.
inline Matching brute_force_qap(const CompatibilityTables& tables,
                                const AttributedGraph& g,
                                const AttributedGraph& g_prime) {
  const std::size_t n = g.size();
  const std::size_t n_prime = g_prime.size();
  detail::require(n <= 8, "brute_force_qap: refusing n > 8");
  detail::require(n >= 1 && n <= n_prime, "brute_force_qap: need 1 <= n <= n'");

  Matching best;
  double best_value = 0.0;
  bool have_best = false;
  for_each_injection(n, n_prime, [&](const std::vector<int>& target_of) {
    const Matching y = Matching::from_assignments(target_of, n_prime);
    const double value = objective_value(tables, g, g_prime, y);
    if (!have_best || value > best_value) {
      best = y;
      best_value = value;
      have_best = true;
    }
  });
  return best;
}

}  // namespace graphmatch
