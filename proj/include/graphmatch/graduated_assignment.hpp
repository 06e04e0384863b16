#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "graphmatch/core.hpp"
#include "graphmatch/linear_assignment.hpp"
#include "graphmatch/sinkhorn.hpp"

namespace graphmatch {

/// Annealing schedule and Sinkhorn controls for graduated assignment. The
/// defaults are the published settings of the original algorithm; this
/// paper's experiments do not pin them, so they stay configurable.
struct GraduatedAssignmentConfig {
  double beta0 = 0.5;
  double beta_rate = 1.075;
  double beta_max = 10.0;
  double sinkhorn_tol = 1e-6;
  int sinkhorn_max_iters = 300;
  int outer_iters_per_beta = 4;

  void validate() const {
    detail::require(beta0 > 0.0 && beta_max > beta0,
                    "graduated assignment: need 0 < beta0 < beta_max");
    detail::require(beta_rate > 1.0, "graduated assignment: beta_rate must exceed 1");
    detail::require(sinkhorn_tol > 0.0 && sinkhorn_max_iters >= 1 &&
                        outer_iters_per_beta >= 1,
                    "graduated assignment: bad iteration controls");
  }
};

/// Deterministic-annealing heuristic for the quadratic assignment
/// objective: repeatedly linearize at the current soft assignment
/// (Q_{ii'} = c_{ii'} + 2 d-field), soften with exp(beta Q) and project to
/// doubly stochastic via Sinkhorn, sharpening beta geometrically. The final
/// soft assignment is discretized by an exact linear assignment, so the
/// result is always a valid matching.
inline Matching graduated_assignment(const CompatibilityTables& tables,
                                     const AttributedGraph& g,
                                     const AttributedGraph& g_prime,
                                     const GraduatedAssignmentConfig& cfg = {}) {
  cfg.validate();
  const std::size_t n = g.size();
  const std::size_t n_prime = g_prime.size();
  detail::require(n >= 1 && n <= n_prime,
                  "graduated_assignment: need 1 <= n <= n'");
  detail::require(tables.unary.rows() == n && tables.unary.cols() == n_prime,
                  "graduated_assignment: unary table shape mismatch");

  // Square soft-assignment matrix; rows n..s-1 are slack rows standing in
  // for unmatched target nodes when n < n'.
  const std::size_t s = n_prime;
  MatrixD soft(s, s, 1.0 / static_cast<double>(s));

  MatrixD soft_real(n, n_prime, 0.0);
  for (double beta = cfg.beta0; beta <= cfg.beta_max; beta *= cfg.beta_rate) {
    for (int it = 0; it < cfg.outer_iters_per_beta; ++it) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n_prime; ++j) soft_real(i, j) = soft(i, j);
      const MatrixD field =
          detail::adjacency_field(g.adjacency, g_prime.adjacency, soft_real);

      MatrixD q(s, s, 0.0);
      double q_max = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n_prime; ++j) {
          const double v = tables.unary(i, j) + 2.0 * tables.edge_weight * field(i, j);
          detail::require(std::isfinite(v), "graduated_assignment: non-finite Q");
          q(i, j) = v;
          q_max = std::max(q_max, v);
        }

      // Max subtraction keeps exp() in range at large beta without moving
      // the Sinkhorn fixed point; the floor keeps entries strictly positive.
      MatrixD m(s, s, 0.0);
      for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j)
          m(i, j) = std::max(std::exp(beta * (q(i, j) - q_max)),
                             std::numeric_limits<double>::min());
      soft = sinkhorn(m, cfg.sinkhorn_tol, cfg.sinkhorn_max_iters).m;
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n_prime; ++j) soft_real(i, j) = soft(i, j);
  return linear_assignment(soft_real);
}

}  // namespace graphmatch
