#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "graphmatch/core.hpp"

namespace graphmatch {

/// One cutting plane of the empirical risk: risk(w) >= <grad, w> + offset.
struct CuttingPlane {
  std::vector<double> grad;
  double offset = 0.0;
};

/// Master iterate of the bundle method together with the dual objective
/// value, which lower-bounds the true regularized risk minimum.
struct MasterSolution {
  std::vector<double> w;
  double lower_bound = 0.0;
  std::vector<double> alpha;  // simplex coefficients, alpha[0] = zero plane
};

namespace detail {

/// Euclidean projection onto the probability simplex.
inline void project_simplex(std::vector<double>& v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double running = 0.0;
  double theta = 0.0;
  std::size_t rho = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    running += u[k];
    const double t = (running - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) {
      rho = k + 1;
      theta = t;
    }
  }
  if (rho == 0) theta = (running - 1.0) / static_cast<double>(u.size());
  for (double& x : v) x = std::max(x - theta, 0.0);
}

}  // namespace detail

/// Solves the bundle master problem
///   min_w (lambda/2)||w||^2 + max(0, max_i <a_i, w> + b_i)
/// through its dual, a QP over the simplex handled by projected gradient.
/// The zero plane is implicit (index 0 of alpha), encoding risk >= 0. The
/// warm-start alpha may be shorter than the plane count; it is padded.
inline MasterSolution solve_bundle_master(const std::vector<CuttingPlane>& planes,
                                          double lambda,
                                          const std::vector<double>& warm_alpha = {},
                                          double tol = 1e-10,
                                          int max_iters = 20000) {
  detail::require(lambda > 0.0, "bundle master: lambda must be positive");
  detail::require(!planes.empty(), "bundle master: no planes");
  const std::size_t dim = planes[0].grad.size();
  const std::size_t k = planes.size() + 1;  // + zero plane

  // Gram matrix K_ij = <a_i, a_j> / lambda and offsets b (zero plane first).
  std::vector<double> b(k, 0.0);
  for (std::size_t i = 1; i < k; ++i) b[i] = planes[i - 1].offset;
  std::vector<std::vector<double>> gram(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 1; i < k; ++i) {
    detail::require(planes[i - 1].grad.size() == dim,
                    "bundle master: inconsistent plane dimensions");
    for (std::size_t j = i; j < k; ++j) {
      double dot = 0.0;
      for (std::size_t r = 0; r < dim; ++r)
        dot += planes[i - 1].grad[r] * planes[j - 1].grad[r];
      gram[i][j] = gram[j][i] = dot / lambda;
    }
  }

  double lipschitz = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < k; ++j) row += std::fabs(gram[i][j]);
    lipschitz = std::max(lipschitz, row);
  }
  const double step = 1.0 / std::max(lipschitz, 1e-12);

  std::vector<double> alpha(k, 0.0);
  for (std::size_t i = 0; i < std::min(warm_alpha.size(), k); ++i)
    alpha[i] = warm_alpha[i];
  double mass = 0.0;
  for (double a : alpha) mass += a;
  if (mass <= 0.0) {
    alpha.assign(k, 0.0);
    alpha[0] = 1.0;
  } else {
    for (double& a : alpha) a /= mass;
  }

  std::vector<double> kalpha(k, 0.0);
  auto refresh_kalpha = [&] {
    for (std::size_t i = 0; i < k; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += gram[i][j] * alpha[j];
      kalpha[i] = s;
    }
  };
  refresh_kalpha();

  std::vector<double> next(k, 0.0);
  for (int it = 0; it < max_iters; ++it) {
    for (std::size_t i = 0; i < k; ++i) next[i] = alpha[i] + step * (b[i] - kalpha[i]);
    detail::project_simplex(next);
    double moved = 0.0;
    for (std::size_t i = 0; i < k; ++i) moved = std::max(moved, std::fabs(next[i] - alpha[i]));
    alpha.swap(next);
    refresh_kalpha();
    if (moved <= tol) break;
  }

  MasterSolution sol;
  sol.alpha = alpha;
  sol.w.assign(dim, 0.0);
  for (std::size_t i = 1; i < k; ++i) {
    if (alpha[i] == 0.0) continue;
    for (std::size_t r = 0; r < dim; ++r)
      sol.w[r] -= alpha[i] * planes[i - 1].grad[r] / lambda;
  }
  // Dual value D(alpha) = b'alpha - (1/2) alpha'K alpha; weak duality makes
  // it a valid lower bound regardless of how accurate alpha is.
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    quad += alpha[i] * kalpha[i];
    lin += alpha[i] * b[i];
  }
  sol.lower_bound = lin - 0.5 * quad;
  return sol;
}

}  // namespace graphmatch
