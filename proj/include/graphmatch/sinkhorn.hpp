#pragma once

#include <cmath>
#include <cstddef>

#include "graphmatch/core.hpp"
#include "graphmatch/matrix.hpp"

namespace graphmatch {

/// Result of Sinkhorn normalization; deviation is the largest |sum - 1|
/// over all rows and columns of m.
struct DoublyStochasticMatrix {
  MatrixD m;
  double deviation = 0.0;
  int iterations = 0;
};

namespace detail {
inline double stochastic_deviation(const MatrixD& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j);
    worst = std::max(worst, std::fabs(s - 1.0));
  }
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, j);
    worst = std::max(worst, std::fabs(s - 1.0));
  }
  return worst;
}
}  // namespace detail

/// Alternating row/column normalization of a strictly positive matrix,
/// stopping once every row and column sum is within tol of 1 or after
/// max_iters full sweeps. An input already within tolerance is returned
/// unchanged with zero iterations.
inline DoublyStochasticMatrix sinkhorn(const MatrixD& m, double tol = 1e-6,
                                       int max_iters = 300) {
  detail::require(!m.empty(), "sinkhorn: empty matrix");
  detail::require(tol > 0.0 && max_iters >= 1, "sinkhorn: bad tolerance/iterations");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      detail::require(m(i, j) > 0.0 && std::isfinite(m(i, j)),
                      "sinkhorn: entries must be strictly positive and finite");

  DoublyStochasticMatrix out{m, detail::stochastic_deviation(m), 0};
  while (out.deviation >= tol && out.iterations < max_iters) {
    for (std::size_t i = 0; i < out.m.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < out.m.cols(); ++j) s += out.m(i, j);
      for (std::size_t j = 0; j < out.m.cols(); ++j) out.m(i, j) /= s;
    }
    for (std::size_t j = 0; j < out.m.cols(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < out.m.rows(); ++i) s += out.m(i, j);
      for (std::size_t i = 0; i < out.m.rows(); ++i) out.m(i, j) /= s;
    }
    ++out.iterations;
    out.deviation = detail::stochastic_deviation(out.m);
  }
  return out;
}

}  // namespace graphmatch
