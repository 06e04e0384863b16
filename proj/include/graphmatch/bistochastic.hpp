#pragma once

#include <cmath>
#include <cstddef>

#include "graphmatch/core.hpp"
#include "graphmatch/matrix.hpp"

namespace graphmatch {

/// Non-learned compatibility construction with bistochastic normalization.
/// final_change is the largest entry delta of the last sweep.
struct BistochasticBaseline {
  CompatibilityTables tables;
  double final_change = 0.0;
  int sweeps = 0;
};

/// Baseline compatibilities without learning: exponential-decay node term
/// exp(-||G_i - G'_i'||^2) followed by alternating row/column normalization
/// until the largest per-entry change of a sweep drops below delta. The
/// exponential (rather than squared-difference) node term is used only
/// here, where it is known to help the normalization-based method. The
/// returned edge weight is 1; linear use of the baseline zeroes it.
inline BistochasticBaseline bistochastic_normalize_baseline(
    const AttributedGraph& g, const AttributedGraph& g_prime,
    double delta = 1e-5) {
  detail::require(delta > 0.0, "bistochastic baseline: delta must be positive");
  detail::require(g.size() >= 1 && g_prime.size() >= 1,
                  "bistochastic baseline: empty graph");
  detail::require(g.attr_dim() == g_prime.attr_dim(),
                  "bistochastic baseline: attribute dimension mismatch");
  detail::require(g.attr_dim() >= 1, "bistochastic baseline: node attributes required");

  const std::size_t n = g.size();
  const std::size_t n_prime = g_prime.size();
  MatrixD c(n, n_prime, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = g.node_attrs.row(i);
    for (std::size_t j = 0; j < n_prime; ++j) {
      const auto b = g_prime.node_attrs.row(j);
      double sq = 0.0;
      for (std::size_t r = 0; r < a.size(); ++r) {
        const double d = a[r] - b[r];
        sq += d * d;
      }
      // Floor keeps rows normalizable when every entry underflows.
      c(i, j) = std::max(std::exp(-sq), 1e-300);
    }
  }

  BistochasticBaseline out;
  out.final_change = delta;
  const int max_sweeps = 1000;
  MatrixD prev = c;
  while (out.sweeps < max_sweeps) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_prime; ++j) s += c(i, j);
      for (std::size_t j = 0; j < n_prime; ++j) c(i, j) /= s;
    }
    for (std::size_t j = 0; j < n_prime; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += c(i, j);
      for (std::size_t i = 0; i < n; ++i) c(i, j) /= s;
    }
    ++out.sweeps;
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n_prime; ++j)
        change = std::max(change, std::fabs(c(i, j) - prev(i, j)));
    out.final_change = change;
    if (change < delta) break;
    prev = c;
  }
  out.tables = {std::move(c), 1.0};
  return out;
}

}  // namespace graphmatch
