#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphmatch/matrix.hpp"

namespace graphmatch {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

inline double squared_distance(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double distance(const Point2& a, const Point2& b) {
  return std::sqrt(squared_distance(a, b));
}

namespace detail {
inline void require(bool cond, const std::string& message) {
  if (!cond) throw std::invalid_argument(message);
}
}  // namespace detail

/// Point set with per-node attribute vectors and a binary adjacency
/// structure. Immutable by convention once built.
struct AttributedGraph {
  std::vector<Point2> points;
  MatrixD node_attrs;      // size() x attr_dim
  BinaryMatrix adjacency;  // symmetric, zero diagonal, entries in {0,1}

  std::size_t size() const noexcept { return points.size(); }
  std::size_t attr_dim() const noexcept { return node_attrs.cols(); }
};

/// Throws if the graph violates its structural invariants.
inline void check_graph(const AttributedGraph& g) {
  const std::size_t n = g.points.size();
  detail::require(g.node_attrs.rows() == n,
                  "graph: node_attrs row count must equal point count");
  detail::require(g.adjacency.rows() == n && g.adjacency.cols() == n,
                  "graph: adjacency must be square of node count");
  for (std::size_t i = 0; i < n; ++i) {
    detail::require(g.adjacency(i, i) == 0, "graph: adjacency diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      detail::require(g.adjacency(i, j) <= 1, "graph: adjacency entries must be 0/1");
      detail::require(g.adjacency(i, j) == g.adjacency(j, i),
                      "graph: adjacency must be symmetric");
    }
  }
}

/// 0/1 assignment matrix mapping the query graph (rows) into the target
/// graph (columns). A valid matching has row sums exactly 1 and column sums
/// at most 1; relaxed matrices (e.g. all-zero) are representable for
/// evaluation purposes.
struct Matching {
  BinaryMatrix assign;

  Matching() = default;
  explicit Matching(BinaryMatrix m) : assign(std::move(m)) {}
  Matching(std::size_t rows, std::size_t cols) : assign(rows, cols, 0) {}

  std::size_t rows() const noexcept { return assign.rows(); }
  std::size_t cols() const noexcept { return assign.cols(); }

  /// Builds a matching from a row -> column map. Every target must be a
  /// distinct valid column.
  static Matching from_assignments(const std::vector<int>& target_of,
                                   std::size_t num_targets) {
    Matching y(target_of.size(), num_targets);
    std::vector<char> used(num_targets, 0);
    for (std::size_t i = 0; i < target_of.size(); ++i) {
      const int t = target_of[i];
      detail::require(t >= 0 && static_cast<std::size_t>(t) < num_targets,
                      "matching: target index out of range");
      detail::require(!used[t], "matching: duplicate target assignment");
      used[t] = 1;
      y.assign(i, static_cast<std::size_t>(t)) = 1;
    }
    return y;
  }

  /// Column assigned to each row, -1 for unassigned rows. Meaningful for
  /// matrices whose rows hold at most one 1.
  std::vector<int> row_targets() const {
    std::vector<int> t(assign.rows(), -1);
    for (std::size_t i = 0; i < assign.rows(); ++i)
      for (std::size_t j = 0; j < assign.cols(); ++j)
        if (assign(i, j)) t[i] = static_cast<int>(j);
    return t;
  }

  bool operator==(const Matching&) const = default;
};

/// Node and edge weights of the linear compatibility parametrization;
/// the learner's parameter vector is the concatenation [w1 w2].
struct WeightVector {
  std::vector<double> node_weights;  // w1, one per attribute feature
  double edge_weight = 0.0;          // w2, scalar

  std::size_t dim() const noexcept { return node_weights.size() + 1; }

  static WeightVector zeros(std::size_t attr_dim) {
    return {std::vector<double>(attr_dim, 0.0), 0.0};
  }
  static WeightVector flat(std::size_t attr_dim, double edge) {
    return {std::vector<double>(attr_dim, 1.0), edge};
  }

  std::vector<double> flatten() const {
    std::vector<double> v = node_weights;
    v.push_back(edge_weight);
    return v;
  }
  static WeightVector from_flat(const std::vector<double>& v) {
    detail::require(!v.empty(), "weights: flat vector must be non-empty");
    WeightVector w;
    w.node_weights.assign(v.begin(), v.end() - 1);
    w.edge_weight = v.back();
    return w;
  }
};

/// Compatibilities for one graph pair. The pairwise table d_{ii'jj'} is
/// never materialized: it factors as edge_weight * G_ij * G'_i'j', so the
/// scalar plus the two adjacency structures represent it in full.
struct CompatibilityTables {
  MatrixD unary;             // c, n x n'
  double edge_weight = 0.0;  // multiplier of the factored quadratic term
};

/// One labeled example: a graph pair plus its ground-truth matching.
/// scene_width is the endpoint-loss scale (the image width).
struct TrainingInstance {
  AttributedGraph g;
  AttributedGraph g_prime;
  Matching y_true;
  double scene_width = 1.0;
};

/// Checks the one-to-one matching constraints for an n x n' matrix:
/// every row sums to exactly 1, every column to at most 1. Returns a
/// description of the first violated constraint, or nullopt when valid.
inline std::optional<std::string> validate_matching(const Matching& y,
                                                    std::size_t n,
                                                    std::size_t n_prime) {
  if (y.assign.rows() != n || y.assign.cols() != n_prime)
    return "shape is " + std::to_string(y.assign.rows()) + "x" +
           std::to_string(y.assign.cols()) + ", expected " + std::to_string(n) +
           "x" + std::to_string(n_prime);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n_prime; ++j)
      if (y.assign(i, j) > 1)
        return "entry (" + std::to_string(i) + "," + std::to_string(j) +
               ") is not 0/1";
  for (std::size_t i = 0; i < n; ++i) {
    int s = 0;
    for (std::size_t j = 0; j < n_prime; ++j) s += y.assign(i, j);
    if (s != 1) return "row " + std::to_string(i) + " sums to " + std::to_string(s);
  }
  for (std::size_t j = 0; j < n_prime; ++j) {
    int s = 0;
    for (std::size_t i = 0; i < n; ++i) s += y.assign(i, j);
    if (s > 1) return "column " + std::to_string(j) + " sum > 1";
  }
  return std::nullopt;
}

inline bool is_valid_matching(const Matching& y, std::size_t n, std::size_t n_prime) {
  return !validate_matching(y, n, n_prime).has_value();
}

namespace detail {

/// (A y A')_{ii'} for binary adjacencies A (n x n) and A' (n' x n') and a
/// real or binary assignment-shaped matrix y (n x n'). This is the factored
/// form of the pairwise compatibility contraction.
template <typename YMat>
inline MatrixD adjacency_field(const BinaryMatrix& a, const BinaryMatrix& a_prime,
                               const YMat& y) {
  const std::size_t n = a.rows();
  const std::size_t n_prime = a_prime.rows();
  // u = y * A'
  MatrixD u(n, n_prime, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n_prime; ++j) {
      const double yij = static_cast<double>(y(i, j));
      if (yij == 0.0) continue;
      for (std::size_t k = 0; k < n_prime; ++k)
        if (a_prime(j, k)) u(i, k) += yij;
    }
  // v = A * u
  MatrixD v(n, n_prime, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (a(i, j))
        for (std::size_t k = 0; k < n_prime; ++k) v(i, k) += u(j, k);
  return v;
}

}  // namespace detail

/// Value of the matching objective
///   sum_{ii'} c_{ii'} y_{ii'} + sum_{ii'jj'} d_{ii'jj'} y_{ii'} y_{jj'}
/// with d factored as edge_weight * G_ij * G'_i'j'. Accepts relaxed y
/// (any 0/1 matrix of the right shape).
inline double objective_value(const CompatibilityTables& tables,
                              const AttributedGraph& g,
                              const AttributedGraph& g_prime, const Matching& y) {
  const std::size_t n = g.size();
  const std::size_t n_prime = g_prime.size();
  detail::require(tables.unary.rows() == n && tables.unary.cols() == n_prime,
                  "objective_value: unary table shape mismatch");
  detail::require(y.assign.rows() == n && y.assign.cols() == n_prime,
                  "objective_value: matching shape mismatch");
  detail::require(g.adjacency.rows() == n && g_prime.adjacency.rows() == n_prime,
                  "objective_value: adjacency shape mismatch");

  double linear = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n_prime; ++j)
      if (y.assign(i, j)) linear += tables.unary(i, j);

  if (tables.edge_weight == 0.0) return linear;

  const MatrixD field =
      detail::adjacency_field(g.adjacency, g_prime.adjacency, y.assign);
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n_prime; ++j)
      if (y.assign(i, j)) quad += field(i, j);
  return linear + tables.edge_weight * quad;
}

}  // namespace graphmatch
