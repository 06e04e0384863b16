#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "graphmatch/core.hpp"

namespace graphmatch {

/// Node feature map: componentwise negated squared difference, so larger
/// attribute discrepancy means lower compatibility.
inline std::vector<double> phi1(std::span<const double> attr_i,
                                std::span<const double> attr_i_prime) {
  detail::require(attr_i.size() == attr_i_prime.size(),
                  "phi1: attribute length mismatch");
  std::vector<double> out(attr_i.size());
  for (std::size_t r = 0; r < attr_i.size(); ++r) {
    const double d = attr_i[r] - attr_i_prime[r];
    out[r] = -(d * d);
  }
  return out;
}

/// Edge feature map for binary edge attributes: 1 iff both edges present.
inline double phi2(unsigned gij, unsigned gpij) {
  detail::require(gij <= 1 && gpij <= 1, "phi2: inputs must be binary");
  return static_cast<double>(gij * gpij);
}

/// Sufficient statistics of (pair, matching): the matching objective is the
/// inner product of [w1 w2] with [node_part edge_part].
struct JointFeature {
  std::vector<double> node_part;
  double edge_part = 0.0;

  std::size_t dim() const noexcept { return node_part.size() + 1; }

  double dot(const WeightVector& w) const {
    detail::require(w.node_weights.size() == node_part.size(),
                    "joint feature: weight dimension mismatch");
    double s = 0.0;
    for (std::size_t r = 0; r < node_part.size(); ++r)
      s += w.node_weights[r] * node_part[r];
    return s + w.edge_weight * edge_part;
  }

  std::vector<double> flatten() const {
    std::vector<double> v = node_part;
    v.push_back(edge_part);
    return v;
  }

  JointFeature& operator-=(const JointFeature& other) {
    detail::require(node_part.size() == other.node_part.size(),
                    "joint feature: dimension mismatch");
    for (std::size_t r = 0; r < node_part.size(); ++r)
      node_part[r] -= other.node_part[r];
    edge_part -= other.edge_part;
    return *this;
  }
  friend JointFeature operator-(JointFeature a, const JointFeature& b) {
    a -= b;
    return a;
  }
};

/// Phi(G, G', y): node part sums y_{ii'} phi1(G_i, G'_i') over assignments;
/// edge part counts ordered edge pairs preserved by y. The quadratic sum is
/// contracted through the assignment map, never expanded over index
/// quadruples.
inline JointFeature joint_feature(const AttributedGraph& g,
                                  const AttributedGraph& g_prime,
                                  const Matching& y) {
  const std::size_t n = g.size();
  const std::size_t n_prime = g_prime.size();
  detail::require(y.assign.rows() == n && y.assign.cols() == n_prime,
                  "joint_feature: matching shape mismatch");
  detail::require(g.attr_dim() == g_prime.attr_dim(),
                  "joint_feature: attribute dimension mismatch");

  JointFeature f;
  f.node_part.assign(g.attr_dim(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = g.node_attrs.row(i);
    for (std::size_t j = 0; j < n_prime; ++j) {
      if (!y.assign(i, j)) continue;
      const auto b = g_prime.node_attrs.row(j);
      for (std::size_t r = 0; r < f.node_part.size(); ++r) {
        const double d = a[r] - b[r];
        f.node_part[r] -= d * d;
      }
    }
  }

  // Columns assigned per row; almost always 0 or 1 of them.
  std::vector<std::vector<std::size_t>> cols(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n_prime; ++j)
      if (y.assign(i, j)) cols[i].push_back(j);

  double preserved = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (cols[i].empty()) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (!g.adjacency(i, j) || cols[j].empty()) continue;
      for (const std::size_t ip : cols[i])
        for (const std::size_t jp : cols[j])
          if (g_prime.adjacency(ip, jp)) preserved += 1.0;
    }
  }
  f.edge_part = preserved;
  return f;
}

/// Psi^n(y) = Phi(G^n, G'^n, y^n) - Phi(G^n, G'^n, y).
inline JointFeature psi(const TrainingInstance& instance, const Matching& y) {
  return joint_feature(instance.g, instance.g_prime, instance.y_true) -
         joint_feature(instance.g, instance.g_prime, y);
}

}  // namespace graphmatch
