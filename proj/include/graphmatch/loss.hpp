#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "graphmatch/core.hpp"

namespace graphmatch {

/// Which training/evaluation loss to use. For the endpoint loss, sigma is
/// the image width; per-point distances clamp at sigma when clamp is set.
struct LossKind {
  enum class Kind { hamming, endpoint };
  Kind kind = Kind::hamming;
  double sigma = 1.0;
  bool clamp = true;

  static LossKind hamming() { return {Kind::hamming, 1.0, true}; }
  static LossKind endpoint(double sigma, bool clamp = true) {
    detail::require(sigma > 0.0, "endpoint loss: sigma must be positive");
    return {Kind::endpoint, sigma, clamp};
  }

  const char* name() const {
    return kind == Kind::hamming ? "hamming" : "endpoint";
  }
};

/// Normalized Hamming loss: fraction of ground-truth assignments missed,
/// 1 - <y, y_true> / ||y_true||_F^2.
inline double hamming_loss(const Matching& y, const Matching& y_true) {
  detail::require(y.assign.rows() == y_true.assign.rows() &&
                      y.assign.cols() == y_true.assign.cols(),
                  "hamming_loss: shape mismatch");
  double norm = 0.0;
  double overlap = 0.0;
  for (std::size_t i = 0; i < y.assign.rows(); ++i)
    for (std::size_t j = 0; j < y.assign.cols(); ++j) {
      if (y_true.assign(i, j)) {
        norm += 1.0;
        if (y.assign(i, j)) overlap += 1.0;
      }
    }
  detail::require(norm > 0.0, "hamming_loss: empty ground truth");
  return 1.0 - overlap / norm;
}

/// Endpoint error: mean over query nodes of the distance from the chosen
/// target point to the true position, scaled by sigma and clamped at 1.
/// Zero exactly when every chosen point coincides with its true position.
inline double endpoint_loss(const Matching& y,
                            const std::vector<Point2>& true_positions,
                            const std::vector<Point2>& target_points,
                            double sigma, bool clamp = true) {
  detail::require(sigma > 0.0, "endpoint_loss: sigma must be positive");
  const std::size_t n = y.assign.rows();
  detail::require(true_positions.size() == n,
                  "endpoint_loss: one true position per query node");
  detail::require(target_points.size() == y.assign.cols(),
                  "endpoint_loss: one coordinate per target node");
  const auto targets = y.row_targets();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    detail::require(targets[i] >= 0, "endpoint_loss: unassigned query node");
    double term = distance(target_points[targets[i]], true_positions[i]) / sigma;
    if (clamp) term = std::min(term, 1.0);
    total += term;
  }
  return total / static_cast<double>(n);
}

/// The complement form as printed in some write-ups (1 - mean term).
/// Compatibility only; it rewards distant matches and is not used by the
/// learner.
inline double endpoint_loss_literal(const Matching& y,
                                    const std::vector<Point2>& true_positions,
                                    const std::vector<Point2>& target_points,
                                    double sigma, bool clamp = true) {
  return 1.0 - endpoint_loss(y, true_positions, target_points, sigma, clamp);
}

/// True target positions of each query node under the instance's ground
/// truth, used by the endpoint loss.
inline std::vector<Point2> true_positions_of(const TrainingInstance& instance) {
  const auto cols = instance.y_true.row_targets();
  std::vector<Point2> out(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    detail::require(cols[i] >= 0, "instance ground truth has an unassigned row");
    out[i] = instance.g_prime.points[cols[i]];
  }
  return out;
}

/// Loss of a predicted matching against an instance's ground truth. For the
/// endpoint kind, sigma comes from the instance's scene width.
inline double instance_loss(const TrainingInstance& instance, const Matching& y,
                            const LossKind& kind) {
  if (kind.kind == LossKind::Kind::hamming) return hamming_loss(y, instance.y_true);
  return endpoint_loss(y, true_positions_of(instance), instance.g_prime.points,
                       instance.scene_width, kind.clamp);
}

}  // namespace graphmatch
