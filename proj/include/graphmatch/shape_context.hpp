#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "graphmatch/core.hpp"
#include "graphmatch/matrix.hpp"

namespace graphmatch {

/// Log-free shape context binning: 12 equal angular sectors over [0, 2pi)
/// and radial bins (0,0.125), [0.125,0.25), [0.25,0.5), [0.5,1), [1,2),
/// radii in units of the mean pairwise distance of the scene.
struct ShapeContextConfig {
  int angular_bins = 12;
  std::vector<double> radial_bin_edges = {0.125, 0.25, 0.5, 1.0, 2.0};

  int radial_bins() const noexcept {
    return static_cast<int>(radial_bin_edges.size());
  }
  int attr_dim() const noexcept { return angular_bins * radial_bins(); }

  void validate() const {
    detail::require(angular_bins >= 1, "shape context: angular_bins >= 1");
    detail::require(!radial_bin_edges.empty(), "shape context: need radial bins");
    double prev = 0.0;
    for (double e : radial_bin_edges) {
      detail::require(e > prev, "shape context: radial edges must be increasing and positive");
      prev = e;
    }
  }
};

/// Per-node histograms of where the other points fall, as (angle sector,
/// radius ring) counts. Feature layout groups by radial bin: entries
/// [r*angular_bins, (r+1)*angular_bins) hold ring r, so the first 12
/// features are the innermost ring.
inline MatrixD shape_context(const std::vector<Point2>& points,
                             const ShapeContextConfig& cfg = {}) {
  cfg.validate();
  const std::size_t n = points.size();
  detail::require(n >= 2, "shape context: need at least 2 points");

  double dist_sum = 0.0;
  std::size_t pair_count = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      dist_sum += distance(points[i], points[j]);
      ++pair_count;
    }
  const double mean_dist = dist_sum / static_cast<double>(pair_count);
  detail::require(mean_dist > 0.0, "shape context: all points coincident");

  const double sector = 2.0 * std::numbers::pi / cfg.angular_bins;
  MatrixD attrs(n, static_cast<std::size_t>(cfg.attr_dim()), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double r = distance(points[i], points[j]) / mean_dist;
      if (r <= 0.0 || r >= cfg.radial_bin_edges.back()) continue;
      const auto it = std::upper_bound(cfg.radial_bin_edges.begin(),
                                       cfg.radial_bin_edges.end(), r);
      const int radial = static_cast<int>(it - cfg.radial_bin_edges.begin());
      double angle = std::atan2(points[j].y - points[i].y,
                                points[j].x - points[i].x);
      if (angle < 0.0) angle += 2.0 * std::numbers::pi;
      int angular = static_cast<int>(angle / sector);
      if (angular >= cfg.angular_bins) angular = cfg.angular_bins - 1;
      attrs(i, static_cast<std::size_t>(radial * cfg.angular_bins + angular)) += 1.0;
    }
  }
  return attrs;
}

}  // namespace graphmatch
