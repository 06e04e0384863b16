#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <vector>

#include "graphmatch/core.hpp"
#include "graphmatch/matrix.hpp"

namespace graphmatch {

namespace detail {

// > 0 when d lies strictly inside the circumcircle of the CCW triangle abc.
inline double incircle(const Point2& a, const Point2& b, const Point2& c,
                       const Point2& d) {
  const double ax = a.x - d.x, ay = a.y - d.y;
  const double bx = b.x - d.x, by = b.y - d.y;
  const double cx = c.x - d.x, cy = c.y - d.y;
  const double a2 = ax * ax + ay * ay;
  const double b2 = bx * bx + by * by;
  const double c2 = cx * cx + cy * cy;
  return ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) +
         a2 * (bx * cy - by * cx);
}

inline double orient2d(const Point2& a, const Point2& b, const Point2& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

}  // namespace detail

/// Delaunay triangulation of a 2-D point set by Bowyer-Watson insertion,
/// returned as a symmetric 0/1 adjacency over the input indices. Points are
/// inserted in lexicographic (x, y) order, which fixes the triangulation
/// chosen for cocircular degeneracies.
inline BinaryMatrix delaunay_adjacency(const std::vector<Point2>& points) {
  const std::size_t n = points.size();
  detail::require(n >= 3, "delaunay: need at least 3 points");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      detail::require(points[i] != points[j], "delaunay: duplicate points");

  double lo_x = points[0].x, hi_x = points[0].x;
  double lo_y = points[0].y, hi_y = points[0].y;
  for (const Point2& p : points) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  }
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
  const double cx = 0.5 * (lo_x + hi_x);
  const double cy = 0.5 * (lo_y + hi_y);

  // Working point list with the super-triangle appended at indices n..n+2.
  std::vector<Point2> pts = points;
  pts.push_back({cx - 40.0 * span, cy - 20.0 * span});
  pts.push_back({cx + 40.0 * span, cy - 20.0 * span});
  pts.push_back({cx, cy + 40.0 * span});

  struct Tri {
    std::array<std::size_t, 3> v;  // CCW order
  };
  std::vector<Tri> tris;
  tris.push_back({{n, n + 1, n + 2}});

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].x != points[b].x) return points[a].x < points[b].x;
    return points[a].y < points[b].y;
  });

  using Edge = std::pair<std::size_t, std::size_t>;
  for (const std::size_t pi : order) {
    const Point2& p = pts[pi];
    std::vector<Tri> keep;
    std::map<Edge, int> boundary;  // edge -> multiplicity among bad triangles
    keep.reserve(tris.size());
    for (const Tri& t : tris) {
      if (detail::incircle(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]], p) > 0.0) {
        for (int e = 0; e < 3; ++e) {
          std::size_t u = t.v[e], w = t.v[(e + 1) % 3];
          if (u > w) std::swap(u, w);
          ++boundary[{u, w}];
        }
      } else {
        keep.push_back(t);
      }
    }
    tris = std::move(keep);
    for (const auto& [edge, count] : boundary) {
      if (count != 1) continue;  // interior to the cavity
      Tri t{{edge.first, edge.second, pi}};
      if (detail::orient2d(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]]) < 0.0)
        std::swap(t.v[0], t.v[1]);
      tris.push_back(t);
    }
  }

  BinaryMatrix adjacency(n, n, 0);
  bool any = false;
  for (const Tri& t : tris) {
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;  // super vertex
    for (int e = 0; e < 3; ++e) {
      const std::size_t u = t.v[e], w = t.v[(e + 1) % 3];
      adjacency(u, w) = 1;
      adjacency(w, u) = 1;
      any = true;
    }
  }
  detail::require(any, "delaunay: points are collinear");
  return adjacency;
}

}  // namespace graphmatch
