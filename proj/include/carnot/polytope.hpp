#pragma once

#include "carnot/group.hpp"

#include <vector>

namespace carnot {

/// Finite-vertex convex set in the horizontal layer.
///
/// Point sets of affine dimension <= 3 are reduced to their extreme points
/// (1-D interval, monotone-chain polygon, incremental 3-D hull). Higher
/// dimensional sets are stored as a deduplicated vertex cloud; support,
/// distance and Hausdorff queries work the same way on both.
class ConvexPolytope {
 public:
  ConvexPolytope() = default;

  static ConvexPolytope hull(const std::vector<Vec>& points);
  static ConvexPolytope singleton(const Vec& p) { return hull({p}); }

  int dim() const { return dim_; }
  bool empty() const { return vertices_.empty(); }
  const std::vector<Vec>& vertices() const { return vertices_; }
  /// True when the vertices are known to be extreme points.
  bool reduced() const { return reduced_; }
  int affine_dim() const { return affine_dim_; }

  double support(const Vec& h) const;
  Vec nearest_point(const Vec& p) const;
  double distance(const Vec& p) const { return (nearest_point(p) - p).norm(); }
  bool contains(const Vec& p, double tol) const { return distance(p) <= tol; }
  double diameter() const;
  Vec centroid() const;

  /// Image under p -> (p - shift) / scale.
  ConvexPolytope affine_image(const Vec& shift, double scale) const;

 private:
  int dim_ = 0;
  int affine_dim_ = -1;
  bool reduced_ = true;
  std::vector<Vec> vertices_;
};

/// sup over a in A of dist(a, B).
double excess(const ConvexPolytope& a, const ConvexPolytope& b);
double hausdorff(const ConvexPolytope& a, const ConvexPolytope& b);

/// Minimum-norm point of the convex hull of `points` (Wolfe's algorithm).
Vec min_norm_point(const std::vector<Vec>& points);

}  // namespace carnot
