#pragma once

#include "koopbrs/lp.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace koopbrs {

/// {x | H x <= h}. An infeasible all-zero row collapses the value to the
/// canonical empty polytope of the same dimension; trivially true all-zero
/// rows are dropped.
class HPolytope {
 public:
  HPolytope() = default;
  HPolytope(Mat H, Vec h);

  /// The whole space R^dim (no rows).
  static HPolytope universe(int dim);
  /// {x | x_1 <= -1, -x_1 <= -1}.
  static HPolytope empty(int dim);

  int dim() const { return dim_; }
  int rows() const { return static_cast<int>(H_.rows()); }
  const Mat& H() const { return H_; }
  const Vec& h() const { return h_; }

 private:
  Mat H_;
  Vec h_;
  int dim_ = 0;
};

/// Axis-aligned box center +- radii (an infinity-norm ball when radii are equal).
struct Box {
  Vec center;
  Vec radii;

  Box() = default;
  Box(Vec c, Vec r);
  static Box from_bounds(const Vec& lo, const Vec& hi);

  int dim() const { return static_cast<int>(center.size()); }
  Vec lower() const { return center - radii; }
  Vec upper() const { return center + radii; }
  double volume() const;
};

struct PolyUnion {
  std::vector<HPolytope> pieces;
};

HPolytope from_interval_box(const Vec& lo, const Vec& hi);
HPolytope to_polytope(const Box& box);

/// Exact support function of a box.
double support(const Box& box, const Vec& direction);

/// sup { a.x | x in P }; +inf when unbounded. Throws EmptyPolytope.
double support(const HPolytope& P, const Vec& direction);

/// Pontryagin difference Z - W.
HPolytope erode(const HPolytope& Z, const Box& W);
HPolytope intersect(const HPolytope& P, const HPolytope& Q);
HPolytope cartesian_product(const HPolytope& P, const HPolytope& Q);
/// {y | M y + v in P}.
HPolytope affine_preimage(const HPolytope& P, const Mat& M, const Vec& v);

bool is_empty(const HPolytope& P);
bool contains_point(const HPolytope& P, const Vec& x, double tol = 1e-8);
/// Q subset of P, decided row by row through support functions of Q.
bool contains(const HPolytope& P, const HPolytope& Q, double tol = 1e-8);

struct ChebyshevBall {
  Vec center;
  double radius = 0.0;
};
ChebyshevBall chebyshev_center(const HPolytope& P);

/// Drops rows implied by the others; duplicate rows keep one copy.
HPolytope remove_redundant(const HPolytope& P);

/// Orthogonal projection onto the listed coordinates (kept in the given order)
/// by Fourier-Motzkin elimination with redundancy pruning after each step.
HPolytope project(const HPolytope& P, std::span<const int> keep);
/// Projection onto the first `count` coordinates.
HPolytope project_leading(const HPolytope& P, int count);

Box bounding_box(const HPolytope& P);

struct OrientedBox {
  HPolytope polytope;
  Mat axes;  ///< columns are the principal directions, descending variance
  bool degenerate = false;
};
/// PCA-aligned bounding box of a point cloud (rows of `points`). A rank
/// deficient covariance falls back to the axis-aligned box inflated by 1e-6.
OrientedBox rotated_bounding_box(const Mat& points);

/// Halves of P split through its Chebyshev center along the axis of greatest
/// bounding-box span (lowest index on ties).
std::pair<HPolytope, HPolytope> split_through_center(const HPolytope& P);

/// Monte-Carlo volume of a union restricted to a sampling box.
double union_volume_estimate(const PolyUnion& U, const Box& sampling_box, std::int64_t n,
                             std::uint64_t seed);

/// Counter-clockwise vertex loop of a bounded 2-D polytope (empty when P is empty).
std::vector<Eigen::Vector2d> polygon_vertices(const HPolytope& P);

}  // namespace koopbrs
