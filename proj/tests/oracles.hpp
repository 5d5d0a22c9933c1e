#pragma once
// Independent reference computations for the test suites. Nothing here calls
// into the simplex solver or the polytope algebra it is used to check.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Calls fn for every k-subset of {0..n-1} in lexicographic order.
inline void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  if (k > n) return;
  for (;;) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

/// All vertices of {x | Gx <= g} by solving every d x d active subsystem.
inline std::vector<Vec> vertices(const Mat& G, const Vec& g, double tol = 1e-9) {
  const int d = static_cast<int>(G.cols());
  std::vector<Vec> out;
  for_each_subset(static_cast<int>(G.rows()), d, [&](const std::vector<int>& rows) {
    Mat M(d, d);
    Vec rhs(d);
    for (int k = 0; k < d; ++k) {
      M.row(k) = G.row(rows[k]);
      rhs[k] = g[rows[k]];
    }
    Eigen::FullPivLU<Mat> lu(M);
    if (lu.rank() < d) return;
    const Vec v = lu.solve(rhs);
    if (((G * v - g).array() <= tol).all()) out.push_back(v);
  });
  return out;
}

/// min c.x over {Gx <= g} by enumerating basic feasible solutions. Requires
/// the optimum to be attained at a vertex (bounded, pointed feasible set).
inline std::optional<double> lp_min_by_bases(const Vec& c, const Mat& G, const Vec& g) {
  std::optional<double> best;
  for (const auto& v : vertices(G, g, 1e-9)) {
    const double val = c.dot(v);
    if (!best || val < *best) best = val;
  }
  return best;
}

/// Maximum of a.x over a finite point set.
inline double support_of_points(const std::vector<Vec>& pts, const Vec& a) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : pts) best = std::max(best, a.dot(p));
  return best;
}

/// Incircle of a triangle: center = (a*A + b*B + c*C)/(a+b+c), r = area / s.
inline std::pair<Eigen::Vector2d, double> incircle(const Eigen::Vector2d& A, const Eigen::Vector2d& B,
                                                   const Eigen::Vector2d& C) {
  const double a = (B - C).norm();
  const double b = (C - A).norm();
  const double c = (A - B).norm();
  const double s = 0.5 * (a + b + c);
  const double area = 0.5 * std::abs((B - A).x() * (C - A).y() - (B - A).y() * (C - A).x());
  return {(a * A + b * B + c * C) / (a + b + c), area / s};
}

/// Random unit vector.
inline Vec unit_vector(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n01;
  Vec v(d);
  for (int j = 0; j < d; ++j) v[j] = n01(rng);
  return v / v.norm();
}

/// Random bounded polytope: m random unit normals around the origin plus a
/// bounding box of half-width `box`. Offsets are drawn in [lo, hi].
inline std::pair<Mat, Vec> random_polytope(std::mt19937_64& rng, int d, int m, double lo = 0.3,
                                           double hi = 1.0, double box = 1.5) {
  std::uniform_real_distribution<double> off(lo, hi);
  Mat G(m + 2 * d, d);
  Vec g(m + 2 * d);
  for (int i = 0; i < m; ++i) {
    G.row(i) = unit_vector(rng, d).transpose();
    g[i] = off(rng);
  }
  G.bottomRows(2 * d) << Mat::Identity(d, d), -Mat::Identity(d, d);
  g.tail(2 * d).setConstant(box);
  return {G, g};
}

// Minimizes a convex function of two variables by repeated grid zooming.
template <class F>
double grid_minimize_2d(F f, double cx, double cy, double half_width) {
  double best = f(cx, cy);
  for (int level = 0; level < 6; ++level) {
    const int n = 60;
    double bx = cx, by = cy;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        const double x = cx - half_width + 2.0 * half_width * i / n;
        const double y = cy - half_width + 2.0 * half_width * j / n;
        const double v = f(x, y);
        if (v < best) {
          best = v;
          bx = x;
          by = y;
        }
      }
    }
    cx = bx;
    cy = by;
    half_width /= 8.0;
  }
  return best;
}

}  // namespace oracle
