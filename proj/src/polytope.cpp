#include "koopbrs/polytope.hpp"

#include "koopbrs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>

namespace koopbrs {
namespace {

constexpr double kZeroRowTol = 1e-13;
constexpr double kRedundancyTol = 1e-9;
constexpr double kDuplicateTol = 1e-12;

void require_dim(int a, int b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": dimension " + std::to_string(a) + " vs " +
                            std::to_string(b));
  }
}

// Unit 2-norm rows with duplicates (same normal up to kDuplicateTol) collapsed to the
// tightest offset. Duplicates are found among lexicographic neighbours.
HPolytope normalized_unique(const HPolytope& P) {
  const int d = P.dim();
  const int R = P.rows();
  Mat H(R, d);
  Vec h(R);
  for (int i = 0; i < R; ++i) {
    const double norm = P.H().row(i).norm();
    H.row(i) = P.H().row(i) / norm;
    h[i] = P.h()[i] / norm;
  }
  std::vector<int> order(R);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    for (int j = 0; j < d; ++j) {
      if (H(a, j) != H(b, j)) return H(a, j) < H(b, j);
    }
    return false;
  });
  // group[i] = representative (lowest original index) of row i's duplicate run.
  std::vector<int> rep(R);
  for (int k = 0; k < R; ++k) {
    const int i = order[k];
    rep[i] = i;
    if (k > 0) {
      const int prev = order[k - 1];
      if ((H.row(prev) - H.row(i)).cwiseAbs().maxCoeff() <= kDuplicateTol) rep[i] = rep[prev];
    }
  }
  std::vector<int> first(R, -1);
  std::vector<int> out;
  Vec off(R);
  for (int i = 0; i < R; ++i) {
    int r = rep[i];
    while (rep[r] != r) r = rep[r];
    if (first[r] < 0) {
      first[r] = static_cast<int>(out.size());
      out.push_back(i);
      off[first[r]] = h[i];
    } else {
      off[first[r]] = std::min(off[first[r]], h[i]);
    }
  }
  Mat Hn(out.size(), d);
  Vec hn(out.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    Hn.row(k) = H.row(out[k]);
    hn[k] = off[k];
  }
  return HPolytope(std::move(Hn), std::move(hn));
}

HPolytope select_rows(const HPolytope& P, const std::vector<int>& idx) {
  Mat H(idx.size(), P.dim());
  Vec h(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    H.row(k) = P.H().row(idx[k]);
    h[k] = P.h()[idx[k]];
  }
  return HPolytope(std::move(H), std::move(h));
}

// One Fourier-Motzkin step eliminating column k.
HPolytope eliminate(const HPolytope& P, int k) {
  const int d = P.dim();
  std::vector<int> pos, neg, zero;
  for (int i = 0; i < P.rows(); ++i) {
    const double a = P.H()(i, k);
    if (a > kZeroRowTol) {
      pos.push_back(i);
    } else if (a < -kZeroRowTol) {
      neg.push_back(i);
    } else {
      zero.push_back(i);
    }
  }
  const std::size_t count = zero.size() + pos.size() * neg.size();
  Mat H(count, d - 1);
  Vec h(count);
  auto drop_col = [&](const Eigen::RowVectorXd& row) {
    Eigen::RowVectorXd out(d - 1);
    out << row.head(k), row.tail(d - k - 1);
    return out;
  };
  std::size_t r = 0;
  for (int i : zero) {
    H.row(r) = drop_col(P.H().row(i));
    h[r++] = P.h()[i];
  }
  for (int p : pos) {
    for (int n : neg) {
      const double lp = -P.H()(n, k);
      const double ln = P.H()(p, k);
      H.row(r) = drop_col(lp * P.H().row(p) + ln * P.H().row(n));
      h[r++] = lp * P.h()[p] + ln * P.h()[n];
    }
  }
  return HPolytope(std::move(H), std::move(h));
}

}  // namespace

HPolytope::HPolytope(Mat H, Vec h) {
  if (H.rows() != h.size()) {
    throw DimensionMismatch("polytope has " + std::to_string(H.rows()) + " normals but " +
                            std::to_string(h.size()) + " offsets");
  }
  if (H.cols() < 1) throw DimensionMismatch("polytope dimension must be at least 1");
  dim_ = static_cast<int>(H.cols());
  std::vector<int> keep;
  keep.reserve(H.rows());
  for (int i = 0; i < H.rows(); ++i) {
    if (H.row(i).cwiseAbs().maxCoeff() > kZeroRowTol) {
      keep.push_back(i);
    } else if (h[i] < -lp::kFeasibilityTol) {
      *this = empty(dim_);
      return;
    }
  }
  if (static_cast<long>(keep.size()) == H.rows()) {
    H_ = std::move(H);
    h_ = std::move(h);
    return;
  }
  H_.resize(keep.size(), dim_);
  h_.resize(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    H_.row(k) = H.row(keep[k]);
    h_[k] = h[keep[k]];
  }
}

HPolytope HPolytope::universe(int dim) { return HPolytope(Mat(0, dim), Vec(0)); }

HPolytope HPolytope::empty(int dim) {
  if (dim < 1) throw DimensionMismatch("polytope dimension must be at least 1");
  HPolytope P;
  P.dim_ = dim;
  P.H_ = Mat::Zero(2, dim);
  P.H_(0, 0) = 1.0;
  P.H_(1, 0) = -1.0;
  P.h_ = Vec::Constant(2, -1.0);
  return P;
}

Box::Box(Vec c, Vec r) : center(std::move(c)), radii(std::move(r)) {
  require_dim(static_cast<int>(center.size()), static_cast<int>(radii.size()), "box");
  if ((radii.array() < 0.0).any()) throw Error("box radii must be nonnegative");
}

Box Box::from_bounds(const Vec& lo, const Vec& hi) {
  require_dim(static_cast<int>(lo.size()), static_cast<int>(hi.size()), "box bounds");
  if ((lo.array() > hi.array()).any()) throw Error("box lower bound exceeds upper bound");
  return Box(0.5 * (lo + hi), 0.5 * (hi - lo));
}

double Box::volume() const { return (2.0 * radii).prod(); }

HPolytope from_interval_box(const Vec& lo, const Vec& hi) {
  const int d = static_cast<int>(lo.size());
  require_dim(d, static_cast<int>(hi.size()), "interval box");
  if ((lo.array() > hi.array()).any()) throw Error("interval box lower bound exceeds upper bound");
  Mat H(2 * d, d);
  H << Mat::Identity(d, d), -Mat::Identity(d, d);
  Vec h(2 * d);
  h << hi, -lo;
  return HPolytope(std::move(H), std::move(h));
}

HPolytope to_polytope(const Box& box) { return from_interval_box(box.lower(), box.upper()); }

double support(const Box& box, const Vec& direction) {
  require_dim(box.dim(), static_cast<int>(direction.size()), "box support");
  return direction.dot(box.center) + direction.cwiseAbs().dot(box.radii);
}

double support(const HPolytope& P, const Vec& direction) {
  require_dim(P.dim(), static_cast<int>(direction.size()), "polytope support");
  const auto sol = lp::maximize(direction, P.H(), P.h());
  switch (sol.status) {
    case lp::Status::Optimal:
      return sol.objective_value;
    case lp::Status::Unbounded:
      return std::numeric_limits<double>::infinity();
    case lp::Status::Infeasible:
      break;
  }
  throw EmptyPolytope("support of an empty polytope");
}

HPolytope erode(const HPolytope& Z, const Box& W) {
  require_dim(Z.dim(), W.dim(), "erode");
  Vec h = Z.h();
  for (int i = 0; i < Z.rows(); ++i) h[i] -= support(W, Z.H().row(i).transpose());
  return HPolytope(Z.H(), std::move(h));
}

HPolytope intersect(const HPolytope& P, const HPolytope& Q) {
  require_dim(P.dim(), Q.dim(), "intersect");
  Mat H(P.rows() + Q.rows(), P.dim());
  H << P.H(), Q.H();
  Vec h(P.rows() + Q.rows());
  h << P.h(), Q.h();
  return HPolytope(std::move(H), std::move(h));
}

HPolytope cartesian_product(const HPolytope& P, const HPolytope& Q) {
  const int d = P.dim() + Q.dim();
  Mat H = Mat::Zero(P.rows() + Q.rows(), d);
  H.topLeftCorner(P.rows(), P.dim()) = P.H();
  H.bottomRightCorner(Q.rows(), Q.dim()) = Q.H();
  Vec h(P.rows() + Q.rows());
  h << P.h(), Q.h();
  return HPolytope(std::move(H), std::move(h));
}

HPolytope affine_preimage(const HPolytope& P, const Mat& M, const Vec& v) {
  require_dim(static_cast<int>(M.rows()), P.dim(), "affine preimage rows");
  require_dim(static_cast<int>(v.size()), P.dim(), "affine preimage offset");
  return HPolytope(P.H() * M, P.h() - P.H() * v);
}

bool is_empty(const HPolytope& P) {
  const auto sol = lp::minimize(Vec::Zero(P.dim()), P.H(), P.h());
  return sol.status == lp::Status::Infeasible;
}

bool contains_point(const HPolytope& P, const Vec& x, double tol) {
  require_dim(P.dim(), static_cast<int>(x.size()), "contains_point");
  if (P.rows() == 0) return true;
  return ((P.H() * x - P.h()).array() <= tol).all();
}

bool contains(const HPolytope& P, const HPolytope& Q, double tol) {
  require_dim(P.dim(), Q.dim(), "contains");
  if (is_empty(Q)) return true;
  for (int i = 0; i < P.rows(); ++i) {
    if (support(Q, P.H().row(i).transpose()) > P.h()[i] + tol) return false;
  }
  return true;
}

ChebyshevBall chebyshev_center(const HPolytope& P) {
  const int d = P.dim();
  Mat G(P.rows() + 1, d + 1);
  Vec g(P.rows() + 1);
  G.topLeftCorner(P.rows(), d) = P.H();
  G.col(d).head(P.rows()) = P.H().rowwise().norm();
  G.row(P.rows()).setZero();
  G(P.rows(), d) = -1.0;
  g << P.h(), 0.0;
  Vec c = Vec::Zero(d + 1);
  c[d] = 1.0;
  const auto sol = lp::maximize(c, G, g);
  if (sol.status == lp::Status::Infeasible) throw EmptyPolytope("Chebyshev center of an empty polytope");
  if (sol.status == lp::Status::Unbounded) {
    throw UnboundedPolytope("Chebyshev center of an unbounded polytope");
  }
  return {sol.point->head(d), std::max(0.0, (*sol.point)[d])};
}

namespace {

// Row i is redundant iff maximizing its normal over the other kept rows stays within its offset.
std::vector<int> redundancy_sequential(const HPolytope& N) {
  const int d = N.dim();
  const int R = N.rows();
  std::vector<bool> kept(R, true);
  for (int i = 0; i < R; ++i) {
    std::vector<int> others;
    for (int j = 0; j < R; ++j) {
      if (j != i && kept[j]) others.push_back(j);
    }
    // Cap the objective row one unit past its offset so the LP is always bounded.
    Mat G(others.size() + 1, d);
    Vec g(others.size() + 1);
    for (std::size_t k = 0; k < others.size(); ++k) {
      G.row(k) = N.H().row(others[k]);
      g[k] = N.h()[others[k]];
    }
    G.row(others.size()) = N.H().row(i);
    g[others.size()] = N.h()[i] + 1.0;
    const auto sol = lp::maximize(N.H().row(i).transpose(), G, g);
    if (sol.optimal() && sol.objective_value <= N.h()[i] + kRedundancyTol) kept[i] = false;
  }
  std::vector<int> idx;
  for (int i = 0; i < R; ++i) {
    if (kept[i]) idx.push_back(i);
  }
  return idx;
}

// Clarkson's method: each LP only sees the facets found so far plus a bounding box;
// a row that looks irredundant there is resolved by shooting a ray from an interior
// point, which exits through a true facet. Needs a bounded, full-dimensional set.
std::optional<std::vector<int>> redundancy_clarkson(const HPolytope& N) {
  const int d = N.dim();
  const int R = N.rows();
  Vec lo(d), hi(d);
  for (int j = 0; j < d; ++j) {
    const auto up = lp::maximize(Vec::Unit(d, j), N.H(), N.h());
    const auto down = lp::minimize(Vec::Unit(d, j), N.H(), N.h());
    if (!up.optimal() || !down.optimal()) return std::nullopt;
    hi[j] = up.objective_value;
    lo[j] = down.objective_value;
  }
  ChebyshevBall ball;
  try {
    ball = chebyshev_center(N);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (ball.radius <= 1e-7) return std::nullopt;
  const Vec& c = ball.center;
  const Vec slack = N.h() - N.H() * c;
  const Vec margin = (hi - lo).cwiseMax(1.0);
  const HPolytope frame = from_interval_box(lo - margin, hi + margin);

  std::vector<int> facets;
  std::vector<char> is_facet(R, 0);
  auto add_facet = [&](int j) {
    if (!is_facet[j]) {
      is_facet[j] = 1;
      facets.push_back(j);
    }
  };
  for (int i = 0; i < R; ++i) {
    for (int attempt = 0; attempt <= R && !is_facet[i]; ++attempt) {
      const int m = static_cast<int>(facets.size());
      Mat G(frame.rows() + m + 1, d);
      Vec g(frame.rows() + m + 1);
      G.topRows(frame.rows()) = frame.H();
      g.head(frame.rows()) = frame.h();
      for (int k = 0; k < m; ++k) {
        G.row(frame.rows() + k) = N.H().row(facets[k]);
        g[frame.rows() + k] = N.h()[facets[k]];
      }
      G.row(frame.rows() + m) = N.H().row(i);
      g[frame.rows() + m] = N.h()[i] + 1.0;
      const auto sol = lp::maximize(N.H().row(i).transpose(), G, g);
      if (!sol.optimal()) return std::nullopt;
      if (sol.objective_value <= N.h()[i] + kRedundancyTol) break;
      const Vec dir = *sol.point - c;
      const Vec rate = N.H() * dir;
      int hit = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < R; ++j) {
        if (rate[j] <= 0.0) continue;
        const double t = slack[j] / rate[j];
        if (t < best) {
          best = t;
          hit = j;
        }
      }
      // A ray that never exits, or exits through a known facet, only happens through
      // roundoff. Keeping row i is then the safe answer.
      if (hit < 0 || is_facet[hit]) {
        add_facet(i);
        break;
      }
      add_facet(hit);
    }
  }
  std::sort(facets.begin(), facets.end());
  return facets;
}

}  // namespace

HPolytope remove_redundant(const HPolytope& P) {
  const int d = P.dim();
  if (P.rows() == 0) return P;
  if (is_empty(P)) return HPolytope::empty(d);
  const HPolytope N = normalized_unique(P);
  auto idx = redundancy_clarkson(N);
  if (!idx) idx = redundancy_sequential(N);
  return select_rows(N, *idx);
}

HPolytope project(const HPolytope& P, std::span<const int> keep) {
  const int d = P.dim();
  if (keep.empty()) throw DimensionMismatch("projection needs at least one kept coordinate");
  std::vector<bool> kept(d, false);
  for (int k : keep) {
    if (k < 0 || k >= d || kept[k]) throw DimensionMismatch("invalid projection coordinate set");
    kept[k] = true;
  }
  const int out_dim = static_cast<int>(keep.size());
  if (out_dim == d && std::is_sorted(keep.begin(), keep.end())) return P;
  if (is_empty(P)) return HPolytope::empty(out_dim);

  HPolytope cur = remove_redundant(P);
  // Eliminate from the highest index down so remaining column ids stay valid.
  std::vector<int> order;  // original ids of the remaining columns
  for (int k = 0; k < d; ++k) order.push_back(k);
  for (int k = d - 1; k >= 0; --k) {
    if (kept[k]) continue;
    cur = remove_redundant(eliminate(cur, k));
    order.erase(order.begin() + k);
  }
  // Permute columns into the requested order.
  Mat H(cur.rows(), out_dim);
  for (int j = 0; j < out_dim; ++j) {
    const auto it = std::find(order.begin(), order.end(), keep[j]);
    H.col(j) = cur.H().col(it - order.begin());
  }
  return HPolytope(std::move(H), cur.h());
}

HPolytope project_leading(const HPolytope& P, int count) {
  std::vector<int> keep(count);
  std::iota(keep.begin(), keep.end(), 0);
  return project(P, keep);
}

Box bounding_box(const HPolytope& P) {
  const int d = P.dim();
  Vec lo(d), hi(d);
  for (int j = 0; j < d; ++j) {
    const Vec e = Vec::Unit(d, j);
    hi[j] = support(P, e);
    lo[j] = -support(P, -e);
    if (!std::isfinite(hi[j]) || !std::isfinite(lo[j])) {
      throw UnboundedPolytope("bounding box of an unbounded polytope");
    }
  }
  return Box(0.5 * (lo + hi), (0.5 * (hi - lo)).cwiseMax(0.0));
}

OrientedBox rotated_bounding_box(const Mat& points) {
  const long n = points.rows();
  const int d = static_cast<int>(points.cols());
  if (n < 2) throw Error("rotated bounding box needs at least two points");
  const Eigen::RowVectorXd mean = points.colwise().mean();
  const Mat centered = points.rowwise() - mean;
  const Mat cov = centered.transpose() * centered / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
  const Vec values = eig.eigenvalues().reverse();
  Mat axes = eig.eigenvectors().rowwise().reverse();
  const double top = values[0];
  OrientedBox out;
  if (!(top > 0.0) || values[d - 1] <= 1e-12 * top) {
    const Vec lo = points.colwise().minCoeff().transpose().array() - 1e-6;
    const Vec hi = points.colwise().maxCoeff().transpose().array() + 1e-6;
    out.polytope = from_interval_box(lo, hi);
    out.axes = Mat::Identity(d, d);
    out.degenerate = true;
    return out;
  }
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < d; ++j) {
      if (std::abs(axes(j, k)) > 1e-12) {
        if (axes(j, k) < 0.0) axes.col(k) *= -1.0;
        break;
      }
    }
  }
  const Mat proj = points * axes;
  Mat H(2 * d, d);
  Vec h(2 * d);
  for (int k = 0; k < d; ++k) {
    H.row(k) = axes.col(k).transpose();
    h[k] = proj.col(k).maxCoeff();
    H.row(d + k) = -axes.col(k).transpose();
    h[d + k] = -proj.col(k).minCoeff();
  }
  out.polytope = HPolytope(std::move(H), std::move(h));
  out.axes = std::move(axes);
  return out;
}

std::pair<HPolytope, HPolytope> split_through_center(const HPolytope& P) {
  const int d = P.dim();
  const Box bb = bounding_box(P);
  int axis = 0;
  for (int j = 1; j < d; ++j) {
    if (bb.radii[j] > bb.radii[axis] * (1.0 + 1e-12)) axis = j;
  }
  const Vec c = chebyshev_center(P).center;
  const Vec e = Vec::Unit(d, axis);
  const HPolytope lower(e.transpose(), Vec::Constant(1, c[axis]));
  const HPolytope upper(-e.transpose(), Vec::Constant(1, -c[axis]));
  return {intersect(P, lower), intersect(P, upper)};
}

double union_volume_estimate(const PolyUnion& U, const Box& sampling_box, std::int64_t n,
                             std::uint64_t seed) {
  if (n < 1) throw Error("volume estimate needs at least one sample");
  if (U.pieces.empty()) return 0.0;
  const int d = sampling_box.dim();
  for (const auto& piece : U.pieces) require_dim(piece.dim(), d, "union volume");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::int64_t inside = 0;
  Vec x(d);
  for (std::int64_t s = 0; s < n; ++s) {
    for (int j = 0; j < d; ++j) x[j] = sampling_box.center[j] + sampling_box.radii[j] * unit(rng);
    for (const auto& piece : U.pieces) {
      if (contains_point(piece, x)) {
        ++inside;
        break;
      }
    }
  }
  return sampling_box.volume() * static_cast<double>(inside) / static_cast<double>(n);
}

std::vector<Eigen::Vector2d> polygon_vertices(const HPolytope& P) {
  require_dim(P.dim(), 2, "polygon vertices");
  if (is_empty(P)) return {};
  bounding_box(P);  // throws on unbounded input
  const HPolytope Q = remove_redundant(P);
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < Q.rows(); ++i) {
    for (int j = i + 1; j < Q.rows(); ++j) {
      Eigen::Matrix2d M;
      M << Q.H().row(i), Q.H().row(j);
      if (std::abs(M.determinant()) < 1e-12) continue;
      const Eigen::Vector2d v = M.inverse() * Eigen::Vector2d(Q.h()[i], Q.h()[j]);
      if (!contains_point(Q, v, 1e-9)) continue;
      const bool dup = std::any_of(pts.begin(), pts.end(), [&](const Eigen::Vector2d& p) {
        return (p - v).cwiseAbs().maxCoeff() < 1e-9;
      });
      if (!dup) pts.push_back(v);
    }
  }
  if (pts.empty()) {
    // Degenerate single point: its Chebyshev center.
    pts.push_back(chebyshev_center(Q).center);
    return pts;
  }
  Eigen::Vector2d mid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) mid += p;
  mid /= static_cast<double>(pts.size());
  std::sort(pts.begin(), pts.end(), [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return std::atan2(a.y() - mid.y(), a.x() - mid.x()) < std::atan2(b.y() - mid.y(), b.x() - mid.x());
  });
  return pts;
}

}  // namespace koopbrs
