#include "koopbrs/lp.hpp"

#include "koopbrs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace koopbrs::lp {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kReducedCostTol = 1e-11;

// Dictionary (condensed tableau):  basic_r = rhs_r + sum_c T(r, c) * nonbasic_c.
// Variable ids: [0, d) free decision variables, [d, d + R) slacks of the
// inequality rows, d + R the phase-1 artificial. Column d of T belongs to the
// artificial for the whole solve; it only carries entries during phase 1.
class Tableau {
 public:
  Tableau(const Mat& G, const Vec& g)
      : rows_(static_cast<int>(G.rows())),
        vars_(static_cast<int>(G.cols())),
        T_(rows_, vars_ + 1),
        rhs_(g),
        basis_(rows_),
        nonbasic_(vars_ + 1),
        cap_(50L * (rows_ + vars_)) {
    T_.leftCols(vars_) = -G;
    T_.col(vars_).setZero();
    for (int r = 0; r < rows_; ++r) basis_[r] = vars_ + r;
    for (int c = 0; c < vars_; ++c) nonbasic_[c] = c;
    nonbasic_[vars_] = artificial_id();
  }

  int artificial_id() const { return vars_ + rows_; }
  bool is_free(int var) const { return var < vars_; }

  void pivot(int r, int c, std::vector<Vec*> objectives, std::vector<double*> constants) {
    if (++pivots_ > cap_) {
      throw NumericalFailure("simplex exceeded its pivot cap of " + std::to_string(cap_));
    }
    const double piv = T_(r, c);
    if (std::abs(piv) < kPivotTol) throw NumericalFailure("simplex pivot element vanished");
    const double inv = 1.0 / piv;
    T_.row(r) *= -inv;
    T_(r, c) = inv;
    rhs_[r] *= -inv;
    for (int i = 0; i < rows_; ++i) {
      if (i == r) continue;
      const double f = T_(i, c);
      if (f == 0.0) continue;
      T_(i, c) = 0.0;
      T_.row(i) += f * T_.row(r);
      rhs_[i] += f * rhs_[r];
    }
    for (std::size_t k = 0; k < objectives.size(); ++k) {
      Vec& o = *objectives[k];
      const double f = o[c];
      if (f == 0.0) continue;
      o[c] = 0.0;
      o += f * T_.row(r).transpose();
      *constants[k] += f * rhs_[r];
    }
    std::swap(basis_[r], nonbasic_[c]);
  }

  // Bland entering column: smallest variable id with negative reduced cost.
  int entering(const Vec& o, bool allow_artificial) const {
    int best = -1;
    for (int c = 0; c <= vars_; ++c) {
      const int var = nonbasic_[c];
      if (is_free(var)) continue;
      if (var == artificial_id() && !allow_artificial) continue;
      if (o[c] < -kReducedCostTol && (best < 0 || var < nonbasic_[best])) best = c;
    }
    return best;
  }

  // Minimum-ratio row over sign-constrained basics; ties go to the smallest id.
  int leaving(int c) const {
    double min_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < rows_; ++r) {
      if (is_free(basis_[r]) || T_(r, c) >= -kPivotTol) continue;
      min_ratio = std::min(min_ratio, std::max(rhs_[r], 0.0) / -T_(r, c));
    }
    if (!std::isfinite(min_ratio)) return -1;
    const double slack = 1e-12 * std::max(1.0, min_ratio);
    int best = -1;
    for (int r = 0; r < rows_; ++r) {
      if (is_free(basis_[r]) || T_(r, c) >= -kPivotTol) continue;
      const double ratio = std::max(rhs_[r], 0.0) / -T_(r, c);
      if (ratio <= min_ratio + slack && (best < 0 || basis_[r] < basis_[best])) best = r;
    }
    return best;
  }

  int rows_;
  int vars_;
  RowMat T_;
  Vec rhs_;
  std::vector<int> basis_;
  std::vector<int> nonbasic_;
  long cap_;
  long pivots_ = 0;
};

enum class RunResult { Optimal, Unbounded };

RunResult run_simplex(Tableau& tab, Vec& obj, double& obj_const, Vec& other, double& other_const,
                      bool allow_artificial) {
  for (;;) {
    const int c = tab.entering(obj, allow_artificial);
    if (c < 0) return RunResult::Optimal;
    const int r = tab.leaving(c);
    if (r < 0) return RunResult::Unbounded;
    tab.pivot(r, c, {&obj, &other}, {&obj_const, &other_const});
  }
}

LpSolution solve_min(const Vec& c, const Mat& G, const Vec& g) {
  const int d = static_cast<int>(c.size());
  const int R = static_cast<int>(G.rows());
  LpSolution sol;

  Tableau tab(G, g);
  Vec obj2 = Vec::Zero(d + 1);
  obj2.head(d) = c;
  double z2 = 0.0;
  Vec obj1 = Vec::Zero(d + 1);
  double z1 = 0.0;

  // Bring every free variable into the basis (partial pivoting on the column).
  for (int j = 0; j < d; ++j) {
    int col = -1;
    for (int k = 0; k <= d; ++k) {
      if (tab.nonbasic_[k] == j) col = k;
    }
    int row = -1;
    double best = kPivotTol;
    for (int r = 0; r < R; ++r) {
      if (tab.is_free(tab.basis_[r])) continue;
      const double a = std::abs(tab.T_(r, col));
      if (a > best) {
        best = a;
        row = r;
      }
    }
    if (row >= 0) tab.pivot(row, col, {&obj2, &obj1}, {&z2, &z1});
  }

  // Phase 1 with a single artificial shared by every constrained row.
  int worst = -1;
  for (int r = 0; r < R; ++r) {
    if (tab.is_free(tab.basis_[r])) continue;
    if (tab.rhs_[r] < -kFeasibilityTol && (worst < 0 || tab.rhs_[r] < tab.rhs_[worst])) worst = r;
  }
  int art_col = -1;
  for (int k = 0; k <= d; ++k) {
    if (tab.nonbasic_[k] == tab.artificial_id()) art_col = k;
  }
  if (worst >= 0) {
    for (int r = 0; r < R; ++r) tab.T_(r, art_col) = tab.is_free(tab.basis_[r]) ? 0.0 : 1.0;
    obj1[art_col] = 1.0;
    tab.pivot(worst, art_col, {&obj2, &obj1}, {&z2, &z1});
    run_simplex(tab, obj1, z1, obj2, z2, /*allow_artificial=*/true);
    if (z1 > kFeasibilityTol) {
      sol.status = Status::Infeasible;
      return sol;
    }
    // Drive a degenerate artificial out of the basis.
    for (int r = 0; r < R; ++r) {
      if (tab.basis_[r] != tab.artificial_id()) continue;
      int col = -1;
      double best = kPivotTol;
      for (int k = 0; k <= d; ++k) {
        if (tab.is_free(tab.nonbasic_[k])) continue;
        if (std::abs(tab.T_(r, k)) > best) {
          best = std::abs(tab.T_(r, k));
          col = k;
        }
      }
      if (col >= 0) {
        tab.pivot(r, col, {&obj2, &obj1}, {&z2, &z1});
      } else {
        tab.T_.row(r).setZero();
        tab.rhs_[r] = 0.0;
      }
    }
    for (int k = 0; k <= d; ++k) {
      if (tab.nonbasic_[k] == tab.artificial_id()) art_col = k;
    }
    tab.T_.col(art_col).setZero();
    obj2[art_col] = 0.0;
  }

  // A nonbasic free variable never touches a constrained row; any cost on it is a ray.
  for (int k = 0; k <= d; ++k) {
    if (tab.is_free(tab.nonbasic_[k]) && std::abs(obj2[k]) > kReducedCostTol) {
      sol.status = Status::Unbounded;
      return sol;
    }
  }
  if (run_simplex(tab, obj2, z2, obj1, z1, /*allow_artificial=*/false) == RunResult::Unbounded) {
    sol.status = Status::Unbounded;
    return sol;
  }

  Vec x = Vec::Zero(d);
  for (int r = 0; r < R; ++r) {
    if (tab.is_free(tab.basis_[r])) x[tab.basis_[r]] = tab.rhs_[r];
  }

  // Re-solve the active system from the original data to shed tableau round-off.
  Mat active(d, d);
  Vec active_rhs(d);
  int n_active = 0;
  for (int k = 0; k <= d && n_active < d; ++k) {
    const int var = tab.nonbasic_[k];
    if (var == tab.artificial_id()) continue;
    if (tab.is_free(var)) {
      active.row(n_active).setZero();
      active(n_active, var) = 1.0;
      active_rhs[n_active] = 0.0;
    } else {
      active.row(n_active) = G.row(var - d);
      active_rhs[n_active] = g[var - d];
    }
    ++n_active;
  }
  if (n_active == d && d > 0) {
    Eigen::FullPivLU<Mat> lu(active);
    if (lu.rank() == d) {
      const Vec refined = lu.solve(active_rhs);
      auto viol = [&](const Vec& p) {
        return R == 0 ? 0.0 : std::max(0.0, (G * p - g).maxCoeff());
      };
      if (refined.allFinite() && viol(refined) <= std::max(viol(x), 1e-12)) x = refined;
    }
  }

  sol.status = Status::Optimal;
  sol.objective_value = c.dot(x);
  sol.point = std::move(x);
  return sol;
}

}  // namespace

LpSolution solve(const LinearProgram& program) {
  const int d = program.num_vars();
  if (d < 1) throw DimensionMismatch("linear program needs at least one variable");
  const long n_ineq = program.G.rows();
  const long n_eq = program.E.rows();
  if ((n_ineq > 0 && program.G.cols() != d) || program.g.size() != n_ineq ||
      (n_eq > 0 && program.E.cols() != d) || program.e.size() != n_eq) {
    throw DimensionMismatch("linear program rows disagree with the variable count");
  }
  if (!program.g.allFinite() || !program.e.allFinite()) {
    throw NumericalFailure("linear program has non-finite right-hand side");
  }

  Mat G(n_ineq + 2 * n_eq, d);
  Vec g(n_ineq + 2 * n_eq);
  if (n_ineq > 0) {
    G.topRows(n_ineq) = program.G;
    g.head(n_ineq) = program.g;
  }
  if (n_eq > 0) {
    G.middleRows(n_ineq, n_eq) = program.E;
    g.segment(n_ineq, n_eq) = program.e;
    G.bottomRows(n_eq) = -program.E;
    g.tail(n_eq) = -program.e;
  }

  const bool maximize = program.sense == Sense::Maximize;
  const Vec c = maximize ? Vec(-program.objective) : program.objective;
  LpSolution sol = solve_min(c, G, g);
  if (sol.optimal()) sol.objective_value = program.objective.dot(*sol.point);
  return sol;
}

LpSolution minimize(const Vec& c, const Mat& G, const Vec& g) {
  return solve(LinearProgram{c, G, g, Mat(0, c.size()), Vec(0), Sense::Minimize});
}

LpSolution maximize(const Vec& c, const Mat& G, const Vec& g) {
  return solve(LinearProgram{c, G, g, Mat(0, c.size()), Vec(0), Sense::Maximize});
}

double max_violation(const LinearProgram& program, const Vec& x) {
  double worst = 0.0;
  if (program.G.rows() > 0) worst = std::max(worst, (program.G * x - program.g).maxCoeff());
  if (program.E.rows() > 0) {
    worst = std::max(worst, (program.E * x - program.e).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace koopbrs::lp
