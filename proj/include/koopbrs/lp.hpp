#pragma once

#include <Eigen/Dense>

#include <optional>

namespace koopbrs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace lp {

/// Tolerances shared by every LP in the library.
inline constexpr double kFeasibilityTol = 1e-8;
inline constexpr double kPivotTol = 1e-10;
inline constexpr double kObjectiveRelTol = 1e-9;

enum class Sense { Minimize, Maximize };
enum class Status { Optimal, Infeasible, Unbounded };

/// Dense LP over free variables:  opt c.x  s.t.  G x <= g,  E x = e.
struct LinearProgram {
  Vec objective;
  Mat G;
  Vec g;
  Mat E;
  Vec e;
  Sense sense = Sense::Minimize;

  int num_vars() const { return static_cast<int>(objective.size()); }
};

struct LpSolution {
  Status status = Status::Infeasible;
  std::optional<Vec> point;
  double objective_value = 0.0;

  bool optimal() const { return status == Status::Optimal; }
};

/// Two-phase simplex on the condensed tableau with Bland's rule.
/// Pure function of its input. Throws NumericalFailure after
/// 50 * (rows + vars) pivots or when a pivot element degenerates.
LpSolution solve(const LinearProgram& program);

/// Convenience overloads for the inequality-only case.
LpSolution minimize(const Vec& c, const Mat& G, const Vec& g);
LpSolution maximize(const Vec& c, const Mat& G, const Vec& g);

/// Largest violation max_i (G_i x - g_i), and max |E_i x - e_i| for equalities.
double max_violation(const LinearProgram& program, const Vec& x);

}  // namespace lp
}  // namespace koopbrs
