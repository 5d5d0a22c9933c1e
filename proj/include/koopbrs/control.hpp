#pragma once

#include "koopbrs/reach.hpp"
#include "koopbrs/systems.hpp"

#include <vector>

namespace koopbrs {

/// {u in S_u | A psi(x) + B u + W subset of Z_target}.
HPolytope admissible_input_set(const KoopmanModel& M, const Vec& x, const HPolytope& Z_target, const HPolytope& S_u);

struct ControlAction {
  Vec u;
  int piece = -1;
  /// Set for k = 0: the state is already in the target layer and needs no input.
  bool at_target = false;
};

/// Chebyshev center of the admissible set of the lowest-id layer-k piece holding x.
ControlAction extract_input(const BrsResult& R, const Vec& x, int k);

struct Trajectory {
  std::vector<Vec> states;
  std::vector<Vec> inputs;
  std::vector<int> pieces;  ///< piece used at each step (layer K, K-1, ...)
  bool reached = false;
  int steps_used = 0;
};

/// Applies extracted inputs from layer K down to 1, checking that every
/// successor lands in the next layer. Stops as soon as the target is reached.
Trajectory simulate_closed_loop(const StepFunction& step, const BrsResult& R, const Vec& x0,
                                const HPolytope& X_target);

}  // namespace koopbrs
