#include "koopbrs/control.hpp"

#include "koopbrs/errors.hpp"

namespace koopbrs {

HPolytope admissible_input_set(const KoopmanModel& M, const Vec& x, const HPolytope& Z_target, const HPolytope& S_u) {
  if (Z_target.dim() != M.A.rows() || S_u.dim() != M.B.cols()) {
    throw DimensionMismatch("admissible_input_set: target or input set has the wrong dimension");
  }
  const Vec z = M.lifting.lift(x);
  const HPolytope Ze = erode(Z_target, M.W);
  return intersect(HPolytope(Ze.H() * M.B, Ze.h() - Ze.H() * (M.A * z)), S_u);
}

ControlAction extract_input(const BrsResult& R, const Vec& x, int k) {
  if (k < 0 || k > R.horizon()) throw NotInBrs("layer " + std::to_string(k) + " does not exist");
  const auto piece = membership(R, x, k);
  if (!piece) throw NotInBrs("state is not in layer " + std::to_string(k));
  ControlAction act;
  act.piece = *piece;
  if (k == 0) {
    act.at_target = true;
    act.u = Vec::Zero(R.input_set.dim());
    return act;
  }
  const BrsPiece& pc = R.layers[k][*piece];
  const HPolytope& target = R.layers[k - 1][pc.target_piece_id].polytope;
  const HPolytope adm = admissible_input_set(R.models[pc.model_id], x, target, to_polytope(R.input_set));
  try {
    act.u = chebyshev_center(adm).center;
  } catch (const EmptyPolytope&) {
    throw EmptyAdmissible("no admissible input at layer " + std::to_string(k) + ", piece " +
                          std::to_string(*piece));
  }
  return act;
}

Trajectory simulate_closed_loop(const StepFunction& step, const BrsResult& R, const Vec& x0,
                                const HPolytope& X_target) {
  Trajectory tr;
  tr.states.push_back(x0);
  if (contains_point(X_target, x0)) {
    tr.reached = true;
    return tr;
  }
  const int K = R.horizon();
  if (!membership(R, x0, K)) throw NotInBrs("initial state is not in layer " + std::to_string(K));
  Vec x = x0;
  for (int k = K; k >= 1; --k) {
    const ControlAction act = extract_input(R, x, k);
    x = step(x, act.u);
    tr.inputs.push_back(act.u);
    tr.pieces.push_back(act.piece);
    tr.states.push_back(x);
    ++tr.steps_used;
    if (!membership(R, x, k - 1)) {
      throw GuaranteeViolation("successor left layer " + std::to_string(k - 1) + " at step " +
                               std::to_string(tr.steps_used));
    }
    if (contains_point(X_target, x)) {
      tr.reached = true;
      break;
    }
  }
  return tr;
}

}  // namespace koopbrs
