#pragma once

#include "koopbrs/koopman.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace koopbrs {

struct BrsPiece {
  HPolytope polytope;  ///< lifted set in R^p
  int model_id = 0;
  int target_piece_id = -1;  ///< index into the previous layer; -1 in layer 0
  HPolytope subdomain_x;     ///< states on which the model is valid
};

struct LayerStats {
  int pieces = 0;
  int splits = 0;
  int dropped = 0;
  double seconds = 0.0;
};

struct BrsResult {
  std::vector<std::vector<BrsPiece>> layers;
  std::vector<KoopmanModel> models;
  Lifting lifting;
  Box state_domain;
  Box input_set;
  HPolytope target;  ///< over states
  std::vector<LayerStats> stats;
  std::vector<std::string> warnings;

  int horizon() const { return static_cast<int>(layers.size()) - 1; }
};

/// Lifted constraint set for states in `domain`: implicit_set of the box
/// intersected with the interval envelope of every observable.
HPolytope lifted_domain(const Lifting& L, const Box& domain);

/// Robust one-step predecessor of Z for z+ in A z + B u + W, (z, u) in S_z x S_u.
HPolytope pre_linear(const KoopmanModel& M, const HPolytope& Z, const HPolytope& S_z, const HPolytope& S_u);

/// K-step recursion with one global model.
BrsResult brs_global(const KoopmanModel& M, const HPolytope& target, const Box& S_x, const Box& S_u, int K);

/// Rotated bounding box of the states whose successors land in X_piece, clipped to S_x.
HPolytope select_subdomain(const Dataset& D, const HPolytope& X_piece, const Box& S_x);
/// Same, keeping the tuples with psi(x+) in a lifted piece.
HPolytope select_subdomain(const Dataset& D, const Lifting& L, const HPolytope& Z_piece, const Box& S_x);

struct LocalBrsOptions {
  double threshold = 0.18;  ///< split when the 1-norm of the W radii exceeds this
  bool adapt_B = false;
  int split_cap = 6;        ///< splits allowed per source piece and layer
  /// Drop a new piece when an earlier piece of the same layer contains it.
  bool prune_contained = true;
  std::function<void(int layer, const LayerStats&)> progress;
};

struct LocalBrsInputs {
  const Dataset& data;
  const Lifting& lifting;
  const Mat& A;
  const Mat& B;
  const Vec& lipschitz_error;
  double lipschitz_psi = 1.0;
  double b = 0.0;
  double b_x = 0.0;
};

/// Union of one-step predecessors of local models fitted on data-driven subdomains.
BrsResult brs_local(const LocalBrsInputs& in, const HPolytope& target, const Box& S_x, const Box& S_u, int K,
                    const LocalBrsOptions& opt = {});

/// Lowest-id piece of layer k containing psi(x).
std::optional<int> membership(const BrsResult& R, const Vec& x, int k, double tol = 1e-8);

}  // namespace koopbrs
