#include "koopbrs/reach.hpp"

#include "koopbrs/errors.hpp"

#include <chrono>
#include <deque>

namespace koopbrs {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void check_sets(const Lifting& L, const HPolytope& target, const Box& S_x, const Box& S_u, int K) {
  if (K < 1) throw ConfigError("horizon must be at least 1");
  if (target.dim() != L.state_dim() || S_x.dim() != L.state_dim()) {
    throw DimensionMismatch("target and state domain must match the lifting's state dimension");
  }
  if (S_u.dim() < 1) throw DimensionMismatch("input set must be nonempty-dimensional");
}

}  // namespace

HPolytope lifted_domain(const Lifting& L, const Box& domain) {
  return intersect(implicit_set(L, to_polytope(domain)), lifted_envelope(L, domain));
}

HPolytope pre_linear(const KoopmanModel& M, const HPolytope& Z, const HPolytope& S_z, const HPolytope& S_u) {
  const int p = static_cast<int>(M.A.rows());
  const int m = static_cast<int>(M.B.cols());
  if (M.A.cols() != p || M.B.rows() != p || Z.dim() != p || S_z.dim() != p || S_u.dim() != m || M.W.dim() != p) {
    throw DimensionMismatch("pre_linear: model and sets disagree in dimension");
  }
  const HPolytope Ze = erode(Z, M.W);
  if (is_empty(Ze)) return HPolytope::empty(p);
  Mat H(Ze.rows(), p + m);
  H << Ze.H() * M.A, Ze.H() * M.B;
  const HPolytope lifted = intersect(HPolytope(H, Ze.h()), cartesian_product(S_z, S_u));
  if (is_empty(lifted)) return HPolytope::empty(p);
  const HPolytope pre = remove_redundant(project_leading(lifted, p));
  if (is_empty(pre)) return HPolytope::empty(p);
  return pre;
}

BrsResult brs_global(const KoopmanModel& M, const HPolytope& target, const Box& S_x, const Box& S_u, int K) {
  const Lifting& L = M.lifting;
  check_sets(L, target, S_x, S_u, K);
  BrsResult R;
  R.models = {M};
  R.lifting = L;
  R.state_domain = S_x;
  R.input_set = S_u;
  R.target = target;

  const HPolytope S_z = lifted_domain(L, S_x);
  const HPolytope U = to_polytope(S_u);
  const HPolytope Z0 = remove_redundant(intersect(implicit_set(L, target), S_z));
  R.layers.push_back({});
  if (!is_empty(Z0)) R.layers[0].push_back({Z0, 0, -1, to_polytope(S_x)});
  R.stats.push_back({static_cast<int>(R.layers[0].size()), 0, 0, 0.0});
  for (int k = 1; k <= K; ++k) {
    const auto t0 = Clock::now();
    R.layers.push_back({});
    const auto& prev = R.layers[k - 1];
    if (!prev.empty()) {
      const HPolytope Z = pre_linear(M, prev[0].polytope, S_z, U);
      if (!is_empty(Z)) R.layers[k].push_back({Z, 0, 0, to_polytope(S_x)});
    }
    R.stats.push_back({static_cast<int>(R.layers[k].size()), 0, 0, seconds_since(t0)});
    if (R.layers[k].empty()) {
      R.warnings.push_back("layer " + std::to_string(k) + " is empty; stopping early");
      break;
    }
  }
  return R;
}

namespace {

HPolytope subdomain_of(const Dataset& D, const std::vector<Eigen::Index>& hits, const Box& S_x) {
  if (hits.size() < 2) {
    throw TooFewTuples("only " + std::to_string(hits.size()) + " tuples land in the piece");
  }
  Mat pts(static_cast<Eigen::Index>(hits.size()), D.state_dim());
  for (std::size_t r = 0; r < hits.size(); ++r) pts.row(static_cast<Eigen::Index>(r)) = D.X.row(hits[r]);
  return remove_redundant(intersect(rotated_bounding_box(pts).polytope, to_polytope(S_x)));
}

}  // namespace

HPolytope select_subdomain(const Dataset& D, const HPolytope& X_piece, const Box& S_x) {
  if (X_piece.dim() != D.state_dim()) throw DimensionMismatch("select_subdomain: piece must live in state space");
  std::vector<Eigen::Index> hits;
  for (Eigen::Index k = 0; k < D.size(); ++k) {
    if (contains_point(X_piece, D.Xp.row(k).transpose())) hits.push_back(k);
  }
  return subdomain_of(D, hits, S_x);
}

HPolytope select_subdomain(const Dataset& D, const Lifting& L, const HPolytope& Z_piece, const Box& S_x) {
  if (Z_piece.dim() != L.dim() || D.state_dim() != L.state_dim()) {
    throw DimensionMismatch("select_subdomain: lifted piece and lifting disagree");
  }
  std::vector<Eigen::Index> hits;
  for (Eigen::Index k = 0; k < D.size(); ++k) {
    if (contains_point(Z_piece, L.lift(D.Xp.row(k).transpose()))) hits.push_back(k);
  }
  return subdomain_of(D, hits, S_x);
}

BrsResult brs_local(const LocalBrsInputs& in, const HPolytope& target, const Box& S_x, const Box& S_u, int K,
                    const LocalBrsOptions& opt) {
  const Lifting& L = in.lifting;
  check_sets(L, target, S_x, S_u, K);
  if (!(opt.threshold > 0.0)) throw ConfigError("split threshold must be positive");
  if (in.data.state_dim() != L.state_dim() || in.data.input_dim() != S_u.dim()) {
    throw DimensionMismatch("brs_local: dataset dimensions disagree with the lifting or inputs");
  }
  const int n = L.state_dim();

  BrsResult R;
  R.lifting = L;
  R.state_domain = S_x;
  R.input_set = S_u;
  R.target = target;
  const auto global = residual_center(in.data, L, in.A, in.B);
  R.models.push_back({L, in.A, in.B, error_set_global(global.half_range, global.center, in.lipschitz_error, in.b),
                      cartesian_product(to_polytope(S_x), to_polytope(S_u)), std::nullopt});

  const HPolytope S_z = lifted_domain(L, S_x);
  const HPolytope U = to_polytope(S_u);
  const HPolytope Z0 = remove_redundant(intersect(implicit_set(L, target), S_z));
  R.layers.push_back({});
  if (!is_empty(Z0)) R.layers[0].push_back({Z0, 0, -1, to_polytope(S_x)});
  R.stats.push_back({static_cast<int>(R.layers[0].size()), 0, 0, 0.0});

  struct Item {
    HPolytope state_piece;
    HPolytope lifted_piece;
  };

  for (int k = 1; k <= K; ++k) {
    const auto t0 = Clock::now();
    LayerStats st;
    std::vector<BrsPiece> layer;
    const auto& prev = R.layers[k - 1];
    for (int src = 0; src < static_cast<int>(prev.size()); ++src) {
      std::deque<Item> queue;
      queue.push_back({project_leading(prev[src].polytope, n), prev[src].polytope});
      int splits = 0;
      while (!queue.empty()) {
        Item item = std::move(queue.front());
        queue.pop_front();
        const std::string where = "layer " + std::to_string(k) + ", source piece " + std::to_string(src);
        HPolytope sub_x;
        LocalFit fit;
        try {
          sub_x = select_subdomain(in.data, L, item.lifted_piece, S_x);
          const Dataset restricted = restrict_dataset(in.data, cartesian_product(sub_x, U), in.b);
          fit = fit_local(restricted, L, in.A, in.B, in.lipschitz_psi, in.lipschitz_error, in.b,
                          {opt.adapt_B, in.b_x});
        } catch (const TooFewTuples& e) {
          R.warnings.push_back(where + ": dropped (" + e.what() + ")");
          ++st.dropped;
          continue;
        } catch (const EmptyRestriction& e) {
          R.warnings.push_back(where + ": dropped (" + e.what() + ")");
          ++st.dropped;
          continue;
        }

        if (fit.W.radii.sum() > opt.threshold) {
          if (splits >= opt.split_cap) {
            R.warnings.push_back(where + ": dropped after " + std::to_string(splits) + " splits (|radii|_1 = " +
                                 std::to_string(fit.W.radii.sum()) + ")");
            ++st.dropped;
            continue;
          }
          ++splits;
          ++st.splits;
          auto [lo, hi] = split_through_center(item.state_piece);
          for (HPolytope* half : {&lo, &hi}) {
            HPolytope half_x = remove_redundant(*half);
            if (is_empty(half_x)) continue;
            HPolytope lifted = remove_redundant(intersect(item.lifted_piece, implicit_set(L, half_x)));
            if (is_empty(lifted)) continue;
            queue.push_back({std::move(half_x), std::move(lifted)});
          }
          continue;
        }

        KoopmanModel model{L, fit.A, fit.B, fit.W, cartesian_product(sub_x, U), 0};
        const HPolytope S_zi = intersect(lifted_domain(L, bounding_box(sub_x)), implicit_set(L, sub_x));
        HPolytope pre = pre_linear(model, item.lifted_piece, intersect(S_zi, S_z), U);
        if (is_empty(pre)) continue;
        if (opt.prune_contained) {
          bool covered = false;
          for (const auto& other : layer) {
            if (contains(other.polytope, pre)) {
              covered = true;
              break;
            }
          }
          if (covered) continue;
        }
        R.models.push_back(std::move(model));
        layer.push_back({std::move(pre), static_cast<int>(R.models.size()) - 1, src, std::move(sub_x)});
      }
    }
    st.pieces = static_cast<int>(layer.size());
    st.seconds = seconds_since(t0);
    R.layers.push_back(std::move(layer));
    R.stats.push_back(st);
    if (opt.progress) opt.progress(k, st);
    if (R.layers[k].empty()) {
      R.warnings.push_back("layer " + std::to_string(k) + " is empty; stopping early");
      break;
    }
  }
  return R;
}

std::optional<int> membership(const BrsResult& R, const Vec& x, int k, double tol) {
  if (k < 0 || k >= static_cast<int>(R.layers.size())) return std::nullopt;
  const Vec z = R.lifting.lift(x);
  const auto& layer = R.layers[k];
  for (int j = 0; j < static_cast<int>(layer.size()); ++j) {
    if (contains_point(layer[j].polytope, z, tol)) return j;
  }
  return std::nullopt;
}

}  // namespace koopbrs
