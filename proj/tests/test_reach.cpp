#include <doctest.h>

#include "fixtures.hpp"
#include "koopbrs/control.hpp"
#include "koopbrs/errors.hpp"
#include "oracles.hpp"

using namespace koopbrs;
using fixture::vec;

namespace {

KoopmanModel scalar_model(double w) {
  return {Lifting::identity(1), Mat::Identity(1, 1), Mat::Identity(1, 1), Box(vec({0}), vec({w})),
          HPolytope::universe(2), std::nullopt};
}

HPolytope interval(double lo, double hi) { return from_interval_box(vec({lo}), vec({hi})); }

KoopmanModel double_integrator() {
  return {Lifting::identity(2), (Mat(2, 2) << 1, 1, 0, 1).finished(), (Mat(2, 1) << 0, 1).finished(),
          Box(Vec::Zero(2), Vec::Zero(2)), HPolytope::universe(3), std::nullopt};
}

bool same_set(const HPolytope& P, const HPolytope& Q) { return contains(P, Q) && contains(Q, P); }

// All 2^p sign-pattern vertices of a box.
std::vector<Vec> box_vertices(const Box& W) {
  std::vector<Vec> out;
  const int p = W.dim();
  for (int mask = 0; mask < (1 << p); ++mask) {
    Vec v = W.center;
    for (int i = 0; i < p; ++i) v[i] += (mask >> i & 1) ? W.radii[i] : -W.radii[i];
    out.push_back(v);
  }
  return out;
}

void check_one_step(const BrsResult& R, int k, int count, std::uint64_t seed) {
  const auto xs = fixture::sample_layer(R, k, count, seed);
  REQUIRE(static_cast<int>(xs.size()) == count);
  for (const Vec& x : xs) {
    const int id = *membership(R, x, k);
    const BrsPiece& pc = R.layers[k][id];
    const KoopmanModel& M = R.models[pc.model_id];
    const HPolytope& target = R.layers[k - 1][pc.target_piece_id].polytope;
    const HPolytope adm = admissible_input_set(M, x, target, to_polytope(R.input_set));
    REQUIRE_FALSE(is_empty(adm));
    const Vec u = chebyshev_center(adm).center;
    const Vec z = M.A * R.lifting.lift(x) + M.B * u;
    for (const Vec& w : box_vertices(M.W)) CHECK(contains_point(target, z + w, 1e-7));
  }
}

void check_inside_domain(const BrsResult& R, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int n = R.lifting.state_dim(), p = R.lifting.dim();
  for (const auto& layer : R.layers) {
    for (const auto& pc : layer) {
      for (int t = 0; t < 32; ++t) {
        const Vec d = oracle::unit_vector(rng, n);
        Vec dz = Vec::Zero(p);
        dz.head(n) = d;
        CHECK(support(pc.polytope, dz) <= support(R.state_domain, d) + 1e-8);
      }
    }
  }
}

}  // namespace

TEST_CASE("scalar predecessor") {
  const auto pre = pre_linear(scalar_model(0.0), interval(-1, 1), interval(-5, 5), interval(-1, 1));
  CHECK(same_set(pre, interval(-2, 2)));
  const auto eroded = pre_linear(scalar_model(0.5), interval(-1, 1), interval(-5, 5), interval(-1, 1));
  CHECK(same_set(eroded, interval(-1.5, 1.5)));
  CHECK(is_empty(pre_linear(scalar_model(2.0), interval(-1, 1), interval(-5, 5), interval(-1, 1))));
  CHECK(is_empty(pre_linear(scalar_model(0.0), interval(-1, 1), interval(4, 5), interval(-1, 1))));
  CHECK_THROWS_AS(pre_linear(scalar_model(0.0), interval(-1, 1), interval(-5, 5), HPolytope::universe(2)),
                  DimensionMismatch);
}

TEST_CASE("double integrator predecessor matches a grid oracle") {
  const auto M = double_integrator();
  const HPolytope Z = from_interval_box(vec({-1, -1}), vec({1, 1}));
  const HPolytope S_z = from_interval_box(vec({-5, -5}), vec({5, 5}));
  const auto pre = pre_linear(M, Z, S_z, interval(-1, 1));
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    for (int j = 0; j < 200; ++j) {
      const double z1 = -3.0 + 6.0 * i / 199.0, z2 = -3.0 + 6.0 * j / 199.0;
      // Feasible inputs form [max(-1, -1 - z2), min(1, 1 - z2)].
      const double margin = std::min(1.0 - std::abs(z1 + z2), std::min(1.0, 1.0 - z2) - std::max(-1.0, -1.0 - z2));
      if (std::abs(margin) <= 1e-6) continue;
      CHECK(contains_point(pre, vec({z1, z2}), 0.0) == (margin > 0));
      ++checked;
    }
  }
  CHECK(checked > 39000);
}

TEST_CASE("predecessor is monotone in the target") {
  std::mt19937_64 rng(41);
  const auto M = double_integrator();
  const HPolytope S_z = from_interval_box(vec({-4, -4}), vec({4, 4}));
  for (int trial = 0; trial < 20; ++trial) {
    auto [G, g] = oracle::random_polytope(rng, 2, 6, 0.3, 1.0, 1.5);
    const HPolytope big(G, g);
    const HPolytope small(G, g * 0.6);
    REQUIRE(contains(big, small));
    CHECK(contains(pre_linear(M, big, S_z, interval(-1, 1)), pre_linear(M, small, S_z, interval(-1, 1))));
  }
}

TEST_CASE("brs_global") {
  const auto M = double_integrator();
  const Box S_x(Vec::Zero(2), vec({3, 3}));
  const Box S_u(vec({0}), vec({1}));
  const HPolytope target = from_interval_box(vec({-1, -1}), vec({1, 1}));
  const auto R1 = brs_global(M, target, S_x, S_u, 1);
  REQUIRE(R1.horizon() == 1);
  CHECK(same_set(R1.layers[1][0].polytope, pre_linear(M, target, to_polytope(S_x), to_polytope(S_u))));
  CHECK(R1.layers[1][0].target_piece_id == 0);
  CHECK(R1.layers[0][0].target_piece_id == -1);

  // Contracting dynamics with the whole domain as target: a fixed point.
  KoopmanModel C{Lifting::identity(2), 0.5 * Mat::Identity(2, 2), Mat::Identity(2, 1), Box(Vec::Zero(2), Vec::Zero(2)),
                 HPolytope::universe(3), std::nullopt};
  const auto R = brs_global(C, to_polytope(S_x), S_x, S_u, 5);
  REQUIRE(R.horizon() == 5);
  for (const auto& layer : R.layers) {
    REQUIRE(layer.size() == 1);
    CHECK(same_set(layer[0].polytope, to_polytope(S_x)));
  }

  // A disturbance larger than the target empties layer 1.
  KoopmanModel noisy = M;
  noisy.W = Box(Vec::Zero(2), vec({2, 2}));
  const auto E = brs_global(noisy, target, S_x, S_u, 4);
  CHECK(E.horizon() == 1);
  CHECK(E.layers[1].empty());
  CHECK_FALSE(E.warnings.empty());
  CHECK_THROWS_AS(brs_global(M, target, S_x, S_u, 0), ConfigError);
}

TEST_CASE("Duffing global BRS is nonempty for ten steps") {
  const auto M = fixture::duffing_model();
  const SystemSpec spec = duffing_spec();
  const auto R = brs_global(M, to_polytope(spec.target), spec.domain, spec.inputs, 10);
  REQUIRE(R.horizon() == 10);
  for (const auto& layer : R.layers) {
    REQUIRE(layer.size() == 1);
    CHECK_FALSE(is_empty(layer[0].polytope));
  }
  check_inside_domain(R, 42);
  check_one_step(R, 10, 500, 43);
}

TEST_CASE("select_subdomain") {
  // States on a 0.05 grid over [0,1]^2, shifted by (2, 0).
  const int n = 21;
  Mat X(n * n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) X.row(i * n + j) << 0.05 * i, 0.05 * j;
  Mat Xp = X;
  Xp.col(0).array() += 2.0;
  const Dataset D(X, Mat::Zero(n * n, 1), Xp);
  const Box S_x = Box::from_bounds(vec({-1, -1}), vec({2, 2}));

  const auto sub = select_subdomain(D, from_interval_box(vec({2.2, 0.3}), vec({2.6, 0.7})), S_x);
  const Box bb = bounding_box(sub);
  CHECK((bb.lower() - vec({0.2, 0.3})).cwiseAbs().maxCoeff() <= 0.05 + 1e-9);
  CHECK((bb.upper() - vec({0.6, 0.7})).cwiseAbs().maxCoeff() <= 0.05 + 1e-9);

  CHECK_THROWS_AS(select_subdomain(D, from_interval_box(vec({5, 5}), vec({6, 6})), S_x), TooFewTuples);
  const auto all = select_subdomain(D, from_interval_box(vec({-10, -10}), vec({10, 10})), S_x);
  const Box ab = bounding_box(all);
  CHECK((ab.lower() - vec({0, 0})).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((ab.upper() - vec({1, 1})).cwiseAbs().maxCoeff() <= 1e-8);
  // Clipping to the domain.
  const auto clipped = select_subdomain(D, from_interval_box(vec({-10, -10}), vec({10, 10})),
                                        Box::from_bounds(vec({0, 0}), vec({0.5, 0.5})));
  CHECK((bounding_box(clipped).upper() - vec({0.5, 0.5})).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("membership") {
  const auto M = double_integrator();
  const Box S_x(Vec::Zero(2), vec({3, 3}));
  const auto R = brs_global(M, from_interval_box(vec({-1, -1}), vec({1, 1})), S_x, Box(vec({0}), vec({1})), 3);
  CHECK(membership(R, vec({0, 0}), 0) == 0);
  CHECK_FALSE(membership(R, vec({4, 0}), 3));
  CHECK_FALSE(membership(R, vec({0, 0}), 7));
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(-3.5, 3.5);
  for (int t = 0; t < 300; ++t) {
    const Vec x = vec({u(rng), u(rng)});
    for (int k = 0; k <= 3; ++k) {
      CHECK(membership(R, x, k).has_value() == contains_point(R.layers[k][0].polytope, x));
    }
  }
}

TEST_CASE("pendulum local BRS") {
  const auto s = fixture::pendulum_setup();
  const auto R = fixture::pendulum_local(s, 3);
  REQUIRE(R.horizon() == 3);
  for (int k = 1; k <= 3; ++k) {
    REQUIRE_FALSE(R.layers[k].empty());
    for (const auto& pc : R.layers[k]) {
      CHECK_FALSE(is_empty(pc.polytope));
      CHECK(pc.target_piece_id >= 0);
      CHECK(pc.target_piece_id < static_cast<int>(R.layers[k - 1].size()));
      CHECK(pc.model_id >= 1);
      CHECK(R.models[pc.model_id].parent == 0);
    }
  }
  CHECK_FALSE(R.models[0].parent.has_value());
  check_inside_domain(R, 45);
  for (int k = 1; k <= 3; ++k) check_one_step(R, k, 200, 46 + k);

  // Without splitting every source piece yields at most one piece.
  const auto coarse = fixture::pendulum_local(s, 2, 1e9);
  for (const auto& st : coarse.stats) CHECK(st.splits == 0);
  for (int k = 1; k <= coarse.horizon(); ++k) {
    CHECK(coarse.layers[k].size() <= coarse.layers[k - 1].size());
    if (!coarse.layers[k].empty()) check_one_step(coarse, k, 100, 50 + k);
  }

  // A tight threshold forces splits; soundness must not depend on them.
  const auto fine = fixture::pendulum_local(s, 3, 0.06);
  int splits = 0;
  for (const auto& st : fine.stats) splits += st.splits;
  CHECK(splits > 0);
  for (int k = 1; k <= fine.horizon(); ++k) {
    if (!fine.layers[k].empty()) check_one_step(fine, k, 100, 60 + k);
  }
}
