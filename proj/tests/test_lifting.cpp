#include <doctest.h>

#include "koopbrs/errors.hpp"
#include "koopbrs/lifting.hpp"
#include "oracles.hpp"

#include <numbers>
#include <random>

using namespace koopbrs;

namespace {

Vec vec(std::initializer_list<double> init) {
  Vec v(init.size());
  int i = 0;
  for (double x : init) v[i++] = x;
  return v;
}

const Lifting duffing = Lifting::from_descriptors(2, {"x1", "x2", "pow(x1,3)"});
const Lifting pendulum = Lifting::from_descriptors(2, {"x1", "x2", "sin(x1)"});

Vec uniform_in(const Box& B, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec x(B.dim());
  for (int j = 0; j < B.dim(); ++j) x[j] = B.center[j] + B.radii[j] * u(rng);
  return x;
}

}  // namespace

TEST_CASE("descriptors round-trip") {
  CHECK(duffing.dim() == 3);
  CHECK(duffing.descriptors() == std::vector<std::string>{"x1", "x2", "pow(x1,3)"});
  CHECK(pendulum.descriptors() == std::vector<std::string>{"x1", "x2", "sin(x1)"});
  const auto scaled = Observable::parse("cos(0.5*x2)");
  CHECK(scaled.kind == Observable::Kind::Cosine);
  CHECK(scaled.index == 1);
  CHECK(scaled.scale == 0.5);
  CHECK(Observable::parse(scaled.descriptor()).scale == 0.5);
  CHECK_THROWS_AS(Observable::parse("exp(x1)"), ConfigError);
  CHECK_THROWS_AS(Observable::parse("x0"), ConfigError);
  CHECK_THROWS_AS(Lifting::from_descriptors(2, {"x2", "x1"}), ConfigError);
  CHECK_THROWS_AS(Lifting::from_descriptors(2, {"x1"}), DimensionMismatch);
  CHECK_THROWS_AS(Lifting::from_descriptors(2, {"x1", "x2", "sin(x3)"}), DimensionMismatch);
}

TEST_CASE("lift") {
  const Vec z = duffing.lift(vec({0.5, -1.0}));
  CHECK(z[0] == 0.5);
  CHECK(z[1] == -1.0);
  CHECK(z[2] == doctest::Approx(0.125));
  CHECK(pendulum.lift(vec({0.0, 0.0})).isZero());
  const Vec top = pendulum.lift(vec({std::numbers::pi, 0.0}));
  CHECK(top[0] == std::numbers::pi);
  CHECK(std::abs(top[2]) < 1e-15);
  CHECK_THROWS_AS(duffing.lift(vec({1.0})), DimensionMismatch);

  Mat X(2, 2);
  X << 0.5, -1.0, 0.1, 0.2;
  const Mat Z = duffing.lift_rows(X);
  CHECK(Z(1, 2) == doctest::Approx(0.001));
}

TEST_CASE("left inverse is exact") {
  std::mt19937_64 rng(1);
  const Box dom = Box::from_bounds(vec({0.0, -6.0}), vec({1.5 * std::numbers::pi, 4.0}));
  const Mat C = pendulum.left_inverse();
  for (int s = 0; s < 10000; ++s) {
    const Vec x = uniform_in(dom, rng);
    REQUIRE((C * pendulum.lift(x) - x).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("implicit set preserves membership") {
  const auto XT = from_interval_box(vec({-0.1, -0.1}), vec({0.1, 0.1}));
  const auto Z = implicit_set(duffing, XT);
  CHECK(Z.dim() == 3);
  CHECK(Z.H().col(2).isZero());

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto [G, g] = oracle::random_polytope(rng, 2, 4);
    const HPolytope X(G, g);
    const auto ZX = implicit_set(pendulum, X);
    for (int s = 0; s < 200; ++s) {
      const Vec x = vec({u(rng), u(rng)});
      CHECK(contains_point(X, x) == contains_point(ZX, pendulum.lift(x)));
    }
  }
  CHECK_THROWS_AS(implicit_set(duffing, from_interval_box(vec({0}), vec({1}))), DimensionMismatch);
}

TEST_CASE("lipschitz constants") {
  const Box pend = Box::from_bounds(vec({0.0, -6.0}), vec({1.5 * std::numbers::pi, 4.0}));
  CHECK(lipschitz_constant(pendulum, pend) == 1.0);
  const Box duff = Box::from_bounds(vec({-0.5, -1.5}), vec({0.5, 1.5}));
  CHECK(lipschitz_constant(duffing, duff) == 1.0);
  CHECK(Observable::monomial(0, 3).slope_bound(duff) == doctest::Approx(0.75));
  CHECK(lipschitz_constant(Lifting::identity(3), Box(Vec::Zero(3), Vec::Ones(3))) == 1.0);
  const Box wide = Box::from_bounds(vec({-2.0, -1.0}), vec({1.0, 1.0}));
  CHECK(lipschitz_constant(duffing, wide) == doctest::Approx(12.0));

  std::mt19937_64 rng(3);
  const Lifting mixed = Lifting::from_descriptors(2, {"x1", "x2", "pow(x2,2)", "cos(2*x1)", "pow(x1,3)"});
  for (const Box& dom : {pend, duff, wide}) {
    for (const Lifting* L : {&duffing, &pendulum, &mixed}) {
      const double Lip = lipschitz_constant(*L, dom);
      for (int s = 0; s < 10000; ++s) {
        const Vec a = uniform_in(dom, rng);
        const Vec b = uniform_in(dom, rng);
        REQUIRE((L->lift(a) - L->lift(b)).cwiseAbs().maxCoeff() <= Lip * (a - b).cwiseAbs().maxCoeff() + 1e-12);
      }
    }
  }
}

TEST_CASE("lifted envelope encloses every lifted state") {
  std::mt19937_64 rng(4);
  const Lifting mixed =
      Lifting::from_descriptors(2, {"x1", "x2", "sin(x1)", "cos(x2)", "pow(x2,2)", "pow(x1,3)", "sin(-3*x2)"});
  const Box boxes[] = {Box::from_bounds(vec({0.0, -6.0}), vec({1.5 * std::numbers::pi, 4.0})),
                       Box::from_bounds(vec({-0.5, -1.5}), vec({0.5, 1.5})),
                       Box::from_bounds(vec({0.3, 0.1}), vec({0.4, 0.2}))};
  for (const Box& dom : boxes) {
    const auto env = lifted_envelope(mixed, dom);
    Vec lo = Vec::Constant(mixed.dim(), 1e9), hi = Vec::Constant(mixed.dim(), -1e9);
    for (int s = 0; s < 20000; ++s) {
      const Vec z = mixed.lift(uniform_in(dom, rng));
      REQUIRE(contains_point(env, z, 1e-12));
      lo = lo.cwiseMin(z);
      hi = hi.cwiseMax(z);
    }
    // Tightness: sampled extremes come close to the envelope faces.
    const Box bb = bounding_box(env);
    CHECK((bb.upper() - hi).maxCoeff() < 0.05);
    CHECK((lo - bb.lower()).maxCoeff() < 0.05);
  }
}
