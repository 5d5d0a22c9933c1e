#pragma once
// Small end-to-end pipelines shared by the reach and control suites.

#include "koopbrs/koopman.hpp"
#include "koopbrs/reach.hpp"
#include "koopbrs/systems.hpp"

#include <cmath>
#include <random>

namespace fixture {

using namespace koopbrs;

inline Vec vec(std::initializer_list<double> init) {
  Vec v(init.size());
  int i = 0;
  for (double x : init) v[i++] = x;
  return v;
}

/// Global Duffing model with a direct error bound.
inline KoopmanModel duffing_model(std::uint64_t seed = 0) {
  const SystemSpec spec = duffing_spec();
  const Lifting L = Lifting::from_descriptors(2, {"x1", "x2", "pow(x1,3)"});
  const Dataset D = sample_random(spec, 1000, seed);
  const GlobalFit fit = fit_global(D, L);
  const Dataset hold = sample_random(spec, 200, seed + 1);
  const Dataset ks = sample_random(spec, 50, seed + 2);
  const DirectBound bound = error_set_direct(hold, ks, L, fit.A, fit.B, fit.center, 5, 0.05, false);
  return {L, fit.A, fit.B, bound.W, cartesian_product(to_polytope(spec.domain), to_polytope(spec.inputs)),
          std::nullopt};
}

struct PendulumSetup {
  Dataset data;
  Lifting lifting;
  GlobalFit fit;
  Vec lipschitz;
  double b;
  double b_x;
};

/// Max 1-norm of the gradient of the third residual row over a dense grid,
/// padded by 5%. Rows one and two are exactly linear.
inline Vec pendulum_residual_lipschitz(const GlobalFit& fit, const SystemSpec& spec) {
  const Eigen::RowVectorXd a = fit.A.row(2);
  const double bu = fit.B(2, 0);
  double best = 0.0;
  const int n = 400;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const double th = spec.domain.lower()[0] + 2.0 * spec.domain.radii[0] * i / n;
      const double om = spec.domain.lower()[1] + 2.0 * spec.domain.radii[1] * j / n;
      const double c = std::cos(th + 0.1 * om);
      const double g = std::abs(c - a[0] - a[2] * std::cos(th)) + std::abs(0.1 * c - a[1]) + std::abs(bu);
      best = std::max(best, g);
    }
  }
  return vec({0.0, 0.0, 1.05 * best});
}

/// Pendulum grid with spacing 0.1 on every axis, so b = b_x = 0.05 exactly.
inline PendulumSetup pendulum_setup() {
  const SystemSpec spec = pendulum_spec();
  PendulumSetup s{sample_grid(spec, vec({0.1, 0.1, 0.1})), Lifting::from_descriptors(2, {"x1", "x2", "sin(x1)"}),
                  {}, Vec(), 0.0, 0.0};
  s.fit = fit_global(s.data, s.lifting);
  s.lipschitz = pendulum_residual_lipschitz(s.fit, spec);
  s.b = dispersion(s.data, cartesian_product(to_polytope(spec.domain), to_polytope(spec.inputs))).value;
  s.b_x = grid_dispersion(s.data, std::vector<int>{0, 1});
  return s;
}

inline BrsResult pendulum_local(const PendulumSetup& s, int K, double threshold = 0.18) {
  const SystemSpec spec = pendulum_spec();
  LocalBrsOptions opt;
  opt.threshold = threshold;
  return brs_local({s.data, s.lifting, s.fit.A, s.fit.B, s.lipschitz, 1.0, s.b, s.b_x}, to_polytope(spec.target),
                   spec.domain, spec.inputs, K, opt);
}

/// Uniform states of the domain that land in layer k, up to `count` of them.
inline std::vector<Vec> sample_layer(const BrsResult& R, int k, int count, std::uint64_t seed, int max_draws = 2000000) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Vec> out;
  const Box& S = R.state_domain;
  for (int draw = 0; draw < max_draws && static_cast<int>(out.size()) < count; ++draw) {
    Vec x(S.dim());
    for (int i = 0; i < S.dim(); ++i) x[i] = S.center[i] + S.radii[i] * unit(rng);
    if (membership(R, x, k)) out.push_back(x);
  }
  return out;
}

}  // namespace fixture
