#include "koopbrs/systems.hpp"

#include "koopbrs/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace koopbrs {
namespace {

Vec duffing_field(const Vec& s, double u) {
  Vec d(2);
  d << s[1], 2.0 * s[0] - 2.0 * s[0] * s[0] * s[0] - 0.5 * s[1] + u;
  return d;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec vec1(double a) { return Vec::Constant(1, a); }

void check_step_args(const Vec& x, const Vec& u, const char* who) {
  if (x.size() != 2 || u.size() != 1) throw DimensionMismatch(std::string(who) + ": expects x in R^2, u in R^1");
}

}  // namespace

Vec duffing_step(const Vec& x, const Vec& u, double dt) {
  check_step_args(x, u, "duffing_step");
  const double v = u[0];
  const Vec k1 = duffing_field(x, v);
  const Vec k2 = duffing_field(x + 0.5 * dt * k1, v);
  const Vec k3 = duffing_field(x + 0.5 * dt * k2, v);
  const Vec k4 = duffing_field(x + dt * k3, v);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vec pendulum_step(const Vec& x, const Vec& u, double dt) {
  check_step_args(x, u, "pendulum_step");
  return vec2(x[0] + dt * x[1], x[1] + dt * (15.0 * std::sin(x[0]) + 30.0 * u[0]));
}

SystemSpec duffing_spec() {
  SystemSpec s;
  s.name = "duffing";
  s.state_dim = 2;
  s.input_dim = 1;
  s.domain = Box::from_bounds(vec2(-0.5, -1.5), vec2(0.5, 1.5));
  s.inputs = Box::from_bounds(vec1(-5.0), vec1(5.0));
  s.target = Box::from_bounds(vec2(-0.1, -0.1), vec2(0.1, 0.1));
  s.dt = 0.025;
  return s;
}

SystemSpec pendulum_spec() {
  SystemSpec s;
  s.name = "pendulum";
  s.state_dim = 2;
  s.input_dim = 1;
  s.domain = Box::from_bounds(vec2(0.0, -6.0), vec2(1.5 * std::numbers::pi, 4.0));
  s.inputs = Box::from_bounds(vec1(-0.35), vec1(0.35));
  s.target = Box::from_bounds(vec2(0.0, -0.5), vec2(0.2, 0.5));
  s.dt = 0.1;
  return s;
}

SystemSpec system_by_name(const std::string& name) {
  if (name == "duffing") return duffing_spec();
  if (name == "pendulum") return pendulum_spec();
  throw ConfigError("unknown system '" + name + "' (expected duffing or pendulum)");
}

StepFunction step_function(const SystemSpec& spec) {
  const double dt = spec.dt;
  if (!(dt > 0.0)) throw ConfigError("system time step must be positive");
  if (spec.name == "duffing") return [dt](const Vec& x, const Vec& u) { return duffing_step(x, u, dt); };
  if (spec.name == "pendulum") return [dt](const Vec& x, const Vec& u) { return pendulum_step(x, u, dt); };
  throw ConfigError("unknown system '" + spec.name + "'");
}

Dataset sample_random(const SystemSpec& spec, int count, std::uint64_t seed) {
  if (count < 1) throw EmptyDataset("sample_random needs at least one sample");
  const auto step = step_function(spec);
  const int n = spec.state_dim;
  const int m = spec.input_dim;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Mat X(count, n), U(count, m), Xp(count, n);
  for (int k = 0; k < count; ++k) {
    for (int i = 0; i < n; ++i) X(k, i) = spec.domain.center[i] + spec.domain.radii[i] * unit(rng);
    for (int j = 0; j < m; ++j) U(k, j) = spec.inputs.center[j] + spec.inputs.radii[j] * unit(rng);
    Xp.row(k) = step(X.row(k).transpose(), U.row(k).transpose()).transpose();
  }
  Dataset D(std::move(X), std::move(U), std::move(Xp));
  D.seed = seed;
  return D;
}

Dataset sample_grid(const SystemSpec& spec, const Vec& spacing, std::int64_t cap) {
  const int n = spec.state_dim;
  const int m = spec.input_dim;
  const int d = n + m;
  if (spacing.size() != d) throw DimensionMismatch("sample_grid: one spacing per state and input coordinate");
  Vec lo(d), hi(d);
  lo << spec.domain.lower(), spec.inputs.lower();
  hi << spec.domain.upper(), spec.inputs.upper();

  std::vector<std::int64_t> counts(d);
  Vec first(d);
  std::int64_t total = 1;
  for (int j = 0; j < d; ++j) {
    if (!(spacing[j] > 0.0)) throw ConfigError("grid spacings must be positive");
    const double span = hi[j] - lo[j];
    const auto cells = static_cast<std::int64_t>(std::floor(span / spacing[j] + 1e-9));
    counts[j] = cells + 1;
    first[j] = lo[j] + 0.5 * (span - static_cast<double>(cells) * spacing[j]);
    if (total > cap / counts[j]) throw GridTooLarge("grid exceeds the cap of " + std::to_string(cap) + " points");
    total *= counts[j];
  }
  if (total > cap) throw GridTooLarge("grid exceeds the cap of " + std::to_string(cap) + " points");

  const auto step = step_function(spec);
  Mat X(total, n), U(total, m), Xp(total, n);
  std::vector<std::int64_t> idx(d, 0);
  Vec point(d);
  for (std::int64_t k = 0; k < total; ++k) {
    for (int j = 0; j < d; ++j) point[j] = first[j] + static_cast<double>(idx[j]) * spacing[j];
    X.row(k) = point.head(n).transpose();
    U.row(k) = point.tail(m).transpose();
    Xp.row(k) = step(point.head(n), point.tail(m)).transpose();
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[j] < counts[j]) break;
      idx[j] = 0;
    }
  }
  Dataset D(std::move(X), std::move(U), std::move(Xp));
  D.grid_box = Box::from_bounds(lo, hi);
  D.grid_spacing = spacing;
  return D;
}

}  // namespace koopbrs
