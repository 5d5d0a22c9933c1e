#pragma once

#include "koopbrs/dataset.hpp"

#include <cstdint>
#include <functional>
#include <string>

namespace koopbrs {

using StepFunction = std::function<Vec(const Vec& x, const Vec& u)>;

struct SystemSpec {
  std::string name;
  int state_dim = 0;
  int input_dim = 0;
  Box domain;
  Box inputs;
  Box target;
  double dt = 0.0;
};

/// x' = y, y' = 2x - 2x^3 - 0.5y + u; one classic RK4 step with u held.
Vec duffing_step(const Vec& x, const Vec& u, double dt = 0.025);
/// theta+ = theta + dt*omega, omega+ = omega + dt*(15 sin(theta) + 30u).
Vec pendulum_step(const Vec& x, const Vec& u, double dt = 0.1);

SystemSpec duffing_spec();
SystemSpec pendulum_spec();
/// Look up a benchmark by name ("duffing" or "pendulum").
SystemSpec system_by_name(const std::string& name);
StepFunction step_function(const SystemSpec& spec);

/// Uniform i.i.d. (x, u) over domain x inputs.
Dataset sample_random(const SystemSpec& spec, int count, std::uint64_t seed);

/// Axis-aligned grid over domain x inputs with floor(span/delta)+1 points per
/// axis, centered so the leftover margin is shared by both ends.
Dataset sample_grid(const SystemSpec& spec, const Vec& spacing, std::int64_t cap = 10'000'000);

}  // namespace koopbrs
