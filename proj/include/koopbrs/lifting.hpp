#pragma once

#include "koopbrs/polytope.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace koopbrs {

/// One scalar function of the state. Indices are zero-based internally and
/// one-based in descriptors ("x1", "pow(x1,3)", "sin(x1)", "cos(0.5*x2)").
struct Observable {
  enum class Kind { Coordinate, Monomial, Sine, Cosine };

  Kind kind = Kind::Coordinate;
  int index = 0;
  int degree = 1;
  double scale = 1.0;

  static Observable coordinate(int i) { return {Kind::Coordinate, i, 1, 1.0}; }
  static Observable monomial(int i, int k) { return {Kind::Monomial, i, k, 1.0}; }
  static Observable sine(int i, double s = 1.0) { return {Kind::Sine, i, 1, s}; }
  static Observable cosine(int i, double s = 1.0) { return {Kind::Cosine, i, 1, s}; }

  static Observable parse(std::string_view descriptor);
  std::string descriptor() const;

  double operator()(const Vec& x) const;
  /// Range of the observable over an axis-aligned box.
  std::pair<double, double> range(const Box& domain) const;
  /// Bound on |d/dx_index| over the box.
  double slope_bound(const Box& domain) const;
};

/// psi : R^n -> R^p whose first n outputs are the state itself, so C = [I 0].
class Lifting {
 public:
  Lifting() = default;
  Lifting(int state_dim, std::vector<Observable> observables);
  static Lifting from_descriptors(int state_dim, const std::vector<std::string>& descriptors);
  static Lifting identity(int state_dim);

  int state_dim() const { return n_; }
  int dim() const { return static_cast<int>(obs_.size()); }
  const std::vector<Observable>& observables() const { return obs_; }
  std::vector<std::string> descriptors() const;

  Vec lift(const Vec& x) const;
  /// Lifts every row of X (N x n) into an N x p matrix.
  Mat lift_rows(const Mat& X) const;
  Mat left_inverse() const;

 private:
  int n_ = 0;
  std::vector<Observable> obs_;
};

/// {z | C z in X}.
HPolytope implicit_set(const Lifting& L, const HPolytope& X);

/// Interval bounds of every lifted coordinate over a state box, as rows in R^p.
/// Adding them to a lifted constraint set leaves its state preimage within the
/// box unchanged and makes the lifted set bounded.
HPolytope lifted_envelope(const Lifting& L, const Box& domain);

/// Infinity-norm Lipschitz constant of psi over the box.
double lipschitz_constant(const Lifting& L, const Box& domain);

}  // namespace koopbrs
