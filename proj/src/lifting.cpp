#include "koopbrs/lifting.hpp"

#include "koopbrs/errors.hpp"

#include <cmath>
#include <numbers>
#include <regex>
#include <sstream>

namespace koopbrs {
namespace {

double parse_scale(const std::string& text) {
  if (text.empty()) return 1.0;
  std::size_t used = 0;
  const double s = std::stod(text, &used);
  if (used != text.size() || !std::isfinite(s)) throw ConfigError("bad observable scale '" + text + "'");
  return s;
}

// Range of sin over [a, b].
std::pair<double, double> sine_range(double a, double b) {
  double lo = std::min(std::sin(a), std::sin(b));
  double hi = std::max(std::sin(a), std::sin(b));
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double peak = std::numbers::pi / 2.0 + two_pi * std::ceil((a - std::numbers::pi / 2.0) / two_pi);
  if (peak <= b) hi = 1.0;
  const double trough = -std::numbers::pi / 2.0 + two_pi * std::ceil((a + std::numbers::pi / 2.0) / two_pi);
  if (trough <= b) lo = -1.0;
  return {lo, hi};
}

}  // namespace

Observable Observable::parse(std::string_view descriptor) {
  static const std::regex coord(R"(\s*x(\d+)\s*)");
  static const std::regex power(R"(\s*pow\(\s*x(\d+)\s*,\s*(\d+)\s*\)\s*)");
  static const std::regex trig(R"(\s*(sin|cos)\(\s*(?:([-+0-9.eE]+)\s*\*\s*)?x(\d+)\s*\)\s*)");
  const std::string text(descriptor);
  std::smatch m;
  auto index = [&](const std::string& s) {
    const int i = std::stoi(s) - 1;
    if (i < 0) throw ConfigError("observable indices start at 1: '" + text + "'");
    return i;
  };
  if (std::regex_match(text, m, coord)) return coordinate(index(m[1]));
  if (std::regex_match(text, m, power)) {
    const int k = std::stoi(m[2]);
    if (k < 1) throw ConfigError("monomial degree must be >= 1: '" + text + "'");
    return k == 1 ? coordinate(index(m[1])) : monomial(index(m[1]), k);
  }
  if (std::regex_match(text, m, trig)) {
    const double s = parse_scale(m[2]);
    return m[1] == "sin" ? sine(index(m[3]), s) : cosine(index(m[3]), s);
  }
  throw ConfigError("unknown observable '" + text + "'");
}

std::string Observable::descriptor() const {
  const std::string var = "x" + std::to_string(index + 1);
  auto arg = [&] {
    if (scale == 1.0) return var;
    std::ostringstream os;
    os.precision(17);
    os << scale << "*" << var;
    return os.str();
  };
  switch (kind) {
    case Kind::Coordinate: return var;
    case Kind::Monomial: return "pow(" + var + "," + std::to_string(degree) + ")";
    case Kind::Sine: return "sin(" + arg() + ")";
    case Kind::Cosine: return "cos(" + arg() + ")";
  }
  return var;
}

double Observable::operator()(const Vec& x) const {
  const double v = x[index];
  switch (kind) {
    case Kind::Coordinate: return v;
    case Kind::Monomial: {
      double r = v;
      for (int k = 1; k < degree; ++k) r *= v;
      return r;
    }
    case Kind::Sine: return std::sin(scale * v);
    case Kind::Cosine: return std::cos(scale * v);
  }
  return v;
}

std::pair<double, double> Observable::range(const Box& domain) const {
  const double lo = domain.center[index] - domain.radii[index];
  const double hi = domain.center[index] + domain.radii[index];
  switch (kind) {
    case Kind::Coordinate: return {lo, hi};
    case Kind::Monomial: {
      const double a = std::pow(lo, degree);
      const double b = std::pow(hi, degree);
      if (degree % 2 == 1 || lo >= 0.0) return {std::min(a, b), std::max(a, b)};
      if (hi <= 0.0) return {std::min(a, b), std::max(a, b)};
      return {0.0, std::max(a, b)};
    }
    case Kind::Sine:
    case Kind::Cosine: {
      double a = scale * lo;
      double b = scale * hi;
      if (a > b) std::swap(a, b);
      if (kind == Kind::Cosine) {
        a += std::numbers::pi / 2.0;
        b += std::numbers::pi / 2.0;
      }
      return sine_range(a, b);
    }
  }
  return {lo, hi};
}

double Observable::slope_bound(const Box& domain) const {
  switch (kind) {
    case Kind::Coordinate: return 1.0;
    case Kind::Monomial: {
      const double m = std::abs(domain.center[index]) + domain.radii[index];
      return degree * std::pow(m, degree - 1);
    }
    case Kind::Sine:
    case Kind::Cosine: return std::abs(scale);
  }
  return 1.0;
}

Lifting::Lifting(int state_dim, std::vector<Observable> observables) : n_(state_dim), obs_(std::move(observables)) {
  if (n_ < 1) throw DimensionMismatch("lifting needs a positive state dimension");
  if (static_cast<int>(obs_.size()) < n_) throw DimensionMismatch("lifting has fewer observables than states");
  for (int j = 0; j < dim(); ++j) {
    const auto& o = obs_[j];
    if (o.index < 0 || o.index >= n_) throw DimensionMismatch("observable index out of range: " + o.descriptor());
    if (o.degree < 1 || !std::isfinite(o.scale)) throw ConfigError("invalid observable " + o.descriptor());
    if (j < n_ && (o.kind != Observable::Kind::Coordinate || o.index != j)) {
      throw ConfigError("the first " + std::to_string(n_) + " observables must be x1..x" + std::to_string(n_));
    }
  }
}

Lifting Lifting::from_descriptors(int state_dim, const std::vector<std::string>& descriptors) {
  std::vector<Observable> obs;
  obs.reserve(descriptors.size());
  for (const auto& d : descriptors) obs.push_back(Observable::parse(d));
  return Lifting(state_dim, std::move(obs));
}

Lifting Lifting::identity(int state_dim) {
  std::vector<Observable> obs;
  for (int i = 0; i < state_dim; ++i) obs.push_back(Observable::coordinate(i));
  return Lifting(state_dim, std::move(obs));
}

std::vector<std::string> Lifting::descriptors() const {
  std::vector<std::string> out;
  for (const auto& o : obs_) out.push_back(o.descriptor());
  return out;
}

Vec Lifting::lift(const Vec& x) const {
  if (x.size() != n_) throw DimensionMismatch("lift: state has the wrong length");
  Vec z(dim());
  for (int j = 0; j < dim(); ++j) z[j] = obs_[j](x);
  return z;
}

Mat Lifting::lift_rows(const Mat& X) const {
  if (X.cols() != n_) throw DimensionMismatch("lift_rows: state matrix has the wrong width");
  Mat Z(X.rows(), dim());
  for (Eigen::Index r = 0; r < X.rows(); ++r) Z.row(r) = lift(X.row(r).transpose()).transpose();
  return Z;
}

Mat Lifting::left_inverse() const {
  Mat C = Mat::Zero(n_, dim());
  C.leftCols(n_).setIdentity();
  return C;
}

HPolytope implicit_set(const Lifting& L, const HPolytope& X) {
  if (X.dim() != L.state_dim()) throw DimensionMismatch("implicit_set: set and lifting disagree on n");
  return affine_preimage(X, L.left_inverse(), Vec::Zero(L.state_dim()));
}

HPolytope lifted_envelope(const Lifting& L, const Box& domain) {
  if (domain.dim() != L.state_dim()) throw DimensionMismatch("lifted_envelope: domain has the wrong dimension");
  const int p = L.dim();
  Vec lo(p), hi(p);
  for (int j = 0; j < p; ++j) std::tie(lo[j], hi[j]) = L.observables()[j].range(domain);
  return from_interval_box(lo, hi);
}

double lipschitz_constant(const Lifting& L, const Box& domain) {
  if (domain.dim() != L.state_dim()) throw DimensionMismatch("lipschitz_constant: domain has the wrong dimension");
  double best = 0.0;
  for (const auto& o : L.observables()) best = std::max(best, o.slope_bound(domain));
  return best;
}

}  // namespace koopbrs
