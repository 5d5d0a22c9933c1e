#pragma once

#include "koopbrs/dataset.hpp"
#include "koopbrs/evt.hpp"
#include "koopbrs/lifting.hpp"

#include <cstdint>
#include <optional>
#include <span>

namespace koopbrs {

/// Lifted uncertain linear model z+ in A z + B u + W, valid on `subdomain` (over (x, u)).
struct KoopmanModel {
  Lifting lifting;
  Mat A;
  Mat B;
  Box W;
  HPolytope subdomain;
  /// Id of the model this one was derived from; empty for a global fit.
  std::optional<int> parent;
};

/// Minimizers of the per-row max residual together with its exact center and half range.
struct GlobalFit {
  Mat A;
  Mat B;
  Vec center;    ///< c*
  Vec residual;  ///< e
};

struct ResidualBounds {
  Vec center;
  Vec half_range;
};

/// Per-row Chebyshev regression of psi(x+) on (psi(x), u, 1).
GlobalFit fit_global(const Dataset& D, const Lifting& L);

/// E(x, u) = psi(x+) - A psi(x) - B u, one row per triple.
Mat lifted_errors(const Dataset& D, const Lifting& L, const Mat& A, const Mat& B);

/// Componentwise midrange and half range of the residuals.
ResidualBounds residual_center(const Dataset& D, const Lifting& L, const Mat& A, const Mat& B);

struct Dispersion {
  double value = 0.0;
  /// True when computed from a probe grid rather than the sampling metadata.
  bool estimate = false;
};

/// Infinity-norm dispersion of the (x, u) samples in S. Exact for a grid
/// dataset whose grid box coincides with S; otherwise the maximum over a probe
/// grid (probes_per_axis points per axis of S's bounding box, restricted to S)
/// of the distance to the nearest sample.
Dispersion dispersion(const Dataset& D, const HPolytope& S, int probes_per_axis = 40);
/// Exact dispersion of a grid dataset over the listed coordinates of (x, u).
double grid_dispersion(const Dataset& D, std::span<const int> coords);

/// Per-component statistical estimate with its goodness-of-fit record.
struct EvtEstimate {
  Vec per_component;
  std::vector<bool> ks_pass;
  Vec ks_statistic;
  Vec ks_p_value;
  int batch = 0;
  int n_fit = 0;
  int n_ks = 0;
  std::uint64_t seed = 0;
};
using LipschitzEstimate = EvtEstimate;

struct EvtOptions {
  int n_fit = 40000;  ///< samples fitted (batch maxima are taken over these)
  int batch = 50;
  int n_ks = 10000;   ///< held-out samples for the KS test
  double alpha = 0.05;
  std::uint64_t seed = 0;
  /// Throw KsRejected on the first component failing the KS test.
  bool enforce_ks = true;
};

/// Slopes |E_i(a) - E_i(b)| / |a - b|_inf over uniformly drawn pairs of rows of
/// `points`, reduced to a reverse-Weibull endpoint per component.
LipschitzEstimate estimate_lipschitz_evt(const Mat& points, const Mat& values, const EvtOptions& opt);

/// W = center + [-radius, radius] with radius_i = Lip_i b + e_i.
Box error_set_global(const Vec& residual, const Vec& center, const Vec& lipschitz, double b);

struct DirectBound {
  Box W;
  EvtEstimate report;
};

/// Endpoint estimate of |E_i - c*_i| on held-out triples; `ks_set` validates it.
DirectBound error_set_direct(const Dataset& holdout, const Dataset& ks_set, const Lifting& L, const Mat& A,
                             const Mat& B, const Vec& center, int batch, double alpha, bool enforce_ks = true);

/// Triples whose (x, u) lies in S inflated by b in the infinity norm.
std::vector<Eigen::Index> restrict_indices(const Dataset& D, const HPolytope& S, double b);
Dataset restrict_dataset(const Dataset& D, const HPolytope& S, double b);

struct LocalFitOptions {
  bool adapt_B = true;
  /// State-only dispersion. With B held, every dispersion term of a row uses it,
  /// which presumes the held rows of the error do not vary with u.
  double b_x = 0.0;
};

struct LocalFit {
  Mat A;
  Mat B;
  Box W;
  Vec residual;  ///< half range of the local residuals
};

/// Per-row LP trading deviation from (A, B) against the local max residual.
LocalFit fit_local(const Dataset& restricted, const Lifting& L, const Mat& A, const Mat& B, double lipschitz_psi,
                   const Vec& lipschitz_error, double b, const LocalFitOptions& opt);

}  // namespace koopbrs
