#pragma once

#include <span>
#include <vector>

namespace koopbrs::evt {

/// F(x) = exp(-((location - x) / scale)^shape) for x < location, 1 above.
struct ReverseWeibull {
  double location = 0.0;
  double scale = 1.0;
  double shape = 1.0;

  double cdf(double x) const;
};

/// Maximum-likelihood fit by profiling the location over (max, max + 1000*range].
/// The shape is kept >= 1, where the likelihood has a finite maximum.
/// Throws FitDiverged when the optimum escapes to the upper end of the search.
ReverseWeibull fit_reverse_weibull(std::span<const double> maxima);

/// Kolmogorov limiting survival function Q(lambda) = 2 sum (-1)^(j-1) exp(-2 j^2 lambda^2).
double kolmogorov_survival(double lambda);

struct KsOutcome {
  double statistic = 0.0;
  double p_value = 1.0;
  bool pass = true;
};

/// One-sample Kolmogorov-Smirnov test against a fitted distribution.
KsOutcome ks_test(std::span<const double> sample, const ReverseWeibull& dist, double alpha);

/// Maxima of consecutive batches; a trailing partial batch is discarded.
std::vector<double> batch_maxima(std::span<const double> values, int batch);

struct EndpointEstimate {
  double estimate = 0.0;
  ReverseWeibull fit;
  KsOutcome ks;
  /// Values were (numerically) constant or zero; the observed maximum is reported.
  bool degenerate = false;
};

/// Right endpoint of the distribution behind `fit_values` from its batch
/// maxima, validated on the batch maxima of `ks_values`.
EndpointEstimate estimate_endpoint(std::span<const double> fit_values, std::span<const double> ks_values, int batch,
                                   double alpha);

}  // namespace koopbrs::evt
