#include "koopbrs/evt.hpp"

#include "koopbrs/errors.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace koopbrs::evt {
namespace {

struct WeibullProfile {
  double shape;
  double scale;
  double loglik;
};

// Two-parameter Weibull MLE on y > 0 with shape >= 1.
WeibullProfile weibull_mle(const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  const double ymax = *std::max_element(y.begin(), y.end());
  std::vector<double> ly(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) ly[k] = std::log(y[k] / ymax);
  const double mean_ly = std::accumulate(ly.begin(), ly.end(), 0.0) / n;

  auto moments = [&](double a) {
    double s0 = 0.0, s1 = 0.0;
    for (double l : ly) {
      const double w = std::exp(a * l);
      s0 += w;
      s1 += w * l;
    }
    return std::pair{s0, s1};
  };
  auto score = [&](double a) {
    const auto [s0, s1] = moments(a);
    return s1 / s0 - 1.0 / a - mean_ly;
  };

  double a = 1.0;
  if (score(1.0) < 0.0) {
    double hi = 2.0;
    while (score(hi) < 0.0) {
      hi *= 2.0;
      if (hi > 1e6) throw FitDiverged("Weibull shape equation has no root below 1e6");
    }
    boost::uintmax_t iters = 200;
    const auto bracket = boost::math::tools::toms748_solve(
        score, hi / 2.0 > 1.0 ? hi / 2.0 : 1.0, hi, boost::math::tools::eps_tolerance<double>(50), iters);
    a = 0.5 * (bracket.first + bracket.second);
  }
  const double s0 = moments(a).first;
  // scale^a = mean(y^a); with normalized y the scale is ymax * (s0/n)^(1/a).
  const double log_scale = std::log(ymax) + std::log(s0 / n) / a;
  const double sum_log_y = n * mean_ly + n * std::log(ymax);
  const double loglik = n * std::log(a) - n * a * log_scale + (a - 1.0) * sum_log_y - n;
  return {a, std::exp(log_scale), loglik};
}

}  // namespace

double ReverseWeibull::cdf(double x) const {
  if (x >= location) return 1.0;
  return std::exp(-std::pow((location - x) / scale, shape));
}

ReverseWeibull fit_reverse_weibull(std::span<const double> maxima) {
  if (maxima.size() < 3) throw FitDiverged("reverse Weibull fit needs at least 3 maxima");
  for (double v : maxima) {
    if (!std::isfinite(v)) throw FitDiverged("non-finite value among the maxima");
  }
  const auto [lo_it, hi_it] = std::minmax_element(maxima.begin(), maxima.end());
  const double top = *hi_it;
  const double range = top - *lo_it;
  if (!(range > 0.0)) throw FitDiverged("maxima are all equal");

  std::vector<double> y(maxima.size());
  auto profile = [&](double log_delta) {
    const double mu = top + std::exp(log_delta) * range;
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = mu - maxima[k];
    return weibull_mle(y);
  };

  constexpr int kGrid = 91;
  const double log_lo = std::log(1e-6);
  const double log_hi = std::log(1e3);
  auto grid_point = [&](int k) { return log_lo + (log_hi - log_lo) * k / (kGrid - 1); };
  int best = 0;
  double best_ll = -INFINITY;
  for (int k = 0; k < kGrid; ++k) {
    const double ll = profile(grid_point(k)).loglik;
    if (!std::isfinite(ll)) throw FitDiverged("non-finite profile likelihood");
    if (ll > best_ll) {
      best_ll = ll;
      best = k;
    }
  }
  if (best == kGrid - 1) throw FitDiverged("reverse Weibull location escapes to infinity");

  const double a = grid_point(std::max(best - 1, 0));
  const double b = grid_point(best + 1);
  boost::uintmax_t iters = 200;
  const auto [arg, neg_ll] =
      boost::math::tools::brent_find_minima([&](double t) { return -profile(t).loglik; }, a, b, 40, iters);
  const double log_delta = -neg_ll > best_ll ? arg : grid_point(best);
  const auto fit = profile(log_delta);
  return {top + std::exp(log_delta) * range, fit.scale, fit.shape};
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.18) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsOutcome ks_test(std::span<const double> sample, const ReverseWeibull& dist, double alpha) {
  if (sample.empty()) throw FitDiverged("KS test needs a nonempty sample");
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double D = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double F = dist.cdf(s[i]);
    D = std::max({D, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
  }
  const double sn = std::sqrt(n);
  KsOutcome out;
  out.statistic = D;
  out.p_value = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * D);
  out.pass = out.p_value >= alpha;
  return out;
}

std::vector<double> batch_maxima(std::span<const double> values, int batch) {
  if (batch < 1) throw ConfigError("batch size must be >= 1");
  std::vector<double> out;
  for (std::size_t start = 0; start + batch <= values.size(); start += batch) {
    out.push_back(*std::max_element(values.begin() + start, values.begin() + start + batch));
  }
  return out;
}

EndpointEstimate estimate_endpoint(std::span<const double> fit_values, std::span<const double> ks_values, int batch,
                                   double alpha) {
  const auto fit_max = batch_maxima(fit_values, batch);
  const auto ks_max = batch_maxima(ks_values, batch);
  if (fit_max.empty() || ks_max.empty()) throw FitDiverged("not enough values for one batch");
  EndpointEstimate est;
  const auto [lo, hi] = std::minmax_element(fit_max.begin(), fit_max.end());
  const double top = std::max(*hi, *std::max_element(ks_max.begin(), ks_max.end()));
  if (top <= 1e-9 || *hi - *lo <= 1e-12 * std::abs(*hi)) {
    est.degenerate = true;
    est.estimate = std::max(top, 0.0);
    est.fit = {est.estimate, 1.0, 1.0};
    return est;
  }
  est.fit = fit_reverse_weibull(fit_max);
  est.estimate = est.fit.location;
  est.ks = ks_test(ks_max, est.fit, alpha);
  return est;
}

}  // namespace koopbrs::evt
