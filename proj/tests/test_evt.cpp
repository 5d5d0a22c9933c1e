#include <doctest.h>

#include "koopbrs/errors.hpp"
#include "koopbrs/evt.hpp"

#include <cmath>
#include <random>

using namespace koopbrs;

namespace {

// Inverse-CDF draws from a reverse Weibull.
std::vector<double> draw(const evt::ReverseWeibull& d, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) v = d.location - d.scale * std::pow(-std::log(u(rng)), 1.0 / d.shape);
  return out;
}

}  // namespace

TEST_CASE("Kolmogorov survival function") {
  // Reference values of the limiting distribution.
  CHECK(evt::kolmogorov_survival(0.5) == doctest::Approx(0.963945).epsilon(1e-5));
  CHECK(evt::kolmogorov_survival(1.0) == doctest::Approx(0.269999).epsilon(1e-5));
  CHECK(evt::kolmogorov_survival(1.36) == doctest::Approx(0.0494859).epsilon(1e-5));
  CHECK(evt::kolmogorov_survival(2.0) == doctest::Approx(0.000671).epsilon(1e-3));
  CHECK(evt::kolmogorov_survival(0.0) == 1.0);
  double prev = 1.0;
  for (double l = 0.1; l < 3.0; l += 0.05) {
    const double q = evt::kolmogorov_survival(l);
    CHECK(q <= prev + 1e-12);
    prev = q;
  }
}

TEST_CASE("reverse Weibull cdf") {
  const evt::ReverseWeibull d{2.0, 1.0, 3.0};
  CHECK(d.cdf(2.0) == 1.0);
  CHECK(d.cdf(5.0) == 1.0);
  CHECK(d.cdf(1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(d.cdf(0.0) < d.cdf(1.5));
}

TEST_CASE("batch maxima") {
  const std::vector<double> v{1, 5, 2, 3, 9, 0, 4};
  CHECK(evt::batch_maxima(v, 2) == std::vector<double>{5, 3, 9});
  CHECK(evt::batch_maxima(v, 7) == std::vector<double>{9});
  CHECK(evt::batch_maxima(v, 8).empty());
  CHECK_THROWS_AS(evt::batch_maxima(v, 0), ConfigError);
}

TEST_CASE("maximum likelihood recovers synthetic parameters") {
  for (double shape : {1.5, 3.0, 6.0}) {
    const evt::ReverseWeibull truth{2.0, 0.5, shape};
    const auto sample = draw(truth, 4000, 11);
    const auto fit = evt::fit_reverse_weibull(sample);
    CHECK(fit.location == doctest::Approx(2.0).epsilon(0.02 + 0.01 * shape));
    CHECK(fit.shape == doctest::Approx(shape).epsilon(0.25));
    const auto ks = evt::ks_test(draw(truth, 500, 12), fit, 0.05);
    CHECK(ks.pass);
  }
}

TEST_CASE("KS rejects a mismatched distribution") {
  const evt::ReverseWeibull truth{1.0, 1.0, 2.0};
  const evt::ReverseWeibull wrong{3.0, 1.0, 2.0};
  const auto sample = draw(truth, 300, 5);
  const auto good = evt::ks_test(sample, truth, 0.05);
  const auto bad = evt::ks_test(sample, wrong, 0.05);
  CHECK(good.pass);
  CHECK_FALSE(bad.pass);
  CHECK(bad.statistic > good.statistic);
  CHECK(bad.p_value < 1e-6);
}

TEST_CASE("fit failures") {
  CHECK_THROWS_AS(evt::fit_reverse_weibull(std::vector<double>{1.0, 2.0}), FitDiverged);
  CHECK_THROWS_AS(evt::fit_reverse_weibull(std::vector<double>{1.0, 1.0, 1.0, 1.0}), FitDiverged);
  CHECK_THROWS_AS(evt::fit_reverse_weibull(std::vector<double>{1.0, NAN, 2.0}), FitDiverged);
  // Unbounded parent: exponential maxima drift to a Gumbel limit.
  std::mt19937_64 rng(3);
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> v(20000);
  for (auto& x : v) x = ex(rng);
  const auto maxima = evt::batch_maxima(v, 50);
  bool diverged = false;
  try {
    const auto fit = evt::fit_reverse_weibull(maxima);
    diverged = fit.location > 2.0 * *std::max_element(maxima.begin(), maxima.end());
  } catch (const FitDiverged&) {
    diverged = true;
  }
  CHECK(diverged);
}

TEST_CASE("endpoint of a uniform parent") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> fit(20000), ks(5000);
  for (auto& x : fit) x = u(rng);
  for (auto& x : ks) x = u(rng);
  const auto est = evt::estimate_endpoint(fit, ks, 50, 0.05);
  CHECK_FALSE(est.degenerate);
  CHECK(est.estimate >= 0.999);
  CHECK(est.estimate <= 1.01);
  CHECK(est.ks.pass);

  const std::vector<double> zeros(1000, 0.0);
  const auto z = evt::estimate_endpoint(zeros, zeros, 10, 0.05);
  CHECK(z.degenerate);
  CHECK(z.estimate == 0.0);
  CHECK(z.ks.pass);
}
