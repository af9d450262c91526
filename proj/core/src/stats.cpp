#include "fedspar/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace fedspar {

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / 1.4142135623730950488016887242097);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must lie in (0, 1)");
  }
  // AS241 (PPND16).
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

double erf_inv(double v) {
  if (!(v > -1.0 && v < 1.0)) {
    throw std::invalid_argument("erf_inv: argument must lie in (-1, 1)");
  }
  if (v == 0.0) return 0.0;
  double x = normal_quantile(0.5 * (v + 1.0)) / 1.4142135623730950488016887242097;
  // One Newton step: f(x) = erf(x) - v, f'(x) = 2/sqrt(pi) exp(-x^2).
  const double fx = std::erf(x) - v;
  const double dfx = 1.1283791670955125739 * std::exp(-x * x);
  if (dfx > 0.0) x -= fx / dfx;
  return x;
}

double empirical_quantile(std::vector<double> values, double alpha) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("empirical_quantile: alpha must lie in (0, 1)");
  }
  std::sort(values.begin(), values.end());
  const auto n = static_cast<long>(values.size());
  long k = static_cast<long>(std::ceil(alpha * static_cast<double>(n)));
  k = std::clamp(k, 1L, n);
  return values[static_cast<std::size_t>(k - 1)];
}

namespace {

// Kolmogorov distribution tail, Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

template <typename Cdf>
double ks_test(std::vector<double>& sample, Cdf cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(f - lo, hi - f));
  }
  return kolmogorov_pvalue(d, sample.size());
}

}  // namespace

double ks_test_normal(std::vector<double> sample) {
  return ks_test(sample, [](double x) { return normal_cdf(x); });
}

double ks_test_laplace(std::vector<double> sample, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("ks_test_laplace: scale must be positive");
  return ks_test(sample, [scale](double x) {
    return x < 0.0 ? 0.5 * std::exp(x / scale) : 1.0 - 0.5 * std::exp(-x / scale);
  });
}

double sign_test_pvalue(int wins, int trials) {
  if (trials <= 0 || wins < 0 || wins > trials) {
    throw std::invalid_argument("sign_test_pvalue: bad counts");
  }
  // P(Bin(trials, 1/2) >= wins), exact via log binomial coefficients.
  double p = 0.0;
  const double log_half = std::log(0.5);
  for (int k = wins; k <= trials; ++k) {
    const double log_choose = std::lgamma(trials + 1.0) - std::lgamma(k + 1.0) -
                              std::lgamma(trials - k + 1.0);
    p += std::exp(log_choose + trials * log_half);
  }
  return std::min(p, 1.0);
}

double pairwise_sum(std::span<const double> values) {
  if (values.empty()) return 0.0;
  if (values.size() == 1) return values[0];
  const std::size_t mid = values.size() / 2;
  return pairwise_sum(values.first(mid)) + pairwise_sum(values.subspan(mid));
}

Eigen::VectorXd pairwise_sum(const std::vector<Eigen::VectorXd>& values) {
  if (values.empty()) throw std::invalid_argument("pairwise_sum: empty list");
  const std::function<Eigen::VectorXd(std::size_t, std::size_t)> rec =
      [&](std::size_t lo, std::size_t hi) -> Eigen::VectorXd {
    if (hi - lo == 1) return values[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    return rec(lo, mid) + rec(mid, hi);
  };
  return rec(0, values.size());
}

}  // namespace fedspar
