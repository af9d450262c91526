#include <doctest.h>

#include <cmath>
#include <vector>

#include "fedspar/rng.hpp"
#include "fedspar/stats.hpp"

using namespace fedspar;

TEST_CASE("identical (seed, stream) replays the same sequence") {
  Rng a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct streams decorrelate") {
  Rng a(42, 0), b(42, 1);
  int equal = 0;
  for (int i = 0; i < 1000; ++i) equal += (a.next_u64() == b.next_u64());
  CHECK(equal == 0);
}

TEST_CASE("substream derivation is pure") {
  Rng root(9, 3);
  Rng first = root.substream(5);
  root.next_u64();
  Rng second = root.substream(5);
  CHECK(first.next_u64() == second.next_u64());
}

TEST_CASE("uniform stays in [0, 1)") {
  Rng rng(1, 1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("laplace empirical variance matches 2 b^2 within 5%") {
  Rng rng(123, 0);
  const double scale = 1.7;
  const int n = 1000000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.laplace(scale);
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(var == doctest::Approx(2.0 * scale * scale).epsilon(0.05));
}

TEST_CASE("gaussian empirical variance matches sigma^2 within 5%") {
  Rng rng(321, 4);
  const double stddev = 2.5;
  const int n = 1000000;
  double sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.gaussian_scaled(stddev);
    sumsq += x * x;
  }
  CHECK(sumsq / n == doctest::Approx(stddev * stddev).epsilon(0.05));
}

TEST_CASE("zero-scale draws consume nothing") {
  Rng a(5, 5), b(5, 5);
  CHECK(a.laplace(0.0) == 0.0);
  CHECK(a.gaussian_scaled(0.0) == 0.0);
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("normal quantile hits the reference value at 0.975") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.959964).epsilon(1e-6));
  CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("normal quantile inverts the cdf") {
  for (double p : {0.001, 0.1, 0.3, 0.77, 0.999}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
  }
}

TEST_CASE("erf_inv round trips against std::erf") {
  for (double v : {-0.999, -0.8427, -0.3, 0.01, 0.5, 0.8427007929497149, 0.999}) {
    CHECK(std::erf(erf_inv(v)) == doctest::Approx(v).epsilon(1e-9));
  }
  CHECK(erf_inv(0.0) == 0.0);
  CHECK(erf_inv(0.842700792949715) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("empirical quantile uses the ceil(alpha n) order statistic") {
  std::vector<double> xs = {5.0, 1.0, 4.0, 2.0, 3.0};
  CHECK(empirical_quantile(xs, 0.2) == 1.0);
  CHECK(empirical_quantile(xs, 0.21) == 2.0);
  CHECK(empirical_quantile(xs, 0.95) == 5.0);
  // Degenerate single draw: every alpha returns it.
  CHECK(empirical_quantile({7.5}, 0.01) == 7.5);
  CHECK(empirical_quantile({7.5}, 0.99) == 7.5);
}

TEST_CASE("ks test accepts matching samples and rejects shifted ones") {
  Rng rng(77, 0);
  std::vector<double> normal(5000), shifted(5000);
  for (std::size_t i = 0; i < normal.size(); ++i) {
    normal[i] = rng.gaussian();
    shifted[i] = rng.gaussian() + 0.4;
  }
  CHECK(ks_test_normal(normal) > 0.01);
  CHECK(ks_test_normal(shifted) < 1e-6);

  std::vector<double> lap(10000);
  for (auto& x : lap) x = rng.laplace(1.3);
  CHECK(ks_test_laplace(lap, 1.3) > 0.01);
  CHECK(ks_test_laplace(lap, 2.6) < 1e-6);
}

TEST_CASE("sign test p-values") {
  CHECK(sign_test_pvalue(50, 50) == doctest::Approx(std::pow(0.5, 50)).epsilon(1e-6));
  CHECK(sign_test_pvalue(32, 50) < 0.05);
  CHECK(sign_test_pvalue(31, 50) > 0.05);
  CHECK(sign_test_pvalue(0, 50) == doctest::Approx(1.0));
}

TEST_CASE("pairwise sum is deterministic and order-structured") {
  std::vector<double> xs = {1e16, 1.0, -1e16, 1.0};
  CHECK(pairwise_sum(xs) == (1e16 + 1.0) + (-1e16 + 1.0));
  std::vector<Eigen::VectorXd> vs(3, Eigen::VectorXd::Ones(2));
  const Eigen::VectorXd total = pairwise_sum(vs);
  CHECK(total[0] == 3.0);
  CHECK(total[1] == 3.0);
}
