#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fedspar/privacy.hpp"
#include "fedspar/rng.hpp"
#include "fedspar/stats.hpp"
#include "oracles.hpp"

using namespace fedspar;

TEST_CASE("laplace scale is sensitivity over epsilon") {
  CHECK(laplace_scale(2.0, 0.5) == 4.0);
  CHECK(laplace_scale(0.0, 1.0) == 0.0);
  CHECK(laplace_scale(1.0, 0.8) == 1.25);
  CHECK_THROWS_AS(laplace_scale(std::numeric_limits<double>::infinity(), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(laplace_scale(1.0, std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
  CHECK_THROWS_AS(laplace_scale(-1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(laplace_scale(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("gaussian std follows the closed form") {
  // log(1.25/delta) forced to 1.
  CHECK(gaussian_std(1.0, PrivacyBudget(1.0, 1.25 / std::exp(1.0))) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(gaussian_std(0.0, PrivacyBudget(1.0, 0.01)) == 0.0);
  CHECK(gaussian_std(2.0, PrivacyBudget(0.5, 0.05)) ==
        doctest::Approx(std::sqrt(2.0 * 16.0 * std::log(25.0))).epsilon(1e-12));
  CHECK(gaussian_std(2.0, PrivacyBudget(0.5, 0.05)) == doctest::Approx(10.1480).epsilon(1e-4));
  CHECK_THROWS_AS(gaussian_std(1.0, PrivacyBudget(1.0, 0.0)), std::invalid_argument);
}

TEST_CASE("budget construction validates its domain") {
  CHECK_THROWS_AS(PrivacyBudget(0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(PrivacyBudget(-1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(PrivacyBudget(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PrivacyBudget(1.0, -0.1), std::invalid_argument);
  CHECK(PrivacyBudget(std::numeric_limits<double>::infinity(), 0.0).noise_free());
}

TEST_CASE("compose adds componentwise and split composes back exactly") {
  const PrivacyBudget a(0.3, 1e-4), b(0.5, 2e-4);
  const PrivacyBudget c = compose(a, b);
  CHECK(c.epsilon == 0.8);
  CHECK(c.delta == doctest::Approx(3e-4).epsilon(1e-15));

  for (int k = 1; k <= 64; ++k) {
    const PrivacyBudget base(0.8, 1.0 / 120000.0);
    const auto parts = split(base, k);
    REQUIRE(static_cast<int>(parts.size()) == k);
    const PrivacyBudget back = compose(parts);
    CHECK(back.epsilon == base.epsilon);
    CHECK(back.delta == base.delta);
  }
}

TEST_CASE("truncate clamps coordinatewise and is idempotent") {
  Eigen::VectorXd v(3);
  v << 3.0, -1.0, 0.5;
  const Eigen::VectorXd t = truncate(v, 2.0);
  CHECK(t[0] == 2.0);
  CHECK(t[1] == -1.0);
  CHECK(t[2] == 0.5);
  CHECK((truncate(t, 2.0) - t).norm() == 0.0);

  const Eigen::VectorXd same = truncate(v, 10.0);
  CHECK((same - v).norm() == 0.0);

  Eigen::VectorXd single(1);
  single << -5.0;
  CHECK(truncate(single, 0.0)[0] == 0.0);

  CHECK_THROWS_AS(truncate(v, -1.0), std::invalid_argument);
}

TEST_CASE("noisy hard thresholding with zero lambda is exact top-s") {
  Eigen::VectorXd v(4);
  v << 3.0, -5.0, 1.0, 0.0;
  Rng rng(1, 2);
  const auto out = noisy_hard_threshold(v, 2, 0.0, PrivacyBudget(1.0, 0.01), rng);
  CHECK(out.noise_free);
  CHECK(out.value[0] == 3.0);
  CHECK(out.value[1] == -5.0);
  CHECK(out.value[2] == 0.0);
  CHECK(out.value[3] == 0.0);
  REQUIRE(out.support.size() == 2);
  CHECK(out.support[0] == 1);  // largest magnitude selected first
  CHECK(out.support[1] == 0);
}

TEST_CASE("per-round scale matches the closed form") {
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(8, 1.0, 8.0);
  Rng rng(3, 3);
  const auto out = noisy_hard_threshold(v, 4, 0.1, PrivacyBudget(1.0, 0.01), rng);
  const double expected = 0.1 * 2.0 * std::sqrt(12.0 * std::log(100.0));
  CHECK(out.round_scale == doctest::Approx(expected).epsilon(1e-12));
  CHECK(out.round_scale == doctest::Approx(1.48678).epsilon(1e-4));
  CHECK_FALSE(out.noise_free);
}

TEST_CASE("selection sparsity and domain checks") {
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(10, -3.0, 3.0);
  Rng rng(4, 4);
  for (int s : {1, 3, 10}) {
    const auto out = noisy_hard_threshold(v, s, 0.2, PrivacyBudget(0.5, 1e-3), rng);
    int nnz = 0;
    for (int j = 0; j < v.size(); ++j) nnz += out.value[j] != 0.0;
    CHECK(nnz <= s);
  }
  CHECK_THROWS_AS(noisy_hard_threshold(v, 11, 0.0, PrivacyBudget(1.0, 0.01), rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(noisy_hard_threshold(v, 0, 0.0, PrivacyBudget(1.0, 0.01), rng),
                  std::invalid_argument);
  // delta = 0 breaks the scale formula unless the call is noise-free.
  CHECK_THROWS_AS(noisy_hard_threshold(v, 2, 0.1, PrivacyBudget(1.0, 0.0), rng),
                  std::invalid_argument);
  CHECK_NOTHROW(noisy_hard_threshold(v, 2, 0.0, PrivacyBudget(1.0, 0.0), rng));
}

TEST_CASE("huge epsilon reduces selection to the exact top-s oracle") {
  Rng data_rng(99, 0);
  Rng mech_rng(99, 1);
  const PrivacyBudget huge(1e6, 1e-6);
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 8 + static_cast<int>(data_rng.below(25));  // up to 32
    Eigen::VectorXd v(d);
    for (int j = 0; j < d; ++j) v[j] = data_rng.gaussian();
    const int s = 1 + static_cast<int>(data_rng.below(4));
    const auto out = noisy_hard_threshold(v, s, 0.01, huge, mech_rng);
    auto expected = oracles::top_s_by_magnitude(v, s);
    std::sort(expected.begin(), expected.end());
    auto got = out.support;
    std::sort(got.begin(), got.end());
    REQUIRE(got == expected);
  }
}

TEST_CASE("deterministic under a fixed seed") {
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(16, -1.0, 1.0);
  Rng a(6, 6), b(6, 6);
  const auto r1 = noisy_hard_threshold(v, 5, 0.3, PrivacyBudget(1.0, 1e-3), a);
  const auto r2 = noisy_hard_threshold(v, 5, 0.3, PrivacyBudget(1.0, 1e-3), b);
  CHECK(r1.support == r2.support);
  CHECK((r1.value - r2.value).norm() == 0.0);
}

TEST_CASE("private max selects by magnitude and preserves sign") {
  Rng rng(7, 7);
  Eigen::VectorXd v(3);
  v << 1.0, 9.0, 2.0;
  const auto sel = private_max(v, {0, 1, 2}, PrivacyBudget(1.0, 0.01), 0.0, rng);
  CHECK(sel.index == 1);
  CHECK(sel.noisy_value == 9.0);
  CHECK(sel.raw_value == 9.0);
  CHECK(sel.noise_free);

  Eigen::VectorXd w(2);
  w << -7.0, 3.0;
  const auto sel2 = private_max(w, {0, 1}, PrivacyBudget(1.0, 0.01), 0.0, rng);
  CHECK(sel2.index == 0);
  CHECK(sel2.noisy_value == -7.0);

  CHECK_THROWS_AS(private_max(v, {}, PrivacyBudget(1.0, 0.01), 0.0, rng),
                  std::invalid_argument);
}

TEST_CASE("private max release noise is Laplace at the given scale") {
  Rng rng(8, 8);
  Eigen::VectorXd v(5);
  v << 0.1, 0.2, 10.0, 0.3, 0.4;
  std::vector<double> deltas;
  deltas.reserve(10000);
  for (int i = 0; i < 10000; ++i) {
    const auto sel = private_max(v, {0, 1, 2, 3, 4}, PrivacyBudget(1.0, 0.01), 1.0, rng);
    deltas.push_back(sel.noisy_value - sel.raw_value);
  }
  CHECK(ks_test_laplace(deltas, 1.0) > 0.01);
}
