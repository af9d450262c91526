#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fedspar/model.hpp"

using namespace fedspar;

TEST_CASE("ar covariance entries") {
  const Eigen::MatrixXd one = ar_covariance(1, 0.5);
  CHECK(one(0, 0) == 1.0);

  const Eigen::MatrixXd three = ar_covariance(3, 0.5);
  CHECK(three(0, 0) == 1.0);
  CHECK(three(0, 1) == 0.5);
  CHECK(three(0, 2) == 0.25);
  CHECK(three(1, 0) == 0.5);
  CHECK(three(1, 2) == 0.5);
  CHECK(three(2, 0) == 0.25);

  const Eigen::MatrixXd id = ar_covariance(2, 0.0);
  CHECK(id(0, 1) == 0.0);
  CHECK(id(0, 0) == 1.0);

  CHECK_THROWS_AS(ar_covariance(3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ar_covariance(3, -1.5), std::invalid_argument);
  CHECK_THROWS_AS(ar_covariance(0, 0.5), std::invalid_argument);
}

TEST_CASE("true model generation") {
  Rng rng(10, 0);
  SUBCASE("fully shared signal") {
    const TrueModel m = make_true_model(2, 4, 2, 2, 0.5, ar_covariance(4, 0.5), rng);
    const double h = 1.0 / std::sqrt(2.0);
    for (const auto& beta : m.beta_per_machine) {
      CHECK(beta[0] == h);
      CHECK(beta[1] == h);
      CHECK(beta[2] == 0.0);
      CHECK(beta[3] == 0.0);
    }
  }
  SUBCASE("saturated machine-specific picks") {
    const TrueModel m = make_true_model(1, 3, 3, 1, 0.5, ar_covariance(3, 0.5), rng);
    const double h = 1.0 / std::sqrt(3.0);
    for (int j = 0; j < 3; ++j) CHECK(m.beta_per_machine[0][j] == h);
  }
  SUBCASE("unit norm and exact sparsity for every machine") {
    const TrueModel m = make_true_model(6, 40, 7, 3, 0.5, ar_covariance(40, 0.5), rng);
    for (const auto& beta : m.beta_per_machine) {
      CHECK(beta.norm() == doctest::Approx(1.0).epsilon(1e-12));
      int nnz = 0;
      for (int j = 0; j < beta.size(); ++j) nnz += beta[j] != 0.0;
      CHECK(nnz == 7);
    }
    // Shared part identical across machines, exactly.
    for (int j : m.shared_support) {
      for (const auto& beta : m.beta_per_machine) {
        CHECK(beta[j] == m.beta_per_machine[0][j]);
      }
    }
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(make_true_model(1, 3, 4, 1, 0.5, ar_covariance(3, 0.5), rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_true_model(1, 3, 2, 3, 0.5, ar_covariance(3, 0.5), rng),
                    std::invalid_argument);
  }
}

TEST_CASE("hyper parameter derived constants recompute exactly") {
  const Dims dims{500, 5, 100};
  HyperParams h = HyperParams::make(dims, 5, 2, 0.5, PrivacyBudget(2.0, 1.0 / 5000.0));
  CHECK_NOTHROW(h.validate());
  CHECK(h.R == doctest::Approx(0.5 * std::sqrt(2.0 * std::log(2500.0))).epsilon(1e-12));
  CHECK(h.s == 5);
  CHECK(h.s0 == 2);
  CHECK(h.s1 == 3);
  CHECK(h.cx ==
        doctest::Approx(3.0 * std::sqrt(2.0 * h.L * h.kappa * h.kappa * std::log(100.0)))
            .epsilon(1e-12));

  // Tampering with a derived field must be caught.
  HyperParams bad = h;
  bad.B0 *= 1.001;
  CHECK_THROWS_AS(bad.validate(), std::logic_error);
  bad = h;
  bad.Delta1 += 0.1;
  CHECK_THROWS_AS(bad.validate(), std::logic_error);
}

TEST_CASE("gamma constant formula") {
  const double mu = 1.8;
  CHECK(HyperParams::gamma_constant(mu) ==
        doctest::Approx(std::max(mu * (9.0 * mu + 0.25), 17.0 / 16.0 * mu + 1.0 / 96.0))
            .epsilon(1e-15));
  // Small mu switches to the affine branch.
  CHECK(HyperParams::gamma_constant(0.01) ==
        doctest::Approx(17.0 / 16.0 * 0.01 + 1.0 / 96.0).epsilon(1e-15));
  HyperParams h = HyperParams::make({100, 2, 10}, 2, 1, 0.5, PrivacyBudget(1.0, 1e-3));
  CHECK(h.resolved_gamma(1.8) == HyperParams::gamma_constant(1.8));
  h.gamma = 3.0;
  CHECK(h.resolved_gamma(1.8) == 3.0);
}

TEST_CASE("noiseless sampling reproduces the linear model exactly") {
  Rng rng(11, 0);
  const TrueModel m = make_true_model(3, 12, 4, 2, 0.0, ar_covariance(12, 0.5), rng);
  Rng data_rng(11, 1);
  const auto data = sample_federation(m, 50, data_rng);
  REQUIRE(data.size() == 3);
  for (int i = 0; i < 3; ++i) {
    const auto& ds = data[static_cast<std::size_t>(i)];
    const Eigen::VectorXd resid =
        ds.y - ds.X * m.beta_per_machine[static_cast<std::size_t>(i)];
    CHECK(resid.lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("sample covariance converges to the target") {
  Rng rng(12, 0);
  const Eigen::MatrixXd sigma = ar_covariance(10, 0.5);
  const TrueModel m = make_true_model(1, 10, 3, 3, 0.5, sigma, rng);
  Rng data_rng(12, 1);
  const auto data = sample_federation(m, 5000, data_rng);
  const Eigen::MatrixXd gram =
      data[0].X.transpose() * data[0].X / static_cast<double>(data[0].n());
  CHECK((gram - sigma).lpNorm<Eigen::Infinity>() < 0.1);
}

TEST_CASE("residual standard deviation matches sigma") {
  Rng rng(13, 0);
  const TrueModel m = make_true_model(1, 8, 3, 3, 0.5, ar_covariance(8, 0.5), rng);
  Rng data_rng(13, 1);
  const auto data = sample_federation(m, 10000, data_rng);
  const Eigen::VectorXd resid = data[0].y - data[0].X * m.beta_per_machine[0];
  const double sd = std::sqrt(resid.squaredNorm() / static_cast<double>(resid.size()));
  CHECK(sd == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("sampling is reproducible byte for byte") {
  Rng rng_a(14, 0), rng_b(14, 0);
  const TrueModel m = make_true_model(2, 6, 2, 1, 0.5, ar_covariance(6, 0.5), rng_a);
  Rng da(15, 0), db(15, 0);
  const auto x = sample_federation(m, 20, da);
  const auto y = sample_federation(m, 20, db);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK((x[i].X - y[i].X).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((x[i].y - y[i].y).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("dataset csv round trip") {
  Rng rng(16, 0);
  const TrueModel m = make_true_model(2, 5, 2, 1, 0.5, ar_covariance(5, 0.5), rng);
  Rng data_rng(16, 1);
  const auto data = sample_federation(m, 7, data_rng);
  std::stringstream ss;
  write_datasets_csv(data, ss);
  const auto parsed = read_datasets_csv(ss);
  REQUIRE(parsed.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK((parsed[i].X - data[i].X).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((parsed[i].y - data[i].y).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("covariance must be SPD") {
  Rng rng(17, 0);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(4, 4);
  bad(0, 0) = -1.0;
  TrueModel m = make_true_model(1, 4, 2, 1, 0.5, ar_covariance(4, 0.5), rng);
  m.covariance = bad;
  Rng data_rng(17, 1);
  CHECK_THROWS_AS(sample_federation(m, 10, data_rng), std::invalid_argument);
}
