#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace fedspar {

// Standard normal CDF.
double normal_cdf(double x);

// Standard normal quantile (Wichura's AS241, ~1e-15 relative accuracy).
// Throws std::invalid_argument outside (0, 1).
double normal_quantile(double p);

// Inverse error function on (-1, 1), computed from the normal quantile and
// polished with one Newton step against std::erf.
double erf_inv(double v);

// Type-1 empirical quantile: the ceil(alpha * n)-th order statistic of the
// ascending sort (1-indexed), clamped to the sample range.
double empirical_quantile(std::vector<double> values, double alpha);

// Two-sided Kolmogorov-Smirnov test of `sample` against a standard normal.
// Returns the asymptotic p-value (Kolmogorov distribution with the usual
// finite-sample scaling).
double ks_test_normal(std::vector<double> sample);

// Two-sided KS test against Laplace(0, scale).
double ks_test_laplace(std::vector<double> sample, double scale);

// One-sided exact binomial sign test: p-value for observing >= wins
// successes out of trials fair coin flips.
double sign_test_pvalue(int wins, int trials);

// Pairwise (balanced-tree) summation in index order; deterministic for a
// fixed input order regardless of accumulation width.
double pairwise_sum(std::span<const double> values);

// Pairwise sum of a sequence of equal-length vectors, in index order.
Eigen::VectorXd pairwise_sum(const std::vector<Eigen::VectorXd>& values);

}  // namespace fedspar
