#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fedspar/estimators.hpp"
#include "fedspar/fednet.hpp"
#include "fedspar/model.hpp"

namespace fedspar {

struct degenerate_eigen_fault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DebiasedCoordinate {
  int k = 0;
  double beta_u = 0.0;
  double privacy_noise_var = 0.0;  // variance of the injected debiasing noise
  double plug_in_var = 0.0;        // theta_k' Sigma_hat theta_k
  bool noise_free = false;
};

enum class IntervalKind { kSimple, kGeneral, kHetero, kSimultaneous };

struct IntervalEstimate {
  int k = -1;                 // -1 when the interval belongs to a set
  std::vector<int> group;     // populated for simultaneous bands
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;         // nominal coverage, e.g. 0.95
  IntervalKind kind = IntervalKind::kSimple;

  double center() const { return 0.5 * (lower + upper); }
  double width() const { return upper - lower; }
  bool contains(double x) const { return lower <= x && x <= upper; }
};

struct BootstrapQuantile {
  double alpha = 0.0;          // quantile level actually requested
  double c_u = 0.0;            // empirical alpha-quantile of |U_t|
  int q = 0;
  std::vector<double> draws;   // retained |U_t|
  PrivacyBudget budget_spent;
  bool noise_free = false;
};

// One-step bias correction of a single coordinate: the machines report
// gradients at beta_hat, the server applies the precision-column correction
// and adds Gaussian noise with variance 8 Delta1^2 log(1.25/delta) /
// (n^2 m^2 eps^2). Also gathers the plug-in variance theta' Sigma_hat theta.
DebiasedCoordinate debias_coordinate(FederatedRun& run, const Eigen::VectorXd& beta_hat,
                                     const Eigen::VectorXd& theta_hat_k, int k,
                                     const HyperParams& hyper);

// All coordinates at once from a stacked precision estimate (row k is
// theta_hat_k). One gradient gather and one quadratic-form gather total.
std::vector<DebiasedCoordinate> debias_all(FederatedRun& run, const Eigen::VectorXd& beta_hat,
                                           const Eigen::MatrixXd& theta_stack,
                                           const HyperParams& hyper);

// Plain Gaussian interval for the regime where the privacy cost is
// dominated by statistical error. mn is the total sample count.
IntervalEstimate ci_simple(const DebiasedCoordinate& dc, double sigma_hat, double alpha,
                           double mn);

// Widened interval with the curvature bias bound and the privacy variance
// under the square root. Throws degenerate_eigen_fault for nu_s_hat <= 0.
IntervalEstimate ci_general(const DebiasedCoordinate& dc, double sigma_hat,
                            const EigenEstimate& eigen, const HyperParams& hyper,
                            double alpha, int m, int n);

// Multiplier bootstrap for the simultaneous statistic: per machine
// u_i = n^{-1/2} sum_j Theta_hat X_ij e_ij with fresh standard normal
// multipliers, then a private magnitude-argmax of the scaled average over
// G. Returns the empirical alpha-quantile of |U_t|. `centered` switches to
// the per-machine multiplier variant on truncated residuals (requires
// beta_hat).
BootstrapQuantile bootstrap_simultaneous(FederatedRun& run, const Eigen::MatrixXd& theta_stack,
                                         const HyperParams& hyper, const std::vector<int>& G,
                                         int q, double alpha, bool centered = false,
                                         const Eigen::VectorXd* beta_hat = nullptr);

// Simultaneous band for every k in G from a bootstrap quantile:
// beta_u_k +- (sigma_hat / sqrt(mn)) * c_u.
std::vector<IntervalEstimate> simultaneous_band(const std::vector<DebiasedCoordinate>& dcs,
                                                const std::vector<int>& G, double c_u,
                                                double sigma_hat, double mn, double level);

// Machine-local debiased interval for the heterogeneous path. The bias
// half-width `a` (the curvature term of the two-stage estimate) is included
// when include_bias_bound is set; the Gaussian part always carries the
// privacy variance addend.
IntervalEstimate hetero_debias_ci(FederatedRun& run, int machine_i,
                                  const Eigen::VectorXd& beta_hat_i,
                                  const Eigen::VectorXd& theta_hat_k, int k, double sigma_hat,
                                  const EigenEstimate& eigen, const HyperParams& hyper,
                                  double alpha, bool include_bias_bound = true);

// Machine-local debiased centers for all coordinates at once. The plug-in
// variances theta_k' Sigma_hat theta_k are gathered across the federation
// unless a precomputed vector is supplied.
std::vector<DebiasedCoordinate> hetero_debias_all(FederatedRun& run, int machine_i,
                                                  const Eigen::VectorXd& beta_hat_i,
                                                  const Eigen::MatrixXd& theta_stack,
                                                  const HyperParams& hyper,
                                                  const Eigen::VectorXd* plug_in = nullptr);

// theta_k' Sigma_hat theta_k for every row of the stack, with Sigma_hat the
// across-machine average Gram matrix.
Eigen::VectorXd plug_in_variances(FederatedRun& run, const Eigen::MatrixXd& theta_stack);

// Machine-local multiplier bootstrap: U_t = |private argmax of
// (sigma_hat / sqrt(n)) sum_j Theta_hat X_ij e_j over G|.
BootstrapQuantile hetero_bootstrap(FederatedRun& run, int machine_i,
                                   const Eigen::MatrixXd& theta_stack, double sigma_hat,
                                   const HyperParams& hyper, const std::vector<int>& G, int q,
                                   double alpha);

// Half-width pieces of the widened intervals, exposed for tests.
double curvature_half_width(const EigenEstimate& eigen, const HyperParams& hyper, int m, int n);
double hetero_bias_half_width(const EigenEstimate& eigen, const HyperParams& hyper, int m,
                              int n);

}  // namespace fedspar
