#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fedspar/fednet.hpp"
#include "fedspar/model.hpp"
#include "fedspar/privacy.hpp"

namespace fedspar {

struct RegressionEstimate {
  Eigen::VectorXd beta_hat;
  int iterations_run = 0;
  PrivacyBudget budget_spent;
  bool noise_free = false;
};

struct PrecisionColumnEstimate {
  int k = 0;
  Eigen::VectorXd theta_hat;
  PrivacyBudget budget_spent;
  bool noise_free = false;
};

struct EigenEstimate {
  double mu_s_hat = std::numeric_limits<double>::quiet_NaN();
  double nu_s_hat = std::numeric_limits<double>::quiet_NaN();
  int n_probes = 0;
  bool floored = false;  // nu_s_hat was replaced by the positivity floor
};

struct VarianceEstimate {
  double sigma2 = 0.0;  // returned raw; may be negative under noise
  bool negative = false;
  PrivacyBudget budget_spent;
  bool noise_free = false;
};

struct HeteroEstimate {
  Eigen::VectorXd u_hat;
  std::vector<Eigen::VectorXd> v_hat_per_machine;
  std::vector<Eigen::VectorXd> beta_hat_per_machine;  // u_hat + v_hat, exactly
  PrivacyBudget budget_spent;
  bool noise_free = false;
};

enum class EigenMode { kMax, kMin };

// Iterative federated sparse regression. Each round the machines report
// local gradients at the last broadcast iterate, the server takes a
// gradient step, privatizes the iterate with noisy hard thresholding at
// per-round budget (eps/T, delta/T) and sensitivity eta * B0 / (mn), clamps
// to the l_inf ball of radius C0 and broadcasts. Requires hyper.eta > 0.
RegressionEstimate fed_sparse_regression(FederatedRun& run, const HyperParams& hyper);

// Same round structure for column k of the precision matrix: machine
// gradients are Gram_i Theta^t - e_k, sensitivity eta * B1 / (mn), clamp C1.
PrecisionColumnEstimate fed_precision_column(FederatedRun& run, int k,
                                             const HyperParams& hyper);

// Residual-variance estimate: machines report |trunc(y) - X beta_hat|^2 / n,
// the server averages and adds Gaussian noise calibrated to sensitivity B2.
VarianceEstimate private_variance(FederatedRun& run, const Eigen::VectorXd& beta_hat,
                                  const HyperParams& hyper);
// Heterogeneous variant: one fitted vector per machine.
VarianceEstimate private_variance(FederatedRun& run,
                                  const std::vector<Eigen::VectorXd>& beta_per_machine,
                                  const HyperParams& hyper);

// One restricted-eigenvalue bound: random s-sparse unit probes, machine
// quadratic forms, private arg-max (or arg-min) of the probe averages under
// Laplace(2 B3 / eps) noise, and an independently noised release.
EigenEstimate private_restricted_eigen(FederatedRun& run, const HyperParams& hyper,
                                       int n_probes, EigenMode mode);

// Both bounds, with the retry-once-then-floor policy for a nonpositive
// smallest estimate (floor 1e-3, flagged).
EigenEstimate estimate_restricted_eigenvalues(FederatedRun& run, const HyperParams& hyper,
                                              int n_probes);

// Two-stage heterogeneous estimation: a shared s0-sparse component fitted
// by the federated routine on half the budget, then per-machine local
// iterations on the residual at sparsity s1 with sensitivity eta * B5 / n.
HeteroEstimate hetero_regression(FederatedRun& run, const HyperParams& hyper);

// Copy of `hyper` with the working sparsity replaced and every s-dependent
// derived constant recomputed.
HyperParams with_working_sparsity(const HyperParams& hyper, int s, int s0, int s1);

}  // namespace fedspar
