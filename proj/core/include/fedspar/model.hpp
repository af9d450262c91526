#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "fedspar/privacy.hpp"
#include "fedspar/rng.hpp"

namespace fedspar {

// One machine's local samples. Stays on the machine: protocol code only
// ever ships summaries derived from it.
struct MachineDataset {
  Eigen::MatrixXd X;  // n x d, one row per sample
  Eigen::VectorXd y;  // length n
  int machine_id = 0;

  int n() const { return static_cast<int>(X.rows()); }
  int d() const { return static_cast<int>(X.cols()); }

  void validate() const;
};

// The data-generating truth behind a simulated federation.
struct TrueModel {
  std::vector<Eigen::VectorXd> beta_per_machine;  // m vectors, length d
  std::vector<int> shared_support;                // size s0, identical across machines
  double sigma = 0.5;
  Eigen::MatrixXd covariance;                     // d x d SPD

  int m() const { return static_cast<int>(beta_per_machine.size()); }
  int d() const { return static_cast<int>(covariance.rows()); }
};

struct Dims {
  int n = 0;  // samples per machine
  int m = 0;  // machines
  int d = 0;  // coordinates
};

// Every constant the estimation and inference mechanisms read. The derived
// fields (cx, B0..B6, Delta1) are pinned closed forms of the primitive
// fields and are recomputed and checked by validate().
//
// Defaults for the primitive bounds (kappa, c0, c1) are calibrated for the
// bundled synthetic scenarios: they set the effective sensitivity model of
// the injected noise. Worst-case theoretical values are far larger and
// produce mechanisms whose noise swamps the signal at desk scale; supply
// them explicitly when conservative calibration is wanted.
struct HyperParams {
  // Sparsity levels: s is the working sparsity of the iterates, s0 the
  // shared-signal sparsity, s1 the machine-specific remainder.
  int s = 0;
  int s0 = 0;
  int s1 = 0;
  int T = 0;           // iteration count for the iterative estimators
  double eta = 0.0;    // step size; 0 means "resolve at run time"
  double R = 0.0;      // response truncation level
  double C0 = 2.0;     // feasibility clamp for regression iterates
  double C1 = 2.0;     // feasibility clamp for precision iterates
  double c0 = 0.0;     // norm-bound primitive for the regression parameter
  double c1 = 0.0;     // norm-bound primitive for precision columns
  double cx = 0.0;     // per-coordinate data bound, derived
  double L = 1.0;      // covariance spectrum bound primitive
  double kappa = 0.0;  // sub-Gaussian norm primitive
  double B0 = 0.0, B1 = 0.0, B2 = 0.0, B3 = 0.0, B4 = 0.0, B5 = 0.0, B6 = 0.0;
  double Delta1 = 0.0;
  // Scale factor of the bias half-width in the widened intervals; NaN means
  // "recompute from the estimated restricted eigenvalue when used".
  double gamma = std::numeric_limits<double>::quiet_NaN();
  PrivacyBudget budget;
  Dims dims;
  bool noise_enabled = true;

  // Build the full parameter set for a scenario. s_star = s0 + s1 is the
  // true sparsity; working sparsity defaults to s_star (sparsity_factor
  // scales it). R defaults to sigma * sqrt(2 log(mn)); pass r_override > 0
  // to pin it (noiseless runs need this, since sigma = 0 collapses the
  // default to zero).
  static HyperParams make(const Dims& dims, int s_star, int s0, double sigma,
                          const PrivacyBudget& budget, double sparsity_factor = 1.0,
                          double r_override = 0.0);

  // Recompute every derived constant from the primitives and throw
  // std::logic_error on any mismatch.
  void validate() const;

  // gamma as a function of the estimated largest restricted eigenvalue:
  // max(mu (9 mu + 1/4), 17/16 mu + 1/96).
  static double gamma_constant(double mu_s);

  double resolved_gamma(double mu_s_hat) const;
};

// AR(1) covariance: entry (j, j') = rho^|j - j'|.
Eigen::MatrixXd ar_covariance(int d, double rho);

// Truth per the synthetic-study recipe: the first s0 coordinates are shared
// signals of height 1/sqrt(s_star); each machine additionally gets
// s_star - s0 specific coordinates of the same height, drawn uniformly
// without replacement from {s0, ..., d-1}.
TrueModel make_true_model(int m, int d, int s_star, int s0, double sigma,
                          const Eigen::MatrixXd& covariance, Rng& rng);

// Draw each machine's (X, y): rows of X are N(0, covariance) via the
// Cholesky factor, y = X beta + N(0, sigma^2 I). Each machine samples from
// its own substream.
std::vector<MachineDataset> sample_federation(const TrueModel& model, int n, Rng& rng);

// Debug-path CSV round trip. Header: machine_id,y,x_0..x_{d-1}.
void write_datasets_csv(const std::vector<MachineDataset>& data, std::ostream& os);
std::vector<MachineDataset> read_datasets_csv(std::istream& is);

}  // namespace fedspar
