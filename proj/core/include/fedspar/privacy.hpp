#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fedspar/rng.hpp"

namespace fedspar {

// An (epsilon, delta) differential-privacy budget. epsilon may be +infinity,
// which turns every mechanism built on this budget into an exact (noise-free,
// non-private) computation; the noise-calibration helpers laplace_scale /
// gaussian_std still reject non-finite inputs because they compute published
// noise parameters.
struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 0.0;

  PrivacyBudget() = default;
  PrivacyBudget(double eps, double del);

  bool noise_free() const { return !std::isfinite(epsilon); }
};

// Sequential composition: budgets add componentwise.
PrivacyBudget compose(const PrivacyBudget& a, const PrivacyBudget& b);
PrivacyBudget compose(const std::vector<PrivacyBudget>& parts);

// Split a budget into k parts that compose back to the original exactly.
// The first k-1 parts are (eps/k, delta/k); the last absorbs the floating
// point remainder so that compose(split(b, k)) == b bit-for-bit.
std::vector<PrivacyBudget> split(const PrivacyBudget& b, int k);

// Scale of the Laplace mechanism: l1_sensitivity / epsilon.
double laplace_scale(double l1_sensitivity, double epsilon);

// Standard deviation of the Gaussian mechanism:
// sqrt(2 (l2_sensitivity/epsilon)^2 log(1.25/delta)). Requires delta > 0.
double gaussian_std(double l2_sensitivity, const PrivacyBudget& budget);

// Projection onto the l_inf ball of the given radius, coordinatewise.
double truncate(double x, double radius);
Eigen::VectorXd truncate(const Eigen::VectorXd& v, double radius);

// A vector that passed through a privatization step, with the budget it
// consumed. noise_free marks calls whose effective noise scale was zero
// (lambda == 0 or an infinite budget); such values carry no privacy
// guarantee and are tagged so that protocol-level checks can tell.
struct PrivatizedVector {
  Eigen::VectorXd value;
  PrivacyBudget budget;
  bool noise_free = false;
};

// Result of the iterative noisy top-s selection.
struct NoisyHtResult {
  Eigen::VectorXd value;          // input + release noise on the support, zero elsewhere
  std::vector<int> support;       // selected coordinates, in selection order
  double round_scale = 0.0;       // per-round Laplace scale actually used
  PrivacyBudget budget;
  bool noise_free = false;

  PrivatizedVector tagged() const { return {value, budget, noise_free}; }
};

// Iterative noisy hard thresholding: s selection rounds, each adding fresh
// i.i.d. Laplace(lam * 2 sqrt(3 s log(1/delta)) / epsilon) noise to |v_j|
// over the not-yet-selected coordinates and appending the noisy argmax
// (ties broken toward the lowest index). The released value is v plus
// independent noise of the same scale on the selected support.
//
// RNG consumption: each selection round draws noise only for the remaining
// candidate coordinates in increasing index order; the release draws one
// value per selected coordinate in selection order. A zero scale (lam == 0
// or infinite epsilon) draws nothing.
NoisyHtResult noisy_hard_threshold(const Eigen::VectorXd& v, int s, double lam,
                                   const PrivacyBudget& budget, Rng& rng);

// One private magnitude-argmax over an index set, noisy selection plus an
// independently noised release of the winning value (sign preserved).
struct NoisySelection {
  int index = -1;
  double noisy_value = 0.0;
  double raw_value = 0.0;
  bool noise_free = false;
};

NoisySelection private_max(const Eigen::VectorXd& v, const std::vector<int>& candidates,
                           const PrivacyBudget& budget, double noise_scale, Rng& rng);

}  // namespace fedspar
