#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fedspar/fednet.hpp"
#include "fedspar/model.hpp"

namespace fedspar {

// Locally private sparse-mean protocol for the untrusted-server setting.
// Each machine reduces its n samples to the coordinatewise sign of the
// sample mean, randomizes the reported signs with per-coordinate randomized
// response, and ships only the privatized bits. The server debiases the
// flips to estimate the sign means v, clamps them away from +-1, and maps
// back through mu_hat_j = sqrt(2/n) erfinv(v_hat_j).

struct SignReportConfig {
  double epsilon = 1.0;
  // Each machine reports ceil(d / k_sub) uniformly chosen coordinates and
  // spends epsilon / ceil(d / k_sub) on each. k_sub = 1 reports everything.
  int k_sub = 1;
};

struct MeanEstimate {
  Eigen::VectorXd mu_hat;
  Eigen::VectorXd v_hat;   // debiased sign means, clamped to (-1, 1)
  double epsilon = 0.0;
  int machines = 0;
};

// Per-coordinate budget and flip probability implied by a config.
double per_coordinate_epsilon(const SignReportConfig& cfg, int d);
double flip_probability(double epsilon_per_coordinate);

// Machine-local step: returns the privatized report for fednet to ship.
// The payload encodes, per coordinate, +-1 for a reported (possibly
// flipped) sign and 0 for "not reported this round".
PrivatizedVector local_sign_report(const MachineDataset& data, const SignReportConfig& cfg,
                                   Rng& rng);

// Runs the whole protocol over an untrusted-mode federation.
std::vector<GradientMessage> gather_sign_reports(FederatedRun& run,
                                                 const SignReportConfig& cfg);

// Server-side aggregation: debias randomized response per coordinate,
// clamp v to +-(1 - 1/(2 sqrt(m))), invert the error function.
MeanEstimate aggregate_mean(const std::vector<GradientMessage>& messages, int n,
                            const SignReportConfig& cfg);

// Optional evaluation-side sparsification: keep the s largest magnitudes.
Eigen::VectorXd top_s_threshold(const Eigen::VectorXd& v, int s);

}  // namespace fedspar
