#include "fedspar/inference.hpp"

#include <cmath>
#include <stdexcept>

#include "fedspar/stats.hpp"

namespace fedspar {

namespace {

double debias_noise_var(const HyperParams& hyper, double n, double m) {
  const double eps = hyper.budget.epsilon;
  return 8.0 * hyper.Delta1 * hyper.Delta1 * std::log(1.25 / hyper.budget.delta) /
         (n * n * m * m * eps * eps);
}

// Machines report gradients at beta_hat; the server averages them.
Eigen::VectorXd gather_mean_gradient(FederatedRun& run, const Eigen::VectorXd& beta_hat,
                                     double radius) {
  const auto messages = run.round_gather(
      PayloadKind::kGradient,
      [&beta_hat, radius](const MachineDataset& ds, const Eigen::VectorXd*) {
        const Eigen::VectorXd y_trunc = truncate(ds.y, radius);
        return Eigen::VectorXd((ds.X.transpose() * (ds.X * beta_hat - y_trunc)) /
                               static_cast<double>(ds.n()));
      });
  return aggregate(messages) / static_cast<double>(run.machine_count());
}

// Quadratic forms theta_k' Gram_i theta_k averaged across machines, for
// every row of the stack at once.
Eigen::VectorXd gather_plug_in(FederatedRun& run, const Eigen::MatrixXd& theta_stack) {
  const auto messages = run.round_gather(
      PayloadKind::kQuadraticForm,
      [&run, &theta_stack](const MachineDataset& ds, const Eigen::VectorXd*) {
        const Eigen::MatrixXd& gram = run.gram(ds.machine_id);
        const int rows = static_cast<int>(theta_stack.rows());
        Eigen::VectorXd t(rows);
        for (int k = 0; k < rows; ++k) {
          const Eigen::VectorXd theta = theta_stack.row(k).transpose();
          t[k] = theta.dot(gram * theta);
        }
        return t;
      });
  return aggregate(messages) / static_cast<double>(run.machine_count());
}

double z_value(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("confidence level alpha must lie in (0, 1)");
  }
  return normal_quantile(1.0 - alpha / 2.0);
}

IntervalEstimate symmetric_interval(int k, double center, double half_width, double alpha,
                                    IntervalKind kind) {
  IntervalEstimate out;
  out.k = k;
  out.lower = center - half_width;
  out.upper = center + half_width;
  out.level = 1.0 - alpha;
  out.kind = kind;
  return out;
}

}  // namespace

namespace {

// Shared by the batched and single-coordinate entry points: row r of
// theta_stack is the precision column for coordinate coords[r].
std::vector<DebiasedCoordinate> debias_rows(FederatedRun& run, const Eigen::VectorXd& beta_hat,
                                            const Eigen::MatrixXd& theta_stack,
                                            const std::vector<int>& coords,
                                            const HyperParams& hyper) {
  const double n = run.samples_per_machine();
  const double m = run.machine_count();
  const Eigen::VectorXd mean_gradient = gather_mean_gradient(run, beta_hat, hyper.R);
  const Eigen::VectorXd plug_in = gather_plug_in(run, theta_stack);
  const double noise_var = debias_noise_var(hyper, n, m);
  const double noise_std =
      (hyper.noise_enabled && !hyper.budget.noise_free()) ? std::sqrt(noise_var) : 0.0;

  // The correction subtracts the precision-weighted mean gradient: one
  // Newton-type step of the squared loss from beta_hat.
  std::vector<DebiasedCoordinate> out(coords.size());
  for (std::size_t r = 0; r < coords.size(); ++r) {
    auto& dc = out[r];
    dc.k = coords[r];
    dc.beta_u = beta_hat[dc.k] - theta_stack.row(static_cast<Eigen::Index>(r)).dot(mean_gradient) +
                run.server_rng().gaussian_scaled(noise_std);
    dc.privacy_noise_var = noise_var;
    dc.plug_in_var = plug_in[static_cast<Eigen::Index>(r)];
    dc.noise_free = (noise_std == 0.0);
  }
  return out;
}

}  // namespace

std::vector<DebiasedCoordinate> debias_all(FederatedRun& run, const Eigen::VectorXd& beta_hat,
                                           const Eigen::MatrixXd& theta_stack,
                                           const HyperParams& hyper) {
  std::vector<int> coords(static_cast<std::size_t>(theta_stack.rows()));
  for (std::size_t r = 0; r < coords.size(); ++r) coords[r] = static_cast<int>(r);
  return debias_rows(run, beta_hat, theta_stack, coords, hyper);
}

DebiasedCoordinate debias_coordinate(FederatedRun& run, const Eigen::VectorXd& beta_hat,
                                     const Eigen::VectorXd& theta_hat_k, int k,
                                     const HyperParams& hyper) {
  if (theta_hat_k.size() != beta_hat.size() || k < 0 || k >= beta_hat.size()) {
    throw std::invalid_argument("debias_coordinate: dimension mismatch");
  }
  Eigen::MatrixXd stack(1, theta_hat_k.size());
  stack.row(0) = theta_hat_k.transpose();
  return debias_rows(run, beta_hat, stack, {k}, hyper).front();
}

IntervalEstimate ci_simple(const DebiasedCoordinate& dc, double sigma_hat, double alpha,
                           double mn) {
  const double half =
      z_value(alpha) * sigma_hat / std::sqrt(mn) * std::sqrt(std::max(dc.plug_in_var, 0.0));
  return symmetric_interval(dc.k, dc.beta_u, half, alpha, IntervalKind::kSimple);
}

double curvature_half_width(const EigenEstimate& eigen, const HyperParams& hyper, int m,
                            int n) {
  if (!(eigen.nu_s_hat > 0.0)) {
    throw degenerate_eigen_fault("nonpositive smallest restricted eigenvalue estimate");
  }
  const double gamma = hyper.resolved_gamma(eigen.mu_s_hat);
  const double d = hyper.dims.d;
  const double eps = hyper.budget.epsilon;
  const double log_d = std::log(d);
  const double log_mn = std::log(static_cast<double>(m) * n);
  const double s = hyper.s;
  return gamma * eigen.mu_s_hat * eigen.mu_s_hat / (eigen.nu_s_hat * eigen.nu_s_hat) * s * s *
         log_d * log_d * std::log(1.0 / hyper.budget.delta) * log_mn * log_mn * log_mn /
         (static_cast<double>(m) * m * static_cast<double>(n) * n * eps * eps);
}

IntervalEstimate ci_general(const DebiasedCoordinate& dc, double sigma_hat,
                            const EigenEstimate& eigen, const HyperParams& hyper,
                            double alpha, int m, int n) {
  const double mn = static_cast<double>(m) * n;
  const double eps = hyper.budget.epsilon;
  const double privacy_addend = 8.0 * hyper.Delta1 * hyper.Delta1 *
                                std::log(1.0 / hyper.budget.delta) / (mn * eps * eps);
  const double half =
      curvature_half_width(eigen, hyper, m, n) +
      z_value(alpha) * sigma_hat / std::sqrt(mn) *
          std::sqrt(std::max(dc.plug_in_var, 0.0) + privacy_addend);
  return symmetric_interval(dc.k, dc.beta_u, half, alpha, IntervalKind::kGeneral);
}

BootstrapQuantile bootstrap_simultaneous(FederatedRun& run, const Eigen::MatrixXd& theta_stack,
                                         const HyperParams& hyper, const std::vector<int>& G,
                                         int q, double alpha, bool centered,
                                         const Eigen::VectorXd* beta_hat) {
  if (G.empty()) throw std::invalid_argument("bootstrap_simultaneous: empty coordinate set");
  if (q < 1) throw std::invalid_argument("bootstrap_simultaneous: q must be >= 1");
  if (centered && beta_hat == nullptr) {
    throw std::invalid_argument("bootstrap_simultaneous: centered variant needs beta_hat");
  }
  const double n = run.samples_per_machine();
  const double m = run.machine_count();
  const double scale =
      (hyper.noise_enabled && !hyper.budget.noise_free())
          ? hyper.B4 * 2.0 *
                std::sqrt(3.0 * std::log(1.0 / hyper.budget.delta)) / hyper.budget.epsilon
          : 0.0;

  BootstrapQuantile out;
  out.alpha = alpha;
  out.q = q;
  out.noise_free = (scale == 0.0);
  out.draws.reserve(static_cast<std::size_t>(q));
  std::vector<PrivacyBudget> spent;
  spent.reserve(static_cast<std::size_t>(q));
  const double radius = hyper.R;

  for (int t = 0; t < q; ++t) {
    const auto messages = run.round_gather(
        PayloadKind::kBootstrapVector,
        [&run, &theta_stack, t, n, centered, beta_hat, radius](const MachineDataset& ds,
                                                               const Eigen::VectorXd*) {
          Rng stream = run.machine_rng(ds.machine_id)
                           .substream(0xb0070000u + static_cast<std::uint64_t>(t));
          if (!centered) {
            Eigen::VectorXd multipliers(ds.n());
            for (int j = 0; j < ds.n(); ++j) multipliers[j] = stream.gaussian();
            return Eigen::VectorXd(theta_stack * (ds.X.transpose() * multipliers) /
                                   std::sqrt(n));
          }
          // Per-machine multiplier on truncated residuals.
          const Eigen::VectorXd resid = truncate(ds.y, radius) - ds.X * (*beta_hat);
          const double e_i = stream.gaussian();
          return Eigen::VectorXd(theta_stack * (ds.X.transpose() * resid) * e_i / std::sqrt(n));
        });
    const Eigen::VectorXd pooled = aggregate(messages) / std::sqrt(m);
    const NoisySelection sel =
        private_max(pooled, G, hyper.budget, scale, run.server_rng());
    out.draws.push_back(std::fabs(sel.noisy_value));
    spent.push_back(hyper.budget);
    run.advance_round();
  }
  out.c_u = empirical_quantile(out.draws, alpha);
  out.budget_spent = compose(spent);
  return out;
}

std::vector<IntervalEstimate> simultaneous_band(const std::vector<DebiasedCoordinate>& dcs,
                                                const std::vector<int>& G, double c_u,
                                                double sigma_hat, double mn, double level) {
  const double half = sigma_hat / std::sqrt(mn) * c_u;
  std::vector<IntervalEstimate> out;
  out.reserve(G.size());
  for (int k : G) {
    const auto& dc = dcs.at(static_cast<std::size_t>(k));
    IntervalEstimate iv;
    iv.k = k;
    iv.group = G;
    iv.lower = dc.beta_u - half;
    iv.upper = dc.beta_u + half;
    iv.level = level;
    iv.kind = IntervalKind::kSimultaneous;
    out.push_back(std::move(iv));
  }
  return out;
}

namespace {

std::vector<DebiasedCoordinate> hetero_debias_rows(FederatedRun& run, int machine_i,
                                                   const Eigen::VectorXd& beta_hat_i,
                                                   const Eigen::MatrixXd& theta_stack,
                                                   const std::vector<int>& coords,
                                                   const HyperParams& hyper,
                                                   const Eigen::VectorXd* plug_in_opt = nullptr) {
  const MachineDataset& ds = run.machine_data(machine_i);
  const double n = ds.n();
  const Eigen::VectorXd y_trunc = truncate(ds.y, hyper.R);
  // Machine-local gradient at beta_hat_i.
  const Eigen::VectorXd gradient = (ds.X.transpose() * (ds.X * beta_hat_i - y_trunc)) / n;
  const Eigen::VectorXd plug_in =
      plug_in_opt ? *plug_in_opt : gather_plug_in(run, theta_stack);
  const double eps = hyper.budget.epsilon;
  const double noise_var = 8.0 * hyper.Delta1 * hyper.Delta1 *
                           std::log(1.25 / hyper.budget.delta) / (n * n * eps * eps);
  const double noise_std =
      (hyper.noise_enabled && !hyper.budget.noise_free()) ? std::sqrt(noise_var) : 0.0;

  std::vector<DebiasedCoordinate> out(coords.size());
  for (std::size_t r = 0; r < coords.size(); ++r) {
    auto& dc = out[r];
    dc.k = coords[r];
    // One noise stream per (machine, coordinate) so that batched and
    // single-coordinate calls draw identically distributed noise.
    Rng noise_stream = run.machine_rng(machine_i).substream(
        0xdeb1a500u + static_cast<std::uint64_t>(dc.k));
    dc.beta_u = beta_hat_i[dc.k] - theta_stack.row(static_cast<Eigen::Index>(r)).dot(gradient) +
                noise_stream.gaussian_scaled(noise_std);
    dc.privacy_noise_var = noise_var;
    dc.plug_in_var = plug_in[static_cast<Eigen::Index>(r)];
    dc.noise_free = (noise_std == 0.0);
  }
  return out;
}

}  // namespace

std::vector<DebiasedCoordinate> hetero_debias_all(FederatedRun& run, int machine_i,
                                                  const Eigen::VectorXd& beta_hat_i,
                                                  const Eigen::MatrixXd& theta_stack,
                                                  const HyperParams& hyper,
                                                  const Eigen::VectorXd* plug_in) {
  std::vector<int> coords(static_cast<std::size_t>(theta_stack.rows()));
  for (std::size_t r = 0; r < coords.size(); ++r) coords[r] = static_cast<int>(r);
  return hetero_debias_rows(run, machine_i, beta_hat_i, theta_stack, coords, hyper, plug_in);
}

Eigen::VectorXd plug_in_variances(FederatedRun& run, const Eigen::MatrixXd& theta_stack) {
  return gather_plug_in(run, theta_stack);
}

double hetero_bias_half_width(const EigenEstimate& eigen, const HyperParams& hyper, int m,
                              int n) {
  if (!(eigen.nu_s_hat > 0.0)) {
    throw degenerate_eigen_fault("nonpositive smallest restricted eigenvalue estimate");
  }
  const double gamma = hyper.resolved_gamma(eigen.mu_s_hat);
  const double ratio = eigen.mu_s_hat * eigen.mu_s_hat / (eigen.nu_s_hat * eigen.nu_s_hat);
  const double eps = hyper.budget.epsilon;
  const double log_d = std::log(static_cast<double>(hyper.dims.d));
  const double log_mn = std::log(static_cast<double>(m) * n);
  const double log_n = std::log(static_cast<double>(n));
  const double log_inv_delta = std::log(1.0 / hyper.budget.delta);
  const double s0 = hyper.s0, s1 = hyper.s1;
  const double fed_part = s1 * s1 * log_d * log_d * log_inv_delta * log_mn * log_mn * log_mn /
                          (static_cast<double>(m) * m * static_cast<double>(n) * n * eps * eps);
  const double local_part = s0 * s0 * log_d * log_d * log_inv_delta * log_n * log_n * log_n /
                            (static_cast<double>(n) * n * eps * eps);
  return 2.0 * gamma * ratio * (fed_part + local_part);
}

IntervalEstimate hetero_debias_ci(FederatedRun& run, int machine_i,
                                  const Eigen::VectorXd& beta_hat_i,
                                  const Eigen::VectorXd& theta_hat_k, int k, double sigma_hat,
                                  const EigenEstimate& eigen, const HyperParams& hyper,
                                  double alpha, bool include_bias_bound) {
  Eigen::MatrixXd stack(1, theta_hat_k.size());
  stack.row(0) = theta_hat_k.transpose();
  const DebiasedCoordinate dc =
      hetero_debias_rows(run, machine_i, beta_hat_i, stack, {k}, hyper).front();

  const double n = run.samples_per_machine();
  const int m = run.machine_count();
  const double eps = hyper.budget.epsilon;
  const double privacy_addend = 8.0 * hyper.Delta1 * hyper.Delta1 *
                                std::log(1.0 / hyper.budget.delta) / (n * eps * eps);
  double half = z_value(alpha) * sigma_hat / std::sqrt(n) *
                std::sqrt(std::max(dc.plug_in_var, 0.0) + privacy_addend);
  if (include_bias_bound) {
    half += hetero_bias_half_width(eigen, hyper, m, static_cast<int>(n));
  }
  return symmetric_interval(k, dc.beta_u, half, alpha, IntervalKind::kHetero);
}

BootstrapQuantile hetero_bootstrap(FederatedRun& run, int machine_i,
                                   const Eigen::MatrixXd& theta_stack, double sigma_hat,
                                   const HyperParams& hyper, const std::vector<int>& G, int q,
                                   double alpha) {
  if (G.empty()) throw std::invalid_argument("hetero_bootstrap: empty coordinate set");
  if (q < 1) throw std::invalid_argument("hetero_bootstrap: q must be >= 1");
  const MachineDataset& ds = run.machine_data(machine_i);
  const double n = ds.n();
  const double scale =
      (hyper.noise_enabled && !hyper.budget.noise_free())
          ? hyper.B6 * 2.0 *
                std::sqrt(3.0 * std::log(1.0 / hyper.budget.delta)) / hyper.budget.epsilon
          : 0.0;
  Rng stream = run.machine_rng(machine_i).substream(0xb0075);

  BootstrapQuantile out;
  out.alpha = alpha;
  out.q = q;
  out.noise_free = (scale == 0.0);
  out.draws.reserve(static_cast<std::size_t>(q));
  std::vector<PrivacyBudget> spent;
  spent.reserve(static_cast<std::size_t>(q));
  Eigen::VectorXd multipliers(ds.n());
  for (int t = 0; t < q; ++t) {
    for (int j = 0; j < ds.n(); ++j) multipliers[j] = stream.gaussian();
    const Eigen::VectorXd statistic =
        theta_stack * (ds.X.transpose() * multipliers) * (sigma_hat / std::sqrt(n));
    const NoisySelection sel = private_max(statistic, G, hyper.budget, scale, stream);
    out.draws.push_back(std::fabs(sel.noisy_value));
    spent.push_back(hyper.budget);
  }
  out.c_u = empirical_quantile(out.draws, alpha);
  out.budget_spent = compose(spent);
  return out;
}

}  // namespace fedspar
