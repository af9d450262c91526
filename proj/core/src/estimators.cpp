#include "fedspar/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "fedspar/stats.hpp"

namespace fedspar {

namespace {

void require_eta(const HyperParams& hyper) {
  if (!(hyper.eta > 0.0)) {
    throw std::invalid_argument("estimator: hyper.eta must be resolved to a positive value");
  }
}

PrivatizedVector initial_iterate(int d) {
  // The zero initializer is data-independent, hence trivially private.
  return {Eigen::VectorXd::Zero(d), PrivacyBudget{}, true};
}

double effective_lambda(const HyperParams& hyper, double sensitivity) {
  return hyper.noise_enabled ? sensitivity : 0.0;
}

// Shared round loop of the two federated iterative estimators.
RegressionEstimate run_iterations(FederatedRun& run, const HyperParams& hyper,
                                  double clamp_radius, double lambda,
                                  const FederatedRun::LocalFn& gradient_fn) {
  require_eta(hyper);
  const int d = run.dimension();
  const int m = run.machine_count();
  const auto round_budgets = split(hyper.budget, hyper.T);

  run.round_broadcast(initial_iterate(d), hyper.s, clamp_radius);

  RegressionEstimate out;
  out.noise_free = true;
  std::vector<PrivacyBudget> spent;
  spent.reserve(static_cast<std::size_t>(hyper.T));
  Eigen::VectorXd iterate = Eigen::VectorXd::Zero(d);
  for (int t = 0; t < hyper.T; ++t) {
    const auto messages = run.round_gather(PayloadKind::kGradient, gradient_fn);
    const Eigen::VectorXd gradient_sum = aggregate(messages);
    const Eigen::VectorXd half_step =
        iterate - (hyper.eta / static_cast<double>(m)) * gradient_sum;
    if (!half_step.allFinite()) {
      throw numerical_fault("iterate went non-finite in round " + std::to_string(t));
    }
    const NoisyHtResult ht = noisy_hard_threshold(
        half_step, hyper.s, lambda, round_budgets[static_cast<std::size_t>(t)],
        run.server_rng());
    iterate = truncate(ht.value, clamp_radius);
    run.round_broadcast({iterate, ht.budget, ht.noise_free}, hyper.s, clamp_radius);
    run.advance_round();
    spent.push_back(ht.budget);
    out.noise_free = out.noise_free && ht.noise_free;
    ++out.iterations_run;
  }
  out.beta_hat = iterate;
  out.budget_spent = compose(spent);
  return out;
}

}  // namespace

RegressionEstimate fed_sparse_regression(FederatedRun& run, const HyperParams& hyper) {
  const double n = run.samples_per_machine();
  const double m = run.machine_count();
  const double lambda = effective_lambda(hyper, hyper.eta * hyper.B0 / (m * n));
  const double radius = hyper.R;
  return run_iterations(
      run, hyper, hyper.C0, lambda,
      [radius](const MachineDataset& ds, const Eigen::VectorXd* broadcast) {
        const Eigen::VectorXd& beta = *broadcast;
        const Eigen::VectorXd y_trunc = truncate(ds.y, radius);
        return Eigen::VectorXd(
            (ds.X.transpose() * (ds.X * beta - y_trunc)) / static_cast<double>(ds.n()));
      });
}

PrecisionColumnEstimate fed_precision_column(FederatedRun& run, int k,
                                             const HyperParams& hyper) {
  if (k < 0 || k >= run.dimension()) {
    throw std::invalid_argument("fed_precision_column: coordinate out of range");
  }
  const double n = run.samples_per_machine();
  const double m = run.machine_count();
  const double lambda = effective_lambda(hyper, hyper.eta * hyper.B1 / (m * n));
  // Machines read their cached Gram matrix; identify it by machine id.
  RegressionEstimate inner = run_iterations(
      run, hyper, hyper.C1, lambda,
      [&run, k](const MachineDataset& ds, const Eigen::VectorXd* broadcast) {
        const Eigen::MatrixXd& gram = run.gram(ds.machine_id);
        Eigen::VectorXd g = gram * (*broadcast);
        g[k] -= 1.0;
        return g;
      });
  PrecisionColumnEstimate out;
  out.k = k;
  out.theta_hat = std::move(inner.beta_hat);
  out.budget_spent = inner.budget_spent;
  out.noise_free = inner.noise_free;
  return out;
}

VarianceEstimate private_variance(FederatedRun& run, const Eigen::VectorXd& beta_hat,
                                  const HyperParams& hyper) {
  return private_variance(
      run, std::vector<Eigen::VectorXd>(static_cast<std::size_t>(run.machine_count()), beta_hat),
      hyper);
}

VarianceEstimate private_variance(FederatedRun& run,
                                  const std::vector<Eigen::VectorXd>& beta_per_machine,
                                  const HyperParams& hyper) {
  if (static_cast<int>(beta_per_machine.size()) != run.machine_count()) {
    throw std::invalid_argument("private_variance: one fitted vector per machine required");
  }
  const double radius = hyper.R;
  const auto messages = run.round_gather(
      PayloadKind::kScalar,
      [&beta_per_machine, radius](const MachineDataset& ds, const Eigen::VectorXd*) {
        const Eigen::VectorXd resid =
            truncate(ds.y, radius) - ds.X * beta_per_machine[static_cast<std::size_t>(ds.machine_id)];
        Eigen::VectorXd out(1);
        out[0] = resid.squaredNorm() / static_cast<double>(ds.n());
        return out;
      });
  const double mean = aggregate(messages)[0] / static_cast<double>(run.machine_count());

  VarianceEstimate out;
  out.budget_spent = hyper.budget;
  out.noise_free = !hyper.noise_enabled || hyper.budget.noise_free();
  double noise = 0.0;
  if (!out.noise_free) {
    noise = run.server_rng().gaussian_scaled(gaussian_std(hyper.B2, hyper.budget));
  }
  out.sigma2 = mean + noise;
  out.negative = out.sigma2 < 0.0;
  return out;
}

EigenEstimate private_restricted_eigen(FederatedRun& run, const HyperParams& hyper,
                                       int n_probes, EigenMode mode) {
  if (n_probes < 1) throw std::invalid_argument("private_restricted_eigen: n_probes >= 1");
  const int d = run.dimension();
  const int s = std::min(hyper.s, d);

  // Public probe directions, shared with the machines out of band.
  Rng& probe_rng = run.server_rng();
  std::vector<Eigen::VectorXd> probes;
  probes.reserve(static_cast<std::size_t>(n_probes));
  std::vector<int> pool(static_cast<std::size_t>(d));
  for (int k = 0; k < n_probes; ++k) {
    for (int j = 0; j < d; ++j) pool[static_cast<std::size_t>(j)] = j;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
    double norm2 = 0.0;
    for (int r = 0; r < s; ++r) {
      const auto pick =
          r + static_cast<int>(probe_rng.below(static_cast<std::uint64_t>(d - r)));
      std::swap(pool[static_cast<std::size_t>(r)], pool[static_cast<std::size_t>(pick)]);
      const double g = probe_rng.gaussian();
      v[pool[static_cast<std::size_t>(r)]] = g;
      norm2 += g * g;
    }
    if (norm2 == 0.0) {
      v[pool[0]] = 1.0;
      norm2 = 1.0;
    }
    probes.push_back(v / std::sqrt(norm2));
  }

  const auto messages = run.round_gather(
      PayloadKind::kQuadraticForm,
      [&run, &probes, n_probes](const MachineDataset& ds, const Eigen::VectorXd*) {
        const Eigen::MatrixXd& gram = run.gram(ds.machine_id);
        Eigen::VectorXd t(n_probes);
        for (int k = 0; k < n_probes; ++k) {
          t[k] = probes[static_cast<std::size_t>(k)].dot(gram * probes[static_cast<std::size_t>(k)]);
        }
        return t;
      });
  const Eigen::VectorXd averages = aggregate(messages) / static_cast<double>(run.machine_count());

  const double scale =
      (hyper.noise_enabled && !hyper.budget.noise_free())
          ? laplace_scale(2.0 * hyper.B3, hyper.budget.epsilon)
          : 0.0;
  int best = 0;
  double best_score = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k < n_probes; ++k) {
    const double score = averages[k] + run.server_rng().laplace(scale);
    const bool better = mode == EigenMode::kMax ? score > best_score : score < best_score;
    if (k == 0 || better) {
      best = k;
      best_score = score;
    }
  }
  const double released = averages[best] + run.server_rng().laplace(scale);

  EigenEstimate out;
  out.n_probes = n_probes;
  if (mode == EigenMode::kMax) {
    out.mu_s_hat = released;
  } else {
    out.nu_s_hat = released;
  }
  return out;
}

EigenEstimate estimate_restricted_eigenvalues(FederatedRun& run, const HyperParams& hyper,
                                              int n_probes) {
  EigenEstimate out = private_restricted_eigen(run, hyper, n_probes, EigenMode::kMax);
  EigenEstimate lo = private_restricted_eigen(run, hyper, n_probes, EigenMode::kMin);
  if (lo.nu_s_hat <= 0.0) {
    lo = private_restricted_eigen(run, hyper, n_probes, EigenMode::kMin);
    if (lo.nu_s_hat <= 0.0) {
      lo.nu_s_hat = 1e-3;
      out.floored = true;
    }
  }
  out.nu_s_hat = lo.nu_s_hat;
  out.n_probes = n_probes;
  return out;
}

HyperParams with_working_sparsity(const HyperParams& hyper, int s, int s0, int s1) {
  if (s < 1 || s0 < 0 || s1 < 0 || s0 + s1 != s) {
    throw std::invalid_argument("with_working_sparsity: bad split");
  }
  HyperParams h = hyper;
  h.s = s;
  h.s0 = s0;
  h.s1 = s1;
  const double n = h.dims.n, m = h.dims.m;
  h.B0 = 2.0 * (h.R + std::sqrt(static_cast<double>(s)) * h.c0 * h.cx) * h.cx;
  h.B1 = 2.0 * std::sqrt(static_cast<double>(s)) * h.c1 * h.cx * h.cx;
  h.Delta1 = std::sqrt(static_cast<double>(s)) * h.c1 * h.cx * h.R + s * h.c0 * h.c1 * h.cx * h.cx;
  h.B2 = 4.0 / (m * n) * (h.R * h.R + static_cast<double>(s) * s * h.c0 * h.c0 * h.cx * h.cx);
  h.B3 = 2.0 * s * h.cx * h.cx / n;
  h.B4 = 4.0 * h.L * std::sqrt(std::log(m)) * h.cx *
         (h.R + h.c0 * h.cx * std::sqrt(static_cast<double>(s0 + s1))) / std::sqrt(m * n);
  h.B5 = h.cx * (2.0 * h.R + std::sqrt(static_cast<double>(s1)) * h.c0 * h.cx);
  h.B6 = 2.0 * std::sqrt(s * std::log(n) / n) * h.cx * h.c1;
  h.validate();
  return h;
}

HeteroEstimate hetero_regression(FederatedRun& run, const HyperParams& hyper) {
  require_eta(hyper);
  if (hyper.s0 + hyper.s1 != hyper.s) {
    throw std::invalid_argument("hetero_regression: s0 + s1 must equal s");
  }
  const int d = run.dimension();
  const double n = run.samples_per_machine();
  const bool run_stage1 = hyper.s0 > 0;
  const bool run_stage2 = hyper.s1 > 0;
  if (!run_stage1 && !run_stage2) {
    throw std::invalid_argument("hetero_regression: nothing to estimate");
  }
  // A skipped stage hands its budget share to the other one.
  std::vector<PrivacyBudget> stage_budgets;
  if (run_stage1 && run_stage2) {
    stage_budgets = split(hyper.budget, 2);
  } else {
    stage_budgets = {hyper.budget, hyper.budget};
  }

  HeteroEstimate out;
  out.noise_free = true;
  std::vector<PrivacyBudget> spent;

  if (run_stage1) {
    HyperParams stage1 = with_working_sparsity(hyper, hyper.s0, hyper.s0, 0);
    stage1.budget = stage_budgets[0];
    RegressionEstimate shared = fed_sparse_regression(run, stage1);
    out.u_hat = std::move(shared.beta_hat);
    out.noise_free = out.noise_free && shared.noise_free;
    spent.push_back(shared.budget_spent);
  } else {
    out.u_hat = Eigen::VectorXd::Zero(d);
  }

  out.v_hat_per_machine.assign(static_cast<std::size_t>(run.machine_count()),
                               Eigen::VectorXd::Zero(d));
  if (run_stage2) {
    HyperParams stage2 = with_working_sparsity(hyper, hyper.s1, 0, hyper.s1);
    stage2.budget = stage_budgets[1];
    const auto round_budgets = split(stage2.budget, stage2.T);
    const double lambda = effective_lambda(stage2, stage2.eta * stage2.B5 / n);
    for (int i = 0; i < run.machine_count(); ++i) {
      const MachineDataset& ds = run.machine_data(i);
      Rng machine_stream = run.machine_rng(i).substream(0x5a2);
      const Eigen::VectorXd residual_target =
          truncate(Eigen::VectorXd(ds.y - ds.X * out.u_hat), stage2.R);
      Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
      for (int t = 0; t < stage2.T; ++t) {
        const Eigen::VectorXd g = (ds.X.transpose() * (ds.X * v - residual_target)) / n;
        const Eigen::VectorXd half = v - stage2.eta * g;
        if (!half.allFinite()) {
          throw numerical_fault("local iterate went non-finite in round " + std::to_string(t));
        }
        const NoisyHtResult ht = noisy_hard_threshold(
            half, stage2.s, lambda, round_budgets[static_cast<std::size_t>(t)], machine_stream);
        v = truncate(ht.value, stage2.C0);
        out.noise_free = out.noise_free && ht.noise_free;
      }
      out.v_hat_per_machine[static_cast<std::size_t>(i)] = std::move(v);
    }
    spent.push_back(stage2.budget);
  }

  out.beta_hat_per_machine.resize(static_cast<std::size_t>(run.machine_count()));
  for (int i = 0; i < run.machine_count(); ++i) {
    out.beta_hat_per_machine[static_cast<std::size_t>(i)] =
        out.u_hat + out.v_hat_per_machine[static_cast<std::size_t>(i)];
  }
  out.budget_spent = compose(spent);
  return out;
}

}  // namespace fedspar
