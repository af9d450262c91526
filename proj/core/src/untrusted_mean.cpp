#include "fedspar/untrusted_mean.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fedspar/stats.hpp"

namespace fedspar {

double per_coordinate_epsilon(const SignReportConfig& cfg, int d) {
  if (cfg.k_sub < 1) throw std::invalid_argument("SignReportConfig: k_sub must be >= 1");
  const int reported = (d + cfg.k_sub - 1) / cfg.k_sub;
  return cfg.epsilon / static_cast<double>(reported);
}

double flip_probability(double epsilon_per_coordinate) {
  if (!(epsilon_per_coordinate > 0.0)) {
    throw std::invalid_argument("flip_probability: epsilon must be positive");
  }
  return 1.0 / (1.0 + std::exp(epsilon_per_coordinate));
}

PrivatizedVector local_sign_report(const MachineDataset& data, const SignReportConfig& cfg,
                                   Rng& rng) {
  data.validate();
  const int d = data.d();
  const int reported = (d + cfg.k_sub - 1) / cfg.k_sub;
  const double eps_coord = per_coordinate_epsilon(cfg, d);
  const bool noise_free = !std::isfinite(eps_coord);
  const double p_flip = noise_free ? 0.0 : flip_probability(eps_coord);

  const Eigen::VectorXd mean = data.X.colwise().mean();

  // Choose the reported coordinates uniformly without replacement.
  std::vector<int> pool(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) pool[static_cast<std::size_t>(j)] = j;
  Eigen::VectorXd payload = Eigen::VectorXd::Zero(d);
  for (int r = 0; r < reported; ++r) {
    const auto pick = r + static_cast<int>(rng.below(static_cast<std::uint64_t>(d - r)));
    std::swap(pool[static_cast<std::size_t>(r)], pool[static_cast<std::size_t>(pick)]);
    const int j = pool[static_cast<std::size_t>(r)];
    double bit = mean[j] > 0.0 ? 1.0 : -1.0;
    if (!noise_free && rng.uniform() < p_flip) bit = -bit;
    payload[j] = bit;
  }

  PrivacyBudget spent;
  spent.epsilon = cfg.epsilon;
  spent.delta = 0.0;
  return {std::move(payload), spent, noise_free};
}

std::vector<GradientMessage> gather_sign_reports(FederatedRun& run,
                                                 const SignReportConfig& cfg) {
  return run.round_gather_private(
      PayloadKind::kSignBits,
      [&cfg](const MachineDataset& ds, Rng& machine_rng) {
        return local_sign_report(ds, cfg, machine_rng);
      });
}

MeanEstimate aggregate_mean(const std::vector<GradientMessage>& messages, int n,
                            const SignReportConfig& cfg) {
  if (messages.empty()) throw std::invalid_argument("aggregate_mean: no messages");
  if (n < 1) throw std::invalid_argument("aggregate_mean: n must be >= 1");
  const int d = static_cast<int>(messages.front().payload.size());
  const int m = static_cast<int>(messages.size());
  const double eps_coord = per_coordinate_epsilon(cfg, d);
  const double debias =
      std::isfinite(eps_coord) ? std::tanh(0.5 * eps_coord) : 1.0;  // 1 - 2 p_flip

  MeanEstimate out;
  out.epsilon = cfg.epsilon;
  out.machines = m;
  out.v_hat.resize(d);
  out.mu_hat.resize(d);
  const double clamp = 1.0 - 1.0 / (2.0 * std::sqrt(static_cast<double>(m)));
  for (int j = 0; j < d; ++j) {
    double sum = 0.0;
    int count = 0;
    for (const auto& msg : messages) {
      const double bit = msg.payload[j];
      if (bit != 0.0) {
        sum += bit;
        ++count;
      }
    }
    double v = count > 0 ? sum / (count * debias) : 0.0;
    v = std::clamp(v, -clamp, clamp);
    out.v_hat[j] = v;
    out.mu_hat[j] = std::sqrt(2.0 / static_cast<double>(n)) * erf_inv(v);
  }
  return out;
}

Eigen::VectorXd top_s_threshold(const Eigen::VectorXd& v, int s) {
  if (s < 0 || s > v.size()) throw std::invalid_argument("top_s_threshold: bad s");
  std::vector<int> idx(static_cast<std::size_t>(v.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = static_cast<int>(j);
  std::partial_sort(idx.begin(), idx.begin() + s, idx.end(), [&v](int a, int b) {
    const double fa = std::fabs(v[a]), fb = std::fabs(v[b]);
    return fa != fb ? fa > fb : a < b;
  });
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (int r = 0; r < s; ++r) out[idx[static_cast<std::size_t>(r)]] = v[idx[static_cast<std::size_t>(r)]];
  return out;
}

}  // namespace fedspar
