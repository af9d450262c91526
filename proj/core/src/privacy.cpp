#include "fedspar/privacy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fedspar {

PrivacyBudget::PrivacyBudget(double eps, double del) : epsilon(eps), delta(del) {
  if (std::isnan(eps) || !(eps > 0.0)) {
    throw std::invalid_argument("PrivacyBudget: epsilon must be positive");
  }
  if (!(del >= 0.0 && del < 1.0)) {
    throw std::invalid_argument("PrivacyBudget: delta must lie in [0, 1)");
  }
}

PrivacyBudget compose(const PrivacyBudget& a, const PrivacyBudget& b) {
  PrivacyBudget out;
  out.epsilon = a.epsilon + b.epsilon;
  out.delta = a.delta + b.delta;
  return out;
}

PrivacyBudget compose(const std::vector<PrivacyBudget>& parts) {
  if (parts.empty()) throw std::invalid_argument("compose: empty budget list");
  PrivacyBudget out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) out = compose(out, parts[i]);
  return out;
}

std::vector<PrivacyBudget> split(const PrivacyBudget& b, int k) {
  if (k < 1) throw std::invalid_argument("split: k must be >= 1");
  std::vector<PrivacyBudget> parts(static_cast<std::size_t>(k));
  const double eps_part = b.epsilon / k;
  const double del_part = b.delta / k;
  double eps_used = 0.0;
  double del_used = 0.0;
  for (int i = 0; i + 1 < k; ++i) {
    parts[static_cast<std::size_t>(i)].epsilon = eps_part;
    parts[static_cast<std::size_t>(i)].delta = del_part;
    eps_used += eps_part;
    del_used += del_part;
  }
  // Last share absorbs rounding so the left-fold composition is exact.
  parts.back().epsilon = b.epsilon - eps_used;
  parts.back().delta = b.delta - del_used;
  return parts;
}

double laplace_scale(double l1_sensitivity, double epsilon) {
  if (!std::isfinite(l1_sensitivity) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("laplace_scale: inputs must be finite");
  }
  if (l1_sensitivity < 0.0) throw std::invalid_argument("laplace_scale: negative sensitivity");
  if (!(epsilon > 0.0)) throw std::invalid_argument("laplace_scale: epsilon must be positive");
  return l1_sensitivity / epsilon;
}

double gaussian_std(double l2_sensitivity, const PrivacyBudget& budget) {
  if (!std::isfinite(l2_sensitivity) || !std::isfinite(budget.epsilon)) {
    throw std::invalid_argument("gaussian_std: inputs must be finite");
  }
  if (l2_sensitivity < 0.0) throw std::invalid_argument("gaussian_std: negative sensitivity");
  if (!(budget.delta > 0.0)) {
    throw std::invalid_argument("gaussian_std: the Gaussian mechanism requires delta > 0");
  }
  const double ratio = l2_sensitivity / budget.epsilon;
  return std::sqrt(2.0 * ratio * ratio * std::log(1.25 / budget.delta));
}

double truncate(double x, double radius) {
  if (std::isnan(radius) || radius < 0.0) {
    throw std::invalid_argument("truncate: radius must be nonnegative");
  }
  if (x > radius) return radius;
  if (x < -radius) return -radius;
  return x;
}

Eigen::VectorXd truncate(const Eigen::VectorXd& v, double radius) {
  if (std::isnan(radius) || radius < 0.0) {
    throw std::invalid_argument("truncate: radius must be nonnegative");
  }
  Eigen::VectorXd out = v;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = truncate(out[i], radius);
  return out;
}

namespace {

// Per-round scale of the iterative selection: lam * 2 sqrt(3 s log(1/delta)) / eps.
// Infinite epsilon means noise off.
double peeling_scale(double lam, int s, const PrivacyBudget& budget) {
  if (lam == 0.0 || budget.noise_free()) return 0.0;
  if (!(budget.delta > 0.0)) {
    throw std::invalid_argument("noisy_hard_threshold: delta must be positive");
  }
  return lam * 2.0 * std::sqrt(3.0 * s * std::log(1.0 / budget.delta)) / budget.epsilon;
}

}  // namespace

NoisyHtResult noisy_hard_threshold(const Eigen::VectorXd& v, int s, double lam,
                                   const PrivacyBudget& budget, Rng& rng) {
  const int d = static_cast<int>(v.size());
  if (s < 1 || s > d) throw std::invalid_argument("noisy_hard_threshold: need 1 <= s <= d");
  if (std::isnan(lam) || lam < 0.0) {
    throw std::invalid_argument("noisy_hard_threshold: lam must be nonnegative");
  }

  NoisyHtResult out;
  out.round_scale = peeling_scale(lam, s, budget);
  out.noise_free = (out.round_scale == 0.0);
  out.budget = budget;
  out.support.reserve(static_cast<std::size_t>(s));

  std::vector<char> selected(static_cast<std::size_t>(d), 0);
  for (int round = 0; round < s; ++round) {
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < d; ++j) {
      if (selected[static_cast<std::size_t>(j)]) continue;
      const double score = std::fabs(v[j]) + rng.laplace(out.round_scale);
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    selected[static_cast<std::size_t>(best)] = 1;
    out.support.push_back(best);
  }

  out.value = Eigen::VectorXd::Zero(d);
  for (int j : out.support) out.value[j] = v[j] + rng.laplace(out.round_scale);
  return out;
}

NoisySelection private_max(const Eigen::VectorXd& v, const std::vector<int>& candidates,
                           const PrivacyBudget& budget, double noise_scale, Rng& rng) {
  if (candidates.empty()) throw std::invalid_argument("private_max: empty candidate set");
  if (std::isnan(noise_scale) || noise_scale < 0.0) {
    throw std::invalid_argument("private_max: noise_scale must be nonnegative");
  }
  const double scale = budget.noise_free() ? 0.0 : noise_scale;

  NoisySelection out;
  out.noise_free = (scale == 0.0);
  double best_score = -std::numeric_limits<double>::infinity();
  for (int j : candidates) {
    if (j < 0 || j >= v.size()) throw std::invalid_argument("private_max: index out of range");
    const double score = std::fabs(v[j]) + rng.laplace(scale);
    if (score > best_score) {
      best_score = score;
      out.index = j;
    }
  }
  out.raw_value = v[out.index];
  out.noisy_value = out.raw_value + rng.laplace(scale);
  return out;
}

}  // namespace fedspar
