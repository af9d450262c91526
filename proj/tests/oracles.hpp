#pragma once

// Test-only reference implementations, kept independent of the library's
// protocol code paths. Where a test demands bit-level agreement the oracle
// mirrors the documented arithmetic (grouped means, pairwise summation in
// machine order) with its own code.

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

namespace oracles {

// Exact top-s selection by magnitude, lowest index on ties.
inline std::vector<int> top_s_by_magnitude(const Eigen::VectorXd& v, int s) {
  std::vector<int> idx(static_cast<std::size_t>(v.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = static_cast<int>(j);
  std::partial_sort(idx.begin(), idx.begin() + s, idx.end(), [&v](int a, int b) {
    const double fa = std::abs(v[a]), fb = std::abs(v[b]);
    return fa != fb ? fa > fb : a < b;
  });
  idx.resize(static_cast<std::size_t>(s));
  return idx;
}

inline Eigen::VectorXd hard_threshold(const Eigen::VectorXd& v, int s) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (int j : top_s_by_magnitude(v, s)) out[j] = v[j];
  return out;
}

inline Eigen::VectorXd clamp_inf(const Eigen::VectorXd& v, double radius) {
  Eigen::VectorXd out = v;
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    out[j] = std::min(radius, std::max(-radius, out[j]));
  }
  return out;
}

inline Eigen::VectorXd pairwise(const std::vector<Eigen::VectorXd>& vs, std::size_t lo,
                                std::size_t hi) {
  if (hi - lo == 1) return vs[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise(vs, lo, mid) + pairwise(vs, mid, hi);
}

// Projected-gradient iterative hard thresholding on machine-blocked data,
// noise free. Gradients use the same grouped structure as the protocol:
// per-block mean gradient, pairwise-summed in block order, divided by m.
struct IhtTrace {
  std::vector<Eigen::VectorXd> iterates;  // after each round
  Eigen::VectorXd final;
};

inline IhtTrace pooled_iht(const std::vector<Eigen::MatrixXd>& X_blocks,
                           const std::vector<Eigen::VectorXd>& y_blocks, double truncation,
                           double eta, int s, double clamp, int rounds) {
  const auto m = X_blocks.size();
  const int d = static_cast<int>(X_blocks.front().cols());
  IhtTrace trace;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  std::vector<Eigen::VectorXd> grads(m);
  for (int t = 0; t < rounds; ++t) {
    for (std::size_t i = 0; i < m; ++i) {
      const Eigen::VectorXd y_trunc = clamp_inf(y_blocks[i], truncation);
      grads[i] = (X_blocks[i].transpose() * (X_blocks[i] * beta - y_trunc)) /
                 static_cast<double>(X_blocks[i].rows());
    }
    const Eigen::VectorXd gsum = pairwise(grads, 0, m);
    const Eigen::VectorXd half = beta - (eta / static_cast<double>(m)) * gsum;
    beta = clamp_inf(hard_threshold(half, s), clamp);
    trace.iterates.push_back(beta);
  }
  trace.final = beta;
  return trace;
}

// Classical one-step debiasing with a dense precision matrix:
// beta_u = beta_hat + Theta X' (trunc(y) - X beta_hat) / N over pooled data.
inline Eigen::VectorXd dense_debias(const std::vector<Eigen::MatrixXd>& X_blocks,
                                    const std::vector<Eigen::VectorXd>& y_blocks,
                                    const Eigen::MatrixXd& theta,
                                    const Eigen::VectorXd& beta_hat, double truncation) {
  const int d = static_cast<int>(theta.rows());
  Eigen::VectorXd score = Eigen::VectorXd::Zero(d);
  double total = 0.0;
  for (std::size_t i = 0; i < X_blocks.size(); ++i) {
    const Eigen::VectorXd resid = clamp_inf(y_blocks[i], truncation) - X_blocks[i] * beta_hat;
    score += X_blocks[i].transpose() * resid;
    total += static_cast<double>(X_blocks[i].rows());
  }
  return beta_hat + theta * score / total;
}

// Largest s-restricted eigenvalue by exhaustive support enumeration.
inline double restricted_eigen_max(const Eigen::MatrixXd& sigma, int s) {
  const int d = static_cast<int>(sigma.rows());
  std::vector<int> support(static_cast<std::size_t>(s));
  double best = -1e300;
  // Enumerate all supports of size s via lexicographic combinations.
  std::vector<int> comb(static_cast<std::size_t>(s));
  for (int j = 0; j < s; ++j) comb[static_cast<std::size_t>(j)] = j;
  for (;;) {
    Eigen::MatrixXd sub(s, s);
    for (int a = 0; a < s; ++a) {
      for (int b = 0; b < s; ++b) {
        sub(a, b) = sigma(comb[static_cast<std::size_t>(a)], comb[static_cast<std::size_t>(b)]);
      }
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sub);
    best = std::max(best, solver.eigenvalues().maxCoeff());
    // Next combination.
    int pos = s - 1;
    while (pos >= 0 && comb[static_cast<std::size_t>(pos)] == d - s + pos) --pos;
    if (pos < 0) break;
    ++comb[static_cast<std::size_t>(pos)];
    for (int j = pos + 1; j < s; ++j) {
      comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return best;
}

}  // namespace oracles
