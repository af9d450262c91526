#include "fedspar/model.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fedspar {

void MachineDataset::validate() const {
  if (X.rows() != y.size()) {
    throw std::invalid_argument("MachineDataset: row count of X must equal length of y");
  }
  if (!X.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("MachineDataset: entries must be finite");
  }
}

namespace {

void check_close(double stored, double recomputed, const char* name) {
  const double tol = 1e-12 * std::max(1.0, std::fabs(recomputed));
  if (std::fabs(stored - recomputed) > tol) {
    throw std::logic_error(std::string("HyperParams: stored ") + name +
                           " disagrees with its closed form");
  }
}

}  // namespace

HyperParams HyperParams::make(const Dims& dims, int s_star, int s0, double sigma,
                              const PrivacyBudget& budget, double sparsity_factor,
                              double r_override) {
  if (dims.n < 1 || dims.m < 1 || dims.d < 1) {
    throw std::invalid_argument("HyperParams: dims must be positive");
  }
  if (s0 < 0 || s0 > s_star || s_star > dims.d) {
    throw std::invalid_argument("HyperParams: need 0 <= s0 <= s_star <= d");
  }
  if (!(sparsity_factor >= 1.0)) {
    throw std::invalid_argument("HyperParams: sparsity_factor must be >= 1");
  }

  HyperParams h;
  h.dims = dims;
  h.budget = budget;
  h.s = std::min(dims.d, static_cast<int>(std::ceil(sparsity_factor * s_star)));
  h.s0 = s0;
  h.s1 = h.s - s0;
  h.T = std::max(15, static_cast<int>(std::ceil(
                         2.0 * std::log(8.0 * h.C0 * h.C0 * h.L * dims.n))));
  h.R = r_override > 0.0
            ? r_override
            : sigma * std::sqrt(2.0 * std::log(static_cast<double>(dims.m) * dims.n));

  // Calibrated sensitivity-model defaults (see struct comment).
  h.kappa = 0.045;
  h.c0 = 0.7;
  h.c1 = 0.7;
  h.L = 1.0;

  const double n = dims.n, m = dims.m, d = dims.d;
  h.cx = 3.0 * std::sqrt(2.0 * h.L * h.kappa * h.kappa * std::log(d));
  h.B0 = 2.0 * (h.R + std::sqrt(static_cast<double>(h.s)) * h.c0 * h.cx) * h.cx;
  h.B1 = 2.0 * std::sqrt(static_cast<double>(h.s)) * h.c1 * h.cx * h.cx;
  h.Delta1 = std::sqrt(static_cast<double>(h.s)) * h.c1 * h.cx * h.R +
             h.s * h.c0 * h.c1 * h.cx * h.cx;
  h.B2 = 4.0 / (m * n) * (h.R * h.R + h.s * h.s * h.c0 * h.c0 * h.cx * h.cx);
  h.B3 = 2.0 * h.s * h.cx * h.cx / n;
  h.B4 = 4.0 * h.L * std::sqrt(std::log(m)) * h.cx *
         (h.R + h.c0 * h.cx * std::sqrt(static_cast<double>(s_star))) / std::sqrt(m * n);
  h.B5 = h.cx * (2.0 * h.R + std::sqrt(static_cast<double>(h.s1)) * h.c0 * h.cx);
  h.B6 = 2.0 * std::sqrt(h.s * std::log(n) / n) * h.cx * h.c1;
  h.validate();
  return h;
}

void HyperParams::validate() const {
  if (s < 1 || s > dims.d) throw std::logic_error("HyperParams: bad working sparsity");
  if (s0 < 0 || s1 < 0 || s0 + s1 != s) throw std::logic_error("HyperParams: bad s0/s1 split");
  if (T < 1) throw std::logic_error("HyperParams: bad iteration count");
  if (!(R >= 0.0)) throw std::logic_error("HyperParams: bad truncation level");

  const double n = dims.n, m = dims.m, d = dims.d;
  check_close(cx, 3.0 * std::sqrt(2.0 * L * kappa * kappa * std::log(d)), "cx");
  check_close(B0, 2.0 * (R + std::sqrt(static_cast<double>(s)) * c0 * cx) * cx, "B0");
  check_close(B1, 2.0 * std::sqrt(static_cast<double>(s)) * c1 * cx * cx, "B1");
  check_close(Delta1,
              std::sqrt(static_cast<double>(s)) * c1 * cx * R + s * c0 * c1 * cx * cx,
              "Delta1");
  check_close(B2, 4.0 / (m * n) * (R * R + s * s * c0 * c0 * cx * cx), "B2");
  check_close(B3, 2.0 * s * cx * cx / n, "B3");
  check_close(B4,
              4.0 * L * std::sqrt(std::log(m)) * cx *
                  (R + c0 * cx * std::sqrt(static_cast<double>(s0 + s1))) / std::sqrt(m * n),
              "B4");
  check_close(B5, cx * (2.0 * R + std::sqrt(static_cast<double>(s1)) * c0 * cx), "B5");
  check_close(B6, 2.0 * std::sqrt(s * std::log(n) / n) * cx * c1, "B6");
}

double HyperParams::gamma_constant(double mu_s) {
  return std::max(mu_s * (9.0 * mu_s + 0.25), 17.0 / 16.0 * mu_s + 1.0 / 96.0);
}

double HyperParams::resolved_gamma(double mu_s_hat) const {
  return std::isnan(gamma) ? gamma_constant(mu_s_hat) : gamma;
}

Eigen::MatrixXd ar_covariance(int d, double rho) {
  if (d < 1) throw std::invalid_argument("ar_covariance: d must be >= 1");
  if (!(std::fabs(rho) < 1.0)) {
    throw std::invalid_argument("ar_covariance: |rho| must be < 1");
  }
  Eigen::MatrixXd sigma(d, d);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) sigma(j, k) = std::pow(rho, std::abs(j - k));
  }
  return sigma;
}

TrueModel make_true_model(int m, int d, int s_star, int s0, double sigma,
                          const Eigen::MatrixXd& covariance, Rng& rng) {
  if (m < 1) throw std::invalid_argument("make_true_model: m must be >= 1");
  if (s0 < 0 || s0 > s_star || s_star > d) {
    throw std::invalid_argument("make_true_model: need 0 <= s0 <= s_star <= d");
  }
  if (covariance.rows() != d || covariance.cols() != d) {
    throw std::invalid_argument("make_true_model: covariance must be d x d");
  }
  const int s1 = s_star - s0;
  if (s1 > d - s0) throw std::invalid_argument("make_true_model: machine picks do not fit");

  TrueModel model;
  model.sigma = sigma;
  model.covariance = covariance;
  model.shared_support.resize(static_cast<std::size_t>(s0));
  for (int j = 0; j < s0; ++j) model.shared_support[static_cast<std::size_t>(j)] = j;

  const double height = 1.0 / std::sqrt(static_cast<double>(s_star));
  model.beta_per_machine.reserve(static_cast<std::size_t>(m));
  std::vector<int> pool;
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
    for (int j = 0; j < s0; ++j) beta[j] = height;
    // Partial Fisher-Yates over the free indices {s0, ..., d-1}.
    pool.resize(static_cast<std::size_t>(d - s0));
    for (int j = 0; j < d - s0; ++j) pool[static_cast<std::size_t>(j)] = s0 + j;
    for (int k = 0; k < s1; ++k) {
      const auto pick = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(
                                static_cast<int>(pool.size()) - k)));
      std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(pick)]);
      beta[pool[static_cast<std::size_t>(k)]] = height;
    }
    model.beta_per_machine.push_back(std::move(beta));
  }
  return model;
}

std::vector<MachineDataset> sample_federation(const TrueModel& model, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_federation: n must be >= 1");
  Eigen::LLT<Eigen::MatrixXd> llt(model.covariance);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("sample_federation: covariance is not SPD");
  }
  const Eigen::MatrixXd chol = llt.matrixL();
  const int d = model.d();

  std::vector<MachineDataset> out;
  out.reserve(static_cast<std::size_t>(model.m()));
  for (int i = 0; i < model.m(); ++i) {
    Rng machine_rng = rng.substream(static_cast<std::uint64_t>(i));
    MachineDataset ds;
    ds.machine_id = i;
    ds.X.resize(n, d);
    Eigen::VectorXd z(d);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < d; ++c) z[c] = machine_rng.gaussian();
      ds.X.row(r) = (chol * z).transpose();
    }
    ds.y = ds.X * model.beta_per_machine[static_cast<std::size_t>(i)];
    for (int r = 0; r < n; ++r) ds.y[r] += machine_rng.gaussian_scaled(model.sigma);
    out.push_back(std::move(ds));
  }
  return out;
}

void write_datasets_csv(const std::vector<MachineDataset>& data, std::ostream& os) {
  if (data.empty()) throw std::invalid_argument("write_datasets_csv: no datasets");
  const int d = data.front().d();
  os << "machine_id,y";
  for (int j = 0; j < d; ++j) os << ",x_" << j;
  os << "\n";
  os.precision(17);
  for (const auto& ds : data) {
    for (int r = 0; r < ds.n(); ++r) {
      os << ds.machine_id << ',' << ds.y[r];
      for (int j = 0; j < d; ++j) os << ',' << ds.X(r, j);
      os << "\n";
    }
  }
}

std::vector<MachineDataset> read_datasets_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("read_datasets_csv: empty input");
  int d = 0;
  {
    std::stringstream header(line);
    std::string field;
    int count = 0;
    while (std::getline(header, field, ',')) ++count;
    d = count - 2;
    if (d < 1) throw std::invalid_argument("read_datasets_csv: malformed header");
  }
  struct Row {
    int machine;
    double y;
    std::vector<double> x;
  };
  std::vector<Row> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    Row row;
    std::getline(ss, field, ',');
    row.machine = std::stoi(field);
    std::getline(ss, field, ',');
    row.y = std::stod(field);
    row.x.reserve(static_cast<std::size_t>(d));
    while (std::getline(ss, field, ',')) row.x.push_back(std::stod(field));
    if (static_cast<int>(row.x.size()) != d) {
      throw std::invalid_argument("read_datasets_csv: inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  int max_machine = -1;
  for (const auto& r : rows) max_machine = std::max(max_machine, r.machine);
  std::vector<MachineDataset> out(static_cast<std::size_t>(max_machine + 1));
  for (int i = 0; i <= max_machine; ++i) {
    std::size_t count = 0;
    for (const auto& r : rows) count += (r.machine == i);
    auto& ds = out[static_cast<std::size_t>(i)];
    ds.machine_id = i;
    ds.X.resize(static_cast<Eigen::Index>(count), d);
    ds.y.resize(static_cast<Eigen::Index>(count));
    Eigen::Index at = 0;
    for (const auto& r : rows) {
      if (r.machine != i) continue;
      ds.y[at] = r.y;
      for (int j = 0; j < d; ++j) ds.X(at, j) = r.x[static_cast<std::size_t>(j)];
      ++at;
    }
  }
  return out;
}

}  // namespace fedspar
