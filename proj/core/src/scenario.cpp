#include "fedspar/scenario.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "fedspar/estimators.hpp"
#include "fedspar/inference.hpp"
#include "fedspar/model.hpp"
#include "fedspar/stats.hpp"
#include "fedspar/untrusted_mean.hpp"

namespace fedspar {

namespace {

using nlohmann::json;

constexpr double kArRho = 0.5;
constexpr double kSigma2Floor = 1e-8;

std::string g_mode_name(GMode g) {
  switch (g) {
    case GMode::kAll: return "all";
    case GMode::kS: return "S";
    case GMode::kSc: return "Sc";
  }
  return "all";
}

GMode g_mode_from(const std::string& s) {
  if (s == "all") return GMode::kAll;
  if (s == "S") return GMode::kS;
  if (s == "Sc") return GMode::kSc;
  throw std::invalid_argument("unknown G_mode: " + s);
}

std::string mode_name(RunMode m) {
  switch (m) {
    case RunMode::kHomogeneous: return "homogeneous";
    case RunMode::kHeterogeneous: return "heterogeneous";
    case RunMode::kUntrusted: return "untrusted";
  }
  return "heterogeneous";
}

RunMode mode_from(const std::string& s) {
  if (s == "homogeneous") return RunMode::kHomogeneous;
  if (s == "heterogeneous") return RunMode::kHeterogeneous;
  if (s == "untrusted") return RunMode::kUntrusted;
  throw std::invalid_argument("unknown mode: " + s);
}

// Per-replication tallies, mergeable in index order.
struct RepResult {
  double err = 0.0;
  double s_hits = 0.0;       // covered coordinates on the support
  double sc_hits = 0.0;      // covered coordinates off the support
  double s_total = 0.0;
  double sc_total = 0.0;
  double length_sum = 0.0;
  double length_count = 0.0;
  // Simultaneous mode: 1 if every coordinate of G was covered.
  double all_covered = 0.0;
  bool has_intervals = false;
};

struct RepContext {
  TrueModel model;
  FederatedRun run;
  HyperParams hyper;
  EigenEstimate eigen;
};

HyperParams build_hyper(const ScenarioConfig& cfg) {
  const Dims dims{cfg.n, cfg.m, cfg.d};
  const int s0 = cfg.mode == RunMode::kHomogeneous ? cfg.s_star : cfg.s0;
  PrivacyBudget budget(cfg.epsilon, cfg.resolved_delta());
  HyperParams hyper = HyperParams::make(dims, cfg.s_star, s0, cfg.sigma, budget,
                                        cfg.sparsity_factor, cfg.r_override);
  hyper.noise_enabled = cfg.noise_enabled;
  if (cfg.t_override > 0) {
    hyper.T = cfg.t_override;
  }
  return hyper;
}

RepContext make_rep_context(const ScenarioConfig& cfg, int rep) {
  Rng rep_root = Rng(cfg.seed, 0).substream(static_cast<std::uint64_t>(rep));
  Rng model_rng = rep_root.substream(1);
  Rng data_rng = rep_root.substream(2);
  Rng run_rng = rep_root.substream(3);

  // In homogeneous mode the machines share the full signal.
  const int model_s0 = cfg.mode == RunMode::kHomogeneous ? cfg.s_star : cfg.s0;
  TrueModel model = make_true_model(cfg.m, cfg.d, cfg.s_star, model_s0, cfg.sigma,
                                    ar_covariance(cfg.d, kArRho), model_rng);
  std::vector<MachineDataset> data = sample_federation(model, cfg.n, data_rng);
  const ServerTrust trust =
      cfg.mode == RunMode::kUntrusted ? ServerTrust::kUntrusted : ServerTrust::kTrusted;
  FederatedRun run(std::move(data), run_rng, trust);

  HyperParams hyper = build_hyper(cfg);
  EigenEstimate eigen;
  if (cfg.mode != RunMode::kUntrusted) {
    if (cfg.eta_override > 0.0) {
      hyper.eta = cfg.eta_override;
      eigen.mu_s_hat = hyper.L;
      eigen.nu_s_hat = 1.0 / hyper.L;
    } else {
      eigen = estimate_restricted_eigenvalues(run, hyper, cfg.eigen_probes);
      hyper.eta = 1.0 / (6.0 * std::max(eigen.mu_s_hat, 0.1));
    }
  }
  return RepContext{std::move(model), std::move(run), hyper, eigen};
}

Eigen::MatrixXd precision_stack(FederatedRun& run, const HyperParams& hyper) {
  const int d = run.dimension();
  Eigen::MatrixXd stack(d, d);
  for (int k = 0; k < d; ++k) {
    stack.row(k) = fed_precision_column(run, k, hyper).theta_hat.transpose();
  }
  return stack;
}

double resolve_sigma_hat(FederatedRun& run, const std::vector<Eigen::VectorXd>& betas,
                         const HyperParams& hyper) {
  const VarianceEstimate var = private_variance(run, betas, hyper);
  return std::sqrt(std::max(var.sigma2, kSigma2Floor));
}

std::vector<int> support_of(const Eigen::VectorXd& beta) {
  std::vector<int> s;
  for (int j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) s.push_back(j);
  }
  return s;
}

std::vector<int> group_for(GMode g, const Eigen::VectorXd& beta) {
  const std::vector<int> s = support_of(beta);
  std::vector<int> out;
  if (g == GMode::kS) return s;
  std::vector<char> in_s(static_cast<std::size_t>(beta.size()), 0);
  for (int j : s) in_s[static_cast<std::size_t>(j)] = 1;
  for (int j = 0; j < beta.size(); ++j) {
    if (g == GMode::kAll || !in_s[static_cast<std::size_t>(j)]) out.push_back(j);
  }
  return out;
}

void tally_interval(RepResult& r, const IntervalEstimate& iv, double truth, bool on_support) {
  const bool hit = iv.contains(truth);
  if (on_support) {
    r.s_hits += hit;
    r.s_total += 1.0;
  } else {
    r.sc_hits += hit;
    r.sc_total += 1.0;
  }
  r.length_sum += iv.width();
  r.length_count += 1.0;
  r.has_intervals = true;
}

void maybe_dump_log(const ScenarioConfig& cfg, const FederatedRun& run, int rep) {
  if (cfg.log_dir.empty()) return;
  std::filesystem::create_directories(cfg.log_dir);
  const std::string name = cfg.name.empty() ? "scenario" : cfg.name;
  std::ofstream os(cfg.log_dir + "/" + name + "-rep" + std::to_string(rep) + ".jsonl");
  run.log().dump_jsonl(os);
}

RepResult run_rep_untrusted(const ScenarioConfig& cfg, int rep) {
  Rng rep_root = Rng(cfg.seed, 0).substream(static_cast<std::uint64_t>(rep));
  Rng data_rng = rep_root.substream(2);
  Rng run_rng = rep_root.substream(3);

  // Sparse mean: the first s_star coordinates carry 1/sqrt(s_star).
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(cfg.d);
  for (int j = 0; j < cfg.s_star; ++j) mu[j] = 1.0 / std::sqrt(static_cast<double>(cfg.s_star));

  std::vector<MachineDataset> data(static_cast<std::size_t>(cfg.m));
  for (int i = 0; i < cfg.m; ++i) {
    Rng machine = data_rng.substream(static_cast<std::uint64_t>(i));
    auto& ds = data[static_cast<std::size_t>(i)];
    ds.machine_id = i;
    ds.X.resize(cfg.n, cfg.d);
    for (int r = 0; r < cfg.n; ++r) {
      for (int c = 0; c < cfg.d; ++c) ds.X(r, c) = mu[c] + machine.gaussian();
    }
    ds.y = Eigen::VectorXd::Zero(cfg.n);
  }

  FederatedRun run(std::move(data), run_rng, ServerTrust::kUntrusted);
  SignReportConfig sign_cfg;
  sign_cfg.epsilon = cfg.epsilon;
  sign_cfg.k_sub = cfg.k_sub;
  const auto reports = gather_sign_reports(run, sign_cfg);
  const MeanEstimate est = aggregate_mean(reports, cfg.n, sign_cfg);

  RepResult r;
  r.err = (est.mu_hat - mu).squaredNorm();
  maybe_dump_log(cfg, run, rep);
  return r;
}

RepResult run_rep_coordinatewise(const ScenarioConfig& cfg, int rep) {
  if (cfg.mode == RunMode::kUntrusted) return run_rep_untrusted(cfg, rep);

  RepContext ctx = make_rep_context(cfg, rep);
  FederatedRun& run = ctx.run;
  const HyperParams& hyper = ctx.hyper;
  const double mn = static_cast<double>(cfg.m) * cfg.n;

  RepResult r;
  if (cfg.mode == RunMode::kHomogeneous) {
    const RegressionEstimate reg = fed_sparse_regression(run, hyper);
    const Eigen::MatrixXd theta = precision_stack(run, hyper);
    const double sigma_hat = resolve_sigma_hat(
        run, std::vector<Eigen::VectorXd>(static_cast<std::size_t>(cfg.m), reg.beta_hat),
        hyper);
    const std::vector<DebiasedCoordinate> dcs = debias_all(run, reg.beta_hat, theta, hyper);
    const Eigen::VectorXd& beta = ctx.model.beta_per_machine.front();
    r.err = (reg.beta_hat - beta).squaredNorm();
    for (int k = 0; k < cfg.d; ++k) {
      const auto& dc = dcs[static_cast<std::size_t>(k)];
      const IntervalEstimate iv =
          cfg.ci_form == CiForm::kSimple
              ? ci_simple(dc, sigma_hat, cfg.alpha, mn)
              : ci_general(dc, sigma_hat, ctx.eigen, hyper, cfg.alpha, cfg.m, cfg.n);
      tally_interval(r, iv, beta[k], beta[k] != 0.0);
    }
  } else {
    const HeteroEstimate het = hetero_regression(run, hyper);
    const Eigen::MatrixXd theta = precision_stack(run, hyper);
    const double sigma_hat = resolve_sigma_hat(run, het.beta_hat_per_machine, hyper);
    const Eigen::VectorXd plug_in = plug_in_variances(run, theta);
    const double z = normal_quantile(1.0 - cfg.alpha / 2.0);
    const double eps = hyper.budget.epsilon;
    const double privacy_addend = 8.0 * hyper.Delta1 * hyper.Delta1 *
                                  std::log(1.0 / hyper.budget.delta) /
                                  (static_cast<double>(cfg.n) * eps * eps);
    double err_sum = 0.0;
    for (int i = 0; i < cfg.m; ++i) {
      const Eigen::VectorXd& beta_i = ctx.model.beta_per_machine[static_cast<std::size_t>(i)];
      const Eigen::VectorXd& beta_hat_i = het.beta_hat_per_machine[static_cast<std::size_t>(i)];
      err_sum += (beta_hat_i - beta_i).squaredNorm();
      const std::vector<DebiasedCoordinate> dcs =
          hetero_debias_all(run, i, beta_hat_i, theta, hyper, &plug_in);
      double bias = 0.0;
      if (cfg.ci_form == CiForm::kGeneral) {
        bias = hetero_bias_half_width(ctx.eigen, hyper, cfg.m, cfg.n);
      }
      for (int k = 0; k < cfg.d; ++k) {
        const auto& dc = dcs[static_cast<std::size_t>(k)];
        const double half =
            bias + z * sigma_hat / std::sqrt(static_cast<double>(cfg.n)) *
                       std::sqrt(std::max(dc.plug_in_var, 0.0) + privacy_addend);
        IntervalEstimate iv;
        iv.k = k;
        iv.lower = dc.beta_u - half;
        iv.upper = dc.beta_u + half;
        iv.level = 1.0 - cfg.alpha;
        iv.kind = IntervalKind::kHetero;
        tally_interval(r, iv, beta_i[k], beta_i[k] != 0.0);
      }
    }
    r.err = err_sum / cfg.m;
  }
  maybe_dump_log(cfg, run, rep);
  return r;
}

RepResult run_rep_simultaneous(const ScenarioConfig& cfg, int rep) {
  RepContext ctx = make_rep_context(cfg, rep);
  FederatedRun& run = ctx.run;
  const HyperParams& hyper = ctx.hyper;
  const double mn = static_cast<double>(cfg.m) * cfg.n;

  const RegressionEstimate reg = fed_sparse_regression(run, hyper);
  const Eigen::MatrixXd theta = precision_stack(run, hyper);
  const double sigma_hat = resolve_sigma_hat(
      run, std::vector<Eigen::VectorXd>(static_cast<std::size_t>(cfg.m), reg.beta_hat), hyper);
  const std::vector<DebiasedCoordinate> dcs = debias_all(run, reg.beta_hat, theta, hyper);
  const Eigen::VectorXd& beta = ctx.model.beta_per_machine.front();
  const std::vector<int> G = group_for(cfg.g_mode, beta);

  // The band at nominal level 1 - alpha uses the (1 - alpha)-quantile of
  // the bootstrap maxima.
  const BootstrapQuantile boot =
      bootstrap_simultaneous(run, theta, hyper, G, cfg.bootstrap_q, 1.0 - cfg.alpha);
  const std::vector<IntervalEstimate> band =
      simultaneous_band(dcs, G, boot.c_u, sigma_hat, mn, 1.0 - cfg.alpha);

  RepResult r;
  r.err = (reg.beta_hat - beta).squaredNorm();
  bool all = true;
  for (const auto& iv : band) {
    const double truth = beta[iv.k];
    const bool hit = iv.contains(truth);
    all = all && hit;
    tally_interval(r, iv, truth, truth != 0.0);
  }
  r.all_covered = all ? 1.0 : 0.0;
  maybe_dump_log(cfg, run, rep);
  return r;
}

template <typename RepFn>
std::vector<RepResult> replicate(const ScenarioConfig& cfg, const RepFn& fn) {
  const int reps = cfg.replications;
  if (reps < 1) throw std::invalid_argument("replications must be >= 1");
  std::vector<RepResult> results(static_cast<std::size_t>(reps));
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = cfg.threads > 0 ? cfg.threads : static_cast<int>(hw);
  std::atomic<int> next{0};
  std::mutex fault_mutex;
  std::optional<std::string> fault;

  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= reps) return;
      try {
        results[static_cast<std::size_t>(i)] = fn(cfg, i);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(fault_mutex);
        if (!fault) fault = "replication " + std::to_string(i) + ": " + e.what();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  for (int w = 1; w < std::min(workers, reps); ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (fault) throw std::runtime_error(*fault);
  return results;
}

ResultRow aggregate_rows(const ScenarioConfig& cfg, const std::vector<RepResult>& reps,
                         bool simultaneous) {
  ResultRow row;
  row.n = cfg.n;
  row.m = cfg.m;
  row.d = cfg.d;
  row.s_star = cfg.s_star;
  row.s0 = cfg.s0;
  row.epsilon = cfg.epsilon;

  const double count = static_cast<double>(reps.size());
  double err_sum = 0.0;
  for (const auto& r : reps) err_sum += r.err;
  row.est_error_mean = err_sum / count;
  double sq = 0.0;
  for (const auto& r : reps) {
    const double dlt = r.err - row.est_error_mean;
    sq += dlt * dlt;
  }
  row.est_error_sd = reps.size() > 1 ? std::sqrt(sq / (count - 1.0)) : 0.0;

  double s_hits = 0.0, s_total = 0.0, sc_hits = 0.0, sc_total = 0.0;
  double len_sum = 0.0, len_count = 0.0;
  bool any_intervals = false;
  for (const auto& r : reps) {
    s_hits += r.s_hits;
    s_total += r.s_total;
    sc_hits += r.sc_hits;
    sc_total += r.sc_total;
    len_sum += r.length_sum;
    len_count += r.length_count;
    any_intervals = any_intervals || r.has_intervals;
  }
  if (any_intervals) {
    if (simultaneous) {
      double all = 0.0;
      for (const auto& r : reps) all += r.all_covered;
      const double joint = all / count;
      switch (cfg.g_mode) {
        case GMode::kAll: row.cov = joint; break;
        case GMode::kS: row.cov_S = joint; break;
        case GMode::kSc: row.cov_Sc = joint; break;
      }
    } else {
      row.cov_S = s_total > 0.0 ? s_hits / s_total : std::numeric_limits<double>::quiet_NaN();
      row.cov_Sc = sc_total > 0.0 ? sc_hits / sc_total : std::numeric_limits<double>::quiet_NaN();
      // Pooled over all coordinates; equals the support-size weighted mix
      // (|S| cov_S + |S^c| cov_Sc) / d.
      row.cov = (s_hits + sc_hits) / (s_total + sc_total);
    }
    row.ci_length_mean = len_count > 0.0 ? len_sum / len_count : 0.0;
  }
  return row;
}

}  // namespace

double ScenarioConfig::resolved_delta() const {
  if (delta > 0.0) return delta;
  return 1.0 / (2.0 * static_cast<double>(m) * n);
}

ResultRow run_scenario(const ScenarioConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const auto reps = replicate(cfg, [](const ScenarioConfig& c, int i) {
    return run_rep_coordinatewise(c, i);
  });
  ResultRow row = aggregate_rows(cfg, reps, /*simultaneous=*/false);
  row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

ResultRow run_simultaneous_scenario(const ScenarioConfig& cfg) {
  if (cfg.mode == RunMode::kUntrusted) {
    throw std::invalid_argument("simultaneous bands are undefined for the untrusted mode");
  }
  const auto start = std::chrono::steady_clock::now();
  const auto reps = replicate(cfg, [](const ScenarioConfig& c, int i) {
    return run_rep_simultaneous(c, i);
  });
  ResultRow row = aggregate_rows(cfg, reps, /*simultaneous=*/true);
  row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

namespace {

void write_number(std::ostream& os, double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  os << ss.str();
}

}  // namespace

std::string ResultRow::csv_row(bool include_wall_time) const {
  std::ostringstream os;
  os << n << ',' << m << ',' << d << ',' << s_star << ',' << s0 << ',';
  write_number(os, epsilon);
  os << ',';
  write_number(os, est_error_mean);
  os << ',';
  write_number(os, est_error_sd);
  os << ',';
  write_number(os, cov);
  os << ',';
  write_number(os, cov_S);
  os << ',';
  write_number(os, cov_Sc);
  os << ',';
  write_number(os, ci_length_mean);
  os << ',';
  write_number(os, include_wall_time ? wall_time_s : 0.0);
  return os.str();
}

void emit(const std::vector<ResultRow>& rows, EmitFormat format, std::ostream& os) {
  static const char* kColumns[] = {"n", "m", "d", "s_star", "s0", "epsilon",
                                   "est_error_mean", "est_error_sd", "cov", "cov_S",
                                   "cov_Sc", "ci_length", "wall_time_s"};
  if (format == EmitFormat::kCsv) {
    for (std::size_t c = 0; c < std::size(kColumns); ++c) {
      os << (c ? "," : "") << kColumns[c];
    }
    os << "\n";
    for (const auto& row : rows) os << row.csv_row() << "\n";
    return;
  }
  os << "|";
  for (const char* c : kColumns) os << ' ' << c << " |";
  os << "\n|";
  for (std::size_t c = 0; c < std::size(kColumns); ++c) os << "---|";
  os << "\n";
  for (const auto& row : rows) {
    os << "| " << row.n << " | " << row.m << " | " << row.d << " | " << row.s_star << " | "
       << row.s0 << " | " << row.epsilon << " | ";
    os.precision(4);
    os << row.est_error_mean << " | " << row.est_error_sd << " | " << row.cov << " | "
       << row.cov_S << " | " << row.cov_Sc << " | " << row.ci_length_mean << " | "
       << row.wall_time_s << " |\n";
  }
}

void emit_to_file(const std::vector<ResultRow>& rows, EmitFormat format,
                  const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("emit: cannot open " + path);
  emit(rows, format, os);
  if (!os.good()) throw std::runtime_error("emit: write failed for " + path);
}

std::vector<ResultRow> parse_results_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("parse_results_csv: empty input");
  std::vector<ResultRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 13) throw std::invalid_argument("parse_results_csv: bad row");
    ResultRow row;
    row.n = std::stoi(fields[0]);
    row.m = std::stoi(fields[1]);
    row.d = std::stoi(fields[2]);
    row.s_star = std::stoi(fields[3]);
    row.s0 = std::stoi(fields[4]);
    row.epsilon = std::stod(fields[5]);
    row.est_error_mean = std::stod(fields[6]);
    row.est_error_sd = std::stod(fields[7]);
    row.cov = std::stod(fields[8]);
    row.cov_S = std::stod(fields[9]);
    row.cov_Sc = std::stod(fields[10]);
    row.ci_length_mean = std::stod(fields[11]);
    row.wall_time_s = std::stod(fields[12]);
    rows.push_back(row);
  }
  return rows;
}

namespace {

json config_to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["n"] = c.n;
  j["m"] = c.m;
  j["d"] = c.d;
  j["s_star"] = c.s_star;
  j["s0"] = c.s0;
  j["epsilon"] = c.epsilon;
  if (c.delta > 0.0) j["delta"] = c.delta;
  j["sigma"] = c.sigma;
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["alpha"] = c.alpha;
  j["G_mode"] = g_mode_name(c.g_mode);
  j["mode"] = mode_name(c.mode);
  j["simultaneous"] = c.simultaneous;
  j["bootstrap_q"] = c.bootstrap_q;
  j["eigen_probes"] = c.eigen_probes;
  j["ci_form"] = c.ci_form == CiForm::kSimple ? "simple" : "general";
  j["noise_enabled"] = c.noise_enabled;
  if (c.eta_override > 0.0) j["eta"] = c.eta_override;
  if (c.t_override > 0) j["T"] = c.t_override;
  if (c.r_override > 0.0) j["R"] = c.r_override;
  j["sparsity_factor"] = c.sparsity_factor;
  j["k_sub"] = c.k_sub;
  if (c.threads > 0) j["threads"] = c.threads;
  if (!c.log_dir.empty()) j["log_dir"] = c.log_dir;
  return j;
}

ScenarioConfig config_from_json(const json& j) {
  ScenarioConfig c;
  c.name = j.value("name", c.name);
  c.n = j.value("n", c.n);
  c.m = j.value("m", c.m);
  c.d = j.value("d", c.d);
  c.s_star = j.value("s_star", c.s_star);
  c.s0 = j.value("s0", c.s0);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.delta = j.value("delta", c.delta);
  c.sigma = j.value("sigma", c.sigma);
  c.replications = j.value("replications", c.replications);
  c.seed = j.value("seed", c.seed);
  c.alpha = j.value("alpha", c.alpha);
  if (j.contains("G_mode")) c.g_mode = g_mode_from(j["G_mode"].get<std::string>());
  if (j.contains("mode")) c.mode = mode_from(j["mode"].get<std::string>());
  c.simultaneous = j.value("simultaneous", c.simultaneous);
  c.bootstrap_q = j.value("bootstrap_q", c.bootstrap_q);
  c.eigen_probes = j.value("eigen_probes", c.eigen_probes);
  if (j.contains("ci_form")) {
    const auto form = j["ci_form"].get<std::string>();
    if (form == "simple") {
      c.ci_form = CiForm::kSimple;
    } else if (form == "general") {
      c.ci_form = CiForm::kGeneral;
    } else {
      throw std::invalid_argument("unknown ci_form: " + form);
    }
  }
  c.noise_enabled = j.value("noise_enabled", c.noise_enabled);
  c.eta_override = j.value("eta", c.eta_override);
  c.t_override = j.value("T", c.t_override);
  c.r_override = j.value("R", c.r_override);
  c.sparsity_factor = j.value("sparsity_factor", c.sparsity_factor);
  c.k_sub = j.value("k_sub", c.k_sub);
  c.threads = j.value("threads", c.threads);
  c.log_dir = j.value("log_dir", c.log_dir);
  return c;
}

}  // namespace

std::string ScenarioConfig::to_json() const { return config_to_json(*this).dump(2); }

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
  return config_from_json(json::parse(text));
}

std::vector<ScenarioConfig> default_scenarios(bool full) {
  struct Tuple {
    int n, m, d, s_star, s0;
    double eps;
  };
  static const Tuple kTuples[] = {
      {3000, 15, 800, 15, 8, 0.8}, {4000, 15, 800, 15, 8, 0.8}, {5000, 15, 800, 15, 8, 0.8},
      {4000, 10, 800, 15, 8, 0.8}, {4000, 20, 800, 15, 8, 0.8}, {4000, 15, 600, 15, 8, 0.8},
      {4000, 15, 1000, 15, 8, 0.8}, {4000, 15, 800, 15, 4, 0.8}, {4000, 15, 800, 15, 12, 0.8},
      {4000, 15, 800, 10, 8, 0.8}, {4000, 15, 800, 20, 8, 0.8}, {4000, 15, 800, 15, 8, 0.5},
      {4000, 15, 800, 15, 8, 0.3},
  };
  std::vector<ScenarioConfig> out;
  int index = 0;
  for (const auto& t : kTuples) {
    ++index;
    ScenarioConfig c;
    c.mode = RunMode::kHeterogeneous;
    c.replications = 50;
    if (full) {
      c.n = t.n;
      c.m = t.m;
      c.d = t.d;
    } else {
      // Desk-scale mirror: n / 8, m / 3, d / 8.
      c.n = t.n / 8;
      c.m = std::max(2, t.m / 3);
      c.d = t.d / 8;
    }
    c.s_star = t.s_star;
    c.s0 = std::min(t.s0, t.s_star);
    c.epsilon = t.eps;
    std::ostringstream name;
    name << (full ? "paper" : "desk") << "-row" << (index < 10 ? "0" : "") << index;
    c.name = name.str();
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<ScenarioConfig> load_scenarios(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config: " + path);
  json j = json::parse(is);
  std::vector<ScenarioConfig> out;
  if (j.is_object() && j.contains("scenarios")) {
    for (const auto& item : j["scenarios"]) out.push_back(config_from_json(item));
  } else if (j.is_array()) {
    for (const auto& item : j) out.push_back(config_from_json(item));
  } else {
    out.push_back(config_from_json(j));
  }
  return out;
}

}  // namespace fedspar
