#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "fedspar/fednet.hpp"
#include "fedspar/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int run_command(const std::string& config_path, bool full, const std::string& out_path,
                const std::string& format, std::uint64_t seed, bool seed_set,
                const std::string& log_dir, int replications) {
  std::vector<fedspar::ScenarioConfig> scenarios;
  try {
    scenarios = config_path.empty() ? fedspar::default_scenarios(full)
                                    : fedspar::load_scenarios(config_path);
    for (auto& cfg : scenarios) {
      if (seed_set) cfg.seed = seed;
      if (!log_dir.empty()) cfg.log_dir = log_dir;
      if (replications > 0) cfg.replications = replications;
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::vector<fedspar::ResultRow> rows;
  try {
    for (const auto& cfg : scenarios) {
      std::cerr << "running " << (cfg.name.empty() ? "scenario" : cfg.name) << " (n=" << cfg.n
                << ", m=" << cfg.m << ", d=" << cfg.d << ", eps=" << cfg.epsilon << ", reps="
                << cfg.replications << ")\n";
      rows.push_back(cfg.simultaneous ? fedspar::run_simultaneous_scenario(cfg)
                                      : fedspar::run_scenario(cfg));
    }
  } catch (const std::exception& e) {
    std::cerr << "runtime fault: " << e.what() << "\n";
    return kExitRuntime;
  }

  const fedspar::EmitFormat fmt =
      format == "md" ? fedspar::EmitFormat::kMarkdown : fedspar::EmitFormat::kCsv;
  try {
    if (out_path.empty()) {
      fedspar::emit(rows, fmt, std::cout);
    } else {
      fedspar::emit_to_file(rows, fmt, out_path);
      std::cerr << "wrote " << out_path << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "io fault: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int audit_command(const std::string& run_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(run_dir)) {
    std::cerr << "config error: not a directory: " << run_dir << "\n";
    return kExitConfig;
  }
  static const std::vector<std::string> kAllowedKinds = {
      "gradient", "quadratic_form", "bootstrap_vector", "scalar", "iterate", "sign_bits"};
  std::map<std::string, std::size_t> counts;
  std::size_t files = 0;
  std::size_t violations = 0;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    if (entry.path().extension() != ".jsonl") continue;
    ++files;
    std::ifstream is(entry.path());
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const std::exception&) {
        std::cerr << "malformed log line in " << entry.path() << "\n";
        ++violations;
        continue;
      }
      const std::string kind = j.value("kind", "");
      ++counts[kind];
      bool allowed = false;
      for (const auto& k : kAllowedKinds) allowed = allowed || (k == kind);
      if (!allowed) {
        std::cerr << "disallowed payload kind '" << kind << "' in " << entry.path() << "\n";
        ++violations;
      }
    }
  }
  if (files == 0) {
    std::cerr << "config error: no .jsonl message logs under " << run_dir << "\n";
    return kExitConfig;
  }
  std::cout << "message logs: " << files << "\n";
  for (const auto& [kind, count] : counts) {
    std::cout << "  " << kind << ": " << count << "\n";
  }
  if (violations > 0) {
    std::cerr << "audit failed: " << violations << " violation(s)\n";
    return kExitRuntime;
  }
  std::cout << "audit ok: no raw-sample payloads are expressible; all kinds allowed\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private federated sparse regression simulator"};
  app.require_subcommand(1);

  std::string config_path, out_path, log_dir;
  std::string format = "csv";
  bool full = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int replications = 0;

  auto* run = app.add_subcommand("run", "Execute scenarios and emit a results table");
  run->add_option("--config", config_path, "JSON scenario file (defaults to the bundled list)");
  run->add_flag("--full", full, "Use the full-scale scenario list (hours of compute)");
  run->add_option("--out", out_path, "Output path (stdout when omitted)");
  run->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "md"}));
  run->add_option("--seed", seed, "Override the base seed of every scenario")
      ->each([&seed_set](const std::string&) { seed_set = true; });
  run->add_option("--log-dir", log_dir, "Dump per-replication message logs here");
  run->add_option("--reps", replications, "Override the replication count");

  std::string run_dir;
  auto* audit = app.add_subcommand("audit-log", "Validate dumped message logs");
  audit->add_option("--run-dir", run_dir, "Directory holding .jsonl message logs")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (run->parsed()) {
    return run_command(config_path, full, out_path, format, seed, seed_set, log_dir,
                       replications);
  }
  return audit_command(run_dir);
}
