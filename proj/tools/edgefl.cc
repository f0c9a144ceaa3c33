// edgefl command-line front end: run | sweep | verify.
//
// Errors are reported on stderr as a single JSON line
//   {"error":"<code>","message":"<text>"}
// and the process exits nonzero.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "edgefl/config.hpp"
#include "edgefl/error.hpp"
#include "edgefl/export.hpp"
#include "edgefl/harness.hpp"
#include "edgefl/verify.hpp"

namespace fs = std::filesystem;
using namespace edgefl;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
  std::optional<std::uint64_t> rounds;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "YAML config file (see config/default.yaml)");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--policy", f.policy, "cu-ucb | as-q-only | as-fairness | sy-fairness | random");
  cmd->add_option("--rounds", f.rounds, "number of scheduling rounds");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--format", f.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
}

SimConfig resolve(const CommonFlags& f) {
  SimConfig c = f.config.empty() ? SimConfig{} : load_config(f.config);
  if (f.config.empty() && !c.objective.v_weight) c.objective.v_weight = 100.0;
  if (f.seed) c.run.seed = *f.seed;
  if (f.policy) c.run.policy = sched::parse_policy(*f.policy);
  if (f.rounds) c.run.rounds = *f.rounds;
  if (f.out) c.output.dir = *f.out;
  if (f.format) c.output.format = *f.format;
  std::vector<std::string> warnings;
  c.validate(&warnings);
  for (const std::string& w : warnings) {
    std::cerr << nlohmann::json{{"warning", w}}.dump() << "\n";
  }
  return c;
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::string cell;
  for (char ch : text) {
    if (ch == ',') {
      if (!cell.empty()) out.push_back(cell);
      cell.clear();
    } else if (ch != ' ') {
      cell += ch;
    }
  }
  if (!cell.empty()) out.push_back(cell);
  return out;
}

int cmd_run(const CommonFlags& f) {
  const SimConfig c = resolve(f);
  const MetricsLog log = run_experiment(c);
  const fs::path dir = prepare_dir(c.output.dir);
  const ExportFormat format = parse_format(c.output.format);
  const std::string stem = std::string(sched::to_string(c.run.policy)) + "_seed" + std::to_string(c.run.seed);
  const fs::path path = dir / (stem + (format == ExportFormat::kCsv ? ".csv" : ".json"));
  export_log(log, path.string(), format);
  std::cout << nlohmann::json{{"output", path.string()},
                              {"rounds", log.summary.rounds},
                              {"mean_omega", log.summary.mean_omega},
                              {"queue_sum_final", log.summary.queue_sum_final}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_sweep(const CommonFlags& f, const std::string& param, const std::string& values, const std::string& policies,
              const std::string& seeds, unsigned threads) {
  const SimConfig c = resolve(f);
  SweepSpec spec;
  spec.parameter = parse_sweep_parameter(param);
  spec.values = split(values);
  for (const std::string& p : split(policies)) spec.policies.push_back(sched::parse_policy(p));
  for (const std::string& s : split(seeds)) {
    try {
      spec.seeds.push_back(std::stoull(s));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfig, "--seeds: '" + s + "' is not an unsigned integer");
    }
  }
  spec.threads = threads;
  const std::vector<SweepRow> table = sweep(c, spec);
  const fs::path dir = prepare_dir(c.output.dir);
  const ExportFormat format = parse_format(c.output.format);
  const fs::path path = dir / ("sweep_" + param + (format == ExportFormat::kCsv ? ".csv" : ".json"));
  export_table(table, c, path.string(), format);
  std::cout << nlohmann::json{{"output", path.string()}, {"rows", table.size()}}.dump() << "\n";
  return 0;
}

int cmd_verify(const CommonFlags& f, bool full) {
  const SimConfig c = resolve(f);
  VerifyOptions opt;
  opt.seed = c.run.seed;
  if (f.rounds) opt.sim_rounds = *f.rounds;
  if (full) {
    opt.lambert_samples = 1000000;
    opt.power_instances = 10000;
    opt.power_grid = 100000;
  }
  int failures = 0;
  for (const CheckResult& r : run_verification(c, opt)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    if (!r.passed) ++failures;
  }
  if (failures) {
    std::cerr << nlohmann::json{{"error", "verification_failed"}, {"message", std::to_string(failures) + " check(s) failed"}}
                     .dump()
              << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edgefl: asynchronous federated learning scheduling simulator"};
  app.set_version_flag("--version", EDGEFL_VERSION);
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, verify_flags;
  CLI::App* run = app.add_subcommand("run", "run one experiment and export its event log");
  add_common(run, run_flags);

  CLI::App* sw = app.add_subcommand("sweep", "sweep one parameter across policies and seeds");
  add_common(sw, sweep_flags);
  std::string param, values, policies, seeds;
  unsigned threads = 0;
  sw->add_option("--param", param, "d_min | lambda_e | v_weight | gamma | policy")->required();
  sw->add_option("--values", values, "comma-separated values")->required();
  sw->add_option("--policies", policies, "comma-separated policies (default: the config's)");
  sw->add_option("--seeds", seeds, "comma-separated seeds (default: the config's)");
  sw->add_option("--threads", threads, "worker threads (0 = all cores)");

  CLI::App* ver = app.add_subcommand("verify", "run the oracle/property self-checks");
  add_common(ver, verify_flags);
  bool full = false;
  ver->add_flag("--full", full, "use the full-size sample counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << nlohmann::json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_flags);
    if (sw->parsed()) return cmd_sweep(sweep_flags, param, values, policies, seeds, threads);
    if (ver->parsed()) return cmd_verify(verify_flags, full);
  } catch (const Error& e) {
    std::cerr << nlohmann::json{{"error", to_string(e.code())}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
