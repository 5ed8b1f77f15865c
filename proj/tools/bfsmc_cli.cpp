#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "bfsmc/analysis.hpp"
#include "bfsmc/errors.hpp"
#include "bfsmc/scenario_io.hpp"

namespace {

using namespace bfsmc;

struct RunArgs {
  std::string scenario;
  bool strict = false;
  std::string out;
  int decimate = 0;
  std::optional<std::uint64_t> seed;
  std::optional<double> h;
  std::optional<double> horizon;
  std::vector<std::string> set;
};

Overrides collect_overrides(const RunArgs& a) {
  Overrides ov;
  for (const std::string& kv : a.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + kv + "'");
    ov.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  auto num = [](double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
  };
  if (a.seed) ov.emplace_back("sim.seed", std::to_string(*a.seed));
  if (a.h) ov.emplace_back("sim.h", num(*a.h));
  if (a.horizon) ov.emplace_back("sim.horizon", num(*a.horizon));
  return ov;
}

int cmd_run(const RunArgs& a) {
  Scenario sc = parse_scenario(a.scenario, collect_overrides(a));
  if (a.decimate > 0) sc.output.decimation = a.decimate;
  const Trajectory tr = run(sc);
  std::string out = !a.out.empty() ? a.out : !sc.output.csv.empty() ? sc.output.csv : sc.name + ".csv";
  write_csv(tr, out, sc.output.decimation);
  const AnalysisReport rep = analyze(tr);
  std::cout << "scenario          " << sc.name << '\n' << "csv               " << out << '\n'
            << rep.to_text();
  return a.strict && !rep.containment() ? 2 : 0;
}

struct PairArgs {
  int r = 3;
  double p = 1.0;
  std::string kappa = "-1/6";
  std::vector<double> gains;
  bool tune = false;
  double growth = 2.0;
  int samples = 10000;
  std::uint64_t seed = 1;
};

int cmd_validate_pair(const PairArgs& a) {
  const auto params = make_params(a.r, a.p, parse_real(a.kappa));
  Eigen::VectorXd gains;
  if (a.tune || a.gains.empty()) {
    gains = tune_gains(params, Eigen::VectorXd::Ones(a.r), a.growth, TuneOptions{2000, a.seed, 60});
  } else {
    if (static_cast<int>(a.gains.size()) != a.r) throw ConfigError("--gains expects r values");
    gains = Eigen::Map<const Eigen::VectorXd>(a.gains.data(), a.r);
  }
  const FeedbackPair pair = make_hong_pair(params, gains);
  const ValidationReport report = validate_pair(pair, a.samples, a.seed);
  std::cout << "gains " << gains.transpose() << '\n' << report.to_text();
  return report.passed() ? 0 : 1;
}

struct SweepArgs {
  std::string scenario;
  std::string key;
  std::vector<std::string> values;
  std::string out_dir = "sweep";
  bool strict = false;
};

int cmd_sweep(const SweepArgs& a) {
  std::vector<Scenario> scenarios;
  for (const std::string& v : a.values) {
    Scenario sc = parse_scenario(a.scenario, {{a.key, v}});
    sc.name += "_" + a.key + "=" + v;
    scenarios.push_back(std::move(sc));
  }
  unsigned threads = 0;
  if (const char* env = std::getenv("BFSMC_THREADS")) threads = static_cast<unsigned>(std::max(1, std::atoi(env)));
  const auto results = run_batch(scenarios, threads);
  std::filesystem::create_directories(a.out_dir);
  int status = 0;
  std::cout << std::left << std::setw(16) << "value" << std::setw(14) << "t_bar" << std::setw(16)
            << "max(V-bound)" << std::setw(13) << "containment" << "final_V\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::cout << std::setw(16) << a.values[i];
    if (!results[i].trajectory) {
      std::cout << "error: " << results[i].error << '\n';
      status = 1;
      continue;
    }
    const Trajectory& tr = *results[i].trajectory;
    const auto path = (std::filesystem::path(a.out_dir) / (scenarios[i].name + ".csv")).string();
    write_csv(tr, path, scenarios[i].output.decimation);
    const AnalysisReport rep = analyze(tr);
    std::cout << std::setw(14) << (rep.t_bar ? std::to_string(*rep.t_bar) : "n/a") << std::setw(16)
              << (rep.max_excess ? std::to_string(*rep.max_excess) : "n/a") << std::setw(13)
              << (rep.containment() ? "pass" : "fail") << rep.final_V << '\n';
    if (a.strict && !rep.containment() && status == 0) status = 2;
  }
  return status;
}

int cmd_report(const std::string& csv) {
  std::cout << analyze(read_csv(csv)).to_text();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Barrier-function adaptive sliding-mode controllers for perturbed integrator chains"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "simulate a scenario, write its CSV trace and print the analysis");
  run_cmd->set_help_flag("--help", "print this help message and exit");
  run_cmd->add_option("scenario", run_args.scenario, "scenario file or bundled name")->required();
  run_cmd->add_flag("--strict", run_args.strict, "exit 2 if containment fails");
  run_cmd->add_option("--out", run_args.out, "CSV output path");
  run_cmd->add_option("--decimate", run_args.decimate, "write every n-th row")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run_args.seed, "sampling seed");
  run_cmd->add_option("--h", run_args.h, "integration step")->check(CLI::PositiveNumber);
  run_cmd->add_option("--horizon", run_args.horizon, "final time")->check(CLI::PositiveNumber);
  run_cmd->add_option("--set", run_args.set, "override section.key=value");

  PairArgs pair_args;
  auto* pair_cmd = app.add_subcommand("validate-pair", "build and check a homogeneous feedback pair");
  pair_cmd->add_option("--r", pair_args.r, "chain length")->required();
  pair_cmd->add_option("--p", pair_args.p, "first homogeneity weight");
  pair_cmd->add_option("--kappa", pair_args.kappa, "homogeneity degree (real or a/b)");
  auto* gains_opt = pair_cmd->add_option("--gains", pair_args.gains, "gains l_1..l_r");
  pair_cmd->add_flag("--tune", pair_args.tune, "tune gains from ones")->excludes(gains_opt);
  pair_cmd->add_option("--growth", pair_args.growth, "tuning growth factor");
  pair_cmd->add_option("--samples", pair_args.samples, "level-set samples");
  pair_cmd->add_option("--seed", pair_args.seed, "sampling seed");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "run one scenario over a grid of values of one key");
  sweep_cmd->add_option("scenario", sweep_args.scenario, "scenario file or bundled name")->required();
  sweep_cmd->add_option("--key", sweep_args.key, "section.key to vary")->required();
  sweep_cmd->add_option("--values", sweep_args.values, "values")->required()->delimiter(',');
  sweep_cmd->add_option("--out-dir", sweep_args.out_dir, "directory for the CSV traces");
  sweep_cmd->add_flag("--strict", sweep_args.strict, "exit 2 if any cell fails containment");

  std::string report_csv;
  auto* report_cmd = app.add_subcommand("report", "re-analyze a CSV trace");
  report_cmd->add_option("csv", report_csv, "CSV trace")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return cmd_run(run_args);
    if (*pair_cmd) return cmd_validate_pair(pair_args);
    if (*sweep_cmd) return cmd_sweep(sweep_args);
    if (*report_cmd) return cmd_report(report_csv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
