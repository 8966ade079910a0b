// optcon: simulate and verify distributed optimal-consensus scenarios.
//
//   optcon sim --config s.json --out-dir out
//   optcon verify --suite verify-thm1 --config s.json
//   optcon sweep-k --config s.json --k-grid 1,10,100
//   optcon check-graph --config s.json --window 1
//   optcon oracle --config s.json --k-grid 1,10

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "optcon/errors.hpp"
#include "optcon/harness.hpp"
#include "optcon/trace_io.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> h;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->set_help_flag("--help", "print help");
  cmd->add_option("--config", f.config, "scenario JSON file")->required();
  cmd->add_option("--out-dir", f.out_dir, "directory for traces and reports");
  cmd->add_option("--seed", f.seed, "override the scenario seed");
  cmd->add_option("--h", f.h, "override the integrator step");
  cmd->add_flag("--quiet", f.quiet, "print only the verdict");
}

optcon::RunOptions options_of(const CommonFlags& f) {
  optcon::RunOptions opts;
  if (!f.out_dir.empty()) {
    opts.out_dir = f.out_dir;
  }
  opts.seed = f.seed;
  opts.h = f.h;
  opts.quiet = f.quiet;
  return opts;
}

int report_and_exit(const optcon::RunReport& report, bool quiet) {
  if (quiet) {
    std::cout << report.suite << ' ' << (report.passed() ? "PASS" : "FAIL") << '\n';
  } else {
    std::cout << report.to_json() << '\n';
  }
  return static_cast<int>(report.exit_code());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed optimal-consensus simulator"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);

  CommonFlags flags;
  std::string suite;
  std::vector<double> k_grid;
  std::optional<double> window;

  auto* sim = app.add_subcommand("sim", "integrate a scenario and write traces");
  add_common(sim, flags);

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  add_common(verify, flags);
  verify->add_option("--suite", suite, "simulate|verify-thm1|verify-thm2|verify-thm34|audit")
      ->required();

  auto* sweep = app.add_subcommand("sweep-k", "gain sweep table (CSV on stdout)");
  add_common(sweep, flags);
  sweep->add_option("--k-grid", k_grid, "gains; defaults to analysis.k_grid")->delimiter(',');

  auto* graph = app.add_subcommand("check-graph", "connectivity report");
  add_common(graph, flags);
  graph->add_option("--window", window, "joint-connectivity window T");

  auto* oracle = app.add_subcommand("oracle", "global minimum and stationary solves");
  add_common(oracle, flags);
  oracle->add_option("--k-grid", k_grid, "gains; defaults to analysis.k_grid")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(optcon::ExitCode::kConfigError);
  }

  try {
    const optcon::ScenarioConfig cfg = optcon::load_config(flags.config);
    const optcon::RunOptions opts = options_of(flags);
    if (*sim) {
      return report_and_exit(optcon::run(cfg, optcon::Suite::kSimulate, opts), flags.quiet);
    }
    if (*verify) {
      return report_and_exit(optcon::run(cfg, optcon::parse_suite(suite), opts), flags.quiet);
    }
    if (k_grid.empty()) {
      k_grid = cfg.analysis.k_grid;
    }
    if (*sweep) {
      const auto rows = optcon::sweep_k(cfg, k_grid, opts);
      std::cout << "K,terminal_diameter,oracle_diameter,optimality_gap,bound_margin\n";
      for (const auto& r : rows) {
        std::cout << optcon::format_double(r.gain) << ','
                  << (r.simulated ? optcon::format_double(r.terminal_diameter) : "") << ','
                  << (r.oracle ? optcon::format_double(r.oracle_diameter) : "") << ','
                  << (r.simulated ? optcon::format_double(r.optimality_gap) : "") << ','
                  << (r.gain > 0.0 ? optcon::format_double(r.bound_margin) : "") << '\n';
      }
      return 0;
    }
    if (*graph) {
      std::cout << optcon::check_graph_json(cfg, window) << '\n';
      return 0;
    }
    std::cout << optcon::oracle_json(cfg, k_grid) << '\n';
    return 0;
  } catch (const optcon::NumericalDivergence& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return static_cast<int>(optcon::ExitCode::kNumericalFailure);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return static_cast<int>(optcon::ExitCode::kConfigError);
  }
}
