#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "optcon/config.hpp"

namespace optcon {

enum class Suite { kSimulate, kVerifyThm1, kVerifyThm2, kVerifyThm34, kAudit };

Suite parse_suite(const std::string& name);
std::string suite_name(Suite s);

struct ClaimResult {
  std::string id;
  std::string paper_ref;
  bool pass = false;
  /// Threshold minus measured value; nonnegative on pass for threshold claims.
  double margin = 0.0;
  /// The measured quantity the margin was computed from.
  double value = 0.0;
  std::string detail;
};

enum class ExitCode : int {
  kPass = 0,
  kConfigError = 1,
  kNumericalFailure = 2,
  kClaimFailure = 3,
};

struct RunReport {
  std::string scenario;
  std::string fingerprint;
  std::string suite;
  std::vector<std::uint64_t> seeds;
  std::vector<ClaimResult> claims;
  std::vector<std::string> artifacts;
  bool numerical_failure = false;
  double wall_seconds = 0.0;

  bool passed() const;
  ExitCode exit_code() const;
  const ClaimResult* find(const std::string& id) const;
  /// Hash over everything except wall-clock time and artifact paths.
  std::string content_hash() const;
  std::string to_json() const;
};

struct RunOptions {
  /// Traces, sidecars, sweep tables and the report go here when set.
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> h;
  bool quiet = true;
};

/// Applies seed/h overrides from the options.
ScenarioConfig with_overrides(ScenarioConfig cfg, const RunOptions& opts);

/// Runs a suite. Suite-level precondition failures (wrong topology class,
/// missing k_grid, ...) are thrown as ConfigError.
RunReport run(const ScenarioConfig& cfg, Suite suite, const RunOptions& opts = {});

struct SweepRow {
  double gain = 0.0;
  bool simulated = false;
  double terminal_diameter = 0.0;
  double optimality_gap = 0.0;
  bool oracle = false;
  double oracle_diameter = 0.0;
  double oracle_disagreement = 0.0;
  double stationary_error = 0.0;
  double bound = 0.0;
  double bound_margin = 0.0;
};

/// Per-gain table for a fixed graph with symmetric weights. Gains of zero
/// only fill the oracle columns.
std::vector<SweepRow> sweep_k(const ScenarioConfig& cfg, const std::vector<double>& k_grid,
                              const RunOptions& opts = {});
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

/// JSON description of the graph(s): connectivity classes, lambda2 where
/// defined, and joint connectivity for a switching signal.
std::string check_graph_json(const ScenarioConfig& cfg, std::optional<double> window);

/// JSON with the global minimum of F and the stationary point for each gain.
std::string oracle_json(const ScenarioConfig& cfg, const std::vector<double>& k_grid);

}  // namespace optcon
