#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "optcon/dynamics.hpp"

namespace optcon {

/// Thresholds used by the verification suites. Defaults follow the
/// acceptance tolerances of the shipped scenarios.
struct Tolerances {
  double diameter = 1e-4;
  double residual = 1e-4;
  double gap = 1e-6;
  double lyapunov_spread = 1e-3;
  double reconstruction = 1e-3;
  double stationary_match = 1e-6;
  double robust_diameter = 1e-3;
  double cube = 1e-9;
};

struct AnalysisConfig {
  std::optional<Vector> z_star;
  std::vector<double> k_grid;
  /// Relative slack for the forward-difference monotonicity test.
  double slack = 1e-6;
  std::optional<double> ujsc_window;
  /// Margin of the invariant cube around the convex hull of the minimizers.
  double eta = 0.5;
  std::size_t seed_count = 1;
  /// Metric columns appended to the trace CSV: "lyapunov", "gap", "residual".
  std::vector<std::string> trace_metrics;
  Tolerances tol;
};

struct RandomBox {
  double lower = -5.0;
  double upper = 5.0;
};

/// Explicit stacked state, or uniform per coordinate in a box.
using InitialState = std::variant<Vector, RandomBox>;

struct ScenarioConfig {
  std::string name;
  Eigen::Index m = 0;
  std::size_t nodes = 0;
  std::vector<ConvexComponent> objectives;
  std::optional<Topology> topology;
  ControlLaw law = JStar{};
  double h = 0.01;
  double t0 = 0.0;
  double tf = 10.0;
  AnalysisConfig analysis;
  std::uint64_t seed = 0;
  InitialState x0 = RandomBox{};
  /// w_i(t) = exp(-t) v_i when present.
  std::optional<std::vector<Vector>> disturbance;
  /// Canonical serialization of the source document.
  std::string canonical;

  ObjectiveSet objective_set() const { return ObjectiveSet(m, objectives); }
  Vector initial_state(std::uint64_t seed_value) const;
  Scenario scenario(std::uint64_t seed_value) const;
  /// 16-hex-digit FNV-1a hash of the canonical document.
  std::string fingerprint() const;
};

/// Parses and validates a JSON scenario document. Throws ConfigError with a
/// field path (or line/column for syntax errors).
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

std::string fnv1a_hex(std::string_view data);

}  // namespace optcon
