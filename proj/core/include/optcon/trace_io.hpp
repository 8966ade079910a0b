#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "optcon/dynamics.hpp"

namespace optcon {

/// Extra per-(sample, node) column appended to the trace CSV.
/// `values[k * N + i]` belongs to sample k, node i.
struct TraceColumn {
  std::string name;
  std::vector<double> values;
};

/// Writes `t,node,comp_0..comp_{m-1}[,extra...]`, one row per node per
/// sample, with round-trip exact number formatting.
void write_trace_csv(const std::filesystem::path& path, const Trajectory& traj,
                     const std::vector<TraceColumn>& extra = {});

/// Reads a trace written by write_trace_csv. Extra columns are ignored.
Trajectory read_trace_csv(const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace optcon
