#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "optcon/graph.hpp"

namespace optcon {

struct SwitchInterval {
  double start = 0.0;
  WeightedDigraph graph;
};

/// One activation of a schedule entry: graph `index` is active on [start, end).
struct Activation {
  double start = 0.0;
  double end = 0.0;
  std::size_t index = 0;
};

/// Piecewise-constant graph schedule sigma(t).
///
/// A finite signal covers [origin, end) and its last graph stays active up to
/// `end`. A periodic signal repeats its intervals with period P for every
/// t >= origin. Consecutive switching instants are at least `dwell` apart
/// (including the wrap-around gap of a periodic signal) and all graphs share
/// one node set.
class SwitchingSignal {
 public:
  static SwitchingSignal finite(std::vector<SwitchInterval> intervals,
                                double dwell, double end);
  static SwitchingSignal periodic(std::vector<SwitchInterval> intervals,
                                  double dwell, double period);
  /// A single graph held over [origin, end).
  static SwitchingSignal constant(WeightedDigraph graph, double origin = 0.0,
                                  double end = std::numeric_limits<double>::infinity());

  std::size_t node_count() const noexcept { return intervals_.front().graph.size(); }
  const std::vector<SwitchInterval>& intervals() const noexcept { return intervals_; }
  double dwell() const noexcept { return dwell_; }
  double origin() const noexcept { return intervals_.front().start; }
  bool is_periodic() const noexcept { return period_ > 0.0; }
  double period() const noexcept { return period_; }
  /// End of the horizon; +inf for periodic signals.
  double horizon_end() const noexcept;

  /// Graph active at time t (right-continuous).
  const WeightedDigraph& graph_at(double t) const;

  /// Activations overlapping [t1, t2), in chronological order, clipped to
  /// the query window.
  std::vector<Activation> activations(double t1, double t2) const;

  /// Switching instants strictly inside (t1, t2).
  std::vector<double> switch_times(double t1, double t2) const;

 private:
  SwitchingSignal(std::vector<SwitchInterval> intervals, double dwell,
                  double end, double period);

  std::vector<SwitchInterval> intervals_;
  double dwell_;
  double end_;
  double period_;
};

/// Union graph over [t1, t2). A repeated arc keeps the weight of its latest
/// activation. Throws RangeError if [t1, t2) leaves the horizon.
WeightedDigraph joint_graph(const SwitchingSignal& sig, double t1, double t2);

/// Uniform joint strong connectivity with window T: every window [t, t+T)
/// has a strongly connected union graph.
bool check_ujsc(const SwitchingSignal& sig, double window);

/// Same as check_ujsc with "has a spanning tree" in place of strong
/// connectivity (uniform joint quasi-strong connectivity).
bool check_ujqsc(const SwitchingSignal& sig, double window);

}  // namespace optcon
