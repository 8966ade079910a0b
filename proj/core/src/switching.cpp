#include "optcon/switching.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>

#include "optcon/errors.hpp"

namespace optcon {
namespace {

using GraphPredicate = std::function<bool(const WeightedDigraph&)>;

bool check_joint_property(const SwitchingSignal& sig, double window,
                          const GraphPredicate& pred) {
  if (!(window > 0.0)) {
    throw PreconditionError("window must be positive");
  }
  const double origin = sig.origin();
  std::vector<double> candidates;

  if (sig.is_periodic()) {
    const double period = sig.period();
    auto wrap = [&](double t) {
      double phase = std::fmod(t - origin, period);
      if (phase < 0.0) {
        phase += period;
      }
      return origin + phase;
    };
    for (const SwitchInterval& iv : sig.intervals()) {
      candidates.push_back(iv.start);
      candidates.push_back(wrap(iv.start - window));
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());
    const std::size_t n = candidates.size();
    for (std::size_t k = 0; k < n; ++k) {
      const double next = k + 1 < n ? candidates[k + 1] : candidates[0] + period;
      candidates.push_back(0.5 * (candidates[k] + next));
    }
  } else {
    // An unbounded finite signal holds its last graph forever, so the window
    // anchored at the last switch already covers every later placement.
    const double last_start = std::isfinite(sig.horizon_end())
                                  ? sig.horizon_end() - window
                                  : sig.intervals().back().start;
    if (last_start < origin) {
      return false;
    }
    candidates = {origin, last_start};
    for (const SwitchInterval& iv : sig.intervals()) {
      for (double t : {iv.start, iv.start - window}) {
        if (t >= origin && t <= last_start) {
          candidates.push_back(t);
        }
      }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());
    const std::size_t n = candidates.size();
    for (std::size_t k = 0; k + 1 < n; ++k) {
      candidates.push_back(0.5 * (candidates[k] + candidates[k + 1]));
    }
  }

  return std::all_of(candidates.begin(), candidates.end(), [&](double t) {
    return pred(joint_graph(sig, t, t + window));
  });
}

}  // namespace

SwitchingSignal::SwitchingSignal(std::vector<SwitchInterval> intervals,
                                 double dwell, double end, double period)
    : intervals_(std::move(intervals)), dwell_(dwell), end_(end),
      period_(period) {
  if (intervals_.empty()) {
    throw PreconditionError("switching signal needs at least one interval");
  }
  if (!(dwell_ > 0.0)) {
    throw PreconditionError("dwell time must be positive");
  }
  const std::size_t n = intervals_.front().graph.size();
  for (std::size_t k = 0; k < intervals_.size(); ++k) {
    if (intervals_[k].graph.size() != n) {
      throw PreconditionError("interval " + std::to_string(k) +
                              ": all graphs must share the same node set");
    }
    if (k > 0) {
      const double gap = intervals_[k].start - intervals_[k - 1].start;
      if (!(gap > 0.0)) {
        throw PreconditionError("interval " + std::to_string(k) +
                                ": starts must be strictly increasing");
      }
      if (gap < dwell_) {
        throw PreconditionError("interval " + std::to_string(k) +
                                ": gap between switches is below the dwell time");
      }
    }
  }
  const double last = intervals_.back().start;
  if (period_ > 0.0) {
    const double wrap_gap = origin() + period_ - last;
    if (!(wrap_gap > 0.0)) {
      throw PreconditionError("periodic signal: all starts must lie within one period");
    }
    if (wrap_gap < dwell_) {
      throw PreconditionError(
          "periodic signal: wrap-around gap is below the dwell time");
    }
  } else if (!(end_ > last)) {
    throw PreconditionError("horizon end must follow the last switching instant");
  }
}

SwitchingSignal SwitchingSignal::finite(std::vector<SwitchInterval> intervals,
                                        double dwell, double end) {
  return SwitchingSignal(std::move(intervals), dwell, end, 0.0);
}

SwitchingSignal SwitchingSignal::periodic(std::vector<SwitchInterval> intervals,
                                          double dwell, double period) {
  if (!(period > 0.0)) {
    throw PreconditionError("period must be positive");
  }
  return SwitchingSignal(std::move(intervals), dwell,
                         std::numeric_limits<double>::infinity(), period);
}

SwitchingSignal SwitchingSignal::constant(WeightedDigraph graph, double origin,
                                          double end) {
  std::vector<SwitchInterval> one;
  one.push_back({origin, std::move(graph)});
  const double span = std::isfinite(end) ? end - origin : 1.0;
  return SwitchingSignal(std::move(one), span, end, 0.0);
}

double SwitchingSignal::horizon_end() const noexcept {
  return is_periodic() ? std::numeric_limits<double>::infinity() : end_;
}

const WeightedDigraph& SwitchingSignal::graph_at(double t) const {
  if (t < origin() || t > horizon_end()) {
    throw RangeError("time " + std::to_string(t) + " outside signal horizon");
  }
  double phase = t;
  if (is_periodic()) {
    phase = origin() + std::fmod(t - origin(), period_);
  }
  auto it = std::upper_bound(
      intervals_.begin(), intervals_.end(), phase,
      [](double v, const SwitchInterval& iv) { return v < iv.start; });
  return std::prev(it)->graph;
}

std::vector<Activation> SwitchingSignal::activations(double t1, double t2) const {
  if (!(t1 < t2)) {
    throw RangeError("activation window requires t1 < t2");
  }
  if (t1 < origin() || t2 > horizon_end()) {
    throw RangeError("window [" + std::to_string(t1) + ", " +
                     std::to_string(t2) + ") outside signal horizon");
  }
  std::vector<Activation> out;
  const std::size_t k = intervals_.size();
  auto emit = [&](double a, double b, std::size_t idx) {
    if (b > t1 && a < t2) {
      out.push_back({std::max(a, t1), std::min(b, t2), idx});
    }
  };
  if (!is_periodic()) {
    for (std::size_t i = 0; i < k; ++i) {
      const double a = intervals_[i].start;
      const double b = i + 1 < k ? intervals_[i + 1].start : end_;
      emit(a, b, i);
    }
    return out;
  }
  const double o = origin();
  auto cycle = static_cast<long long>(std::floor((t1 - o) / period_));
  cycle = std::max(cycle - 1, 0LL);
  for (;; ++cycle) {
    const double base = static_cast<double>(cycle) * period_;
    if (o + base >= t2) {
      break;
    }
    for (std::size_t i = 0; i < k; ++i) {
      const double a = o + (base + (intervals_[i].start - o));
      const double b = i + 1 < k ? o + (base + (intervals_[i + 1].start - o))
                                 : o + (base + period_);
      emit(a, b, i);
    }
  }
  return out;
}

std::vector<double> SwitchingSignal::switch_times(double t1, double t2) const {
  std::vector<double> out;
  for (const Activation& act : activations(t1, t2)) {
    if (act.start > t1 && act.start < t2) {
      out.push_back(act.start);
    }
  }
  return out;
}

WeightedDigraph joint_graph(const SwitchingSignal& sig, double t1, double t2) {
  std::map<std::pair<NodeId, NodeId>, double> arcs;
  for (const Activation& act : sig.activations(t1, t2)) {
    for (const Arc& a : sig.intervals()[act.index].graph.arcs()) {
      arcs[{a.from, a.to}] = a.weight;
    }
  }
  std::vector<Arc> out;
  out.reserve(arcs.size());
  for (const auto& [key, w] : arcs) {
    out.push_back({key.first, key.second, w});
  }
  return WeightedDigraph(sig.node_count(), std::move(out));
}

bool check_ujsc(const SwitchingSignal& sig, double window) {
  return check_joint_property(sig, window, [](const WeightedDigraph& g) {
    return is_strongly_connected(g);
  });
}

bool check_ujqsc(const SwitchingSignal& sig, double window) {
  return check_joint_property(sig, window, [](const WeightedDigraph& g) {
    return has_spanning_tree(g);
  });
}

}  // namespace optcon
