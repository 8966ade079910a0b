#include "optcon/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "optcon/errors.hpp"

namespace optcon {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct Segment {
  double start;
  double end;
  const WeightedDigraph* graph;
};

std::vector<Segment> segments_of(const Scenario& s) {
  std::vector<Segment> out;
  if (const auto* g = std::get_if<WeightedDigraph>(&s.topology)) {
    out.push_back({s.t0, s.tf, g});
    return out;
  }
  const auto& sig = std::get<SwitchingSignal>(s.topology);
  for (const Activation& act : sig.activations(s.t0, s.tf)) {
    out.push_back({act.start, act.end, &sig.intervals()[act.index].graph});
  }
  return out;
}

void check_state(const Vector& x, double t) {
  if (!x.allFinite()) {
    std::ostringstream os;
    os << "non-finite state at t=" << t;
    throw NumericalDivergence(t, os.str());
  }
  if (x.size() > 0 && x.cwiseAbs().maxCoeff() > kDivergenceBound) {
    std::ostringstream os;
    os << "state exceeded " << kDivergenceBound << " at t=" << t;
    throw NumericalDivergence(t, os.str());
  }
}

}  // namespace

Vector control(const ControlLaw& law, const Vector& n, const Vector& g) {
  if (n.size() != g.size()) {
    throw DimensionError("control: n and g differ in dimension");
  }
  return std::visit(Overloaded{
                        [&](const JStar&) -> Vector { return n - g; },
                        [&](const JK& k) -> Vector { return k.gain * n - g; },
                        [&](const CustomLaw& c) -> Vector { return c.fn(n, g); },
                    },
                    law);
}

std::string law_name(const ControlLaw& law) {
  return std::visit(Overloaded{
                        [](const JStar&) { return std::string("jstar"); },
                        [](const JK& k) {
                          std::ostringstream os;
                          os << "jk(K=" << k.gain << ")";
                          return os.str();
                        },
                        [](const CustomLaw& c) { return "custom:" + c.name; },
                    },
                    law);
}

const WeightedDigraph& graph_at(const Topology& topo, double t) {
  if (const auto* g = std::get_if<WeightedDigraph>(&topo)) {
    return *g;
  }
  return std::get<SwitchingSignal>(topo).graph_at(t);
}

std::size_t topology_nodes(const Topology& topo) {
  if (const auto* g = std::get_if<WeightedDigraph>(&topo)) {
    return g->size();
  }
  return std::get<SwitchingSignal>(topo).node_count();
}

void Scenario::validate() const {
  const auto n = static_cast<Eigen::Index>(nodes());
  if (topology_nodes(topology) != nodes()) {
    throw DimensionError("topology has " + std::to_string(topology_nodes(topology)) +
                         " nodes but there are " + std::to_string(nodes()) +
                         " objective components");
  }
  if (x0.size() != n * dim()) {
    throw DimensionError("x0 must have N*m = " + std::to_string(n * dim()) +
                         " entries");
  }
  if (!x0.allFinite()) {
    throw PreconditionError("x0 must be finite");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw PreconditionError("step h must be positive");
  }
  if (!(tf > t0)) {
    throw PreconditionError("tf must exceed t0");
  }
  if (const auto* k = std::get_if<JK>(&law); k && !(k->gain >= 0.0)) {
    throw PreconditionError("gain K must be nonnegative");
  }
  if (const auto* c = std::get_if<CustomLaw>(&law); c && !c->fn) {
    throw PreconditionError("custom law has no function");
  }
  if (const auto* sig = std::get_if<SwitchingSignal>(&topology)) {
    if (t0 < sig->origin() || tf > sig->horizon_end()) {
      throw RangeError("[t0, tf] is not covered by the switching signal");
    }
  }
}

std::vector<Vector> neighbor_info(const WeightedDigraph& g, const Vector& x,
                                  Eigen::Index m) {
  const auto n = static_cast<Eigen::Index>(g.size());
  if (x.size() != n * m) {
    throw DimensionError("neighbor_info: state has wrong dimension");
  }
  std::vector<Vector> out(g.size(), Vector::Zero(m));
  for (const Arc& a : g.arcs()) {
    const auto i = static_cast<Eigen::Index>(a.to);
    const auto j = static_cast<Eigen::Index>(a.from);
    out[a.to] += a.weight * (x.segment(j * m, m) - x.segment(i * m, m));
  }
  return out;
}

Vector rhs_on_graph(const Scenario& s, const WeightedDigraph& g, double t,
                    const Vector& x) {
  const Eigen::Index m = s.dim();
  const auto info = neighbor_info(g, x, m);
  Vector out(x.size());
  for (std::size_t i = 0; i < s.nodes(); ++i) {
    const Eigen::Index off = static_cast<Eigen::Index>(i) * m;
    const Vector xi = x.segment(off, m);
    Vector u = control(s.law, info[i], grad(s.objectives[i], xi));
    if (s.disturbance) {
      u += s.disturbance(i, t);
    }
    out.segment(off, m) = u;
  }
  return out;
}

Vector rhs(const Scenario& s, double t, const Vector& x) {
  if (t < s.t0 || t > s.tf) {
    std::ostringstream os;
    os << "rhs: t=" << t << " outside [" << s.t0 << ", " << s.tf << "]";
    throw RangeError(os.str());
  }
  return rhs_on_graph(s, graph_at(s.topology, t), t, x);
}

double penalized_objective(const ObjectiveSet& obj, const WeightedDigraph& g,
                           double gain, const Vector& x) {
  const Eigen::Index m = obj.dim();
  double coupling = 0.0;
  // Every unordered edge appears as two arcs with equal weight.
  for (const Arc& a : g.arcs()) {
    const auto i = static_cast<Eigen::Index>(a.to);
    const auto j = static_cast<Eigen::Index>(a.from);
    coupling += a.weight * (x.segment(j * m, m) - x.segment(i * m, m)).squaredNorm();
  }
  return obj.separable(x) + 0.25 * gain * coupling;
}

Trajectory integrate(const Scenario& s) {
  s.validate();
  Trajectory traj;
  traj.m = s.dim();
  traj.n_nodes = s.nodes();

  Vector x = s.x0;
  traj.times.push_back(s.t0);
  traj.states.push_back(x);

  for (const Segment& seg : segments_of(s)) {
    ++traj.stats.segments;
    const double len = seg.end - seg.start;
    const auto n_steps =
        static_cast<long long>(std::max(1.0, std::ceil(len / s.h - 1e-9)));
    double t = seg.start;
    for (long long k = 1; k <= n_steps; ++k) {
      const double t_next =
          k == n_steps ? seg.end : seg.start + static_cast<double>(k) * s.h;
      const double dt = t_next - t;
      if (dt < s.h * (1.0 - 1e-9)) {
        ++traj.stats.truncated_steps;
      }
      const Vector k1 = rhs_on_graph(s, *seg.graph, t, x);
      const Vector k2 = rhs_on_graph(s, *seg.graph, t + 0.5 * dt, x + (0.5 * dt) * k1);
      const Vector k3 = rhs_on_graph(s, *seg.graph, t + 0.5 * dt, x + (0.5 * dt) * k2);
      const Vector k4 = rhs_on_graph(s, *seg.graph, t_next, x + dt * k3);
      x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      traj.stats.rhs_evaluations += 4;
      ++traj.stats.steps;
      t = t_next;
      check_state(x, t);
      traj.times.push_back(t);
      traj.states.push_back(x);
    }
  }
  return traj;
}

}  // namespace optcon
