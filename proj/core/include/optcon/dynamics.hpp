#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "optcon/graph.hpp"
#include "optcon/objectives.hpp"
#include "optcon/switching.hpp"

namespace optcon {

/// u = n - g.
struct JStar {};

/// u = K n - g. On a bidirectional graph with symmetric weights this is the
/// negative gradient flow of the penalized objective F_G(x; K).
struct JK {
  double gain = 1.0;
};

/// User-supplied law. 0 -> law(0, g) must be injective in g; that is the
/// caller's obligation and is not checked here.
struct CustomLaw {
  std::string name;
  std::function<Vector(const Vector& n, const Vector& g)> fn;
};

using ControlLaw = std::variant<JStar, JK, CustomLaw>;

Vector control(const ControlLaw& law, const Vector& n, const Vector& g);
std::string law_name(const ControlLaw& law);

using Topology = std::variant<WeightedDigraph, SwitchingSignal>;

/// w_i(t), added to node i's velocity.
using Disturbance = std::function<Vector(NodeId node, double t)>;

struct Scenario {
  ObjectiveSet objectives;
  Topology topology;
  ControlLaw law = JStar{};
  Vector x0;
  double t0 = 0.0;
  double tf = 1.0;
  double h = 0.01;
  Disturbance disturbance;

  std::size_t nodes() const noexcept { return objectives.size(); }
  Eigen::Index dim() const noexcept { return objectives.dim(); }

  /// Throws PreconditionError/DimensionError on inconsistent scenarios.
  void validate() const;
};

struct IntegratorStats {
  std::size_t steps = 0;
  std::size_t truncated_steps = 0;
  std::size_t rhs_evaluations = 0;
  std::size_t segments = 0;
};

/// Sampled solution x(t) in R^{mN}; one sample per RK4 step plus every
/// switching instant and tf.
struct Trajectory {
  Eigen::Index m = 0;
  std::size_t n_nodes = 0;
  std::vector<double> times;
  std::vector<Vector> states;
  std::string fingerprint;
  IntegratorStats stats;

  std::size_t size() const noexcept { return times.size(); }
  const Vector& terminal() const { return states.back(); }
  Vector node_state(std::size_t sample, std::size_t node) const {
    return states[sample].segment(static_cast<Eigen::Index>(node) * m, m);
  }
};

const WeightedDigraph& graph_at(const Topology& topo, double t);
std::size_t topology_nodes(const Topology& topo);

/// n_i = sum_{j in N_i} a_ij (x_j - x_i) for every node.
std::vector<Vector> neighbor_info(const WeightedDigraph& g, const Vector& x,
                                  Eigen::Index m);

/// Right-hand side with the graph active at t.
Vector rhs(const Scenario& s, double t, const Vector& x);

/// Right-hand side on an explicit graph (used inside switching segments).
Vector rhs_on_graph(const Scenario& s, const WeightedDigraph& g, double t,
                    const Vector& x);

/// F_G(x; K) = sum_i f_i(x_i) + K/2 sum_{unordered {i,j}} a_ij |x_j - x_i|^2
/// for a graph with symmetric weights.
double penalized_objective(const ObjectiveSet& obj, const WeightedDigraph& g,
                           double gain, const Vector& x);

/// States with |x_k| above this bound count as divergence.
inline constexpr double kDivergenceBound = 1e8;

/// Fixed-step classic RK4. Each constant-topology segment is integrated on
/// its own and the last step of a segment is shortened so that switching
/// instants and tf are exact samples. Throws NumericalDivergence.
Trajectory integrate(const Scenario& s);

}  // namespace optcon
