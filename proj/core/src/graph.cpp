#include "optcon/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "optcon/errors.hpp"

namespace optcon {
namespace {

std::vector<bool> reachable(const WeightedDigraph& g, NodeId root,
                            bool reverse) {
  const std::size_t n = g.size();
  std::vector<std::vector<NodeId>> adj(n);
  for (const Arc& a : g.arcs()) {
    if (reverse) {
      adj[a.to].push_back(a.from);
    } else {
      adj[a.from].push_back(a.to);
    }
  }
  std::vector<bool> seen(n, false);
  std::vector<NodeId> stack{root};
  seen[root] = true;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (NodeId w : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

bool all_true(const std::vector<bool>& v) {
  return std::all_of(v.begin(), v.end(), [](bool b) { return b; });
}

}  // namespace

WeightedDigraph::WeightedDigraph(std::size_t n_nodes)
    : WeightedDigraph(n_nodes, {}) {}

WeightedDigraph::WeightedDigraph(std::size_t n_nodes, std::vector<Arc> arcs,
                                 std::optional<WeightBounds> bounds)
    : n_nodes_(n_nodes), arcs_(std::move(arcs)), bounds_(bounds) {
  if (n_nodes_ == 0) {
    throw PreconditionError("graph must have at least one node");
  }
  if (bounds_ && !(bounds_->lower > 0.0 && bounds_->lower <= bounds_->upper)) {
    throw PreconditionError("weight bounds must satisfy 0 < lower <= upper");
  }
  for (const Arc& a : arcs_) {
    const std::string tag =
        "arc " + std::to_string(a.from) + "->" + std::to_string(a.to);
    if (a.from >= n_nodes_ || a.to >= n_nodes_) {
      throw PreconditionError(tag + ": endpoint out of range");
    }
    if (a.from == a.to) {
      throw PreconditionError(tag + ": self-loops are not allowed");
    }
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
      throw PreconditionError(tag + ": weights must be positive");
    }
    if (bounds_ && (a.weight < bounds_->lower || a.weight > bounds_->upper)) {
      throw PreconditionError(tag + ": weight outside declared bounds");
    }
  }
  std::sort(arcs_.begin(), arcs_.end(), [](const Arc& x, const Arc& y) {
    return std::tie(x.to, x.from) < std::tie(y.to, y.from);
  });
  auto dup = std::adjacent_find(arcs_.begin(), arcs_.end(),
                                [](const Arc& x, const Arc& y) {
                                  return x.to == y.to && x.from == y.from;
                                });
  if (dup != arcs_.end()) {
    throw PreconditionError("duplicate arc " + std::to_string(dup->from) +
                            "->" + std::to_string(dup->to));
  }
  offsets_.assign(n_nodes_ + 1, 0);
  for (const Arc& a : arcs_) {
    ++offsets_[a.to + 1];
  }
  for (std::size_t i = 0; i < n_nodes_; ++i) {
    offsets_[i + 1] += offsets_[i];
  }
}

std::span<const Arc> WeightedDigraph::in_arcs(NodeId node) const {
  if (node >= n_nodes_) {
    throw RangeError("node " + std::to_string(node) + " out of range");
  }
  return std::span<const Arc>(arcs_).subspan(
      offsets_[node], offsets_[node + 1] - offsets_[node]);
}

bool WeightedDigraph::has_arc(NodeId from, NodeId to) const {
  return weight(from, to).has_value();
}

std::optional<double> WeightedDigraph::weight(NodeId from, NodeId to) const {
  if (to >= n_nodes_) {
    return std::nullopt;
  }
  for (const Arc& a : in_arcs(to)) {
    if (a.from == from) {
      return a.weight;
    }
  }
  return std::nullopt;
}

Eigen::MatrixXd laplacian(const WeightedDigraph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const Arc& a : g.arcs()) {
    const auto i = static_cast<Eigen::Index>(a.to);
    const auto j = static_cast<Eigen::Index>(a.from);
    lap(i, j) -= a.weight;
    lap(i, i) += a.weight;
  }
  return lap;
}

bool is_strongly_connected(const WeightedDigraph& g) {
  return all_true(reachable(g, 0, false)) && all_true(reachable(g, 0, true));
}

bool is_bidirectional(const WeightedDigraph& g) {
  return std::all_of(g.arcs().begin(), g.arcs().end(),
                     [&](const Arc& a) { return g.has_arc(a.to, a.from); });
}

bool has_symmetric_weights(const WeightedDigraph& g) {
  return std::all_of(g.arcs().begin(), g.arcs().end(), [&](const Arc& a) {
    const auto back = g.weight(a.to, a.from);
    return back && *back == a.weight;
  });
}

bool has_spanning_tree(const WeightedDigraph& g) {
  for (NodeId root = 0; root < g.size(); ++root) {
    if (all_true(reachable(g, root, false))) {
      return true;
    }
  }
  return false;
}

bool is_connected(const WeightedDigraph& g) {
  std::vector<Arc> both;
  both.reserve(2 * g.arcs().size());
  for (const Arc& a : g.arcs()) {
    both.push_back(a);
    if (!g.has_arc(a.to, a.from)) {
      both.push_back({a.to, a.from, a.weight});
    }
  }
  return all_true(reachable(WeightedDigraph(g.size(), std::move(both)), 0,
                            false));
}

Eigen::VectorXd laplacian_spectrum(const WeightedDigraph& g) {
  if (!has_symmetric_weights(g)) {
    throw PreconditionError(
        "laplacian spectrum requires a bidirectional graph with a_ij == a_ji");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      laplacian(g), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double lambda2(const WeightedDigraph& g) {
  if (!has_symmetric_weights(g)) {
    throw PreconditionError(
        "lambda2 requires a bidirectional graph with a_ij == a_ji");
  }
  if (g.size() < 2) {
    throw PreconditionError("lambda2 requires at least two nodes");
  }
  if (!is_connected(g)) {
    throw PreconditionError("lambda2 requires a connected graph");
  }
  return laplacian_spectrum(g)(1);
}

}  // namespace optcon
