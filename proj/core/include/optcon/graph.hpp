#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace optcon {

using NodeId = std::size_t;

/// Arc (from -> to) carrying weight a_{to,from}: node `to` receives the
/// state of node `from`.
struct Arc {
  NodeId from = 0;
  NodeId to = 0;
  double weight = 1.0;

  friend bool operator==(const Arc&, const Arc&) = default;
};

/// Declared range [lower, upper] for all arc weights.
struct WeightBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Immutable weighted digraph on nodes 0..N-1.
///
/// Arcs are stored sorted by (to, from) so that the in-neighbourhood of each
/// node is a contiguous span. Construction rejects self-loops, duplicate
/// arcs, out-of-range endpoints, non-positive weights and weights outside
/// the declared bounds.
class WeightedDigraph {
 public:
  explicit WeightedDigraph(std::size_t n_nodes);
  WeightedDigraph(std::size_t n_nodes, std::vector<Arc> arcs,
                  std::optional<WeightBounds> bounds = std::nullopt);

  std::size_t size() const noexcept { return n_nodes_; }
  std::span<const Arc> arcs() const noexcept { return arcs_; }

  /// Arcs whose head is `node`, i.e. the neighbour set N_i with weights.
  std::span<const Arc> in_arcs(NodeId node) const;

  bool has_arc(NodeId from, NodeId to) const;
  std::optional<double> weight(NodeId from, NodeId to) const;
  const std::optional<WeightBounds>& bounds() const noexcept { return bounds_; }

  friend bool operator==(const WeightedDigraph& a, const WeightedDigraph& b) {
    return a.n_nodes_ == b.n_nodes_ && a.arcs_ == b.arcs_;
  }

 private:
  std::size_t n_nodes_;
  std::vector<Arc> arcs_;
  std::vector<std::size_t> offsets_;
  std::optional<WeightBounds> bounds_;
};

/// L = D - A with d_i = sum_j a_ij.
Eigen::MatrixXd laplacian(const WeightedDigraph& g);

bool is_strongly_connected(const WeightedDigraph& g);

/// True iff the arc set is symmetric. Weights are not compared.
bool is_bidirectional(const WeightedDigraph& g);

/// True iff a_ij == a_ji for every arc (implies is_bidirectional).
bool has_symmetric_weights(const WeightedDigraph& g);

/// Quasi-strong connectivity: some node reaches every other node.
bool has_spanning_tree(const WeightedDigraph& g);

/// Undirected connectivity of a bidirectional graph.
bool is_connected(const WeightedDigraph& g);

/// Ascending eigenvalues of the Laplacian of a graph with symmetric weights.
Eigen::VectorXd laplacian_spectrum(const WeightedDigraph& g);

/// Second-smallest Laplacian eigenvalue (algebraic connectivity).
/// Throws PreconditionError unless g has symmetric weights and is connected.
double lambda2(const WeightedDigraph& g);

}  // namespace optcon
