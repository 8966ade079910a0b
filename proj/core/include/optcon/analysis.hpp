#pragma once

#include <optional>
#include <string>
#include <vector>

#include "optcon/dynamics.hpp"
#include "optcon/objectives.hpp"

namespace optcon {

struct MetricSeries {
  std::vector<double> times;
  std::vector<double> values;

  double back() const { return values.back(); }
  double max() const;
};

/// V_i(t) = |x_i(t) - z|^2 and V(t) = max_i V_i(t).
struct LyapunovTrace {
  MetricSeries max;
  std::vector<MetricSeries> per_node;
};

LyapunovTrace lyapunov_trace(const Trajectory& traj, const Vector& z_star);

struct DiniCheck {
  bool nonincreasing = true;
  std::optional<double> first_violation;
  /// Largest value of difference quotient minus allowed slack (<= 0 on pass).
  double worst_excess = 0.0;
};

/// Forward-difference analogue of D^+V <= 0: every quotient
/// (V(t_{k+1}) - V(t_k)) / (t_{k+1} - t_k) must be at most
/// slack * max(1, |V(t_k)|).
DiniCheck dini_nonincreasing(const MetricSeries& series, double slack);

/// max_{i,j} |x_i - x_j| for a stacked state with block size m.
double consensus_diameter(const Vector& x, Eigen::Index m);
MetricSeries diameter_series(const Trajectory& traj);

/// Mean block p_ave and |x|_M = sqrt(sum_i |x_i - p_ave|^2).
Vector block_mean(const Vector& x, Eigen::Index m);
double disagreement(const Vector& x, Eigen::Index m);

/// Per node, F(x_i(t)) - F_star with F = sum_j f_j.
std::vector<MetricSeries> optimality_gap(const Trajectory& traj,
                                         const ObjectiveSet& obj,
                                         double f_star);

/// Per node, dist(x_i(t), argmin f_i).
std::vector<MetricSeries> node_optimum_residuals(const Trajectory& traj,
                                                 const ObjectiveSet& obj);

/// Minimizer of F_G(x; K) for quadratic objectives on a graph with
/// symmetric weights.
struct StationaryPoint {
  Vector x;
  double gain = 0.0;
  /// |K (L (x) I_m) x + grad F~(x)|.
  double residual = 0.0;
  Vector p_ave;
  double disagreement = 0.0;
};

StationaryPoint stationary_quadratic(const ObjectiveSet& obj,
                                     const WeightedDigraph& g, double gain);

/// |grad F~(x)| for the stacked state x.
double separable_grad_norm(const ObjectiveSet& obj, const Vector& x);

struct BoundCheck {
  bool holds = false;
  double bound = 0.0;
  /// bound + 1e-12 - disagreement; nonnegative iff holds.
  double margin = 0.0;
};

/// |p|_M <= L0 / (K lambda2).
BoundCheck check_disagreement_bound(const StationaryPoint& sp, double l0,
                                    double lambda2);

/// The unique y with |y - z_j|^2 = d_j for m+1 centers whose differences
/// z_j - z_1 span R^m. Throws PreconditionError on rank deficiency and
/// NoSolutionError when the distances are inconsistent beyond `tol`
/// (relative to max(1, d_1)).
Vector sphere_intersection(const std::vector<Vector>& centers,
                           const std::vector<double>& sq_dists,
                           double tol = 1e-9);

/// m+1 affinely independent points around `anchor` that lie in the interior
/// of every set, or nullopt if `anchor` is not an interior point.
std::optional<std::vector<Vector>> interior_witnesses(
    const std::vector<ConvexSet>& sets, const Vector& anchor);

struct Convergence {
  bool converged = false;
  /// First sample of the sustained run when converged, else tf.
  double time = 0.0;
};

/// Converged when the diameter and max_i |grad f_i(x_i)| both stay at or
/// below `tol` for `run` consecutive samples.
Convergence detect_convergence(const Trajectory& traj, const ObjectiveSet& obj,
                               double tol = 1e-6, std::size_t run = 100);

struct GridEntry {
  double gain = 0.0;
  double max_abs = 0.0;
  double residual = 0.0;
  double disagreement = 0.0;
};

struct AuditReport {
  std::vector<bool> coercive_per_node;
  bool coercive = false;
  /// argmin F nonempty.
  bool argmin_nonempty = false;
  /// argmin F nonempty and bounded.
  bool a4 = false;
  std::string a4_detail;
  /// Scalar objectives with bounded argmin sets.
  bool scalar_bounded_argmins = false;
  bool grid_evaluated = false;
  bool grid_bounded = false;
  std::string grid_detail;
  std::vector<GridEntry> grid;
  GlobalMinimum minimum;
};

/// Checks the standing assumptions of the scenario: coercivity of F~,
/// existence and boundedness of argmin F, and, on a fixed graph with
/// symmetric weights and quadratic objectives, boundedness of the
/// stationary sets over the gain grid.
AuditReport audit_assumptions(const Scenario& s, const std::vector<double>& k_grid);

}  // namespace optcon
