#include "optcon/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "optcon/errors.hpp"

namespace optcon {
namespace {

std::vector<MetricSeries> per_node_series(
    const Trajectory& traj,
    const std::function<double(std::size_t node, const Vector& xi)>& fn) {
  std::vector<MetricSeries> out(traj.n_nodes);
  for (auto& s : out) {
    s.times = traj.times;
    s.values.reserve(traj.size());
  }
  for (std::size_t k = 0; k < traj.size(); ++k) {
    for (std::size_t i = 0; i < traj.n_nodes; ++i) {
      out[i].values.push_back(fn(i, traj.node_state(k, i)));
    }
  }
  return out;
}

}  // namespace

double MetricSeries::max() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

LyapunovTrace lyapunov_trace(const Trajectory& traj, const Vector& z_star) {
  if (z_star.size() != traj.m) {
    throw DimensionError("lyapunov_trace: z_star has wrong dimension");
  }
  LyapunovTrace out;
  out.per_node = per_node_series(traj, [&](std::size_t, const Vector& xi) {
    return (xi - z_star).squaredNorm();
  });
  out.max.times = traj.times;
  out.max.values.resize(traj.size(), 0.0);
  for (const auto& node : out.per_node) {
    for (std::size_t k = 0; k < traj.size(); ++k) {
      out.max.values[k] = std::max(out.max.values[k], node.values[k]);
    }
  }
  return out;
}

DiniCheck dini_nonincreasing(const MetricSeries& series, double slack) {
  if (series.values.empty() || series.values.size() != series.times.size()) {
    throw PreconditionError("dini_nonincreasing: series must be nonempty and aligned");
  }
  DiniCheck out;
  out.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < series.values.size(); ++k) {
    const double dt = series.times[k + 1] - series.times[k];
    const double quotient = (series.values[k + 1] - series.values[k]) / dt;
    const double allowed = slack * std::max(1.0, std::abs(series.values[k]));
    const double excess = quotient - allowed;
    out.worst_excess = std::max(out.worst_excess, excess);
    if (excess > 0.0 && out.nonincreasing) {
      out.nonincreasing = false;
      out.first_violation = series.times[k];
    }
  }
  if (series.values.size() == 1) {
    out.worst_excess = 0.0;
  }
  return out;
}

double consensus_diameter(const Vector& x, Eigen::Index m) {
  if (m <= 0 || x.size() % m != 0) {
    throw DimensionError("consensus_diameter: state size is not a multiple of m");
  }
  const Eigen::Index n = x.size() / m;
  double best = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      best = std::max(best, (x.segment(i * m, m) - x.segment(j * m, m)).norm());
    }
  }
  return best;
}

MetricSeries diameter_series(const Trajectory& traj) {
  MetricSeries out;
  out.times = traj.times;
  out.values.reserve(traj.size());
  for (const auto& x : traj.states) {
    out.values.push_back(consensus_diameter(x, traj.m));
  }
  return out;
}

Vector block_mean(const Vector& x, Eigen::Index m) {
  const Eigen::Index n = x.size() / m;
  Vector mean = Vector::Zero(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    mean += x.segment(i * m, m);
  }
  return mean / static_cast<double>(n);
}

double disagreement(const Vector& x, Eigen::Index m) {
  const Vector mean = block_mean(x, m);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size() / m; ++i) {
    acc += (x.segment(i * m, m) - mean).squaredNorm();
  }
  return std::sqrt(acc);
}

std::vector<MetricSeries> optimality_gap(const Trajectory& traj,
                                         const ObjectiveSet& obj,
                                         double f_star) {
  return per_node_series(traj, [&](std::size_t, const Vector& xi) {
    return obj.total(xi) - f_star;
  });
}

std::vector<MetricSeries> node_optimum_residuals(const Trajectory& traj,
                                                 const ObjectiveSet& obj) {
  std::vector<ConvexSet> sets;
  sets.reserve(obj.size());
  for (const auto& f : obj.components()) {
    sets.push_back(argmin_set(f));
  }
  return per_node_series(traj, [&](std::size_t i, const Vector& xi) {
    return distance(sets[i], xi);
  });
}

double separable_grad_norm(const ObjectiveSet& obj, const Vector& x) {
  return obj.separable_grad(x).norm();
}

StationaryPoint stationary_quadratic(const ObjectiveSet& obj,
                                     const WeightedDigraph& g, double gain) {
  if (!(gain >= 0.0)) {
    throw PreconditionError("stationary_quadratic: gain must be nonnegative");
  }
  if (g.size() != obj.size()) {
    throw DimensionError("stationary_quadratic: graph and objectives differ in N");
  }
  if (!has_symmetric_weights(g)) {
    throw PreconditionError(
        "stationary_quadratic: graph must be bidirectional with a_ij == a_ji");
  }
  const Eigen::Index m = obj.dim();
  const auto n = static_cast<Eigen::Index>(obj.size());
  const Eigen::Index dim = m * n;

  Matrix system = Matrix::Zero(dim, dim);
  Vector rhs = Vector::Zero(dim);
  const Matrix lap = laplacian(g);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (lap(i, j) != 0.0) {
        system.block(i * m, j * m, m, m) +=
            gain * lap(i, j) * Matrix::Identity(m, m);
      }
    }
    const auto* q = std::get_if<Quadratic>(&obj[static_cast<std::size_t>(i)].kind());
    if (q == nullptr) {
      throw UnsupportedRepresentation(
          "stationary_quadratic: component " + std::to_string(i) +
          " is not a Quadratic");
    }
    system.block(i * m, i * m, m, m) += q->q;
    rhs.segment(i * m, m) = q->q * q->c;
  }

  Eigen::FullPivLU<Matrix> lu(system);
  lu.setThreshold(1e-12);
  if (lu.rank() < dim) {
    std::ostringstream os;
    os << "stationary_quadratic: K(L x I) + blockdiag(Q) is singular (rank "
       << lu.rank() << " of " << dim << ", defect " << dim - lu.rank() << ")";
    throw PreconditionError(os.str());
  }

  StationaryPoint sp;
  sp.gain = gain;
  sp.x = lu.solve(rhs);
  Vector coupling = Vector::Zero(dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      coupling.segment(i * m, m) += gain * lap(i, j) * sp.x.segment(j * m, m);
    }
  }
  sp.residual = (coupling + obj.separable_grad(sp.x)).norm();
  sp.p_ave = block_mean(sp.x, m);
  sp.disagreement = disagreement(sp.x, m);
  return sp;
}

BoundCheck check_disagreement_bound(const StationaryPoint& sp, double l0,
                                    double lambda2) {
  if (!(sp.gain > 0.0) || !(lambda2 > 0.0)) {
    throw PreconditionError("disagreement bound requires K > 0 and lambda2 > 0");
  }
  BoundCheck out;
  out.bound = l0 / (sp.gain * lambda2);
  out.margin = out.bound + 1e-12 - sp.disagreement;
  out.holds = out.margin >= 0.0;
  return out;
}

Vector sphere_intersection(const std::vector<Vector>& centers,
                           const std::vector<double>& sq_dists, double tol) {
  if (centers.empty() || centers.size() != sq_dists.size()) {
    throw PreconditionError("sphere_intersection: need matching centers and distances");
  }
  const Eigen::Index m = centers.front().size();
  if (static_cast<Eigen::Index>(centers.size()) != m + 1) {
    throw PreconditionError("sphere_intersection: need exactly m+1 centers");
  }
  for (const auto& z : centers) {
    if (z.size() != m) {
      throw DimensionError("sphere_intersection: centers differ in dimension");
    }
  }
  for (double d : sq_dists) {
    if (!(d >= 0.0)) {
      throw PreconditionError("sphere_intersection: distances must be nonnegative");
    }
  }

  const Vector& z1 = centers.front();
  Matrix a(m, m);
  Vector b(m);
  for (Eigen::Index j = 1; j <= m; ++j) {
    const Vector& zj = centers[static_cast<std::size_t>(j)];
    a.row(j - 1) = (zj - z1).transpose();
    b(j - 1) = 0.5 * (sq_dists.front() - sq_dists[static_cast<std::size_t>(j)] +
                      zj.squaredNorm() - z1.squaredNorm());
  }
  Eigen::FullPivLU<Matrix> lu(a);
  if (lu.rank() < m) {
    std::ostringstream os;
    os << "sphere_intersection: center differences have rank " << lu.rank()
       << " < " << m;
    throw PreconditionError(os.str());
  }
  Vector y = lu.solve(b);
  const double defect = std::abs((y - z1).squaredNorm() - sq_dists.front());
  if (defect > tol * std::max(1.0, sq_dists.front())) {
    std::ostringstream os;
    os << "sphere_intersection: distances are inconsistent (defect " << defect
       << ")";
    throw NoSolutionError(os.str());
  }
  return y;
}

std::optional<std::vector<Vector>> interior_witnesses(
    const std::vector<ConvexSet>& sets, const Vector& anchor) {
  double depth = std::numeric_limits<double>::infinity();
  for (const auto& s : sets) {
    depth = std::min(depth, s.interior_depth(anchor));
  }
  if (!(depth > 0.0)) {
    return std::nullopt;
  }
  if (!std::isfinite(depth)) {
    depth = 1.0;
  }
  const Eigen::Index m = anchor.size();
  std::vector<Vector> out{anchor};
  for (Eigen::Index k = 0; k < m; ++k) {
    out.push_back(anchor + 0.5 * depth * Vector::Unit(m, k));
  }
  return out;
}

Convergence detect_convergence(const Trajectory& traj, const ObjectiveSet& obj,
                               double tol, std::size_t run) {
  Convergence out;
  std::size_t streak = 0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Vector& x = traj.states[k];
    double grad_max = 0.0;
    for (std::size_t i = 0; i < traj.n_nodes; ++i) {
      grad_max = std::max(grad_max, grad(obj[i], traj.node_state(k, i)).norm());
    }
    if (consensus_diameter(x, traj.m) <= tol && grad_max <= tol) {
      if (++streak >= run) {
        out.converged = true;
        out.time = traj.times[k + 1 - run];
        return out;
      }
    } else {
      streak = 0;
    }
  }
  out.time = traj.times.back();
  return out;
}

AuditReport audit_assumptions(const Scenario& s, const std::vector<double>& k_grid) {
  AuditReport rep;
  const ObjectiveSet& obj = s.objectives;
  for (const auto& f : obj.components()) {
    rep.coercive_per_node.push_back(is_coercive(f));
  }
  // Every component is nonnegative, so F~ is coercive iff each f_i is.
  rep.coercive = std::all_of(rep.coercive_per_node.begin(),
                             rep.coercive_per_node.end(), [](bool b) { return b; });

  bool bounded_argmins = true;
  for (const auto& f : obj.components()) {
    try {
      bounded_argmins = bounded_argmins && argmin_set(f).is_bounded();
    } catch (const UnsupportedRepresentation&) {
      bounded_argmins = false;
    }
  }
  rep.scalar_bounded_argmins = obj.dim() == 1 && bounded_argmins;

  rep.minimum = global_min_F(obj);
  rep.argmin_nonempty = rep.minimum.exact || rep.minimum.tolerance <= 1e-10;
  if (!rep.argmin_nonempty) {
    rep.a4_detail = "no minimizer of F located";
  } else if (rep.coercive) {
    rep.a4 = true;
    rep.a4_detail = "F~ coercive";
  } else if (rep.scalar_bounded_argmins) {
    rep.a4 = true;
    rep.a4_detail = "m = 1 with bounded argmin sets";
  } else {
    rep.a4_detail = "F~ not coercive; boundedness of argmin F unverifiable";
  }

  const auto* g = std::get_if<WeightedDigraph>(&s.topology);
  const bool all_quadratic =
      std::all_of(obj.components().begin(), obj.components().end(),
                  [](const auto& f) { return std::holds_alternative<Quadratic>(f.kind()); });
  if (g == nullptr || !has_symmetric_weights(*g)) {
    rep.grid_detail = "stationary grid needs a fixed graph with symmetric weights";
    return rep;
  }
  if (!all_quadratic) {
    rep.grid_detail = "stationary grid needs quadratic objectives";
    return rep;
  }
  if (k_grid.empty()) {
    rep.grid_detail = "empty gain grid";
    return rep;
  }

  std::vector<double> gains = k_grid;
  std::sort(gains.begin(), gains.end());
  rep.grid_evaluated = true;
  try {
    for (double gain : gains) {
      const StationaryPoint sp = stationary_quadratic(obj, *g, gain);
      rep.grid.push_back({gain, sp.x.cwiseAbs().maxCoeff(), sp.residual,
                          sp.disagreement});
    }
  } catch (const PreconditionError& e) {
    rep.grid_detail = e.what();
    return rep;
  }
  double head = 0.0;
  bool finite = true;
  for (std::size_t k = 0; k < rep.grid.size(); ++k) {
    finite = finite && std::isfinite(rep.grid[k].max_abs);
    if (k + 1 < rep.grid.size()) {
      head = std::max(head, rep.grid[k].max_abs);
    }
  }
  // Bounded: finite everywhere, and the largest gain does not push the
  // stationary point far beyond what the smaller gains produced.
  const double tail = rep.grid.back().max_abs;
  rep.grid_bounded = finite && (rep.grid.size() == 1 || tail <= 2.0 * head + 1e-9);
  std::ostringstream os;
  os << "max |x_K| over grid = " << std::max(head, tail);
  rep.grid_detail = os.str();
  return rep;
}

}  // namespace optcon
