#include "optcon/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
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

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_dim(Eigen::Index expected, const Vector& x, const char* what) {
  if (x.size() != expected) {
    std::ostringstream os;
    os << what << ": expected dimension " << expected << ", got " << x.size();
    throw DimensionError(os.str());
  }
}

std::string format_vec(const Vector& v) {
  std::ostringstream os;
  os << '(';
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    os << (k ? "," : "") << v(k);
  }
  os << ')';
  return os.str();
}

Eigen::VectorXd symmetric_eigenvalues(const Matrix& q) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(q, Eigen::EigenvaluesOnly)
      .eigenvalues();
}

double spectral_scale(const Matrix& q) {
  return std::max(1.0, q.cwiseAbs().maxCoeff());
}

bool is_positive_definite(const Matrix& q) {
  if (q.size() == 0) {
    return false;
  }
  return symmetric_eigenvalues(q).minCoeff() > 1e-12 * spectral_scale(q);
}

// Balls and points share the same projection and intersection logic.
std::optional<BallSet> as_ball(const ConvexSet& s) {
  if (const auto* b = std::get_if<BallSet>(&s.shape())) {
    return *b;
  }
  if (const auto* p = std::get_if<PointSet>(&s.shape())) {
    return BallSet{p->c, 0.0};
  }
  return std::nullopt;
}

std::optional<BoxSet> as_box(const ConvexSet& s) {
  if (const auto* b = std::get_if<BoxSet>(&s.shape())) {
    return *b;
  }
  if (const auto* p = std::get_if<PointSet>(&s.shape())) {
    return BoxSet{p->c, p->c};
  }
  return std::nullopt;
}

// Exact pairwise disjointness for ball/ball, box/box and ball/box.
bool certainly_disjoint(const ConvexSet& a, const ConvexSet& b) {
  const auto ba = as_ball(a);
  const auto bb = as_ball(b);
  const auto xa = as_box(a);
  const auto xb = as_box(b);
  if (ba && bb) {
    return (ba->center - bb->center).norm() > ba->radius + bb->radius;
  }
  if (xa && xb) {
    return (xa->lower.cwiseMax(xb->lower).array() >
            xa->upper.cwiseMin(xb->upper).array())
        .any();
  }
  if (ba && xb) {
    return distance(b, ba->center) > ba->radius;
  }
  if (xa && bb) {
    return distance(a, bb->center) > bb->radius;
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// ConvexSet

ConvexSet ConvexSet::point(Vector c) {
  if (!c.allFinite()) {
    throw PreconditionError("point must be finite");
  }
  return ConvexSet(PointSet{std::move(c)});
}

ConvexSet ConvexSet::ball(Vector center, double radius) {
  if (!center.allFinite()) {
    throw PreconditionError("ball center must be finite");
  }
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw PreconditionError("ball radius must be finite and nonnegative");
  }
  return ConvexSet(BallSet{std::move(center), radius});
}

ConvexSet ConvexSet::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size()) {
    throw DimensionError("box bounds differ in dimension");
  }
  for (Eigen::Index k = 0; k < lower.size(); ++k) {
    if (std::isnan(lower(k)) || std::isnan(upper(k)) || lower(k) > upper(k) ||
        lower(k) == kInf || upper(k) == -kInf) {
      throw PreconditionError("box requires lower <= upper componentwise");
    }
  }
  return ConvexSet(BoxSet{std::move(lower), std::move(upper)});
}

Eigen::Index ConvexSet::dim() const {
  return std::visit(Overloaded{
                        [](const PointSet& p) { return p.c.size(); },
                        [](const BallSet& b) { return b.center.size(); },
                        [](const BoxSet& b) { return b.lower.size(); },
                    },
                    shape_);
}

bool ConvexSet::is_bounded() const {
  if (const auto* b = std::get_if<BoxSet>(&shape_)) {
    return b->lower.allFinite() && b->upper.allFinite();
  }
  return true;
}

bool ConvexSet::contains(const Vector& x, double tol) const {
  return distance(*this, x) <= tol;
}

double ConvexSet::interior_depth(const Vector& x) const {
  const double d = distance(*this, x);
  if (d > 0.0) {
    return -d;
  }
  return std::visit(
      Overloaded{
          [](const PointSet&) { return 0.0; },
          [&](const BallSet& b) { return b.radius - (x - b.center).norm(); },
          [&](const BoxSet& b) {
            const double lo = (x - b.lower).minCoeff();
            const double hi = (b.upper - x).minCoeff();
            return std::min(lo, hi);
          },
      },
      shape_);
}

std::string ConvexSet::describe() const {
  return std::visit(
      Overloaded{
          [](const PointSet& p) { return "Point" + format_vec(p.c); },
          [](const BallSet& b) {
            std::ostringstream os;
            os << "Ball" << format_vec(b.center) << " r=" << b.radius;
            return os.str();
          },
          [](const BoxSet& b) {
            return "Box" + format_vec(b.lower) + ".." + format_vec(b.upper);
          },
      },
      shape_);
}

Vector project(const ConvexSet& s, const Vector& x) {
  require_dim(s.dim(), x, "project");
  return std::visit(
      Overloaded{
          [](const PointSet& p) -> Vector { return p.c; },
          [&](const BallSet& b) -> Vector {
            const Vector d = x - b.center;
            const double n = d.norm();
            if (n <= b.radius) {
              return x;
            }
            return b.center + (b.radius / n) * d;
          },
          [&](const BoxSet& b) -> Vector {
            return x.cwiseMax(b.lower).cwiseMin(b.upper);
          },
      },
      s.shape());
}

double distance(const ConvexSet& s, const Vector& x) {
  return (x - project(s, x)).norm();
}

// ---------------------------------------------------------------------------
// ConvexComponent

ConvexComponent ConvexComponent::quadratic(Matrix q, Vector c) {
  const Eigen::Index m = c.size();
  if (q.rows() != m || q.cols() != m) {
    throw DimensionError("quadratic: Q must be m x m with m = dim(c)");
  }
  if (!q.allFinite() || !c.allFinite()) {
    throw PreconditionError("quadratic: Q and c must be finite");
  }
  const double scale = spectral_scale(q);
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw PreconditionError("quadratic: Q must be symmetric");
  }
  Matrix sym = 0.5 * (q + q.transpose());
  if (m > 0 && symmetric_eigenvalues(sym).minCoeff() < -1e-12 * scale) {
    throw PreconditionError("quadratic: Q must be positive semidefinite");
  }
  return ConvexComponent(Quadratic{std::move(sym), std::move(c)}, m);
}

ConvexComponent ConvexComponent::isotropic(Vector c, double weight) {
  const Eigen::Index m = c.size();
  return quadratic(weight * Matrix::Identity(m, m), std::move(c));
}

ConvexComponent ConvexComponent::sq_dist(ConvexSet set) {
  const Eigen::Index m = set.dim();
  return ConvexComponent(SqDist{std::move(set)}, m);
}

ConvexComponent ConvexComponent::sum(std::vector<ConvexComponent> terms) {
  if (terms.empty()) {
    throw PreconditionError("sum: needs at least one term");
  }
  const Eigen::Index m = terms.front().dim();
  for (const auto& t : terms) {
    if (t.dim() != m) {
      throw DimensionError("sum: all terms must share one dimension");
    }
  }
  return ConvexComponent(Sum{std::move(terms)}, m);
}

ConvexComponent ConvexComponent::zero(Eigen::Index m) {
  return quadratic(Matrix::Zero(m, m), Vector::Zero(m));
}

std::string ConvexComponent::describe() const {
  return std::visit(
      Overloaded{
          [](const Quadratic& f) { return "Quadratic(c=" + format_vec(f.c) + ")"; },
          [](const SqDist& f) { return "SqDist(" + f.set.describe() + ")"; },
          [](const Sum& f) {
            std::string out = "Sum(";
            for (std::size_t k = 0; k < f.terms.size(); ++k) {
              out += (k ? ", " : "") + f.terms[k].describe();
            }
            return out + ")";
          },
      },
      kind_);
}

double eval(const ConvexComponent& f, const Vector& x) {
  require_dim(f.dim(), x, "eval");
  return std::visit(
      Overloaded{
          [&](const Quadratic& q) {
            const Vector d = x - q.c;
            return 0.5 * d.dot(q.q * d);
          },
          [&](const SqDist& s) {
            const double d = distance(s.set, x);
            return 0.5 * d * d;
          },
          [&](const Sum& s) {
            double total = 0.0;
            for (const auto& t : s.terms) {
              total += eval(t, x);
            }
            return total;
          },
      },
      f.kind());
}

Vector grad(const ConvexComponent& f, const Vector& x) {
  require_dim(f.dim(), x, "grad");
  return std::visit(
      Overloaded{
          [&](const Quadratic& q) -> Vector { return q.q * (x - q.c); },
          [&](const SqDist& s) -> Vector { return x - project(s.set, x); },
          [&](const Sum& s) -> Vector {
            Vector g = Vector::Zero(x.size());
            for (const auto& t : s.terms) {
              g += grad(t, x);
            }
            return g;
          },
      },
      f.kind());
}

ConvexSet argmin_set(const ConvexComponent& f) {
  return std::visit(
      Overloaded{
          [](const Quadratic& q) -> ConvexSet {
            if (!is_positive_definite(q.q)) {
              throw UnsupportedRepresentation(
                  "argmin of a singular quadratic is an affine subspace");
            }
            return ConvexSet::point(q.c);
          },
          [](const SqDist& s) -> ConvexSet { return s.set; },
          [](const Sum&) -> ConvexSet {
            throw UnsupportedRepresentation(
                "argmin of a sum is not representable as a library set");
          },
      },
      f.kind());
}

double gradient_lipschitz(const ConvexComponent& f) {
  return std::visit(
      Overloaded{
          [](const Quadratic& q) {
            return q.q.size() == 0 ? 0.0
                                   : symmetric_eigenvalues(q.q).cwiseAbs().maxCoeff();
          },
          [](const SqDist&) { return 1.0; },
          [](const Sum& s) {
            double total = 0.0;
            for (const auto& t : s.terms) {
              total += gradient_lipschitz(t);
            }
            return total;
          },
      },
      f.kind());
}

bool is_coercive(const ConvexComponent& f) {
  return std::visit(
      Overloaded{
          [](const Quadratic& q) { return is_positive_definite(q.q); },
          [](const SqDist& s) { return s.set.is_bounded(); },
          // Library components are nonnegative, so one coercive term suffices.
          [](const Sum& s) {
            return std::any_of(s.terms.begin(), s.terms.end(),
                               [](const auto& t) { return is_coercive(t); });
          },
      },
      f.kind());
}

// ---------------------------------------------------------------------------
// ObjectiveSet

ObjectiveSet::ObjectiveSet(Eigen::Index m, std::vector<ConvexComponent> components)
    : m_(m), components_(std::move(components)) {
  if (m_ <= 0) {
    throw PreconditionError("objective dimension must be positive");
  }
  if (components_.empty()) {
    throw PreconditionError("objective set needs at least one component");
  }
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (components_[i].dim() != m_) {
      throw DimensionError("component " + std::to_string(i) +
                           " has dimension " +
                           std::to_string(components_[i].dim()) +
                           ", expected " + std::to_string(m_));
    }
  }
}

double ObjectiveSet::total(const Vector& z) const {
  double out = 0.0;
  for (const auto& f : components_) {
    out += eval(f, z);
  }
  return out;
}

Vector ObjectiveSet::total_grad(const Vector& z) const {
  Vector g = Vector::Zero(m_);
  for (const auto& f : components_) {
    g += grad(f, z);
  }
  return g;
}

double ObjectiveSet::separable(const Vector& stacked) const {
  require_dim(m_ * static_cast<Eigen::Index>(size()), stacked, "separable");
  double out = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    out += eval(components_[i], stacked.segment(static_cast<Eigen::Index>(i) * m_, m_));
  }
  return out;
}

Vector ObjectiveSet::separable_grad(const Vector& stacked) const {
  require_dim(m_ * static_cast<Eigen::Index>(size()), stacked, "separable_grad");
  Vector g(stacked.size());
  for (std::size_t i = 0; i < size(); ++i) {
    const Eigen::Index off = static_cast<Eigen::Index>(i) * m_;
    g.segment(off, m_) = grad(components_[i], stacked.segment(off, m_));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Intersections and global minimum

IntersectionResult intersection_nonempty(const std::vector<ConvexSet>& sets) {
  IntersectionResult out;
  if (sets.empty()) {
    out.detail = "no sets given";
    return out;
  }
  const Eigen::Index m = sets.front().dim();
  for (const auto& s : sets) {
    if (s.dim() != m) {
      throw DimensionError("intersection: sets differ in dimension");
    }
  }

  if (sets.size() == 1) {
    out.status = Intersection::kNonempty;
    out.witness = project(sets.front(), Vector::Zero(m));
    out.detail = "single set";
    return out;
  }

  const bool all_boxes = std::all_of(sets.begin(), sets.end(), [](const auto& s) {
    return as_box(s).has_value();
  });
  if (all_boxes) {
    Vector lo = Vector::Constant(m, -kInf);
    Vector hi = Vector::Constant(m, kInf);
    for (const auto& s : sets) {
      const BoxSet b = *as_box(s);
      lo = lo.cwiseMax(b.lower);
      hi = hi.cwiseMin(b.upper);
    }
    if ((lo.array() > hi.array()).any()) {
      out.status = Intersection::kEmpty;
      out.detail = "box intervals are disjoint in some coordinate";
      return out;
    }
    Vector w(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      w(k) = std::isfinite(lo(k)) && std::isfinite(hi(k))
                 ? 0.5 * (lo(k) + hi(k))
                 : std::clamp(0.0, lo(k), hi(k));
    }
    out.status = Intersection::kNonempty;
    out.witness = w;
    out.detail = "componentwise interval intersection";
    return out;
  }

  if (sets.size() == 2) {
    const auto a = as_ball(sets[0]);
    const auto b = as_ball(sets[1]);
    if (a && b) {
      const Vector d = b->center - a->center;
      const double dist = d.norm();
      if (dist > a->radius + b->radius) {
        out.status = Intersection::kEmpty;
        out.detail = "center distance exceeds the sum of radii";
        return out;
      }
      out.status = Intersection::kNonempty;
      if (dist == 0.0) {
        out.witness = a->center;
      } else {
        // Points c_a + s d/|d| lie in both balls for s in [lo, hi].
        const double lo = std::max(0.0, dist - b->radius);
        const double hi = std::min(a->radius, dist);
        out.witness = a->center + (0.5 * (lo + hi) / dist) * d;
      }
      out.detail = dist < a->radius + b->radius
                       ? "two-ball test: intersection has interior"
                       : "two-ball test: balls touch";
      return out;
    }
  }

  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      if (certainly_disjoint(sets[i], sets[j])) {
        out.status = Intersection::kEmpty;
        out.detail = "sets " + std::to_string(i) + " and " +
                     std::to_string(j) + " are disjoint";
        return out;
      }
    }
  }

  // Cyclic projections converge to a point of the intersection whenever it
  // is nonempty; only a verified point is reported.
  Vector x = project(sets.front(), Vector::Zero(m));
  constexpr int kMaxSweeps = 100000;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    for (const auto& s : sets) {
      x = project(s, x);
    }
    double worst = 0.0;
    for (const auto& s : sets) {
      worst = std::max(worst, distance(s, x));
    }
    if (worst <= 1e-12) {
      out.status = Intersection::kNonempty;
      out.witness = x;
      out.detail = "cyclic projections converged after " +
                   std::to_string(sweep + 1) + " sweeps";
      return out;
    }
  }
  out.detail = "cyclic projections did not certify a common point";
  return out;
}

GlobalMinimum global_min_F(const ObjectiveSet& obj) {
  const Eigen::Index m = obj.dim();
  GlobalMinimum out;

  const bool all_quadratic =
      std::all_of(obj.components().begin(), obj.components().end(),
                  [](const auto& f) { return std::holds_alternative<Quadratic>(f.kind()); });
  if (all_quadratic) {
    Matrix q_sum = Matrix::Zero(m, m);
    Vector qc_sum = Vector::Zero(m);
    for (const auto& f : obj.components()) {
      const auto& q = std::get<Quadratic>(f.kind());
      q_sum += q.q;
      qc_sum += q.q * q.c;
    }
    if (is_positive_definite(q_sum)) {
      out.minimizer = q_sum.ldlt().solve(qc_sum);
      out.value = obj.total(out.minimizer);
      out.exact = true;
      out.method = "closed form (sum Q)^-1 sum Q c";
      return out;
    }
  }

  const bool all_sqdist =
      std::all_of(obj.components().begin(), obj.components().end(),
                  [](const auto& f) { return std::holds_alternative<SqDist>(f.kind()); });
  if (all_sqdist) {
    std::vector<ConvexSet> sets;
    for (const auto& f : obj.components()) {
      sets.push_back(std::get<SqDist>(f.kind()).set);
    }
    const auto inter = intersection_nonempty(sets);
    if (inter.status == Intersection::kNonempty) {
      out.minimizer = *inter.witness;
      out.value = 0.0;
      out.exact = true;
      out.method = "common point of argmin sets";
      return out;
    }
  }

  double lip = 0.0;
  for (const auto& f : obj.components()) {
    lip += gradient_lipschitz(f);
  }
  Vector z = Vector::Zero(m);
  Vector g = obj.total_grad(z);
  if (lip > 0.0) {
    const double step = 1.0 / lip;
    constexpr long kMaxIterations = 2'000'000;
    for (long it = 0; it < kMaxIterations && g.norm() > 1e-10; ++it) {
      z -= step * g;
      g = obj.total_grad(z);
    }
  }
  out.minimizer = z;
  out.value = obj.total(z);
  out.exact = false;
  out.tolerance = g.norm();
  out.method = "gradient descent";
  return out;
}

}  // namespace optcon
