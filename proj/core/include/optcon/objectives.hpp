#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace optcon {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct PointSet {
  Vector c;
};

struct BallSet {
  Vector center;
  double radius = 0.0;
};

/// Axis-aligned box; bounds may be infinite (half-spaces, slabs).
struct BoxSet {
  Vector lower;
  Vector upper;
};

/// Closed, convex, nonempty subset of R^m.
class ConvexSet {
 public:
  using Shape = std::variant<PointSet, BallSet, BoxSet>;

  static ConvexSet point(Vector c);
  /// Ball(center, 0) is allowed and behaves as Point(center).
  static ConvexSet ball(Vector center, double radius);
  static ConvexSet box(Vector lower, Vector upper);

  Eigen::Index dim() const;
  const Shape& shape() const noexcept { return shape_; }
  bool is_bounded() const;
  bool contains(const Vector& x, double tol = 0.0) const;

  /// Distance from x to the complement of the set when x is inside
  /// (0 for boundary points and for sets with empty interior); minus the
  /// distance to the set when x is outside.
  double interior_depth(const Vector& x) const;

  std::string describe() const;

 private:
  explicit ConvexSet(Shape s) : shape_(std::move(s)) {}
  Shape shape_;
};

/// Nearest point of s to x.
Vector project(const ConvexSet& s, const Vector& x);
double distance(const ConvexSet& s, const Vector& x);

class ConvexComponent;

/// 1/2 (x-c)^T Q (x-c) with Q symmetric positive semidefinite.
struct Quadratic {
  Matrix q;
  Vector c;
};

/// 1/2 dist(x, S)^2; gradient x - P_S(x).
struct SqDist {
  ConvexSet set;
};

struct Sum {
  std::vector<ConvexComponent> terms;
};

/// C^1 convex function with a nonempty argmin, built from the closed family
/// Quadratic | SqDist | Sum.
class ConvexComponent {
 public:
  using Kind = std::variant<Quadratic, SqDist, Sum>;

  static ConvexComponent quadratic(Matrix q, Vector c);
  /// 1/2 |x - c|^2 scaled by `weight` (Q = weight * I).
  static ConvexComponent isotropic(Vector c, double weight = 1.0);
  static ConvexComponent sq_dist(ConvexSet set);
  static ConvexComponent sum(std::vector<ConvexComponent> terms);
  /// f == 0 on R^m.
  static ConvexComponent zero(Eigen::Index m);

  Eigen::Index dim() const noexcept { return dim_; }
  const Kind& kind() const noexcept { return kind_; }

  std::string describe() const;

 private:
  ConvexComponent(Kind k, Eigen::Index dim) : kind_(std::move(k)), dim_(dim) {}
  Kind kind_;
  Eigen::Index dim_;
};

double eval(const ConvexComponent& f, const Vector& x);
Vector grad(const ConvexComponent& f, const Vector& x);

/// Exact argmin as a ConvexSet. Throws UnsupportedRepresentation for a
/// singular Quadratic (affine-subspace argmin) and for Sum.
ConvexSet argmin_set(const ConvexComponent& f);

/// Lipschitz constant of the gradient.
double gradient_lipschitz(const ConvexComponent& f);

/// f(x) -> inf as |x| -> inf.
bool is_coercive(const ConvexComponent& f);

/// Per-node objectives f_1..f_N on a common R^m.
class ObjectiveSet {
 public:
  ObjectiveSet(Eigen::Index m, std::vector<ConvexComponent> components);

  Eigen::Index dim() const noexcept { return m_; }
  std::size_t size() const noexcept { return components_.size(); }
  const ConvexComponent& operator[](std::size_t i) const { return components_[i]; }
  const std::vector<ConvexComponent>& components() const noexcept { return components_; }

  /// F(z) = sum_i f_i(z).
  double total(const Vector& z) const;
  Vector total_grad(const Vector& z) const;

  /// F~(x) = sum_i f_i(x_i) on the stacked state x in R^{mN}.
  double separable(const Vector& stacked) const;
  Vector separable_grad(const Vector& stacked) const;

 private:
  Eigen::Index m_;
  std::vector<ConvexComponent> components_;
};

enum class Intersection { kNonempty, kEmpty, kUndecided };

struct IntersectionResult {
  Intersection status = Intersection::kUndecided;
  std::optional<Vector> witness;
  std::string detail;
};

/// Three-valued nonemptiness test for a family of sets. Exact for boxes
/// (and points), for a single set, and for two balls; other families use
/// cyclic projections for a witness and pairwise separation for emptiness.
IntersectionResult intersection_nonempty(const std::vector<ConvexSet>& sets);

struct GlobalMinimum {
  double value = 0.0;
  Vector minimizer;
  bool exact = false;
  /// Gradient norm of F at `minimizer` when obtained numerically.
  double tolerance = 0.0;
  std::string method;
};

/// min_z F(z) = sum_i f_i(z). Closed form for quadratics with positive-
/// definite sum and for SqDist families with a nonempty intersection;
/// otherwise gradient descent stopped at |grad F| <= 1e-10.
GlobalMinimum global_min_F(const ObjectiveSet& obj);

}  // namespace optcon
