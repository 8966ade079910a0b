#include <cmath>

#include <gtest/gtest.h>

#include "../support/convex_properties.hpp"
#include "optcon/errors.hpp"
#include "optcon/objectives.hpp"

namespace optcon {
namespace {

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }
Vector v1(double a) { return Vector::Constant(1, a); }

TEST(Sets, ProjectionExamples) {
  EXPECT_TRUE(project(ConvexSet::ball(v2(0, 0), 1.0), v2(2, 0)).isApprox(v2(1, 0)));
  EXPECT_DOUBLE_EQ(project(ConvexSet::box(v1(0), v1(1)), v1(2))(0), 1.0);
  EXPECT_TRUE(project(ConvexSet::ball(v2(0, 0), 1.0), v2(0.3, 0.2)) == v2(0.3, 0.2));
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_TRUE(project(ConvexSet::box(v2(0, -inf), v2(inf, 1)), v2(-3, 5)) == v2(0, 1));
  EXPECT_DOUBLE_EQ(distance(ConvexSet::point(v2(0, 0)), v2(3, 4)), 5.0);
}

TEST(Sets, ValidationAndDepth) {
  EXPECT_THROW(ConvexSet::ball(v2(0, 0), -1.0), PreconditionError);
  EXPECT_THROW(ConvexSet::box(v2(1, 0), v2(0, 1)), PreconditionError);
  EXPECT_THROW(project(ConvexSet::point(v2(0, 0)), v1(0)), DimensionError);
  EXPECT_DOUBLE_EQ(ConvexSet::ball(v2(0, 0), 2.0).interior_depth(v2(0.5, 0)), 1.5);
  EXPECT_DOUBLE_EQ(ConvexSet::box(v2(0, 0), v2(1, 4)).interior_depth(v2(0.25, 2)), 0.25);
  EXPECT_DOUBLE_EQ(ConvexSet::point(v2(0, 0)).interior_depth(v2(0, 0)), 0.0);
  EXPECT_FALSE(ConvexSet::box(v1(0), v1(std::numeric_limits<double>::infinity())).is_bounded());
}

TEST(Components, GradientExamples) {
  const auto q = ConvexComponent::quadratic(Matrix::Identity(2, 2), v2(1, 1));
  EXPECT_TRUE(grad(q, v2(0, 0)).isApprox(v2(-1, -1)));
  EXPECT_DOUBLE_EQ(eval(q, v2(0, 0)), 1.0);
  const auto d = ConvexComponent::sq_dist(ConvexSet::ball(v2(0, 0), 1.0));
  EXPECT_TRUE(grad(d, v2(2, 0)).isApprox(v2(1, 0)));
  EXPECT_DOUBLE_EQ(eval(d, v2(2, 0)), 0.5);
  const auto s = ConvexComponent::sum({q, d});
  EXPECT_TRUE(grad(s, v2(2, 0)).isApprox(v2(2, -1)));
  EXPECT_DOUBLE_EQ(gradient_lipschitz(s), 2.0);
}

TEST(Components, QuadraticValidation) {
  Matrix nonsym(2, 2);
  nonsym << 1, 2, 0, 1;
  EXPECT_THROW(ConvexComponent::quadratic(nonsym, v2(0, 0)), PreconditionError);
  Matrix indefinite(2, 2);
  indefinite << 1, 0, 0, -1;
  EXPECT_THROW(ConvexComponent::quadratic(indefinite, v2(0, 0)), PreconditionError);
  EXPECT_THROW(ConvexComponent::quadratic(Matrix::Identity(2, 2), v1(0)), DimensionError);
}

TEST(Components, ArgminSets) {
  const auto q = ConvexComponent::quadratic(Matrix::Identity(2, 2), v2(1, 2));
  EXPECT_TRUE(std::get<PointSet>(argmin_set(q).shape()).c == v2(1, 2));
  const auto d = ConvexComponent::sq_dist(ConvexSet::ball(v2(1, 0), 2.0));
  EXPECT_DOUBLE_EQ(std::get<BallSet>(argmin_set(d).shape()).radius, 2.0);
  Matrix singular = Matrix::Zero(2, 2);
  singular(0, 0) = 1.0;
  EXPECT_THROW(argmin_set(ConvexComponent::quadratic(singular, v2(0, 0))),
               UnsupportedRepresentation);
  EXPECT_THROW(argmin_set(ConvexComponent::sum(
                   {ConvexComponent::sq_dist(ConvexSet::point(v2(0, 0))),
                    ConvexComponent::sq_dist(ConvexSet::point(v2(3, 0)))})),
               UnsupportedRepresentation);
}

TEST(Components, Coercivity) {
  EXPECT_TRUE(is_coercive(ConvexComponent::isotropic(v2(0, 0))));
  Matrix singular = Matrix::Zero(2, 2);
  singular(0, 0) = 1.0;
  EXPECT_FALSE(is_coercive(ConvexComponent::quadratic(singular, v2(0, 0))));
  EXPECT_TRUE(is_coercive(ConvexComponent::sq_dist(ConvexSet::ball(v2(0, 0), 1.0))));
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(is_coercive(ConvexComponent::sq_dist(ConvexSet::box(v2(0, -inf), v2(1, inf)))));
  EXPECT_FALSE(is_coercive(ConvexComponent::zero(2)));
}

TEST(Intersection, ExactCases) {
  const auto a = ConvexSet::ball(v2(0, 0), 1.0);
  const auto b = ConvexSet::ball(v2(1.5, 0), 1.0);
  const auto far = ConvexSet::ball(v2(3, 0), 1.0);
  auto r = intersection_nonempty({a, b});
  ASSERT_EQ(r.status, Intersection::kNonempty);
  EXPECT_TRUE(a.contains(*r.witness, 1e-12) && b.contains(*r.witness, 1e-12));
  EXPECT_EQ(intersection_nonempty({a, far}).status, Intersection::kEmpty);
  // Tangent balls meet in one point.
  r = intersection_nonempty({a, ConvexSet::ball(v2(2, 0), 1.0)});
  ASSERT_EQ(r.status, Intersection::kNonempty);
  EXPECT_NEAR((*r.witness - v2(1, 0)).norm(), 0.0, 1e-12);
  EXPECT_EQ(intersection_nonempty({ConvexSet::point(v1(0)), ConvexSet::point(v1(3))}).status,
            Intersection::kEmpty);
  r = intersection_nonempty({ConvexSet::box(v2(0, 0), v2(2, 2)), ConvexSet::box(v2(1, 1), v2(3, 3))});
  ASSERT_EQ(r.status, Intersection::kNonempty);
}

TEST(Intersection, ThreeBallsWitnessAndSeparation) {
  const std::vector<ConvexSet> meet = {ConvexSet::ball(v2(1, 0), 1.5),
                                       ConvexSet::ball(v2(-0.5, 0.8), 1.5),
                                       ConvexSet::ball(v2(-0.5, -0.8), 1.5)};
  const auto r = intersection_nonempty(meet);
  ASSERT_EQ(r.status, Intersection::kNonempty);
  for (const auto& s : meet) EXPECT_TRUE(s.contains(*r.witness, 1e-9));
  const std::vector<ConvexSet> apart = {ConvexSet::ball(v2(0, 0), 1.0), ConvexSet::ball(v2(5, 0), 1.0),
                                        ConvexSet::box(v2(-1, -1), v2(1, 1))};
  EXPECT_EQ(intersection_nonempty(apart).status, Intersection::kEmpty);
}

TEST(GlobalMin, ClosedFormAndDescent) {
  const ObjectiveSet quad(1, {ConvexComponent::isotropic(v1(0)), ConvexComponent::isotropic(v1(3))});
  const auto gm = global_min_F(quad);
  EXPECT_TRUE(gm.exact);
  EXPECT_NEAR(gm.minimizer(0), 1.5, 1e-14);
  EXPECT_NEAR(gm.value, 2.25, 1e-14);

  // Disjoint unit balls at distance 4: F* = 2 * (1/2) 1^2 at the midpoint.
  const ObjectiveSet apart(2, {ConvexComponent::sq_dist(ConvexSet::ball(v2(0, 0), 1.0)),
                               ConvexComponent::sq_dist(ConvexSet::ball(v2(4, 0), 1.0))});
  const auto gd = global_min_F(apart);
  EXPECT_NEAR(gd.value, 1.0, 1e-9);
  EXPECT_NEAR((gd.minimizer - v2(2, 0)).norm(), 0.0, 1e-8);
}

TEST(ObjectiveSet, SeparableMatchesBlocks) {
  const ObjectiveSet obj(2, {ConvexComponent::isotropic(v2(0, 0)),
                             ConvexComponent::sq_dist(ConvexSet::ball(v2(1, 1), 0.5))});
  Vector x(4);
  x << 1, 2, 3, 4;
  EXPECT_DOUBLE_EQ(obj.separable(x), eval(obj[0], v2(1, 2)) + eval(obj[1], v2(3, 4)));
  EXPECT_TRUE(obj.separable_grad(x).tail(2).isApprox(grad(obj[1], v2(3, 4))));
  EXPECT_THROW(ObjectiveSet(2, {ConvexComponent::zero(1)}), DimensionError);
}

TEST(ConvexProperties, ProjectorAndConvexityInequalities) {
  const auto worst = testing::check_convex_properties(1000, 2024);
  EXPECT_LE(worst.variational, 1e-12);
  EXPECT_LE(worst.nonexpansive, 1e-12);
  EXPECT_LE(worst.fd_relative, 1e-5);
  EXPECT_GE(worst.fd_samples, 1000u);
  EXPECT_GE(worst.samples, 1000u);
  EXPECT_LE(worst.convexity, 1e-12);
  EXPECT_LE(worst.argmin_grad, 1e-10);
}

}  // namespace
}  // namespace optcon
