// Copyright 2026 The cci Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cci/sdf_core.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"

namespace cci {
namespace {

using testing::V2;
using V3 = Vec<3>;

ConvexShape<2> unit_sphere() { return Sphere<2>(V2::Zero(), 1.0); }
ConvexShape<2> unit_square() { return Polytope<2>::box(V2::Zero(), V2(1.0, 1.0)); }

TEST(SdfEval, SphereCenterAndOutside) {
  EXPECT_DOUBLE_EQ(sdf_eval(unit_sphere(), V2(0, 0)), -1.0);
  EXPECT_DOUBLE_EQ(sdf_eval(unit_sphere(), V2(2, 0)), 1.0);
}

TEST(SdfEval, SquareCornerUsesTrueDistance) {
  // Oracle: nearest point over a dense sampling of the square's boundary.
  const auto& sq = std::get<Polytope<2>>(unit_square());
  double oracle = testing::sampled_boundary_distance(sq, V2(2, 2));
  EXPECT_NEAR(oracle, std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(sdf_eval(unit_square(), V2(2, 2)), oracle, 1e-6);
  EXPECT_GT(sdf_eval(unit_square(), V2(2, 2)), 1.0 + 0.4);
}

TEST(SdfEval, SquareInteriorAndFace) {
  EXPECT_DOUBLE_EQ(sdf_eval(unit_square(), V2(0.5, 0.0)), -0.5);
  EXPECT_NEAR(sdf_eval(unit_square(), V2(3.0, 0.25)), 2.0, 1e-12);
  EXPECT_NEAR(sdf_eval(unit_square(), V2(1.0, 0.0)), 0.0, 1e-15);
}

TEST(SdfEval, NonFiniteInputRejected) {
  EXPECT_THROW(sdf_eval(unit_square(), V2(std::nan(""), 0.0)), InvalidInput);
  EXPECT_THROW(sdf_gradient(unit_sphere(), V2(0.0, INFINITY)), InvalidInput);
}

TEST(SdfGradient, Examples) {
  EXPECT_TRUE(sdf_gradient(unit_sphere(), V2(2, 0)).isApprox(V2(1, 0)));
  EXPECT_TRUE(sdf_gradient(unit_square(), V2(0.5, 0)).isApprox(V2(1, 0)));

  auto f = [](const V2& x) { return sdf_eval(unit_square(), x); };
  V2 fd = testing::central_difference<2>(f, V2(2, 2));
  V2 g = sdf_gradient(unit_square(), V2(2, 2));
  EXPECT_LE(testing::relative_error(g, fd), 1e-5);
  EXPECT_NEAR(g.x(), 1.0 / std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(g.y(), 1.0 / std::sqrt(2.0), 1e-9);
}

TEST(ConvexShapeValidation, Sphere) {
  EXPECT_THROW(Sphere<2>(V2::Zero(), 0.0), InvalidInput);
  EXPECT_THROW(Sphere<2>(V2::Zero(), -1.0), InvalidInput);
  EXPECT_THROW(Sphere<2>(V2(NAN, 0), 1.0), InvalidInput);
}

TEST(ConvexShapeValidation, Polytope) {
  using H = Halfspace<2>;
  // Unbounded strip.
  EXPECT_THROW(Polytope<2>::from_halfspaces({H{V2(1, 0), 1}, H{V2(-1, 0), 1}, H{V2(0, 1), 1}}), InvalidInput);
  // Redundant halfspace: not supported by any vertex.
  EXPECT_THROW(Polytope<2>::from_halfspaces(
                   {H{V2(1, 0), 1}, H{V2(-1, 0), 1}, H{V2(0, 1), 1}, H{V2(0, -1), 1}, H{V2(1, 1), 5}}),
               InvalidInput);
  // Empty interior (degenerate box).
  EXPECT_THROW(Polytope<2>::from_halfspaces({H{V2(1, 0), 0}, H{V2(-1, 0), 0}, H{V2(0, 1), 1}, H{V2(0, -1), 1}}),
               InvalidInput);
  // Vertex violating a halfspace.
  EXPECT_THROW(Polytope<2>({H{V2(1, 0), 1}, H{V2(-1, 0), 1}, H{V2(0, 1), 1}, H{V2(0, -1), 1}},
                           {V2(1, 1), V2(-1, 1), V2(-1, -1), V2(1.5, -1)}),
               InvalidInput);
  // Non-unit normals are normalized.
  auto p = Polytope<2>::from_halfspaces({H{V2(2, 0), 2}, H{V2(-1, 0), 1}, H{V2(0, 3), 3}, H{V2(0, -1), 1}});
  for (const auto& h : p.halfspaces()) EXPECT_NEAR(h.normal.norm(), 1.0, 1e-12);
  EXPECT_EQ(p.vertices().size(), 4u);
}

TEST(ConvexShapeValidation, ThreeDimensionalNeedsVertices) {
  using H = Halfspace<3>;
  std::vector<H> hs{{V3::UnitX(), 1}, {-V3::UnitX(), 1}, {V3::UnitY(), 1},
                    {-V3::UnitY(), 1}, {V3::UnitZ(), 1}, {-V3::UnitZ(), 1}};
  EXPECT_THROW(Polytope<3>::from_halfspaces(hs), InvalidInput);
  auto cube = Polytope<3>::box(V3::Zero(), V3::Ones());
  ConvexShape<3> s = cube;
  EXPECT_NEAR(sdf_eval(s, V3(2, 2, 2)), std::sqrt(3.0), 1e-9);
  EXPECT_NEAR(sdf_eval(s, V3(2, 2, 0)), std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(sdf_eval(s, V3(0.5, 0, 0)), -0.5, 1e-12);
  V3 g = sdf_gradient(s, V3(2, 2, 2));
  EXPECT_TRUE(g.isApprox(V3::Ones().normalized(), 1e-9));
}

TEST(CombinedSdf, Examples) {
  ObjectSet<2> set;
  set.add(0, Sphere<2>(V2(0, 0), 1.0));
  set.add(1, Sphere<2>(V2(3, 0), 1.0));
  auto a = combined_sdf(set, V2(0, 0));
  EXPECT_DOUBLE_EQ(a.value, -1.0);
  EXPECT_EQ(a.id, 0);
  auto b = combined_sdf(set, V2(1.5, 0));
  EXPECT_DOUBLE_EQ(b.value, 0.5);
  EXPECT_EQ(b.id, 0);
  EXPECT_THROW(combined_sdf(ObjectSet<2>{}, V2(0, 0)), DomainError);
  EXPECT_THROW(set.add(1, Sphere<2>(V2(0, 0), 1.0)), InvalidInput);
  EXPECT_THROW(set.at(7), LookupError);
}

TEST(CombinedSdf, MatchesPerObjectMinimum) {
  std::mt19937_64 rng(11);
  ObjectSet<2> set;
  for (int i = 0; i < 5; ++i) set.add(10 - i, testing::random_shape(rng, testing::random_point(rng, -2, 2), 0.8));
  for (int k = 0; k < 100; ++k) {
    V2 x = testing::random_point(rng, -3, 3);
    double direct = std::numeric_limits<double>::infinity();
    for (const auto& o : set) direct = std::min(direct, sdf_eval(o.shape, x));
    EXPECT_EQ(combined_sdf(set, x).value, direct);
  }
}

TEST(Occupied, Boundary) {
  EXPECT_TRUE(occupied(0.0));
  EXPECT_TRUE(occupied(-0.3));
  EXPECT_FALSE(occupied(1e-12));
}

TEST(SdfProperties, ExteriorDistanceMatchesEdgeOracle) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 400; ++k) {
    auto p = testing::random_polygon(rng, V2::Zero(), 1.0);
    V2 x = testing::random_point(rng, -2.5, 2.5);
    EXPECT_NEAR(sdf_eval<2>(p, x), testing::polygon_sdf_by_edges(p, x), 1e-9);
  }
}

TEST(SdfProperties, SignMatchesMembership) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 1000; ++k) {
    auto s = testing::random_shape(rng, testing::random_point(rng, -1, 1), 1.0);
    V2 x = testing::random_point(rng, -2.5, 2.5);
    EXPECT_EQ(occupied(sdf_eval(s, x)), testing::member(s, x));
  }
}

TEST(SdfProperties, LipschitzAndConvex) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 500; ++k) {
    auto s = testing::random_shape(rng, V2::Zero(), 1.0);
    V2 x = testing::random_point(rng, -2.5, 2.5), y = testing::random_point(rng, -2.5, 2.5);
    double fx = sdf_eval(s, x), fy = sdf_eval(s, y);
    EXPECT_LE(std::abs(fx - fy), (x - y).norm() + 1e-12);
    double lam = testing::uniform(rng, 0, 1);
    EXPECT_LE(sdf_eval(s, V2(lam * x + (1 - lam) * y)), lam * fx + (1 - lam) * fy + 1e-8);
  }
}

TEST(SdfProperties, OccupiedSpaceOfMinIsUnion) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 500; ++k) {
    auto a = testing::random_shape(rng, testing::random_point(rng, -1, 1), 1.0);
    auto b = testing::random_shape(rng, testing::random_point(rng, -1, 1), 1.0);
    V2 x = testing::random_point(rng, -2.5, 2.5);
    double ga = sdf_eval(a, x), gb = sdf_eval(b, x);
    EXPECT_EQ(occupied(std::min(ga, gb)), occupied(ga) || occupied(gb));
  }
}

TEST(SdfProperties, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(13);
  int checked = 0;
  while (checked < 300) {
    auto s = testing::random_shape(rng, V2::Zero(), 1.0);
    V2 x = testing::random_point(rng, -2.5, 2.5);
    auto f = [&](const V2& y) { return sdf_eval(s, y); };
    V2 fd = testing::central_difference<2>(f, x);
    // Skip nonsmooth loci (interior medial axis) where one-sided slopes differ.
    V2 fd_wide = testing::central_difference<2>(f, x, 1e-4);
    if ((fd - fd_wide).norm() > 1e-3) continue;
    EXPECT_LE(testing::relative_error(sdf_gradient(s, x), fd), 1e-5);
    EXPECT_NEAR(sdf_gradient(s, x).norm(), 1.0, 1e-12);
    ++checked;
  }
}

}  // namespace
}  // namespace cci
