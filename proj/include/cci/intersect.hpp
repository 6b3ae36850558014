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

#ifndef CCI_INTERSECT_HPP_
#define CCI_INTERSECT_HPP_

#include <span>
#include <variant>

#include "cci/frank_wolfe.hpp"
#include "cci/sdf_core.hpp"

namespace cci {

/// Touching shapes (distance 0) count as intersecting.
inline constexpr double kIntersectionTolerance = 1e-9;

namespace detail {

template <int Dim>
struct ShapeField {
  const ConvexShape<Dim>* shape;
  double value(const Vec<Dim>& x) const { return sdf_eval(*shape, x); }
  Vec<Dim> gradient(const Vec<Dim>& x) const { return sdf_gradient(*shape, x); }
};

}  // namespace detail

/// a ∩ b ≠ ∅. Sphere pairs and sphere/polytope pairs are decided from exact
/// distances; polytope pairs minimize SDF_a over b with Frank-Wolfe until the
/// best value certifies contact or the duality-gap lower bound certifies a
/// separation.
template <int Dim>
bool intersects(const ConvexShape<Dim>& a, const ConvexShape<Dim>& b) {
  const auto* sa = std::get_if<Sphere<Dim>>(&a);
  const auto* sb = std::get_if<Sphere<Dim>>(&b);
  if (sa && sb)
    return (sa->center() - sb->center()).norm() <= sa->radius() + sb->radius() + kIntersectionTolerance;
  if (sa) return sdf_eval(b, sa->center()) <= sa->radius() + kIntersectionTolerance;
  if (sb) return sdf_eval(a, sb->center()) <= sb->radius() + kIntersectionTolerance;

  const auto& pa = std::get<Polytope<Dim>>(a);
  const auto& pb = std::get<Polytope<Dim>>(b);
  // A vertex of either polytope inside the other certifies contact.
  for (const auto& v : pb.vertices())
    if (pa.max_residual(v) <= kIntersectionTolerance) return true;
  for (const auto& v : pa.vertices())
    if (pb.max_residual(v) <= kIntersectionTolerance) return true;

  FrankWolfeOptions opts;
  opts.max_iters = 4000;
  opts.tol = 0.0;
  opts.step = StepRule::kLineSearch;
  opts.accept_below = kIntersectionTolerance;
  opts.reject_above = kIntersectionTolerance;
  detail::ShapeField<Dim> field{&a};
  auto res = frank_wolfe_minimize<Dim>(field, std::span<const Vec<Dim>>(pb.vertices()), opts);
  if (res.value <= kIntersectionTolerance) return true;
  if (res.lower_bound > kIntersectionTolerance) return false;
  // Budget exhausted without a certificate: the shapes are within numerical
  // noise of touching.
  return res.value <= 1e-7;
}

}  // namespace cci

#endif  // CCI_INTERSECT_HPP_
