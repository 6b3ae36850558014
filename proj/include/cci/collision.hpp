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

#ifndef CCI_COLLISION_HPP_
#define CCI_COLLISION_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "cci/frank_wolfe.hpp"
#include "cci/interpolation.hpp"
#include "cci/sdf_core.hpp"

namespace cci {

/// A vertex, segment or triangle of the robot surface in world frame.
template <int Dim>
class SurfaceElement {
 public:
  static SurfaceElement vertex(const Vec<Dim>& p) { return SurfaceElement({p}); }
  static SurfaceElement segment(const Vec<Dim>& p0, const Vec<Dim>& p1) {
    if ((p1 - p0).norm() <= 1e-12) throw InvalidInput("degenerate segment element");
    return SurfaceElement({p0, p1});
  }
  static SurfaceElement triangle(const Vec<Dim>& p0, const Vec<Dim>& p1, const Vec<Dim>& p2) {
    Vec<Dim> e1 = p1 - p0, e2 = p2 - p0;
    double area2;
    if constexpr (Dim == 2) {
      area2 = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
    } else {
      area2 = e1.cross(e2).norm();
    }
    if (0.5 * area2 <= 1e-18) throw InvalidInput("degenerate triangle element");
    return SurfaceElement({p0, p1, p2});
  }

  std::span<const Vec<Dim>> points() const { return {points_.data(), points_.size()}; }
  std::size_t size() const { return points_.size(); }

  Vec<Dim> centroid() const {
    Vec<Dim> c = Vec<Dim>::Zero();
    for (const auto& p : points_) c += p;
    return c / static_cast<double>(points_.size());
  }

  Vec<Dim> at(std::span<const double> bary) const {
    Vec<Dim> x = Vec<Dim>::Zero();
    for (std::size_t i = 0; i < points_.size(); ++i) x += bary[i] * points_[i];
    return x;
  }

 private:
  explicit SurfaceElement(std::vector<Vec<Dim>> pts) : points_(std::move(pts)) {
    for (const auto& p : points_) require_finite<Dim>(p, "surface element");
  }
  std::vector<Vec<Dim>> points_;
};

struct CollisionOptions {
  int max_iters = 64;
  double tol = 1e-6;
  StepRule step = StepRule::kAwayStep;
};

template <int Dim>
struct ElementMinimum {
  Vec<Dim> witness;
  std::vector<double> bary;
  double value;
  double gap;
  int iterations;
  bool converged;
};

/// Frank-Wolfe from the element centroid of a convex field over one surface
/// element. The default rule adds away steps and exact line search; the
/// classical 2/(t+2) rule stalls near 1e-3 on edge minima of steep blends.
template <int Dim, class Field>
  requires ScalarField<Field, Dim>
ElementMinimum<Dim> frank_wolfe_min(const Field& field, const SurfaceElement<Dim>& elem,
                                    const CollisionOptions& opts = {}) {
  FrankWolfeOptions fw;
  fw.max_iters = opts.max_iters;
  fw.tol = opts.tol;
  fw.step = opts.step;
  auto r = frank_wolfe_minimize<Dim>(field, elem.points(), fw);
  return {r.x, r.weights, r.value, r.gap, r.iterations, r.converged};
}

/// Constraint field a contact belongs to: the static environment or blend j.
struct FieldRef {
  bool is_base = true;
  std::size_t blend = 0;
  bool operator==(const FieldRef&) const = default;
};

template <int Dim>
struct ContactQuery {
  std::size_t element = 0;
  FieldRef field;
  ObjectId object = 0;  // minimizing object for base queries, leaf id for blends
  Vec<Dim> witness;
  std::vector<double> bary;
  double value = 0.0;
  Vec<Dim> normal;             // unit
  double gradient_norm = 1.0;  // |grad field| at the witness
};

namespace detail {

template <int Dim>
struct InflatedShapeField {
  const ConvexShape<Dim>* shape;
  double inflate;
  double value(const Vec<Dim>& x) const { return sdf_eval(*shape, x) - inflate; }
  Vec<Dim> gradient(const Vec<Dim>& x) const { return sdf_gradient(*shape, x); }
};

template <int Dim>
struct InflatedBlendField {
  const InterpolatedSdf<Dim>* blend;
  double inflate;
  double value(const Vec<Dim>& x) const { return blend->value(x, inflate); }
  Vec<Dim> gradient(const Vec<Dim>& x) const { return blend->gradient(x, inflate); }
};

// False only if the element certainly misses the polytope: exact clipping
// for segments, a shared separating face otherwise.
template <int Dim>
bool may_intersect(const Polytope<Dim>& poly, const SurfaceElement<Dim>& elem) {
  auto pts = elem.points();
  if (pts.size() == 2) {
    double lo = 0.0, hi = 1.0;
    const Vec<Dim> d = pts[1] - pts[0];
    for (const auto& h : poly.halfspaces()) {
      double r0 = h.normal.dot(pts[0]) - h.offset, dr = h.normal.dot(d);
      if (dr == 0.0) {
        if (r0 > 0.0) return false;
        continue;
      }
      double t = -r0 / dr;
      if (dr > 0.0) hi = std::min(hi, t);
      else lo = std::max(lo, t);
      if (lo > hi + 1e-12) return false;
    }
    return true;
  }
  for (const auto& h : poly.halfspaces()) {
    bool all_out = true;
    for (const auto& p : pts) all_out = all_out && h.normal.dot(p) - h.offset > 0.0;
    if (all_out) return false;
  }
  return true;
}

// Minimum over the element of max_i (a_i . x - b_i), the polytope SDF
// wherever it is <= 0. Solved exactly as a small LP by enumerating the
// vertices of {(y, t)} where y are the free barycentric coordinates.
template <int Dim>
std::optional<std::pair<double, std::vector<double>>> penetration_lp(const Polytope<Dim>& poly,
                                                                     const SurfaceElement<Dim>& elem) {
  auto pts = elem.points();
  const int m = static_cast<int>(pts.size());  // unknowns: y_1..y_{m-1}, t
  const auto& hs = poly.halfspaces();
  const int nf = static_cast<int>(hs.size());
  if (!may_intersect(poly, elem)) return std::nullopt;
  using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
  using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;
  // Rows r . (y, t) <= c: faces, then y_i >= 0, then sum y <= 1.
  std::vector<SmallVec> rows;
  std::vector<double> rhs;
  for (const auto& h : hs) {
    SmallVec r(m);
    for (int i = 1; i < m; ++i) r[i - 1] = h.normal.dot(pts[i] - pts[0]);
    r[m - 1] = -1.0;
    rows.push_back(r);
    rhs.push_back(h.offset - h.normal.dot(pts[0]));
  }
  for (int i = 0; i < m - 1; ++i) {
    SmallVec r = SmallVec::Zero(m);
    r[i] = -1.0;
    rows.push_back(r);
    rhs.push_back(0.0);
  }
  if (m > 1) {
    SmallVec r = SmallVec::Ones(m);
    r[m - 1] = 0.0;
    rows.push_back(r);
    rhs.push_back(1.0);
  }
  const int nr = static_cast<int>(rows.size());

  double best = std::numeric_limits<double>::infinity();
  SmallVec best_z;
  std::vector<int> pick(m);
  auto visit = [&](auto&& self, int start, int depth) -> void {
    if (depth == m) {
      SmallMat a(m, m);
      SmallVec c(m);
      for (int i = 0; i < m; ++i) {
        a.row(i) = rows[pick[i]].transpose();
        c[i] = rhs[pick[i]];
      }
      Eigen::FullPivLU<SmallMat> lu(a);
      if (!lu.isInvertible()) return;
      SmallVec z = lu.solve(c);
      for (int r = 0; r < nr; ++r)
        if (rows[r].dot(z) > rhs[r] + 1e-12) return;
      if (z[m - 1] < best) {
        best = z[m - 1];
        best_z = z;
      }
      return;
    }
    for (int i = start; i < nr; ++i) {
      pick[depth] = i;
      self(self, i + 1, depth + 1);
    }
  };
  if (nf > 0) visit(visit, 0, 0);
  if (!std::isfinite(best) || best > 0.0) return std::nullopt;

  std::vector<double> bary(m);
  double rest = 1.0;
  for (int i = 1; i < m; ++i) {
    bary[i] = std::clamp(best_z[i - 1], 0.0, 1.0);
    rest -= bary[i];
  }
  bary[0] = std::max(0.0, rest);
  double sum = 0.0;
  for (double b : bary) sum += b;
  for (double& b : bary) b /= sum;
  return std::make_pair(best, bary);
}

}  // namespace detail

namespace detail {

// Minimum of a single convex shape's (inflated) SDF over the element.
template <int Dim>
ElementMinimum<Dim> shape_minimum(const ConvexShape<Dim>& shape, const SurfaceElement<Dim>& elem, double inflate,
                                  const CollisionOptions& opts) {
  const auto* poly = std::get_if<Polytope<Dim>>(&shape);
  auto lp = poly && elem.size() > 1 ? penetration_lp(*poly, elem) : std::nullopt;
  if (lp) {
    // Element penetrates the polytope: the SDF equals the max-plane function
    // there, which Frank-Wolfe handles poorly (nonsmooth).
    Vec<Dim> w = elem.at(lp->second);
    return {w, lp->second, sdf_eval(shape, w) - inflate, 0.0, 0, true};
  }
  if constexpr (Dim == 2) {
    if (elem.size() == 2) {
      // Closed form for a segment outside the shape: the minimum sits at an
      // endpoint or at the foot of a polygon vertex (sphere center).
      auto pts = elem.points();
      const Vec<Dim> a = pts[0], d = pts[1] - pts[0];
      const double len2 = d.squaredNorm();
      auto foot = [&](const Vec<Dim>& v) { return len2 > 0.0 ? std::clamp((v - a).dot(d) / len2, 0.0, 1.0) : 0.0; };
      std::vector<double> cand = {0.0, 1.0};
      if (const auto* s = std::get_if<Sphere<Dim>>(&shape)) cand.push_back(foot(s->center()));
      else
        for (const auto& v : poly->vertices()) cand.push_back(foot(v));
      double best_t = 0.0, best = std::numeric_limits<double>::infinity();
      for (double t : cand) {
        double v = sdf_eval(shape, Vec<Dim>(a + t * d));
        if (v < best) {
          best = v;
          best_t = t;
        }
      }
      std::vector<double> bary = {1.0 - best_t, best_t};
      return {elem.at(bary), bary, best - inflate, 0.0, 0, true};
    }
  }
  InflatedShapeField<Dim> field{&shape, inflate};
  return frank_wolfe_min<Dim>(field, elem, opts);
}

}  // namespace detail

/// Per-object minima of the static environment over one element. The
/// combined (min) field is not convex, but each object's SDF is.
/// `inflate` offsets every SDF (a disc robot of that radius).
template <int Dim>
std::vector<ContactQuery<Dim>> base_query_all(const ObjectSet<Dim>& env, const SurfaceElement<Dim>& elem,
                                              std::size_t element_index = 0, double inflate = 0.0,
                                              const CollisionOptions& opts = {}) {
  std::vector<ContactQuery<Dim>> out;
  out.reserve(env.size());
  for (const auto& o : env) {
    auto m = detail::shape_minimum(o.shape, elem, inflate, opts);
    ContactQuery<Dim> q;
    q.element = element_index;
    q.field = {true, 0};
    q.object = o.id;
    q.witness = m.witness;
    q.bary = m.bary;
    q.value = m.value;
    q.normal = sdf_gradient(o.shape, q.witness);
    q.gradient_norm = 1.0;
    out.push_back(std::move(q));
  }
  return out;
}

/// Deepest contact of the static environment over an element; ties go to the
/// smaller object id.
template <int Dim>
ContactQuery<Dim> base_query(const ObjectSet<Dim>& env, const SurfaceElement<Dim>& elem,
                             std::size_t element_index = 0, double inflate = 0.0,
                             const CollisionOptions& opts = {}) {
  if (env.empty()) throw DomainError("base_query on an empty environment");
  auto all = base_query_all(env, elem, element_index, inflate, opts);
  std::size_t best = 0;
  for (std::size_t i = 1; i < all.size(); ++i)
    if (all[i].value < all[best].value || (all[i].value == all[best].value && all[i].object < all[best].object))
      best = i;
  return all[best];
}

template <int Dim>
ContactQuery<Dim> blend_query(const InterpolatedSdf<Dim>& blend, const SurfaceElement<Dim>& elem,
                              std::size_t element_index = 0, std::size_t blend_index = 0,
                              ObjectId leaf_id = 0, double inflate = 0.0, const CollisionOptions& opts = {}) {
  detail::InflatedBlendField<Dim> field{&blend, inflate};
  ElementMinimum<Dim> m;
  if (blend.alpha() == 0.0 || blend.alpha() == 1.0) {
    // A single shaped SDF; f is increasing, so minimize the SDF itself.
    m = detail::shape_minimum(blend.alpha() == 0.0 ? blend.source() : blend.target(), elem, inflate, opts);
    m.value = field.value(m.witness);
  } else {
    m = frank_wolfe_min<Dim>(field, elem, opts);
  }
  ContactQuery<Dim> q;
  q.element = element_index;
  q.field = {false, blend_index};
  q.object = leaf_id;
  q.witness = m.witness;
  q.bary = m.bary;
  q.value = m.value;
  Vec<Dim> g = field.gradient(m.witness);
  double n = g.norm();
  q.gradient_norm = n;
  q.normal = n > 0.0 ? Vec<Dim>(g / n) : Vec<Dim>(Vec<Dim>::UnitX());
  return q;
}

}  // namespace cci

#endif  // CCI_COLLISION_HPP_
