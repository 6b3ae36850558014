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

#ifndef CCI_SDF_CORE_HPP_
#define CCI_SDF_CORE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace cci {

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;
using V2 = Vec<2>;

using ObjectId = std::int64_t;

struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct LookupError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

template <int Dim>
inline bool all_finite(const Vec<Dim>& x) {
  return x.allFinite();
}

template <int Dim>
inline void require_finite(const Vec<Dim>& x, const char* what) {
  if (!x.allFinite()) throw InvalidInput(std::string(what) + ": non-finite coordinates");
}

namespace tolerance {
inline constexpr double kVertexFeasibility = 1e-9;
inline constexpr double kFaceSupport = 1e-7;
inline constexpr double kNormalUnit = 1e-12;
inline constexpr double kMinInteriorRadius = 1e-9;
inline constexpr double kProjectionMove = 1e-10;
inline constexpr int kProjectionSweeps = 200;
}  // namespace tolerance

/// Ball of positive radius.
template <int Dim>
class Sphere {
  static_assert(Dim == 2 || Dim == 3, "only 2D and 3D shapes are supported");

 public:
  Sphere(const Vec<Dim>& center, double radius) : center_(center), radius_(radius) {
    require_finite<Dim>(center, "sphere center");
    if (!std::isfinite(radius) || radius <= 0.0)
      throw InvalidInput("sphere radius must be positive and finite");
  }

  const Vec<Dim>& center() const { return center_; }
  double radius() const { return radius_; }

 private:
  Vec<Dim> center_;
  double radius_;
};

template <int Dim>
struct Halfspace {
  Vec<Dim> normal;  // unit length
  double offset;    // normal . x <= offset
};

/// Bounded convex polytope with both a halfspace and a vertex description.
///
/// The two descriptions are cross-checked at construction: every vertex is
/// feasible, every halfspace is supported by some vertex, the recession cone
/// is trivial and the interior is nonempty.
template <int Dim>
class Polytope {
  static_assert(Dim == 2 || Dim == 3, "only 2D and 3D shapes are supported");

 public:
  using Point = Vec<Dim>;

  Polytope(std::vector<Halfspace<Dim>> halfspaces, std::vector<Point> vertices)
      : halfspaces_(std::move(halfspaces)), vertices_(std::move(vertices)) {
    normalize_halfspaces();
    validate();
  }

  /// Builds from halfspaces alone. Vertices are enumerated in 2D; 3D callers
  /// must supply vertices explicitly.
  static Polytope from_halfspaces(std::vector<Halfspace<Dim>> halfspaces) {
    if constexpr (Dim == 2) {
      normalize(halfspaces);
      return Polytope(halfspaces, enumerate_vertices_2d(halfspaces));
    } else {
      throw InvalidInput("3D polytopes require explicit vertices");
    }
  }

  /// Convex hull of a 2D point set (counter-clockwise), converted to halfspaces.
  static Polytope from_vertices(std::vector<Point> points) {
    if constexpr (Dim == 2) {
      auto hull = convex_hull_2d(std::move(points));
      if (hull.size() < 3) throw InvalidInput("polygon needs at least 3 non-collinear vertices");
      std::vector<Halfspace<Dim>> hs;
      for (std::size_t i = 0; i < hull.size(); ++i) {
        const Point& p = hull[i];
        const Point& q = hull[(i + 1) % hull.size()];
        Point n(q.y() - p.y(), p.x() - q.x());
        n.normalize();
        hs.push_back({n, n.dot(p)});
      }
      return Polytope(std::move(hs), std::move(hull));
    } else {
      throw InvalidInput("from_vertices is only available in 2D");
    }
  }

  /// Axis-aligned box, optionally rotated about its center (2D only).
  static Polytope box(const Point& center, const Point& half_extents, double angle = 0.0) {
    if ((half_extents.array() <= 0.0).any()) throw InvalidInput("box half extents must be positive");
    if constexpr (Dim == 2) {
      Eigen::Matrix2d rot = Eigen::Rotation2Dd(angle).toRotationMatrix();
      std::vector<Point> corners;
      for (int sx : {-1, 1})
        for (int sy : {-1, 1})
          corners.push_back(center + rot * Point(sx * half_extents.x(), sy * half_extents.y()));
      return from_vertices(std::move(corners));
    } else {
      if (angle != 0.0) throw InvalidInput("rotated boxes are only available in 2D");
      std::vector<Halfspace<Dim>> hs;
      for (int axis = 0; axis < Dim; ++axis) {
        Point n = Point::Zero();
        n[axis] = 1.0;
        hs.push_back({n, center[axis] + half_extents[axis]});
        hs.push_back({-n, -(center[axis] - half_extents[axis])});
      }
      std::vector<Point> verts;
      for (int mask = 0; mask < (1 << Dim); ++mask) {
        Point v = center;
        for (int axis = 0; axis < Dim; ++axis)
          v[axis] += ((mask >> axis) & 1 ? 1.0 : -1.0) * half_extents[axis];
        verts.push_back(v);
      }
      return Polytope(std::move(hs), std::move(verts));
    }
  }

  const std::vector<Halfspace<Dim>>& halfspaces() const { return halfspaces_; }
  const std::vector<Point>& vertices() const { return vertices_; }

  bool contains(const Point& x, double tol = 0.0) const {
    for (const auto& h : halfspaces_)
      if (h.normal.dot(x) - h.offset > tol) return false;
    return true;
  }

  /// Largest constraint residual a.x - b (negative inside).
  double max_residual(const Point& x) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& h : halfspaces_) worst = std::max(worst, h.normal.dot(x) - h.offset);
    return worst;
  }

  Point centroid() const {
    Point c = Point::Zero();
    for (const auto& v : vertices_) c += v;
    return c / static_cast<double>(vertices_.size());
  }

  /// Euclidean projection of an exterior point onto the polytope.
  ///
  /// Single-face projections are tried first (exact whenever feasible).
  /// Otherwise Dykstra's alternating projections run over the halfspaces and
  /// the result is snapped to the exact KKT point of its near-active set.
  Point project(const Point& x) const {
    if (contains(x)) return x;

    double best_single = std::numeric_limits<double>::infinity();
    Point best_point = x;
    for (const auto& h : halfspaces_) {
      double r = h.normal.dot(x) - h.offset;
      if (r <= 0.0) continue;
      Point p = x - r * h.normal;
      if (max_residual(p) <= 1e-12 && r < best_single) {
        best_single = r;
        best_point = p;
      }
    }
    if (std::isfinite(best_single)) return best_point;
    if constexpr (Dim == 2) {
      // No face interior is closest, so a vertex is.
      for (const auto& v : vertices_)
        if ((v - x).squaredNorm() < (best_point - x).squaredNorm() || best_point == x) best_point = v;
      return best_point;
    }

    const std::size_t m = halfspaces_.size();
    std::vector<Point> increments(m, Point::Zero());
    Point y = x;
    for (int sweep = 0; sweep < tolerance::kProjectionSweeps; ++sweep) {
      Point start = y;
      for (std::size_t i = 0; i < m; ++i) {
        const auto& h = halfspaces_[i];
        Point z = y + increments[i];
        double r = h.normal.dot(z) - h.offset;
        Point next = r > 0.0 ? Point(z - r * h.normal) : z;
        increments[i] = z - next;
        y = next;
      }
      if ((y - start).norm() < tolerance::kProjectionMove) break;
    }
    return polish_projection(x, y);
  }

 private:
  static void normalize(std::vector<Halfspace<Dim>>& hs) {
    for (auto& h : hs) {
      require_finite<Dim>(h.normal, "halfspace normal");
      if (!std::isfinite(h.offset)) throw InvalidInput("halfspace offset is not finite");
      double n = h.normal.norm();
      if (n < 1e-300) throw InvalidInput("halfspace normal is zero");
      h.normal /= n;
      h.offset /= n;
    }
  }

  void normalize_halfspaces() { normalize(halfspaces_); }

  void validate() const {
    if (halfspaces_.size() < static_cast<std::size_t>(Dim + 1))
      throw InvalidInput("polytope needs at least Dim+1 halfspaces to be bounded");
    if (vertices_.size() < static_cast<std::size_t>(Dim + 1))
      throw InvalidInput("polytope needs at least Dim+1 vertices");
    for (const auto& h : halfspaces_)
      if (std::abs(h.normal.norm() - 1.0) > tolerance::kNormalUnit)
        throw InvalidInput("halfspace normal is not unit length");
    for (const auto& v : vertices_) {
      require_finite<Dim>(v, "polytope vertex");
      if (max_residual(v) > tolerance::kVertexFeasibility)
        throw InvalidInput("polytope vertex violates a halfspace");
    }
    for (const auto& h : halfspaces_) {
      double support = -std::numeric_limits<double>::infinity();
      for (const auto& v : vertices_) support = std::max(support, h.normal.dot(v));
      if (support < h.offset - tolerance::kFaceSupport)
        throw InvalidInput("halfspace is not supported by any vertex (redundant or inconsistent)");
    }
    if (!bounded()) throw InvalidInput("polytope is unbounded");
    const Point c = centroid();
    if (-max_residual(c) <= tolerance::kMinInteriorRadius)
      throw InvalidInput("polytope has empty interior");
  }

  // The recession cone {d : A d <= 0} is trivial iff none of its candidate
  // extreme rays is feasible. In 2D the rays are perpendiculars of normals,
  // in 3D cross products of normal pairs.
  bool bounded() const {
    auto ray_feasible = [&](const Point& d) {
      if (d.norm() < 1e-12) return false;
      Point u = d.normalized();
      for (const auto& h : halfspaces_)
        if (h.normal.dot(u) > 1e-12) return false;
      return true;
    };
    const std::size_t m = halfspaces_.size();
    for (std::size_t i = 0; i < m; ++i) {
      if constexpr (Dim == 2) {
        Point perp(-halfspaces_[i].normal.y(), halfspaces_[i].normal.x());
        if (ray_feasible(perp) || ray_feasible(-perp)) return false;
      } else {
        for (std::size_t j = i + 1; j < m; ++j) {
          Point d = halfspaces_[i].normal.cross(halfspaces_[j].normal);
          if (ray_feasible(d) || ray_feasible(-d)) return false;
        }
      }
    }
    return true;
  }

  static std::vector<Point> enumerate_vertices_2d(const std::vector<Halfspace<Dim>>& hs) {
    std::vector<Point> pts;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      for (std::size_t j = i + 1; j < hs.size(); ++j) {
        Eigen::Matrix2d a;
        a.row(0) = hs[i].normal.transpose();
        a.row(1) = hs[j].normal.transpose();
        double det = a.determinant();
        if (std::abs(det) < 1e-12) continue;
        Point p = a.inverse() * Point(hs[i].offset, hs[j].offset);
        bool feasible = true;
        for (const auto& h : hs)
          if (h.normal.dot(p) - h.offset > tolerance::kVertexFeasibility) feasible = false;
        if (!feasible) continue;
        bool dup = false;
        for (const auto& q : pts)
          if ((q - p).norm() < 1e-9) dup = true;
        if (!dup) pts.push_back(p);
      }
    }
    if (pts.size() < 3) throw InvalidInput("halfspaces do not bound a polygon with nonempty interior");
    Point c = Point::Zero();
    for (const auto& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    std::sort(pts.begin(), pts.end(), [&](const Point& a, const Point& b) {
      return std::atan2(a.y() - c.y(), a.x() - c.x()) < std::atan2(b.y() - c.y(), b.x() - c.x());
    });
    return pts;
  }

  // Andrew's monotone chain; drops collinear points.
  static std::vector<Point> convex_hull_2d(std::vector<Point> pts) {
    for (const auto& p : pts) require_finite<Dim>(p, "polygon vertex");
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
      return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Point& a, const Point& b) { return (a - b).norm() < 1e-12; }),
              pts.end());
    if (pts.size() < 3) return pts;
    auto cross = [](const Point& o, const Point& a, const Point& b) {
      return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-14) --k;
      hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
      while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 1e-14) --k;
      hull[k++] = pts[i - 1];
    }
    hull.resize(k - 1);
    return hull;
  }

  // Exact projection onto the affine set of some subset (size <= Dim) of the
  // halfspaces that are nearly active at the Dykstra iterate. A subset is
  // accepted when its multipliers are nonnegative and the point is feasible.
  Point polish_projection(const Point& x, const Point& approx) const {
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < halfspaces_.size(); ++i) {
      const auto& h = halfspaces_[i];
      if (h.normal.dot(approx) - h.offset > -1e-4 || h.normal.dot(x) - h.offset > 0.0) active.push_back(i);
    }
    Point best = approx;
    double best_dist = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> subset;
    auto try_subset = [&]() {
      const int k = static_cast<int>(subset.size());
      Eigen::Matrix<double, Eigen::Dynamic, Dim> a(k, Dim);
      Eigen::VectorXd b(k);
      for (int r = 0; r < k; ++r) {
        a.row(r) = halfspaces_[subset[r]].normal.transpose();
        b[r] = halfspaces_[subset[r]].offset;
      }
      Eigen::MatrixXd gram = a * a.transpose();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
      if (lu.rank() < k) return;
      Eigen::VectorXd lambda = lu.solve(a * x - b);
      if ((lambda.array() < -1e-12).any()) return;
      Point p = x - a.transpose() * lambda;
      if (max_residual(p) > 1e-10) return;
      double d = (p - x).norm();
      if (d < best_dist) {
        best_dist = d;
        best = p;
      }
    };
    // Enumerate subsets of size 1..Dim of the near-active set; if the Dykstra
    // iterate was too coarse to expose the right faces, widen to all faces.
    auto enumerate = [&](const std::vector<std::size_t>& cand) {
      const std::size_t na = cand.size();
      for (std::size_t i = 0; i < na; ++i) {
        subset = {cand[i]};
        try_subset();
        for (std::size_t j = i + 1; j < na; ++j) {
          subset = {cand[i], cand[j]};
          try_subset();
          if constexpr (Dim == 3) {
            for (std::size_t l = j + 1; l < na; ++l) {
              subset = {cand[i], cand[j], cand[l]};
              try_subset();
            }
          }
        }
      }
    };
    enumerate(active);
    if (!std::isfinite(best_dist)) {
      std::vector<std::size_t> all(halfspaces_.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      enumerate(all);
    }
    return best;
  }

  std::vector<Halfspace<Dim>> halfspaces_;
  std::vector<Point> vertices_;
};

template <int Dim>
using ConvexShape = std::variant<Sphere<Dim>, Polytope<Dim>>;

/// Exact signed distance: negative inside, positive outside.
template <int Dim>
double sdf_eval(const ConvexShape<Dim>& shape, const Vec<Dim>& x) {
  require_finite<Dim>(x, "query point");
  if (const auto* s = std::get_if<Sphere<Dim>>(&shape)) return (x - s->center()).norm() - s->radius();
  const auto& p = std::get<Polytope<Dim>>(shape);
  double worst = p.max_residual(x);
  if (worst <= 0.0) return worst;  // -min_i (b_i - a_i.x)
  return (x - p.project(x)).norm();
}

/// Unit-norm (sub)gradient of sdf_eval.
template <int Dim>
Vec<Dim> sdf_gradient(const ConvexShape<Dim>& shape, const Vec<Dim>& x) {
  require_finite<Dim>(x, "query point");
  if (const auto* s = std::get_if<Sphere<Dim>>(&shape)) {
    Vec<Dim> d = x - s->center();
    double n = d.norm();
    if (n == 0.0) return Vec<Dim>::UnitX();
    return d / n;
  }
  const auto& p = std::get<Polytope<Dim>>(shape);
  if (p.max_residual(x) <= 0.0) {
    // Interior: normal of the nearest face, smallest index on ties.
    std::size_t best = 0;
    double best_slack = std::numeric_limits<double>::infinity();
    const auto& hs = p.halfspaces();
    for (std::size_t i = 0; i < hs.size(); ++i) {
      double slack = hs[i].offset - hs[i].normal.dot(x);
      if (slack < best_slack) {
        best_slack = slack;
        best = i;
      }
    }
    return hs[best].normal;
  }
  Vec<Dim> d = x - p.project(x);
  return d / d.norm();
}

/// argmin over the shape of <direction, y>; the linear minimization oracle
/// used by Frank-Wolfe.
template <int Dim>
Vec<Dim> linear_minimizer(const ConvexShape<Dim>& shape, const Vec<Dim>& direction) {
  if (const auto* s = std::get_if<Sphere<Dim>>(&shape)) {
    double n = direction.norm();
    if (n == 0.0) return s->center();
    return s->center() - s->radius() * direction / n;
  }
  const auto& verts = std::get<Polytope<Dim>>(shape).vertices();
  std::size_t best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < verts.size(); ++i) {
    double v = direction.dot(verts[i]);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  return verts[best];
}

template <int Dim>
Vec<Dim> shape_center(const ConvexShape<Dim>& shape) {
  if (const auto* s = std::get_if<Sphere<Dim>>(&shape)) return s->center();
  return std::get<Polytope<Dim>>(shape).centroid();
}

/// Direct membership test, independent of the distance computation.
template <int Dim>
bool shape_contains(const ConvexShape<Dim>& shape, const Vec<Dim>& x) {
  if (const auto* s = std::get_if<Sphere<Dim>>(&shape)) return (x - s->center()).norm() <= s->radius();
  return std::get<Polytope<Dim>>(shape).contains(x);
}

/// Axis-aligned bounding box of a shape.
template <int Dim>
std::pair<Vec<Dim>, Vec<Dim>> shape_bounds(const ConvexShape<Dim>& shape) {
  if (const auto* s = std::get_if<Sphere<Dim>>(&shape)) {
    Vec<Dim> r = Vec<Dim>::Constant(s->radius());
    return {s->center() - r, s->center() + r};
  }
  const auto& verts = std::get<Polytope<Dim>>(shape).vertices();
  Vec<Dim> lo = verts.front(), hi = verts.front();
  for (const auto& v : verts) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return {lo, hi};
}

template <int Dim>
struct Object {
  ObjectId id;
  ConvexShape<Dim> shape;
};

/// Ordered collection of convex objects with unique ids.
template <int Dim>
class ObjectSet {
 public:
  ObjectSet() = default;
  explicit ObjectSet(std::vector<Object<Dim>> objects) {
    for (auto& o : objects) add(o.id, std::move(o.shape));
  }

  void add(ObjectId id, ConvexShape<Dim> shape) {
    if (contains_id(id)) throw InvalidInput("duplicate object id " + std::to_string(id));
    objects_.push_back({id, std::move(shape)});
  }

  bool contains_id(ObjectId id) const {
    return std::any_of(objects_.begin(), objects_.end(), [&](const auto& o) { return o.id == id; });
  }

  const Object<Dim>& at(ObjectId id) const {
    for (const auto& o : objects_)
      if (o.id == id) return o;
    throw LookupError("unknown object id " + std::to_string(id));
  }

  std::vector<ObjectId> ids() const {
    std::vector<ObjectId> out;
    out.reserve(objects_.size());
    for (const auto& o : objects_) out.push_back(o.id);
    return out;
  }

  /// Subset in the order of `ids`.
  ObjectSet subset(const std::vector<ObjectId>& ids) const {
    ObjectSet out;
    for (ObjectId id : ids) out.add(id, at(id).shape);
    return out;
  }

  const std::vector<Object<Dim>>& objects() const { return objects_; }
  std::size_t size() const { return objects_.size(); }
  bool empty() const { return objects_.empty(); }
  auto begin() const { return objects_.begin(); }
  auto end() const { return objects_.end(); }

 private:
  std::vector<Object<Dim>> objects_;
};

struct CombinedValue {
  double value;
  ObjectId id;
};

/// min over objects of sdf_eval; ties go to the smallest id.
template <int Dim>
CombinedValue combined_sdf(const ObjectSet<Dim>& set, const Vec<Dim>& x) {
  if (set.empty()) throw DomainError("combined_sdf of an empty object set");
  CombinedValue best{std::numeric_limits<double>::infinity(), 0};
  for (const auto& o : set) {
    double v = sdf_eval(o.shape, x);
    if (v < best.value || (v == best.value && o.id < best.id)) best = {v, o.id};
  }
  return best;
}

inline bool occupied(double g_value) { return g_value <= 0.0; }

}  // namespace cci

#endif  // CCI_SDF_CORE_HPP_
