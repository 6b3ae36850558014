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

// Path optimization over glue steps: a trust-region SQP per interpolation
// value, driven by the outer loop over leaf sets and alpha. 2D only.

#ifndef CCI_PLANNER_HPP_
#define CCI_PLANNER_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "cci/collision.hpp"
#include "cci/interpolation.hpp"
#include "cci/qp.hpp"
#include "cci/sdf_core.hpp"
#include "cci/sequencer.hpp"

namespace cci {

class ModeError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

enum class ConfigSpace { kR2, kSE2 };

inline int dof(ConfigSpace s) { return s == ConfigSpace::kR2 ? 2 : 3; }

/// Wraps to (-pi, pi].
inline double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * M_PI);
  return w <= -M_PI ? w + 2.0 * M_PI : w;
}

/// Waypoints as columns of a dof x T matrix. Headings are unwrapped.
struct Path {
  ConfigSpace space = ConfigSpace::kR2;
  Eigen::MatrixXd q;

  int size() const { return static_cast<int>(q.cols()); }
  V2 position(int t) const { return q.col(t).head<2>(); }
  double heading(int t) const { return space == ConfigSpace::kSE2 ? q(2, t) : 0.0; }
  Eigen::VectorXd flat() const { return Eigen::Map<const Eigen::VectorXd>(q.data(), q.size()); }
  void set_flat(const Eigen::VectorXd& v) { q = Eigen::Map<const Eigen::MatrixXd>(v.data(), q.rows(), q.cols()); }
};

inline ConfigSpace space_of(const Eigen::VectorXd& config) {
  if (config.size() == 2) return ConfigSpace::kR2;
  if (config.size() == 3) return ConfigSpace::kSE2;
  throw InvalidInput("configuration must have 2 (x, y) or 3 (x, y, theta) entries");
}

/// Straight line in configuration space; the heading takes the shorter arc.
inline Path initialize_path(const Eigen::VectorXd& start, const Eigen::VectorXd& goal, int T) {
  if (T < 2) throw InvalidInput("path needs at least 2 waypoints");
  ConfigSpace s = space_of(start);
  if (space_of(goal) != s) throw InvalidInput("start and goal configuration spaces differ");
  if (!start.allFinite() || !goal.allFinite()) throw InvalidInput("non-finite start or goal");
  Eigen::VectorXd delta = goal - start;
  if (s == ConfigSpace::kSE2) delta[2] = wrap_angle(delta[2]);
  Path p{s, Eigen::MatrixXd(start.size(), T)};
  for (int t = 0; t < T; ++t) p.q.col(t) = start + (static_cast<double>(t) / (T - 1)) * delta;
  return p;
}

// ---------------------------------------------------------------------------
// Robot

class RobotModel {
 public:
  enum class Kind { kPoint, kDisc, kPolygon };

  static RobotModel point() { return RobotModel(Kind::kPoint, 0.0, {}, 1.0); }
  static RobotModel disc(double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidInput("disc radius must be positive");
    return RobotModel(Kind::kDisc, radius, {}, 1.0);
  }
  /// Body-frame polygon (simple, either orientation). `density` is the
  /// number of surface segments per unit perimeter.
  static RobotModel polygon(std::vector<V2> vertices, double density) {
    if (!(density > 0.0)) throw InvalidInput("sampling density must be positive");
    if (vertices.size() < 3) throw InvalidInput("polygon robot needs at least 3 vertices");
    const std::size_t n = vertices.size();
    double area2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      require_finite<2>(vertices[i], "robot vertex");
      const V2& a = vertices[i];
      const V2& b = vertices[(i + 1) % n];
      area2 += a.x() * b.y() - a.y() * b.x();
    }
    if (std::abs(area2) <= 1e-12) throw InvalidInput("polygon robot has zero area");
    auto cross = [](const V2& a, const V2& b) { return a.x() * b.y() - a.y() * b.x(); };
    auto crosses = [&](const V2& p1, const V2& p2, const V2& p3, const V2& p4) {
      double d1 = cross(p4 - p3, p1 - p3), d2 = cross(p4 - p3, p2 - p3);
      double d3 = cross(p2 - p1, p3 - p1), d4 = cross(p2 - p1, p4 - p1);
      return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
    };
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        if (crosses(vertices[i], vertices[(i + 1) % n], vertices[j], vertices[(j + 1) % n]))
          throw InvalidInput("polygon robot is not simple");
      }
    return RobotModel(Kind::kPolygon, 0.0, std::move(vertices), density);
  }

  Kind kind() const { return kind_; }
  double radius() const { return radius_; }
  const std::vector<V2>& vertices() const { return vertices_; }
  double sampling_density() const { return density_; }
  double inflation() const { return kind_ == Kind::kDisc ? radius_ : 0.0; }

  /// Largest distance of a surface point from the body origin.
  double reach() const {
    double r = 0.0;
    for (const auto& v : vertices_) r = std::max(r, v.norm());
    return r;
  }

  /// Surface elements as body-frame point lists (one point or a segment).
  std::vector<std::vector<V2>> body_elements() const {
    if (kind_ != Kind::kPolygon) return {{V2::Zero()}};
    std::vector<std::vector<V2>> out;
    for (const auto& [a, b] : body_segments_) out.push_back({a, b});
    return out;
  }

  /// Body points whose motion between waypoints is tracked.
  std::vector<V2> body_samples() const {
    if (kind_ != Kind::kPolygon) return {V2::Zero()};
    std::vector<V2> out;
    for (const auto& seg : body_segments_) out.push_back(seg.first);
    return out;
  }

  /// Surface elements in world frame at configuration (x, y[, theta]).
  std::vector<SurfaceElement<2>> surface(const V2& position, double heading) const {
    std::vector<SurfaceElement<2>> out;
    if (kind_ != Kind::kPolygon) {
      out.push_back(SurfaceElement<2>::vertex(position));
      return out;
    }
    Eigen::Rotation2Dd R(heading);
    for (const auto& [a, b] : body_segments_)
      out.push_back(SurfaceElement<2>::segment(position + R * a, position + R * b));
    return out;
  }

 private:
  RobotModel(Kind k, double r, std::vector<V2> v, double density)
      : kind_(k), radius_(r), vertices_(std::move(v)), density_(density) {
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const V2& a = vertices_[i];
      const V2& b = vertices_[(i + 1) % n];
      int pieces = std::max(1, static_cast<int>(std::ceil((b - a).norm() * density_ - 1e-9)));
      for (int k = 0; k < pieces; ++k)
        body_segments_.emplace_back(a + (b - a) * (static_cast<double>(k) / pieces),
                                    a + (b - a) * (static_cast<double>(k + 1) / pieces));
    }
  }

  Kind kind_;
  double radius_;
  std::vector<V2> vertices_;
  double density_;
  std::vector<std::pair<V2, V2>> body_segments_;
};

// ---------------------------------------------------------------------------
// Parameters and report

struct ReferencePose {
  Eigen::VectorXd pose;
  double weight = 1.0;
};

struct PlannerParams {
  int T = 30;
  double d_hat = 0.01;
  double delta_alpha = 0.1;
  double eta = kDefaultEta;
  bool exponential_shaping = true;  // false: identity shaping
  int sqp_max_iters = 30;
  double trust_radius = 0.1;
  double qp_tol = 1e-9;
  double violation_tol = 1e-4;
  int contacts_per_field = 3;
  double rotation_weight = 1.0;  // length units per radian
  double slack_weight_factor = 1e4;
  int alpha_retries = 3;
  bool use_interpolation = true;
  std::optional<std::size_t> max_glue_steps;
  bool polish = true;
  bool nonholonomic = false;
  std::optional<ReferencePose> reference;  // unset: fixed goal
  CollisionOptions collision;

  ShapingFunction shaping() const {
    return exponential_shaping ? ShapingFunction::exponential(eta) : ShapingFunction::identity();
  }

  void validate() const {
    auto bad = [](const std::string& m) { throw InvalidInput("params: " + m); };
    if (T < 2) bad("T must be >= 2");
    if (!(d_hat >= 0.0)) bad("d_hat must be >= 0");
    if (!(delta_alpha > 0.0 && delta_alpha <= 1.0)) bad("delta_alpha must be in (0, 1]");
    if (!(eta > 0.0)) bad("eta must be positive");
    if (sqp_max_iters < 0) bad("sqp_max_iters must be >= 0");
    if (!(trust_radius > 0.0)) bad("trust_radius must be positive");
    if (!(qp_tol > 0.0)) bad("qp_tol must be positive");
    if (!(violation_tol > 0.0)) bad("violation_tol must be positive");
    if (contacts_per_field < 1) bad("contacts_per_field must be >= 1");
    if (!(rotation_weight > 0.0)) bad("rotation_weight must be positive");
    if (!(slack_weight_factor > 0.0)) bad("slack_weight_factor must be positive");
    if (alpha_retries < 0) bad("alpha_retries must be >= 0");
    if (reference && !(reference->weight > 0.0)) bad("reference weight must be positive");
  }
};

struct StageTrace {
  std::size_t k = 0;  // glue step; equal to the step count for the polish pass
  double alpha = 0.0;
  bool polish = false;
  int retry = 0;  // local halvings in effect for this solve
  int sqp_iters = 0;
  bool converged = false;
  double max_violation = 0.0;
  double objective = 0.0;
  // Worst violation over accepted steps after the first feasible iterate.
  double violation_after_feasible = 0.0;
};

struct PathSnapshot {
  std::string label;
  std::size_t k = 0;
  double alpha = 0.0;
  Path path;
};

struct PlanReport {
  enum class Status { kSuccess, kStageFailure };
  Status status = Status::kSuccess;
  std::size_t failed_k = 0;
  double failed_alpha = 0.0;
  Path path;
  std::vector<StageTrace> trace;
  std::vector<PathSnapshot> snapshots;
  std::size_t glue_steps = 0;
  double max_violation = 0.0;
  double objective = 0.0;
  double min_clearance = 0.0;    // waypoint surfaces and swept segments, against all objects
  double dense_clearance = 0.0;  // surface at interpolated poses between waypoints
  double seconds = 0.0;        // wall clock; not part of any deterministic output
};

// ---------------------------------------------------------------------------
// Objective

/// Sum of squared consecutive differences (heading terms scaled by the
/// rotation weight), plus weight * |X_T - X_ref|^2 in reference mode.
class SmoothnessObjective {
 public:
  SmoothnessObjective(ConfigSpace space, int T, double rotation_weight,
                      std::optional<ReferencePose> reference = std::nullopt)
      : space_(space), T_(T), ref_(std::move(reference)) {
    const int d = dof(space);
    w_ = Eigen::VectorXd::Ones(d);
    if (d == 3) w_[2] = rotation_weight * rotation_weight;
    if (ref_ && ref_->pose.size() != d) throw InvalidInput("reference pose dimension mismatch");
    std::vector<Eigen::Triplet<double>> trip;
    for (int t = 0; t + 1 < T; ++t)
      for (int i = 0; i < d; ++i) {
        int a = t * d + i, b = (t + 1) * d + i;
        trip.emplace_back(a, a, 2.0 * w_[i]);
        trip.emplace_back(b, b, 2.0 * w_[i]);
        trip.emplace_back(a, b, -2.0 * w_[i]);
        trip.emplace_back(b, a, -2.0 * w_[i]);
      }
    if (ref_)
      for (int i = 0; i < d; ++i) trip.emplace_back((T - 1) * d + i, (T - 1) * d + i, 2.0 * ref_->weight * w_[i]);
    H_.resize(T * d, T * d);
    H_.setFromTriplets(trip.begin(), trip.end());
  }

  double value(const Path& p) const {
    double v = 0.0;
    for (int t = 0; t + 1 < p.size(); ++t) {
      Eigen::VectorXd dq = p.q.col(t + 1) - p.q.col(t);
      v += dq.dot(w_.cwiseProduct(dq));
    }
    if (ref_) {
      Eigen::VectorXd e = p.q.col(p.size() - 1) - ref_->pose;
      v += ref_->weight * e.dot(w_.cwiseProduct(e));
    }
    return v;
  }

  Eigen::VectorXd gradient(const Path& p) const {
    Eigen::VectorXd g = H_ * p.flat();
    if (ref_) g.segment((T_ - 1) * dof(space_), dof(space_)) -= 2.0 * ref_->weight * w_.cwiseProduct(ref_->pose);
    return g;
  }

  const SparseMatrix& hessian() const { return H_; }

 private:
  ConfigSpace space_;
  int T_;
  std::optional<ReferencePose> ref_;
  Eigen::VectorXd w_;
  SparseMatrix H_;
};

inline double smoothness_objective(const Path& p, double rotation_weight = 1.0,
                                   const std::optional<ReferencePose>& reference = std::nullopt) {
  return SmoothnessObjective(p.space, p.size(), rotation_weight, reference).value(p);
}

// ---------------------------------------------------------------------------
// Nonholonomic rolling constraint

/// r_t = -sin(th) (x_{t+1} - x_t) + cos(th) (y_{t+1} - y_t) with th the
/// midpoint heading.
inline std::vector<double> nonholonomic_residuals(const Path& p) {
  if (p.space != ConfigSpace::kSE2) throw ModeError("nonholonomic constraints need an SE2 path");
  std::vector<double> r;
  for (int t = 0; t + 1 < p.size(); ++t) {
    double th = 0.5 * (p.q(2, t) + p.q(2, t + 1));
    r.push_back(-std::sin(th) * (p.q(0, t + 1) - p.q(0, t)) + std::cos(th) * (p.q(1, t + 1) - p.q(1, t)));
  }
  return r;
}

/// Gradient of r_t with respect to (x_t, y_t, th_t, x_{t+1}, y_{t+1}, th_{t+1}).
inline Eigen::Matrix<double, 6, 1> nonholonomic_gradient(const Path& p, int t) {
  double th = 0.5 * (p.q(2, t) + p.q(2, t + 1));
  double dx = p.q(0, t + 1) - p.q(0, t), dy = p.q(1, t + 1) - p.q(1, t);
  double s = std::sin(th), c = std::cos(th);
  double dth = 0.5 * (-c * dx - s * dy);
  Eigen::Matrix<double, 6, 1> g;
  g << s, -c, dth, -s, c, dth;
  return g;
}

// ---------------------------------------------------------------------------
// Constraint assembly

struct Contact {
  int t = 0;            // first waypoint the element depends on
  int station = 0;      // waypoint t, or T + t for the sweep from t to t + 1
  FieldRef field;
  ObjectId object = 0;
  std::size_t element = 0;
  V2 witness;
  double value = 0.0;      // field value at the witness
  double threshold = 0.0;  // required lower bound for `value`
  V2 gradient;             // full field gradient at the witness
  Eigen::VectorXd row;     // gradient . J over waypoints t and t + 1 (2 dof entries)
  double violation() const { return std::max(0.0, threshold - value); }
};

struct ConstraintSet {
  std::vector<Contact> contacts;    // kept contacts, deepest first per (station, field)
  double max_violation = 0.0;       // collision part
  double total_violation = 0.0;     // sum over (station, field) of the deepest violation
  std::vector<double> rolling;      // nonholonomic residuals when enabled
};

namespace detail {

// A surface element whose points are body points carried by waypoints.
struct StationElement {
  int station = 0;
  int t = 0;
  std::size_t index = 0;  // element index within the station
  SurfaceElement<2> elem = SurfaceElement<2>::vertex(V2::Zero());
  std::vector<std::pair<int, V2>> source;  // (waypoint offset 0 or 1, body point) per element point
};

inline V2 body_to_world(const Path& p, int t, const V2& b) {
  return p.position(t) + Eigen::Rotation2Dd(p.heading(t)) * b;
}

/// Robot surface at every waypoint, plus the segments each body sample point
/// sweeps between consecutive waypoints (exact swept volume for pure
/// translation).
inline std::vector<StationElement> stations(const Path& p, const RobotModel& robot, bool sweeps = true) {
  std::vector<StationElement> out;
  const int T = p.size();
  auto body = robot.body_elements();
  for (int t = 0; t < T; ++t)
    for (std::size_t e = 0; e < body.size(); ++e) {
      StationElement s;
      s.station = t;
      s.t = t;
      s.index = e;
      std::vector<V2> pts;
      for (const auto& b : body[e]) {
        pts.push_back(body_to_world(p, t, b));
        s.source.emplace_back(0, b);
      }
      s.elem = pts.size() == 1 ? SurfaceElement<2>::vertex(pts[0]) : SurfaceElement<2>::segment(pts[0], pts[1]);
      out.push_back(std::move(s));
    }
  if (!sweeps) return out;
  auto samples = robot.body_samples();
  for (int t = 0; t + 1 < T; ++t)
    for (std::size_t e = 0; e < samples.size(); ++e) {
      StationElement s;
      s.station = T + t;
      s.t = t;
      s.index = e;
      V2 a = body_to_world(p, t, samples[e]), b = body_to_world(p, t + 1, samples[e]);
      if ((b - a).norm() <= 1e-12) continue;
      s.elem = SurfaceElement<2>::segment(a, b);
      s.source = {{0, samples[e]}, {1, samples[e]}};
      out.push_back(std::move(s));
    }
  return out;
}

// gradient . d(witness)/d(q_t, q_{t+1}) for barycentric weights `bary`.
inline Eigen::VectorXd witness_row(const Path& p, const StationElement& s, const std::vector<double>& bary,
                                   const V2& grad) {
  const int d = dof(p.space);
  Eigen::VectorXd row = Eigen::VectorXd::Zero(2 * d);
  for (std::size_t i = 0; i < s.source.size(); ++i) {
    const auto& [off, b] = s.source[i];
    const double w = bary[i];
    row[off * d] += w * grad.x();
    row[off * d + 1] += w * grad.y();
    if (p.space == ConfigSpace::kSE2) {
      V2 r = Eigen::Rotation2Dd(p.heading(s.t + off)) * b;
      row[off * d + 2] += w * grad.dot(V2(-r.y(), r.x()));
    }
  }
  return row;
}

// Lower bound of a shape's SDF over a ball (centroid, rho), by 1-Lipschitz.
inline double shape_lower_bound(const ConvexShape<2>& s, const V2& c, double rho) { return sdf_eval(s, c) - rho; }

inline double element_radius(const SurfaceElement<2>& e) {
  V2 c = e.centroid();
  double r = 0.0;
  for (const auto& p : e.points()) r = std::max(r, (p - c).norm());
  return r;
}

}  // namespace detail

/// Contacts of the robot surface at every waypoint, and of the segments swept
/// between waypoints, against every constraint field of `env`. Objects whose
/// value over an element provably exceeds threshold + margin are skipped; the
/// K deepest remaining contacts per (station, field) are kept.
inline ConstraintSet assemble_constraints(const Path& path, const EnvInterpSdf<2>& env, const RobotModel& robot,
                                          double d_hat, double margin, int K = 3, const CollisionOptions& opts = {}) {
  ConstraintSet out;
  const double inflate = robot.inflation();
  const auto& blends = env.blends();
  auto deeper = [](const Contact& a, const Contact& b) {
    return std::tie(a.value, a.object, a.element) < std::tie(b.value, b.object, b.element);
  };
  auto all = detail::stations(path, robot);
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j_end = i;
    while (j_end < all.size() && all[j_end].station == all[i].station) ++j_end;
    const std::span<const detail::StationElement> group(all.data() + i, j_end - i);
    i = j_end;

    auto make = [&](const detail::StationElement& s, FieldRef field, ObjectId object, const V2& witness,
                    std::vector<double> bary, double value, double threshold, const V2& grad) {
      Contact k;
      k.t = s.t;
      k.station = s.station;
      k.field = field;
      k.object = object;
      k.element = s.index;
      k.witness = witness;
      k.value = value;
      k.threshold = threshold;
      k.gradient = grad;
      k.row = detail::witness_row(path, s, bary, grad);
      return k;
    };
    auto keep = [&](std::vector<Contact>& cs) {
      std::sort(cs.begin(), cs.end(), deeper);
      if (!cs.empty()) {
        out.max_violation = std::max(out.max_violation, cs.front().violation());
        out.total_violation += cs.front().violation();
      }
      if (static_cast<int>(cs.size()) > K) cs.resize(K);
      for (auto& k : cs) out.contacts.push_back(std::move(k));
    };

    // Base field: each object's SDF against d_hat.
    std::vector<Contact> found;
    for (const auto& s : group) {
      const V2 c = s.elem.centroid();
      const double rho = detail::element_radius(s.elem);
      for (const auto& o : env.base()) {
        if (detail::shape_lower_bound(o.shape, c, rho) - inflate > d_hat + margin) continue;
        auto m = detail::shape_minimum(o.shape, s.elem, inflate, opts);
        if (m.value > d_hat + margin) continue;
        found.push_back(make(s, {true, 0}, o.id, m.witness, m.bary, m.value, d_hat, sdf_gradient(o.shape, m.witness)));
      }
    }
    keep(found);

    // Blend fields: shaped value against f(d_hat), which at alpha = 1 is
    // exactly the leaf object's own constraint.
    for (std::size_t j = 0; j < blends.size(); ++j) {
      const auto& b = blends[j].field;
      const ShapingFunction& f = b.shaping();
      const double thr = f(d_hat);
      std::vector<Contact> cs;
      for (const auto& s : group) {
        const V2 c = s.elem.centroid();
        const double rho = detail::element_radius(s.elem);
        double lb = 0.0;
        if (b.alpha() < 1.0) lb += (1.0 - b.alpha()) * f(detail::shape_lower_bound(b.source(), c, rho) - inflate);
        if (b.alpha() > 0.0) lb += b.alpha() * f(detail::shape_lower_bound(b.target(), c, rho) - inflate);
        if (lb > thr + margin * f.derivative(margin)) continue;
        auto q = blend_query(b, s.elem, s.index, j, blends[j].leaf, inflate, opts);
        V2 grad = q.normal * q.gradient_norm;
        // Prune by the linear model's reach over the trust region.
        if (q.value - grad.norm() * margin > thr) continue;
        cs.push_back(make(s, {false, j}, blends[j].leaf, q.witness, q.bary, q.value, thr, grad));
      }
      keep(cs);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subproblem

struct SubproblemStats {
  int iterations = 0;
  bool converged = false;
  double max_violation = 0.0;
  double objective = 0.0;
  double violation_after_feasible = 0.0;
};

namespace detail {

struct Evaluation {
  ConstraintSet constraints;
  double objective = 0.0;
  double max_violation = 0.0;
  double merit = 0.0;
};

class SubproblemSolver {
 public:
  SubproblemSolver(const EnvInterpSdf<2>& env, const RobotModel& robot, const PlannerParams& params,
                   const SmoothnessObjective& objective, ConfigSpace space, int T)
      : env_(env), robot_(robot), params_(params), objective_(objective), space_(space), T_(T) {
    d_ = dof(space);
    first_free_ = 1;
    last_free_ = params.reference ? T - 1 : T - 2;
    if (last_free_ < first_free_) last_free_ = first_free_ - 1;  // nothing free
    n_free_ = std::max(0, (last_free_ - first_free_ + 1) * d_);
    double scale = 0.0;
    const auto& H = objective.hessian();
    for (int k = 0; k < H.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(H, k); it; ++it)
        if (it.row() == it.col()) scale = std::max(scale, it.value());
    slack_weight_ = params.slack_weight_factor * std::max(scale, 1.0);
    // Hessian restricted to free coordinates.
    std::vector<Eigen::Triplet<double>> trip;
    const int off = first_free_ * d_;
    for (int k = 0; k < H.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(H, k); it; ++it) {
        int r = static_cast<int>(it.row()) - off, c = static_cast<int>(it.col()) - off;
        if (r >= 0 && c >= 0 && r < n_free_ && c < n_free_) trip.emplace_back(r, c, it.value());
      }
    Hf_.resize(n_free_, n_free_);
    Hf_.setFromTriplets(trip.begin(), trip.end());
  }

  double margin(double radius) const { return radius * (std::sqrt(2.0) + robot_.reach()); }

  // Contacts within reach of the largest trust region; step() drops the rows
  // that cannot bind under the current one.
  Evaluation evaluate(const Path& p) const {
    Evaluation ev;
    ev.constraints = assemble_constraints(p, env_, robot_, params_.d_hat, margin(params_.trust_radius),
                                          params_.contacts_per_field, params_.collision);
    ev.objective = objective_.value(p);
    ev.max_violation = ev.constraints.max_violation;
    double total = ev.constraints.total_violation;
    if (params_.nonholonomic) {
      ev.constraints.rolling = nonholonomic_residuals(p);
      for (double r : ev.constraints.rolling) {
        ev.max_violation = std::max(ev.max_violation, std::abs(r));
        total += std::abs(r);
      }
    }
    ev.merit = ev.objective + slack_weight_ * total;
    return ev;
  }

  bool is_free(int t) const { return t >= first_free_ && t <= last_free_; }
  int col(int t, int i) const { return (t - first_free_) * d_ + i; }

  // Trust-region QP for a step over the free coordinates.
  struct Step {
    Eigen::VectorXd dx;
    std::vector<double> rolling_multipliers;  // per consecutive pair
  };

  // Curvature of the rolling constraints weighted by their multipliers,
  // clipped to its PSD part so the QP stays convex.
  SparseMatrix rolling_curvature(const Path& p, const std::vector<double>& mult) const {
    std::vector<Eigen::Triplet<double>> trip;
    for (int t = 0; t + 1 < p.size(); ++t) {
      if (mult[t] == 0.0) continue;
      double th = 0.5 * (p.q(2, t) + p.q(2, t + 1));
      double dx = p.q(0, t + 1) - p.q(0, t), dy = p.q(1, t + 1) - p.q(1, t);
      double sn = std::sin(th), cs = std::cos(th);
      Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
      const double tt = 0.25 * (sn * dx - cs * dy);
      for (int a : {2, 5}) {
        for (int b : {2, 5}) h(a, b) = tt;
        h(a, 0) = h(0, a) = 0.5 * cs;
        h(a, 1) = h(1, a) = 0.5 * sn;
        h(a, 3) = h(3, a) = -0.5 * cs;
        h(a, 4) = h(4, a) = -0.5 * sn;
      }
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(-mult[t] * h);
      Eigen::Matrix<double, 6, 6> psd =
          es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) {
          int ta = t + a / 3, tb = t + b / 3;
          if (!is_free(ta) || !is_free(tb) || psd(a, b) == 0.0) continue;
          trip.emplace_back(col(ta, a % 3), col(tb, b % 3), psd(a, b));
        }
    }
    SparseMatrix m(n_free_, n_free_);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
  }

  // Trust-region QP for a step over the free coordinates. `rolling_mult`
  // holds multiplier estimates from the previous QP, if any.
  Step step(const Path& p, const Evaluation& ev, double radius,
            const std::vector<double>* rolling_mult = nullptr) const {
    QpProblem qp(n_free_);
    qp.H = Hf_;
    if (rolling_mult) qp.H += rolling_curvature(p, *rolling_mult);
    Eigen::VectorXd g = objective_.gradient(p);
    qp.c = g.segment(first_free_ * d_, n_free_);
    qp.lb = Eigen::VectorXd::Constant(n_free_, -radius);
    qp.ub = Eigen::VectorXd::Constant(n_free_, radius);

    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> h;
    int row = 0;
    for (const auto& k : ev.constraints.contacts) {
      if (!is_free(k.t) && !is_free(k.t + 1)) continue;
      if (k.value - k.row.cwiseAbs().sum() * radius > k.threshold) continue;  // cannot bind
      for (int off = 0; off < 2; ++off) {
        if (!is_free(k.t + off)) continue;
        for (int i = 0; i < d_; ++i)
          if (k.row[off * d_ + i] != 0.0) trip.emplace_back(row, col(k.t + off, i), k.row[off * d_ + i]);
      }
      h.push_back(k.threshold - k.value);
      ++row;
    }
    const int first_rolling = row;
    std::vector<int> pair_of;
    if (params_.nonholonomic) {
      for (int t = 0; t + 1 < p.size(); ++t) {
        if (!is_free(t) && !is_free(t + 1)) continue;
        auto gr = nonholonomic_gradient(p, t);
        double r = ev.constraints.rolling[t];
        pair_of.push_back(t);
        for (int sign : {1, -1}) {
          for (int i = 0; i < 3; ++i) {
            if (is_free(t) && gr[i] != 0.0) trip.emplace_back(row, col(t, i), sign * gr[i]);
            if (is_free(t + 1) && gr[3 + i] != 0.0) trip.emplace_back(row, col(t + 1, i), sign * gr[3 + i]);
          }
          h.push_back(-sign * r);
          ++row;
        }
      }
    }
    qp.G.resize(row, n_free_);
    qp.G.setFromTriplets(trip.begin(), trip.end());
    qp.h = Eigen::Map<Eigen::VectorXd>(h.data(), row);
    qp.soft_weight = Eigen::VectorXd::Constant(row, slack_weight_);
    QpOptions opts;
    opts.tol = params_.qp_tol;
    opts.check_psd = false;  // PSD by construction
    auto res = qp_solve(qp, opts);
    Step out{res.x, std::vector<double>(std::max(0, p.size() - 1), 0.0)};
    for (std::size_t i = 0; i < pair_of.size(); ++i)
      out.rolling_multipliers[pair_of[i]] =
          res.soft_dual[first_rolling + 2 * i] - res.soft_dual[first_rolling + 2 * i + 1];
    return out;
  }

  Path apply(const Path& p, const Eigen::VectorXd& dx) const {
    Path out = p;
    for (int t = first_free_; t <= last_free_; ++t)
      for (int i = 0; i < d_; ++i) out.q(i, t) += dx[col(t, i)];
    return out;
  }

  double free_gradient_norm(const Path& p) const {
    if (n_free_ == 0) return 0.0;
    return objective_.gradient(p).segment(first_free_ * d_, n_free_).cwiseAbs().maxCoeff();
  }

  int n_free() const { return n_free_; }

 private:
  const EnvInterpSdf<2>& env_;
  const RobotModel& robot_;
  const PlannerParams& params_;
  const SmoothnessObjective& objective_;
  ConfigSpace space_;
  int T_;
  int d_ = 2;
  int first_free_ = 1, last_free_ = 0, n_free_ = 0;
  double slack_weight_ = 1.0;
  SparseMatrix Hf_;
};

}  // namespace detail

/// Trust-region SQP on one interpolated environment. Never throws for lack
/// of convergence; the stats say how it ended.
inline SubproblemStats solve_subproblem(Path& path, const EnvInterpSdf<2>& env, const RobotModel& robot,
                                        const PlannerParams& params) {
  if (params.nonholonomic && path.space != ConfigSpace::kSE2)
    throw ModeError("nonholonomic constraints need an SE2 path");
  SmoothnessObjective objective(path.space, path.size(), params.rotation_weight, params.reference);
  detail::SubproblemSolver solver(env, robot, params, objective, path.space, path.size());
  const double tol = params.violation_tol;

  double radius = params.trust_radius;
  auto ev = solver.evaluate(path);
  SubproblemStats st;
  bool feasible_seen = ev.max_violation <= tol;
  auto finish = [&] {
    st.max_violation = ev.max_violation;
    st.objective = ev.objective;
    return st;
  };
  if (solver.n_free() == 0 || (feasible_seen && solver.free_gradient_norm(path) <= 1e-9)) {
    st.converged = feasible_seen;
    return finish();
  }

  std::vector<double> rolling_mult;
  for (int it = 0; it < params.sqp_max_iters; ++it) {
    st.iterations = it + 1;
    auto qs = solver.step(path, ev, radius, params.nonholonomic && it > 0 ? &rolling_mult : nullptr);
    const Eigen::VectorXd& dx = qs.dx;
    rolling_mult = qs.rolling_multipliers;
    const double len = dx.size() ? dx.cwiseAbs().maxCoeff() : 0.0;
    if (len <= 1e-6) {
      st.converged = ev.max_violation <= tol;
      break;
    }
    Path cand = solver.apply(path, dx);
    auto cev = solver.evaluate(cand);
    auto acceptable = [&](const detail::Evaluation& e) {
      if (!(e.merit < ev.merit - 1e-12 * std::abs(ev.merit))) return false;
      return !(feasible_seen && e.max_violation > 10.0 * tol);
    };
    bool accept = acceptable(cev);
    if (accept) {
      path = std::move(cand);
      ev = std::move(cev);
      radius = std::min(2.0 * radius, params.trust_radius);
      if (feasible_seen) st.violation_after_feasible = std::max(st.violation_after_feasible, ev.max_violation);
      if (ev.max_violation <= tol) feasible_seen = true;
    } else {
      radius *= 0.5;
      if (radius < 1e-7) {
        st.converged = ev.max_violation <= tol;
        break;
      }
    }
  }
  return finish();
}

// ---------------------------------------------------------------------------
// Outer loop

namespace detail {

inline std::vector<double> alpha_schedule(double delta) {
  std::vector<double> a;
  const int n = static_cast<int>(std::ceil(1.0 / delta - 1e-9));
  for (int i = 0; i <= n; ++i) a.push_back(std::min(i * delta, 1.0));
  a.back() = 1.0;
  return a;
}

/// Smallest clearance of the robot against all objects over the constrained
/// set: surface at every waypoint and the segments swept between waypoints.
inline double min_clearance(const Path& p, const ObjectSet<2>& objects, const RobotModel& robot,
                            const CollisionOptions& opts) {
  double best = std::numeric_limits<double>::infinity();
  if (objects.empty()) return best;
  for (const auto& s : stations(p, robot))
    best = std::min(best, base_query(objects, s.elem, s.index, robot.inflation(), opts).value);
  return best;
}

/// Clearance of the robot surface at `substeps` poses interpolated linearly
/// between waypoints. For pure translation the swept segments already make
/// min_clearance exact; with rotation this samples what they approximate.
inline double dense_clearance(const Path& p, const ObjectSet<2>& objects, const RobotModel& robot,
                              const CollisionOptions& opts, int substeps = 16) {
  double best = std::numeric_limits<double>::infinity();
  if (objects.empty()) return best;
  for (int t = 0; t + 1 < p.size(); ++t)
    for (int k = 0; k <= substeps; ++k) {
      Eigen::VectorXd q = p.q.col(t) + (static_cast<double>(k) / substeps) * (p.q.col(t + 1) - p.q.col(t));
      auto elems = robot.surface(q.head<2>(), p.space == ConfigSpace::kSE2 ? q[2] : 0.0);
      for (std::size_t e = 0; e < elems.size(); ++e)
        best = std::min(best, base_query(objects, elems[e], e, robot.inflation(), opts).value);
    }
  return best;
}

}  // namespace detail

/// Glue sequence, straight-line start, then for each glue step a sweep of
/// alpha from 0 to 1 (local halving of the alpha step on failure), then a
/// polish solve against the full environment.
inline PlanReport plan(const ObjectSet<2>& objects, const RobotModel& robot, const Eigen::VectorXd& start,
                       const Eigen::VectorXd& goal, const PlannerParams& params) {
  params.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ConfigSpace space = space_of(start);
  if (params.nonholonomic && space != ConfigSpace::kSE2) throw ModeError("nonholonomic constraints need an SE2 path");
  if (params.reference && params.reference->pose.size() != start.size())
    throw InvalidInput("reference pose dimension mismatch");

  PlanReport rep;
  GlueSequence<2> seq;
  if (!objects.empty()) {
    if (params.use_interpolation) {
      seq = build_sequence(objects);
    } else {
      seq.total = objects;
      seq.initial = objects;
    }
    if (params.max_glue_steps) seq = truncate_sequence(seq, *params.max_glue_steps);
  }
  rep.glue_steps = seq.steps.size();
  const ShapingFunction shaping = params.shaping();

  Path path = initialize_path(start, params.reference ? params.reference->pose : goal, params.T);
  rep.snapshots.push_back({"initial", 0, 0.0, path});

  auto record = [&](std::size_t k, double alpha, bool polish, int retry, const SubproblemStats& st) {
    StageTrace tr;
    tr.k = k;
    tr.alpha = alpha;
    tr.polish = polish;
    tr.retry = retry;
    tr.sqp_iters = st.iterations;
    tr.converged = st.converged;
    tr.max_violation = st.max_violation;
    tr.objective = st.objective;
    tr.violation_after_feasible = st.violation_after_feasible;
    rep.trace.push_back(tr);
  };
  auto fail = [&](std::size_t k, double alpha) {
    rep.status = PlanReport::Status::kStageFailure;
    rep.failed_k = k;
    rep.failed_alpha = alpha;
  };

  const double stage_limit = 10.0 * params.violation_tol;
  const auto schedule = detail::alpha_schedule(params.delta_alpha);
  for (std::size_t k = 0; k < seq.steps.size() && rep.status == PlanReport::Status::kSuccess; ++k) {
    std::size_t idx = 0;
    double target = schedule[0];
    std::optional<double> last_ok;
    Path last_path = path;
    int retries = 0;
    while (idx < schedule.size()) {
      auto env = environment_at(seq, k, target, shaping);
      auto st = solve_subproblem(path, env, robot, params);
      record(k, target, false, retries, st);
      if (st.max_violation <= stage_limit) {
        last_ok = target;
        last_path = path;
        retries = 0;
        if (target == schedule[idx]) ++idx;
        if (idx < schedule.size()) target = schedule[idx];
        continue;
      }
      if (!last_ok || retries >= params.alpha_retries) {
        fail(k, target);
        break;
      }
      ++retries;
      path = last_path;
      target = 0.5 * (*last_ok + target);
    }
    rep.snapshots.push_back({"step " + std::to_string(k), k, 1.0, path});
  }

  if (rep.status == PlanReport::Status::kSuccess && params.polish) {
    ObjectSet<2> none;
    EnvInterpSdf<2> env = objects.empty() ? EnvInterpSdf<2>(none, {}, 1.0)
                                          : environment_at(seq, seq.steps.size(), 1.0, shaping);
    auto st = solve_subproblem(path, env, robot, params);
    record(seq.steps.size(), 1.0, true, 0, st);
    rep.snapshots.push_back({"polish", seq.steps.size(), 1.0, path});
  }

  rep.path = path;
  SmoothnessObjective obj(path.space, path.size(), params.rotation_weight, params.reference);
  rep.objective = obj.value(path);
  rep.min_clearance = detail::min_clearance(path, objects, robot, params.collision);
  rep.dense_clearance = detail::dense_clearance(path, objects, robot, params.collision);
  double viol = objects.empty() ? 0.0 : std::max(0.0, params.d_hat - rep.min_clearance);
  if (params.nonholonomic)
    for (double r : nonholonomic_residuals(path)) viol = std::max(viol, std::abs(r));
  rep.max_violation = viol;
  if (rep.status == PlanReport::Status::kSuccess && viol > params.violation_tol)
    fail(seq.steps.size(), 1.0);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace cci

#endif  // CCI_PLANNER_HPP_
