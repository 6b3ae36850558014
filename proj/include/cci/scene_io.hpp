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

// JSON scene files. Parsing is strict: unknown keys are errors, and every
// error message starts with the path of the offending field.

#ifndef CCI_SCENE_IO_HPP_
#define CCI_SCENE_IO_HPP_

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cci/planner.hpp"
#include "cci/scenes.hpp"

namespace cci {

using json = nlohmann::json;

struct SchemaError : InvalidInput {
  using InvalidInput::InvalidInput;
};

struct ObjectSpec {
  ObjectId id = 0;
  std::string type;  // sphere | box | polygon
  std::vector<double> center;
  double radius = 0.0;
  std::vector<double> half_extents;
  double angle = 0.0;
  std::vector<std::array<double, 2>> vertices;

  bool operator==(const ObjectSpec&) const = default;
};

struct RobotSpec {
  std::string type = "point";  // point | disc | polygon
  double radius = 0.0;
  std::vector<std::array<double, 2>> vertices;
  double density = 20.0;

  bool operator==(const RobotSpec&) const = default;
};

struct SceneFile {
  int version = 1;
  int dimension = 2;
  std::string name;
  std::vector<ObjectSpec> objects;
  RobotSpec robot;
  std::vector<double> start;
  std::vector<double> goal;
  PlannerParams params;
  std::uint64_t seed = 0;
};

/// x' = scale * x + offset, positions only. Headings are unchanged.
struct Normalization {
  double scale = 1.0;
  std::array<double, 2> offset{0.0, 0.0};

  V2 apply(const V2& x) const { return scale * x + V2(offset[0], offset[1]); }
  V2 invert(const V2& x) const { return (x - V2(offset[0], offset[1])) / scale; }
};

namespace detail {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& msg) const { throw SchemaError(path_ + ": " + msg); }

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  Reader child(const std::string& key) const { return Reader(j_.at(key), path_ + "." + key); }
  Reader item(std::size_t i) const { return Reader(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }
  bool has(const std::string& key) const { return j_.contains(key); }

  void require_object(const std::set<std::string>& allowed) const {
    if (!j_.is_object()) fail("expected an object");
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!allowed.count(it.key())) Reader(it.value(), path_ + "." + it.key()).fail("unknown field");
  }

  Reader required(const std::string& key) const {
    if (!j_.contains(key)) Reader(j_, path_ + "." + key).fail("missing required field");
    return child(key);
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    double v = j_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  double positive() const {
    double v = number();
    if (!(v > 0.0)) fail("expected a positive number");
    return v;
  }
  std::int64_t integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<std::int64_t>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  std::vector<double> vector(std::size_t n_min, std::size_t n_max) const {
    if (!j_.is_array()) fail("expected an array of numbers");
    if (j_.size() < n_min || j_.size() > n_max) {
      if (n_min == n_max) fail("expected " + std::to_string(n_min) + " numbers");
      fail("expected " + std::to_string(n_min) + " to " + std::to_string(n_max) + " numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < j_.size(); ++i) out.push_back(item(i).number());
    return out;
  }
  std::vector<std::array<double, 2>> points2() const {
    if (!j_.is_array()) fail("expected an array of [x, y] points");
    std::vector<std::array<double, 2>> out;
    for (std::size_t i = 0; i < j_.size(); ++i) {
      auto v = item(i).vector(2, 2);
      out.push_back({v[0], v[1]});
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

inline ObjectSpec parse_object(const Reader& r, int dim) {
  r.require_object({"id", "type", "center", "radius", "half_extents", "angle", "vertices"});
  ObjectSpec o;
  o.id = r.required("id").integer();
  o.type = r.required("type").string();
  const auto d = static_cast<std::size_t>(dim);
  auto only = [&](const std::set<std::string>& keys) {
    for (const char* k : {"center", "radius", "half_extents", "angle", "vertices"})
      if (r.has(k) && !keys.count(k)) r.child(k).fail("not allowed for type '" + o.type + "'");
  };
  if (o.type == "sphere") {
    only({"center", "radius"});
    o.center = r.required("center").vector(d, d);
    o.radius = r.required("radius").positive();
  } else if (o.type == "box") {
    only({"center", "half_extents", "angle"});
    o.center = r.required("center").vector(d, d);
    o.half_extents = r.required("half_extents").vector(d, d);
    for (std::size_t i = 0; i < d; ++i) r.child("half_extents").item(i).positive();
    if (r.has("angle")) {
      o.angle = r.child("angle").number();
      if (dim == 3 && o.angle != 0.0) r.child("angle").fail("rotated boxes are 2D only");
    }
  } else if (o.type == "polygon") {
    if (dim != 2) r.child("type").fail("polygons are 2D only");
    only({"vertices"});
    o.vertices = r.required("vertices").points2();
    if (o.vertices.size() < 3) r.child("vertices").fail("expected at least 3 vertices");
  } else {
    r.child("type").fail("unknown object type '" + o.type + "' (sphere, box, polygon)");
  }
  return o;
}

inline RobotSpec parse_robot(const Reader& r) {
  r.require_object({"type", "radius", "vertices", "density"});
  RobotSpec s;
  s.type = r.required("type").string();
  if (s.type == "point") {
    for (const char* k : {"radius", "vertices", "density"})
      if (r.has(k)) r.child(k).fail("not allowed for a point robot");
  } else if (s.type == "disc") {
    for (const char* k : {"vertices", "density"})
      if (r.has(k)) r.child(k).fail("not allowed for a disc robot");
    s.radius = r.required("radius").positive();
  } else if (s.type == "polygon") {
    if (r.has("radius")) r.child("radius").fail("not allowed for a polygon robot");
    s.vertices = r.required("vertices").points2();
    if (s.vertices.size() < 3) r.child("vertices").fail("expected at least 3 vertices");
    if (r.has("density")) s.density = r.child("density").positive();
  } else {
    r.child("type").fail("unknown robot type '" + s.type + "' (point, disc, polygon)");
  }
  return s;
}

inline StepRule parse_step_rule(const Reader& r) {
  std::string s = r.string();
  if (s == "classical") return StepRule::kClassical;
  if (s == "line_search") return StepRule::kLineSearch;
  if (s == "away_step") return StepRule::kAwayStep;
  r.fail("expected one of classical, line_search, away_step");
}

inline const char* step_rule_name(StepRule s) {
  switch (s) {
    case StepRule::kClassical:
      return "classical";
    case StepRule::kLineSearch:
      return "line_search";
    case StepRule::kAwayStep:
      break;
  }
  return "away_step";
}

inline int parse_int(const Reader& r, std::int64_t lo) {
  auto v = r.integer();
  if (v < lo || v > 1000000) r.fail("expected an integer in [" + std::to_string(lo) + ", 1000000]");
  return static_cast<int>(v);
}

inline PlannerParams parse_params(const Reader& r, std::size_t config_dim) {
  r.require_object({"T", "d_hat", "delta_alpha", "eta", "shaping", "sqp_max_iters", "trust_radius", "qp_tol",
                    "violation_tol", "contacts_per_field", "rotation_weight", "slack_weight_factor",
                    "alpha_retries", "interpolation", "max_glue_steps", "polish", "nonholonomic", "reference",
                    "fw_max_iters", "fw_tol", "fw_step"});
  PlannerParams p;
  if (r.has("T")) p.T = parse_int(r.child("T"), 2);
  if (r.has("d_hat")) p.d_hat = r.child("d_hat").number();
  if (r.has("delta_alpha")) p.delta_alpha = r.child("delta_alpha").positive();
  if (r.has("eta")) p.eta = r.child("eta").positive();
  if (r.has("shaping")) {
    std::string s = r.child("shaping").string();
    if (s != "exponential" && s != "identity") r.child("shaping").fail("expected exponential or identity");
    p.exponential_shaping = s == "exponential";
  }
  if (r.has("sqp_max_iters")) p.sqp_max_iters = parse_int(r.child("sqp_max_iters"), 0);
  if (r.has("trust_radius")) p.trust_radius = r.child("trust_radius").positive();
  if (r.has("qp_tol")) p.qp_tol = r.child("qp_tol").positive();
  if (r.has("violation_tol")) p.violation_tol = r.child("violation_tol").positive();
  if (r.has("contacts_per_field")) p.contacts_per_field = parse_int(r.child("contacts_per_field"), 1);
  if (r.has("rotation_weight")) p.rotation_weight = r.child("rotation_weight").positive();
  if (r.has("slack_weight_factor")) p.slack_weight_factor = r.child("slack_weight_factor").positive();
  if (r.has("alpha_retries")) p.alpha_retries = parse_int(r.child("alpha_retries"), 0);
  if (r.has("interpolation")) p.use_interpolation = r.child("interpolation").boolean();
  if (r.has("max_glue_steps") && !r.raw().at("max_glue_steps").is_null())
    p.max_glue_steps = static_cast<std::size_t>(parse_int(r.child("max_glue_steps"), 0));
  if (r.has("polish")) p.polish = r.child("polish").boolean();
  if (r.has("nonholonomic")) p.nonholonomic = r.child("nonholonomic").boolean();
  if (r.has("reference") && !r.raw().at("reference").is_null()) {
    Reader ref = r.child("reference");
    ref.require_object({"pose", "weight"});
    auto pose = ref.required("pose").vector(config_dim, config_dim);
    ReferencePose rp;
    rp.pose = Eigen::Map<const Eigen::VectorXd>(pose.data(), static_cast<Eigen::Index>(pose.size()));
    if (ref.has("weight")) rp.weight = ref.child("weight").positive();
    p.reference = rp;
  }
  if (r.has("fw_max_iters")) p.collision.max_iters = parse_int(r.child("fw_max_iters"), 1);
  if (r.has("fw_tol")) p.collision.tol = r.child("fw_tol").positive();
  if (r.has("fw_step")) p.collision.step = parse_step_rule(r.child("fw_step"));
  try {
    p.validate();
  } catch (const InvalidInput& e) {
    r.fail(e.what());
  }
  return p;
}

inline json points_json(const std::vector<std::array<double, 2>>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back({p[0], p[1]});
  return a;
}

}  // namespace detail

/// Parses a scene document. Throws SchemaError naming the field on failure.
inline SceneFile parse_scene(const json& doc) {
  detail::Reader r(doc, "$");
  r.require_object({"version", "dimension", "name", "objects", "robot", "start", "goal", "params", "seed"});
  SceneFile s;
  if (r.has("version")) {
    s.version = static_cast<int>(r.child("version").integer());
    if (s.version != 1) r.child("version").fail("unsupported version " + std::to_string(s.version));
  }
  if (r.has("dimension")) {
    auto d = r.child("dimension").integer();
    if (d != 2 && d != 3) r.child("dimension").fail("expected 2 or 3");
    s.dimension = static_cast<int>(d);
  }
  if (r.has("name")) s.name = r.child("name").string();
  if (r.has("seed")) {
    auto v = r.child("seed").integer();
    if (v < 0) r.child("seed").fail("expected a non-negative integer");
    s.seed = static_cast<std::uint64_t>(v);
  }
  if (r.has("objects")) {
    auto objs = r.child("objects");
    if (!objs.raw().is_array()) objs.fail("expected an array");
    std::set<ObjectId> seen;
    for (std::size_t i = 0; i < objs.raw().size(); ++i) {
      auto o = detail::parse_object(objs.item(i), s.dimension);
      if (!seen.insert(o.id).second)
        objs.item(i).child("id").fail("duplicate object id " + std::to_string(o.id));
      s.objects.push_back(std::move(o));
    }
  }
  if (r.has("robot")) s.robot = detail::parse_robot(r.child("robot"));
  const std::size_t d = static_cast<std::size_t>(s.dimension);
  s.start = r.required("start").vector(d, d + 1);
  const std::size_t cdim = s.start.size();
  if (cdim != d && s.dimension != 2) r.child("start").fail("headings are only supported in 2D");
  if (r.has("params")) s.params = detail::parse_params(r.child("params"), cdim);
  if (r.has("goal")) {
    s.goal = r.required("goal").vector(cdim, cdim);
  } else if (s.params.reference) {
    const auto& pose = s.params.reference->pose;
    s.goal.assign(pose.data(), pose.data() + pose.size());
  } else {
    detail::Reader(doc, "$.goal").fail("missing required field (or give params.reference)");
  }
  if (s.params.nonholonomic && cdim != 3) r.child("params").child("nonholonomic").fail("requires an SE2 start [x, y, theta]");
  if (s.robot.type == "polygon" && cdim != 3) r.child("robot").child("type").fail("polygon robots need an SE2 start [x, y, theta]");
  return s;
}

inline SceneFile parse_scene_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("$: invalid JSON: ") + e.what());
  }
  return parse_scene(doc);
}

inline SceneFile load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read scene file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene_text(ss.str());
}

inline json params_to_json(const PlannerParams& p) {
  json j;
  j["T"] = p.T;
  j["d_hat"] = p.d_hat;
  j["delta_alpha"] = p.delta_alpha;
  j["eta"] = p.eta;
  j["shaping"] = p.exponential_shaping ? "exponential" : "identity";
  j["sqp_max_iters"] = p.sqp_max_iters;
  j["trust_radius"] = p.trust_radius;
  j["qp_tol"] = p.qp_tol;
  j["violation_tol"] = p.violation_tol;
  j["contacts_per_field"] = p.contacts_per_field;
  j["rotation_weight"] = p.rotation_weight;
  j["slack_weight_factor"] = p.slack_weight_factor;
  j["alpha_retries"] = p.alpha_retries;
  j["interpolation"] = p.use_interpolation;
  j["max_glue_steps"] = p.max_glue_steps ? json(*p.max_glue_steps) : json(nullptr);
  j["polish"] = p.polish;
  j["nonholonomic"] = p.nonholonomic;
  if (p.reference) {
    std::vector<double> pose(p.reference->pose.data(), p.reference->pose.data() + p.reference->pose.size());
    j["reference"] = {{"pose", pose}, {"weight", p.reference->weight}};
  } else {
    j["reference"] = nullptr;
  }
  j["fw_max_iters"] = p.collision.max_iters;
  j["fw_tol"] = p.collision.tol;
  j["fw_step"] = detail::step_rule_name(p.collision.step);
  return j;
}

/// Canonical form: every field written, parameters fully expanded.
inline json scene_to_json(const SceneFile& s) {
  json j;
  j["version"] = s.version;
  j["dimension"] = s.dimension;
  j["name"] = s.name;
  j["seed"] = s.seed;
  json objs = json::array();
  for (const auto& o : s.objects) {
    json e{{"id", o.id}, {"type", o.type}};
    if (o.type == "sphere") {
      e["center"] = o.center;
      e["radius"] = o.radius;
    } else if (o.type == "box") {
      e["center"] = o.center;
      e["half_extents"] = o.half_extents;
      e["angle"] = o.angle;
    } else {
      e["vertices"] = detail::points_json(o.vertices);
    }
    objs.push_back(std::move(e));
  }
  j["objects"] = std::move(objs);
  json robot{{"type", s.robot.type}};
  if (s.robot.type == "disc") robot["radius"] = s.robot.radius;
  if (s.robot.type == "polygon") {
    robot["vertices"] = detail::points_json(s.robot.vertices);
    robot["density"] = s.robot.density;
  }
  j["robot"] = std::move(robot);
  j["start"] = s.start;
  j["goal"] = s.goal;
  j["params"] = params_to_json(s.params);
  return j;
}

inline bool same_content(const SceneFile& a, const SceneFile& b) { return scene_to_json(a) == scene_to_json(b); }

// ---------------------------------------------------------------------------
// Building library objects

template <int Dim>
ConvexShape<Dim> build_shape(const ObjectSpec& o) {
  auto vec = [](const std::vector<double>& v) {
    Vec<Dim> out;
    for (int i = 0; i < Dim; ++i) out[i] = v[static_cast<std::size_t>(i)];
    return out;
  };
  if (o.type == "sphere") return Sphere<Dim>(vec(o.center), o.radius);
  if (o.type == "box") return Polytope<Dim>::box(vec(o.center), vec(o.half_extents), o.angle);
  if constexpr (Dim == 2) {
    std::vector<V2> pts;
    for (const auto& p : o.vertices) pts.emplace_back(p[0], p[1]);
    return Polytope<2>::from_vertices(std::move(pts));
  }
  throw InvalidInput("object type '" + o.type + "' is not available in " + std::to_string(Dim) + "D");
}

/// Builds the object set. Shape errors are reported against objects[i].
template <int Dim>
ObjectSet<Dim> build_objects(const SceneFile& s) {
  if (s.dimension != Dim) throw InvalidInput("scene dimension mismatch");
  ObjectSet<Dim> out;
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    try {
      out.add(s.objects[i].id, build_shape<Dim>(s.objects[i]));
    } catch (const InvalidInput& e) {
      throw SchemaError("$.objects[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return out;
}

inline RobotModel build_robot(const SceneFile& s) {
  try {
    if (s.robot.type == "disc") return RobotModel::disc(s.robot.radius);
    if (s.robot.type == "polygon") {
      std::vector<V2> pts;
      for (const auto& p : s.robot.vertices) pts.emplace_back(p[0], p[1]);
      return RobotModel::polygon(std::move(pts), s.robot.density);
    }
  } catch (const InvalidInput& e) {
    throw SchemaError(std::string("$.robot: ") + e.what());
  }
  return RobotModel::point();
}

inline Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// ---------------------------------------------------------------------------
// Normalization to the unit box

/// Uniform scale and offset taking the bounding box of the objects, start and
/// goal to a box of largest side 1, centered in [0, 1]^2.
inline Normalization unit_box_normalization(const SceneFile& s) {
  if (s.dimension != 2) throw InvalidInput("normalization is 2D only");
  V2 lo = V2::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  auto grow = [&](const V2& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  };
  for (const auto& o : build_objects<2>(s)) {
    auto [a, b] = shape_bounds<2>(o.shape);
    grow(a);
    grow(b);
  }
  grow(V2(s.start[0], s.start[1]));
  grow(V2(s.goal[0], s.goal[1]));
  const V2 ext = hi - lo;
  const double side = ext.maxCoeff();
  Normalization n;
  n.scale = side > 0.0 ? 1.0 / side : 1.0;
  for (int i = 0; i < 2; ++i) n.offset[static_cast<std::size_t>(i)] = -lo[i] * n.scale + 0.5 * (1.0 - ext[i] * n.scale);
  if (lo == V2::Zero() && hi == V2::Ones()) n = Normalization{};  // already unit: keep bits exact
  return n;
}

inline SceneFile apply_normalization(const SceneFile& s, const Normalization& n) {
  SceneFile out = s;
  auto pt = [&](double& x, double& y) {
    V2 p = n.apply(V2(x, y));
    x = p.x();
    y = p.y();
  };
  for (auto& o : out.objects) {
    if (!o.center.empty()) pt(o.center[0], o.center[1]);
    o.radius *= n.scale;
    for (auto& h : o.half_extents) h *= n.scale;
    for (auto& v : o.vertices) pt(v[0], v[1]);
  }
  out.robot.radius *= n.scale;
  for (auto& v : out.robot.vertices) {
    v[0] *= n.scale;
    v[1] *= n.scale;
  }
  out.robot.density /= n.scale;  // same element count
  pt(out.start[0], out.start[1]);
  pt(out.goal[0], out.goal[1]);
  if (out.params.reference) {
    V2 p = n.apply(out.params.reference->pose.head<2>());
    out.params.reference->pose.head<2>() = p;
  }
  return out;
}

inline Path denormalize(const Path& p, const Normalization& n) {
  Path out = p;
  for (int t = 0; t < p.size(); ++t) out.q.col(t).head<2>() = n.invert(p.position(t));
  return out;
}

// ---------------------------------------------------------------------------
// Generated scenes as files

inline SceneFile scene_file_from(const Scene& sc) {
  SceneFile s;
  s.name = sc.name;
  for (const auto& o : sc.objects) {
    ObjectSpec spec;
    spec.id = o.id;
    if (const auto* sp = std::get_if<Sphere<2>>(&o.shape)) {
      spec.type = "sphere";
      spec.center = {sp->center().x(), sp->center().y()};
      spec.radius = sp->radius();
    } else {
      spec.type = "polygon";
      for (const auto& v : std::get<Polytope<2>>(o.shape).vertices()) spec.vertices.push_back({v.x(), v.y()});
    }
    s.objects.push_back(std::move(spec));
  }
  switch (sc.robot.kind()) {
    case RobotModel::Kind::kPoint:
      s.robot.type = "point";
      break;
    case RobotModel::Kind::kDisc:
      s.robot.type = "disc";
      s.robot.radius = sc.robot.radius();
      break;
    case RobotModel::Kind::kPolygon:
      s.robot.type = "polygon";
      for (const auto& v : sc.robot.vertices()) s.robot.vertices.push_back({v.x(), v.y()});
      s.robot.density = sc.robot.sampling_density();
      break;
  }
  s.start.assign(sc.start.data(), sc.start.data() + sc.start.size());
  s.goal.assign(sc.goal.data(), sc.goal.data() + sc.goal.size());
  s.params.nonholonomic = sc.nonholonomic;
  return s;
}

}  // namespace cci

#endif  // CCI_SCENE_IO_HPP_
