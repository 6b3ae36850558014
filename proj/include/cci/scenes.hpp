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

// Seeded 2D scene generators on the unit box.

#ifndef CCI_SCENES_HPP_
#define CCI_SCENES_HPP_

#include <cstdint>
#include <random>
#include <string>

#include "cci/planner.hpp"

namespace cci {

struct Scene {
  std::string name;
  ObjectSet<2> objects;
  RobotModel robot = RobotModel::point();
  Eigen::VectorXd start;
  Eigen::VectorXd goal;
  bool nonholonomic = false;
};

namespace scenes {

inline constexpr double kFrame = 0.05;  // frame wall thickness

/// Four walls around [0, 1]^2, overlapping at the corners. Ids 1..4.
inline void add_frame(ObjectSet<2>& s) {
  const double h = kFrame / 2;
  s.add(1, Polytope<2>::box(V2(0.5, h), V2(0.5, h)));
  s.add(2, Polytope<2>::box(V2(1.0 - h, 0.5), V2(h, 0.5)));
  s.add(3, Polytope<2>::box(V2(0.5, 1.0 - h), V2(0.5, h)));
  s.add(4, Polytope<2>::box(V2(h, 0.5), V2(h, 0.5)));
}

/// Horizontal wall from x0 to x1 at height y as a chain of short boxes,
/// starting at the x0 end. Neighbors overlap slightly.
inline void add_chain(ObjectSet<2>& s, ObjectId first_id, double x0, double x1, double y, double thickness,
                      double piece = 0.08, double overlap = 0.01) {
  const double len = std::abs(x1 - x0);
  const int n = std::max(1, static_cast<int>(std::ceil((len - overlap) / (piece - overlap))));
  const double step = (len - overlap) / n;
  const double dir = x1 > x0 ? 1.0 : -1.0;
  for (int i = 0; i < n; ++i) {
    double a = x0 + dir * i * step, b = a + dir * (step + overlap);
    s.add(first_id + static_cast<ObjectId>(i),
          Polytope<2>::box(V2(0.5 * (a + b), y), V2(0.5 * std::abs(b - a), thickness / 2)));
  }
}

/// Wall across the middle with one gap of 1.2x the robot width; start below,
/// goal above, with the straight line between them crossing the wall well
/// away from the gap.
inline Scene corridor(std::uint64_t seed, double robot_radius = 0.1) {
  std::mt19937_64 rng(seed);
  auto U = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const double gap = 1.2 * 2.0 * robot_radius;
  const double gx = U(0.35, 0.65);
  const double lo = kFrame + robot_radius + 0.03, hi = 1.0 - lo;
  double xc;
  do {
    xc = U(lo, hi);
  } while (std::abs(xc - gx) < gap / 2 + 0.13);
  const double room = std::min({0.1, xc - lo, hi - xc});
  const double spread = U(-room, room);

  Scene s;
  s.name = "corridor-" + std::to_string(seed);
  add_frame(s.objects);
  const double inner = kFrame - 0.01;
  add_chain(s.objects, 10, inner, gx - gap / 2, 0.5, 0.1);
  add_chain(s.objects, 30, 1.0 - inner, gx + gap / 2, 0.5, 0.1);
  s.robot = RobotModel::disc(robot_radius);
  s.start = Eigen::Vector2d(xc - spread, 0.2);
  s.goal = Eigen::Vector2d(xc + spread, 0.8);
  return s;
}

/// Three horizontal corridors joined by gaps at alternating ends, for a
/// rectangular car-like robot.
inline Scene maze() {
  Scene s;
  s.name = "maze";
  add_frame(s.objects);
  const double inner = kFrame - 0.01;
  add_chain(s.objects, 10, inner, 0.68, 0.36, 0.06);
  add_chain(s.objects, 30, 1.0 - inner, 0.32, 0.64, 0.06);
  s.robot = RobotModel::polygon({V2(-0.05, -0.025), V2(0.05, -0.025), V2(0.05, 0.025), V2(-0.05, 0.025)}, 20.0);
  s.start = Eigen::Vector3d(0.2, 0.18, 0.0);
  s.goal = Eigen::Vector3d(0.8, 0.82, 0.0);
  s.nonholonomic = true;
  return s;
}

}  // namespace scenes
}  // namespace cci

#endif  // CCI_SCENES_HPP_
