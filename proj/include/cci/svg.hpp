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

// Minimal SVG writer for 2D scenes. Numbers are printed with a fixed
// precision so equal inputs give equal bytes.

#ifndef CCI_SVG_HPP_
#define CCI_SVG_HPP_

#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cci/planner.hpp"

namespace cci {

class SvgCanvas {
 public:
  /// World box [lo, hi] drawn into a square of `size` pixels, y up.
  SvgCanvas(const V2& lo, const V2& hi, int size = 600) : lo_(lo), hi_(hi), size_(size) {
    scale_ = size / std::max(hi.x() - lo.x(), hi.y() - lo.y());
  }

  void shape(ObjectId id, const ConvexShape<2>& s, const std::string& fill, double opacity) {
    const std::string common = " data-id=\"" + std::to_string(id) + "\" fill=\"" + fill + "\" fill-opacity=\"" +
                               num(opacity) + "\" stroke=\"#333333\" stroke-width=\"0.5\"/>\n";
    if (const auto* sp = std::get_if<Sphere<2>>(&s)) {
      V2 c = px(sp->center());
      body_ << "<circle cx=\"" << num(c.x()) << "\" cy=\"" << num(c.y()) << "\" r=\"" << num(sp->radius() * scale_)
            << "\"" << common;
      return;
    }
    body_ << "<polygon points=\"" << points(std::get<Polytope<2>>(s).vertices()) << "\"" << common;
  }

  void polyline(const std::vector<V2>& pts, const std::string& stroke, double width, double opacity = 1.0) {
    body_ << "<polyline points=\"" << points(pts) << "\" fill=\"none\" stroke=\"" << stroke
          << "\" stroke-width=\"" << num(width) << "\" stroke-opacity=\"" << num(opacity) << "\"/>\n";
  }

  void outline(const std::vector<V2>& pts, const std::string& stroke, double opacity) {
    body_ << "<polygon points=\"" << points(pts) << "\" fill=\"none\" stroke=\"" << stroke
          << "\" stroke-width=\"0.7\" stroke-opacity=\"" << num(opacity) << "\"/>\n";
  }

  void circle(const V2& c, double radius_world, const std::string& stroke, double opacity) {
    V2 p = px(c);
    body_ << "<circle cx=\"" << num(p.x()) << "\" cy=\"" << num(p.y()) << "\" r=\"" << num(radius_world * scale_)
          << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"0.7\" stroke-opacity=\"" << num(opacity)
          << "\"/>\n";
  }

  void marker(const V2& c, const std::string& fill, const std::string& cls) {
    V2 p = px(c);
    body_ << "<circle class=\"" << cls << "\" cx=\"" << num(p.x()) << "\" cy=\"" << num(p.y())
          << "\" r=\"5\" fill=\"" << fill << "\"/>\n";
  }

  void segments(const std::vector<std::pair<V2, V2>>& segs, const std::string& stroke) {
    if (segs.empty()) return;
    body_ << "<path fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1\" d=\"";
    for (const auto& [a, b] : segs) {
      V2 p = px(a), q = px(b);
      body_ << "M" << num(p.x()) << " " << num(p.y()) << "L" << num(q.x()) << " " << num(q.y());
    }
    body_ << "\"/>\n";
  }

  void text(const std::string& s) {
    body_ << "<text x=\"6\" y=\"16\" font-family=\"monospace\" font-size=\"12\">" << escape(s) << "</text>\n";
  }

  std::string str() const {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size_ << "\" height=\"" << size_
        << "\" viewBox=\"0 0 " << size_ << " " << size_ << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    if (std::string(buf) == "-0.000") return "0.000";
    return buf;
  }

  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '<':
          out += "&lt;";
          break;
        case '>':
          out += "&gt;";
          break;
        case '&':
          out += "&amp;";
          break;
        case '"':
          out += "&quot;";
          break;
        default:
          out += c;
      }
    }
    return out;
  }

 private:
  V2 px(const V2& x) const { return V2((x.x() - lo_.x()) * scale_, size_ - (x.y() - lo_.y()) * scale_); }

  std::string points(const std::vector<V2>& pts) const {
    std::string s;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      V2 p = px(pts[i]);
      if (i) s += ' ';
      s += num(p.x()) + "," + num(p.y());
    }
    return s;
  }

  V2 lo_, hi_;
  int size_;
  double scale_;
  std::ostringstream body_;
};

/// Robot outline at a configuration: the polygon, or a circle for a disc.
inline void draw_robot(SvgCanvas& c, const RobotModel& robot, const Eigen::VectorXd& q, const std::string& stroke,
                       double opacity) {
  V2 pos = q.head<2>();
  if (robot.kind() == RobotModel::Kind::kDisc) {
    c.circle(pos, robot.radius(), stroke, opacity);
  } else if (robot.kind() == RobotModel::Kind::kPolygon) {
    Eigen::Rotation2Dd R(q.size() > 2 ? q[2] : 0.0);
    std::vector<V2> pts;
    for (const auto& v : robot.vertices()) pts.push_back(pos + R * v);
    c.outline(pts, stroke, opacity);
  }
}

inline std::vector<V2> path_points(const Path& p) {
  std::vector<V2> out;
  for (int t = 0; t < p.size(); ++t) out.push_back(p.position(t));
  return out;
}

}  // namespace cci

#endif  // CCI_SVG_HPP_
