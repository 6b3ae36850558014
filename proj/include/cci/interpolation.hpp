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

#ifndef CCI_INTERPOLATION_HPP_
#define CCI_INTERPOLATION_HPP_

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cci/intersect.hpp"
#include "cci/sdf_core.hpp"

namespace cci {

/// Raised when eta * s leaves the range where exp() is representable; it
/// means eta is too large for the scene scale.
struct ShapingOverflow : std::overflow_error {
  using std::overflow_error::overflow_error;
};

inline constexpr double kShapingExponentLimit = 700.0;
inline constexpr double kDefaultEta = 15.0;

/// Nondecreasing convex map with f(0) = 0 applied to SDF values before
/// blending. Exponential: f(s) = (exp(eta s) - 1) / eta.
class ShapingFunction {
 public:
  enum class Kind { kIdentity, kExponential };

  static ShapingFunction identity() { return ShapingFunction(Kind::kIdentity, 0.0); }
  static ShapingFunction exponential(double eta = kDefaultEta) {
    if (!std::isfinite(eta) || eta <= 0.0) throw InvalidInput("shaping eta must be positive and finite");
    return ShapingFunction(Kind::kExponential, eta);
  }

  Kind kind() const { return kind_; }
  double eta() const { return eta_; }

  double operator()(double s) const {
    if (kind_ == Kind::kIdentity) return s;
    return std::expm1(exponent(s)) / eta_;
  }

  double derivative(double s) const {
    if (kind_ == Kind::kIdentity) return 1.0;
    return std::exp(exponent(s));
  }

 private:
  ShapingFunction(Kind kind, double eta) : kind_(kind), eta_(eta) {}

  double exponent(double s) const {
    double e = eta_ * s;
    if (e > kShapingExponentLimit)
      throw ShapingOverflow("shaping overflow: eta * s = " + std::to_string(e) + " exceeds " +
                            std::to_string(kShapingExponentLimit));
    return e;
  }

  Kind kind_;
  double eta_;
};

inline double shaping_eval(const ShapingFunction& f, double s) { return f(s); }

/// (1 - alpha) f(SDF_source(x)) + alpha f(SDF_target(x)) for two intersecting
/// convex shapes. The sublevel set {<= 0} is convex and sandwiched between
/// source ∩ target and source ∪ target.
template <int Dim>
class InterpolatedSdf {
 public:
  InterpolatedSdf(ConvexShape<Dim> source, ConvexShape<Dim> target, double alpha,
                  ShapingFunction shaping)
      : source_(std::move(source)), target_(std::move(target)), alpha_(alpha), shaping_(shaping) {
    check_alpha(alpha);
    if (!intersects(source_, target_)) throw DomainError("interpolated SDF needs intersecting shapes");
  }

  /// Same shapes at a different alpha; the intersection check is not repeated.
  InterpolatedSdf with_alpha(double alpha) const {
    check_alpha(alpha);
    InterpolatedSdf copy = *this;
    copy.alpha_ = alpha;
    return copy;
  }

  const ConvexShape<Dim>& source() const { return source_; }
  const ConvexShape<Dim>& target() const { return target_; }
  double alpha() const { return alpha_; }
  const ShapingFunction& shaping() const { return shaping_; }

  /// Terms with zero weight are skipped, so the endpoints do not depend on the
  /// other shape at all.
  double value(const Vec<Dim>& x, double inflate = 0.0) const {
    double v = 0.0;
    if (alpha_ < 1.0) v += (1.0 - alpha_) * shaping_(sdf_eval(source_, x) - inflate);
    if (alpha_ > 0.0) v += alpha_ * shaping_(sdf_eval(target_, x) - inflate);
    return v;
  }

  Vec<Dim> gradient(const Vec<Dim>& x, double inflate = 0.0) const {
    Vec<Dim> g = Vec<Dim>::Zero();
    if (alpha_ < 1.0)
      g += (1.0 - alpha_) * shaping_.derivative(sdf_eval(source_, x) - inflate) * sdf_gradient(source_, x);
    if (alpha_ > 0.0)
      g += alpha_ * shaping_.derivative(sdf_eval(target_, x) - inflate) * sdf_gradient(target_, x);
    return g;
  }

 private:
  static void check_alpha(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must lie in [0, 1]");
  }

  ConvexShape<Dim> source_;
  ConvexShape<Dim> target_;
  double alpha_;
  ShapingFunction shaping_;
};

template <int Dim>
double interp_sdf_eval(const InterpolatedSdf<Dim>& b, const Vec<Dim>& x) {
  return b.value(x);
}

template <int Dim>
Vec<Dim> interp_sdf_gradient(const InterpolatedSdf<Dim>& b, const Vec<Dim>& x) {
  return b.gradient(x);
}

template <int Dim>
bool interp_object_contains(const InterpolatedSdf<Dim>& b, const Vec<Dim>& x) {
  return occupied(b.value(x));
}

/// A glued leaf object blended from its anchor.
template <int Dim>
struct Blend {
  ObjectId anchor;  // sigma(j), member of the base set
  ObjectId leaf;
  InterpolatedSdf<Dim> field;
};

/// Which term of the environment minimum is active.
struct ActiveTerm {
  bool is_base = true;
  ObjectId base_id = 0;     // valid when is_base
  std::size_t blend = 0;    // valid when !is_base
};

/// min(SDF_base(x), SDF^alpha_1(x), ..., SDF^alpha_n(x)). The base term is
/// unshaped; only the blend terms pass through the shaping function.
template <int Dim>
class EnvInterpSdf {
 public:
  EnvInterpSdf(ObjectSet<Dim> base, std::vector<Blend<Dim>> blends, double alpha)
      : base_(std::move(base)), blends_(std::move(blends)), alpha_(alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must lie in [0, 1]");
    for (auto& b : blends_) {
      if (!base_.contains_id(b.anchor))
        throw InvalidInput("blend anchor " + std::to_string(b.anchor) + " is not in the base set");
      b.field = b.field.with_alpha(alpha);
    }
  }

  EnvInterpSdf with_alpha(double alpha) const { return EnvInterpSdf(base_, blends_, alpha); }

  const ObjectSet<Dim>& base() const { return base_; }
  const std::vector<Blend<Dim>>& blends() const { return blends_; }
  double alpha() const { return alpha_; }

  double value(const Vec<Dim>& x) const { return evaluate(x).first; }

  std::pair<double, ActiveTerm> evaluate(const Vec<Dim>& x) const {
    if (base_.empty() && blends_.empty()) throw DomainError("empty interpolated environment");
    double best = std::numeric_limits<double>::infinity();
    ActiveTerm term;
    if (!base_.empty()) {
      auto c = combined_sdf(base_, x);
      best = c.value;
      term = {true, c.id, 0};
    }
    for (std::size_t j = 0; j < blends_.size(); ++j) {
      double v = blends_[j].field.value(x);
      if (v < best) {
        best = v;
        term = {false, 0, j};
      }
    }
    return {best, term};
  }

  Vec<Dim> gradient(const Vec<Dim>& x) const {
    auto [v, term] = evaluate(x);
    (void)v;
    if (term.is_base) return sdf_gradient(base_.at(term.base_id).shape, x);
    return blends_[term.blend].field.gradient(x);
  }

 private:
  ObjectSet<Dim> base_;
  std::vector<Blend<Dim>> blends_;
  double alpha_;
};

template <int Dim>
double env_interp_eval(const EnvInterpSdf<Dim>& e, const Vec<Dim>& x) {
  return e.value(x);
}

template <int Dim>
Vec<Dim> env_interp_gradient(const EnvInterpSdf<Dim>& e, const Vec<Dim>& x) {
  return e.gradient(x);
}

}  // namespace cci

#endif  // CCI_INTERPOLATION_HPP_
