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

#ifndef CCI_FRANK_WOLFE_HPP_
#define CCI_FRANK_WOLFE_HPP_

#include <cmath>
#include <concepts>
#include <limits>
#include <span>
#include <vector>

#include "cci/sdf_core.hpp"

namespace cci {

/// Scalar field with a (sub)gradient.
template <class F, int Dim>
concept ScalarField = requires(const F& f, const Vec<Dim>& x) {
  { f.value(x) } -> std::convertible_to<double>;
  { f.gradient(x) } -> std::convertible_to<Vec<Dim>>;
};

enum class StepRule {
  kClassical,   // gamma_t = 2 / (t + 2)
  kLineSearch,  // golden-section search of the field on [x_t, s_t]
  kAwayStep,    // line search, plus away steps from the worst active atom
};

struct FrankWolfeOptions {
  int max_iters = 64;
  double tol = 1e-6;
  StepRule step = StepRule::kClassical;
  // Optional early exits used by decision procedures: stop as soon as the
  // best value drops to `accept_below`, or the certified lower bound rises
  // above `reject_above`.
  double accept_below = -std::numeric_limits<double>::infinity();
  double reject_above = std::numeric_limits<double>::infinity();
};

template <int Dim>
struct FrankWolfeResult {
  Vec<Dim> x;                      // best iterate
  std::vector<double> weights;     // convex weights of `x` over the atoms
  double value = 0.0;              // field value at x
  double gap = 0.0;                // last Frank-Wolfe duality gap
  double lower_bound = 0.0;        // certified lower bound on the minimum
  int iterations = 0;
  bool converged = false;          // gap <= tol
};

/// Minimizes a convex field over conv(atoms) by Frank-Wolfe, starting from
/// the centroid of the atoms. The linear minimization step picks the atom
/// with the smallest <grad, s> (smallest index on ties). Both the iterates
/// and the atoms visited are candidates for the returned best point, so the
/// result only improves with a larger iteration budget.
template <int Dim, class Field>
  requires ScalarField<Field, Dim>
FrankWolfeResult<Dim> frank_wolfe_minimize(const Field& field, std::span<const Vec<Dim>> atoms,
                                           const FrankWolfeOptions& opts = {}) {
  const std::size_t n = atoms.size();
  if (n == 0) throw DomainError("Frank-Wolfe over an empty domain");
  FrankWolfeResult<Dim> res;

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  Vec<Dim> x = Vec<Dim>::Zero();
  for (const auto& a : atoms) x += a;
  x /= static_cast<double>(n);

  double fx = field.value(x);
  res.x = x;
  res.weights = w;
  res.value = fx;
  res.lower_bound = -std::numeric_limits<double>::infinity();
  if (n == 1) {
    res.gap = 0.0;
    res.lower_bound = fx;
    res.converged = true;
    return res;
  }

  auto consider = [&](const Vec<Dim>& p, double fp, const std::vector<double>& wp) {
    if (fp < res.value) {
      res.value = fp;
      res.x = p;
      res.weights = wp;
    }
  };

  // Minimizer of the field on x + gamma * d, gamma in [0, gmax]. The far
  // endpoint is tried explicitly so that drop steps land exactly.
  auto line_search = [&](const Vec<Dim>& d, double gmax) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.0, hi = gmax;
    double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
    double fa = field.value(Vec<Dim>(x + a * d));
    double fb = field.value(Vec<Dim>(x + b * d));
    for (int k = 0; k < 60 && hi - lo > 1e-13 * std::max(1.0, gmax); ++k) {
      if (fa <= fb) {
        hi = b;
        b = a;
        fb = fa;
        a = hi - phi * (hi - lo);
        fa = field.value(Vec<Dim>(x + a * d));
      } else {
        lo = a;
        a = b;
        fa = fb;
        b = lo + phi * (hi - lo);
        fb = field.value(Vec<Dim>(x + b * d));
      }
    }
    double gamma = 0.5 * (lo + hi);
    if (field.value(Vec<Dim>(x + gmax * d)) <= field.value(Vec<Dim>(x + gamma * d))) gamma = gmax;
    return gamma;
  };

  for (int t = 0; t < opts.max_iters; ++t) {
    Vec<Dim> g = field.gradient(x);
    std::size_t s_idx = 0;
    double s_val = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      double v = g.dot(atoms[i]);
      if (v < s_val) {
        s_val = v;
        s_idx = i;
      }
    }
    const Vec<Dim>& s = atoms[s_idx];
    double gap = g.dot(x - s);
    res.gap = gap;
    res.lower_bound = std::max(res.lower_bound, fx - gap);

    double fs = field.value(s);
    {
      std::vector<double> ws(n, 0.0);
      ws[s_idx] = 1.0;
      consider(s, fs, ws);
    }
    if (gap <= opts.tol) {
      res.converged = true;
      break;
    }
    if (res.value <= opts.accept_below || res.lower_bound > opts.reject_above) break;

    bool away = false;
    std::size_t v_idx = 0;
    if (opts.step == StepRule::kAwayStep) {
      double v_val = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        if (w[i] <= 0.0) continue;
        double v = g.dot(atoms[i]);
        if (v > v_val) {
          v_val = v;
          v_idx = i;
        }
      }
      away = w[v_idx] < 1.0 && v_val - g.dot(x) > gap;
    }

    if (away) {
      Vec<Dim> d = x - atoms[v_idx];
      double gmax = w[v_idx] / (1.0 - w[v_idx]);
      double gamma = line_search(d, gmax);
      x = x + gamma * d;
      for (auto& wi : w) wi *= (1.0 + gamma);
      w[v_idx] = gamma == gmax ? 0.0 : w[v_idx] - gamma;
    } else {
      double gamma = 2.0 / (t + 2.0);
      if (opts.step != StepRule::kClassical) gamma = line_search(Vec<Dim>(s - x), 1.0);
      x = (1.0 - gamma) * x + gamma * s;
      for (auto& wi : w) wi *= (1.0 - gamma);
      w[s_idx] += gamma;
    }
    fx = field.value(x);
    res.iterations = t + 1;
    consider(x, fx, w);
  }
  return res;
}

}  // namespace cci

#endif  // CCI_FRANK_WOLFE_HPP_
