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

// Convex QP by a primal-dual interior point method (Mehrotra predictor-
// corrector) on a sparse normal-equations system.
//
//   minimize    1/2 x'Hx + c'x + sum_i w_i s_i
//   subject to  C x >= d                  (hard rows)
//               G x + s >= h,  s >= 0     (soft rows, slack penalty w)
//               E x  = e
//               lb <= x <= ub             (infinite bounds are skipped)

#ifndef CCI_QP_HPP_
#define CCI_QP_HPP_

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cci/sdf_core.hpp"

namespace cci {

class QpSetupError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

struct QpProblem {
  SparseMatrix H;  // symmetric, both triangles stored
  Eigen::VectorXd c;
  SparseMatrix C;
  Eigen::VectorXd d;
  SparseMatrix G;
  Eigen::VectorXd h;
  Eigen::VectorXd soft_weight;  // one per soft row
  SparseMatrix E;
  Eigen::VectorXd e;
  Eigen::VectorXd lb, ub;

  explicit QpProblem(Eigen::Index n = 0)
      : H(n, n), c(Eigen::VectorXd::Zero(n)), C(0, n), G(0, n), E(0, n),
        lb(Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity())),
        ub(Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity())) {}

  Eigen::Index size() const { return c.size(); }

  double objective(const Eigen::VectorXd& x, const Eigen::VectorXd& s) const {
    double v = 0.5 * x.dot(H * x) + c.dot(x);
    if (s.size()) v += soft_weight.dot(s);
    return v;
  }
};

struct QpOptions {
  double tol = 1e-9;
  int max_iters = 80;
  bool check_psd = true;
};

struct QpResult {
  Eigen::VectorXd x;
  Eigen::VectorXd s;          // soft-row slacks
  Eigen::VectorXd soft_dual;  // multipliers of the soft rows
  double objective = 0.0;
  double primal_residual = 0.0;  // worst hard-row, bound or equality violation
  double dual_residual = 0.0;    // stationarity, infinity norm
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline void check_dimensions(const QpProblem& p) {
  const Eigen::Index n = p.size();
  auto fail = [](const std::string& what) { throw QpSetupError("qp: inconsistent " + what); };
  if (p.H.rows() != n || p.H.cols() != n) fail("H");
  if (p.C.cols() != n || p.C.rows() != p.d.size()) fail("C/d");
  if (p.G.cols() != n || p.G.rows() != p.h.size() || p.soft_weight.size() != p.h.size()) fail("G/h/weights");
  if (p.E.cols() != n || p.E.rows() != p.e.size()) fail("E/e");
  if (p.lb.size() != n || p.ub.size() != n) fail("bounds");
  for (Eigen::Index i = 0; i < n; ++i)
    if (p.lb[i] > p.ub[i]) throw QpSetupError("qp: empty bound interval for variable " + std::to_string(i));
  if ((p.soft_weight.array() < 0.0).any()) throw QpSetupError("qp: negative soft weight");
}

inline void check_psd(const SparseMatrix& H) {
  if (H.rows() == 0) return;
  Eigen::MatrixXd dense(H);
  double scale = std::max(1.0, dense.cwiseAbs().maxCoeff());
  if ((dense - dense.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw QpSetupError("qp: objective matrix is not symmetric");
  Eigen::LDLT<Eigen::MatrixXd> ldlt(dense);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() < -1e-10 * scale).any())
    throw QpSetupError("qp: objective matrix is not positive semidefinite");
}

}  // namespace detail

/// Solves the QP. On an iteration cap the last iterate is returned with
/// converged = false and its residuals.
inline QpResult qp_solve(const QpProblem& p, const QpOptions& opts = {}) {
  detail::check_dimensions(p);
  if (opts.check_psd) detail::check_psd(p.H);

  const Eigen::Index n = p.size();
  const Eigen::Index ns = p.h.size();
  const Eigen::Index nz = n + ns;
  const double inf = std::numeric_limits<double>::infinity();

  // Stack every inequality as A z >= b over z = (x, s).
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> bvec;
  Eigen::Index row = 0;
  auto add_rows = [&](const SparseMatrix& M, const Eigen::VectorXd& rhs, bool with_slack) {
    for (int k = 0; k < M.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(M, k); it; ++it) trip.emplace_back(row + it.row(), it.col(), it.value());
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      if (with_slack) trip.emplace_back(row + i, n + i, 1.0);
      bvec.push_back(rhs[i]);
    }
    row += M.rows();
  };
  add_rows(p.C, p.d, false);
  add_rows(p.G, p.h, true);
  for (Eigen::Index i = 0; i < ns; ++i) {
    trip.emplace_back(row++, n + i, 1.0);
    bvec.push_back(0.0);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (p.lb[i] > -inf) {
      trip.emplace_back(row++, i, 1.0);
      bvec.push_back(p.lb[i]);
    }
    if (p.ub[i] < inf) {
      trip.emplace_back(row++, i, -1.0);
      bvec.push_back(-p.ub[i]);
    }
  }
  const Eigen::Index m = row;
  SparseMatrix A(m, nz);
  A.setFromTriplets(trip.begin(), trip.end());
  SparseMatrix At = A.transpose();
  Eigen::VectorXd b = Eigen::Map<Eigen::VectorXd>(bvec.data(), m);

  SparseMatrix Q(nz, nz);
  {
    std::vector<Eigen::Triplet<double>> qt;
    for (int k = 0; k < p.H.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(p.H, k); it; ++it) qt.emplace_back(it.row(), it.col(), it.value());
    Q.setFromTriplets(qt.begin(), qt.end());
  }
  Eigen::VectorXd q(nz);
  q << p.c, p.soft_weight;
  SparseMatrix Ez(p.E.rows(), nz);
  {
    std::vector<Eigen::Triplet<double>> et;
    for (int k = 0; k < p.E.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(p.E, k); it; ++it) et.emplace_back(it.row(), it.col(), it.value());
    Ez.setFromTriplets(et.begin(), et.end());
  }
  const Eigen::Index me = p.E.rows();

  // Start: x inside its bounds, slacks covering soft rows.
  Eigen::VectorXd z = Eigen::VectorXd::Zero(nz);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (p.lb[i] > -inf && p.ub[i] < inf)
      z[i] = 0.5 * (p.lb[i] + p.ub[i]);
    else
      z[i] = std::clamp(0.0, p.lb[i], p.ub[i]);
  }
  if (ns) {
    Eigen::VectorXd gx = p.G * z.head(n);
    for (Eigen::Index i = 0; i < ns; ++i) z[n + i] = std::max(p.h[i] - gx[i], 0.0) + 1.0;
  }
  Eigen::VectorXd t = (A * z - b).cwiseMax(1.0);
  Eigen::VectorXd lam = Eigen::VectorXd::Ones(m);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(me);

  const double scale_b = 1.0 + (m ? b.cwiseAbs().maxCoeff() : 0.0);
  const double scale_q = 1.0 + (nz ? q.cwiseAbs().maxCoeff() : 0.0);
  const double reg = 1e-12;

  Eigen::SimplicialLDLT<SparseMatrix> solver;
  bool analyzed = false;
  QpResult res;

  auto residuals = [&](Eigen::VectorXd& rd, Eigen::VectorXd& rp, Eigen::VectorXd& re) {
    rd = Q * z + q - At * lam;
    if (me) rd += Ez.transpose() * y;
    rp = A * z - b - t;
    re = Ez * z - p.e;
  };

  int it = 0;
  for (; it < opts.max_iters; ++it) {
    Eigen::VectorXd rd, rp, re;
    residuals(rd, rp, re);
    const double mu = m ? t.dot(lam) / static_cast<double>(m) : 0.0;
    const double pr = std::max(rp.size() ? rp.cwiseAbs().maxCoeff() : 0.0, re.size() ? re.cwiseAbs().maxCoeff() : 0.0);
    const double dr = rd.size() ? rd.cwiseAbs().maxCoeff() : 0.0;
    if (pr <= opts.tol * scale_b && dr <= opts.tol * scale_q && mu <= opts.tol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd D = lam.cwiseQuotient(t);
    SparseMatrix M = Q + At * D.asDiagonal() * A;
    for (Eigen::Index i = 0; i < nz; ++i) M.coeffRef(i, i) += reg;
    if (!analyzed) {
      solver.analyzePattern(M);
      analyzed = true;
    }
    solver.factorize(M);
    if (solver.info() != Eigen::Success) break;

    Eigen::MatrixXd MinvEt;
    Eigen::LDLT<Eigen::MatrixXd> schur;
    if (me) {
      MinvEt = solver.solve(Eigen::MatrixXd(Ez.transpose()));
      schur.compute(Eigen::MatrixXd(Ez * MinvEt));
    }
    // Newton direction for complementarity target rc.
    auto direction = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dz, Eigen::VectorXd& dt, Eigen::VectorXd& dl,
                         Eigen::VectorXd& dy) {
      Eigen::VectorXd r1 = -rd + At * (rc - lam.cwiseProduct(rp)).cwiseQuotient(t);
      dz = solver.solve(r1);
      if (me) {
        dy = schur.solve(Ez * dz + re);
        dz -= MinvEt * dy;
      } else {
        dy.resize(0);
      }
      dt = A * dz + rp;
      dl = (rc - lam.cwiseProduct(dt)).cwiseQuotient(t);
    };
    auto max_step = [](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
      double a = 1.0;
      for (Eigen::Index i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
      return a;
    };

    Eigen::VectorXd dz, dt, dl, dy;
    direction(-t.cwiseProduct(lam), dz, dt, dl, dy);
    double ap = max_step(t, dt), ad = max_step(lam, dl);
    double mu_aff = m ? (t + ap * dt).dot(lam + ad * dl) / static_cast<double>(m) : 0.0;
    double sigma = mu > 0.0 ? std::pow(mu_aff / mu, 3) : 0.0;
    Eigen::VectorXd rc = -t.cwiseProduct(lam) - dt.cwiseProduct(dl) + Eigen::VectorXd::Constant(m, sigma * mu);
    direction(rc, dz, dt, dl, dy);
    ap = std::min(1.0, 0.995 * max_step(t, dt));
    ad = std::min(1.0, 0.995 * max_step(lam, dl));
    if (!dz.allFinite() || !dt.allFinite() || !dl.allFinite() || (me && !dy.allFinite())) break;
    z += ap * dz;
    t += ap * dt;
    lam += ad * dl;
    if (me) y += ad * dy;
    t = t.cwiseMax(1e-300);
    lam = lam.cwiseMax(1e-300);
  }

  res.iterations = it;
  res.x = z.head(n);
  res.s = z.tail(ns);
  res.soft_dual = lam.segment(p.C.rows(), ns);
  res.objective = p.objective(res.x, res.s);
  double viol = 0.0;
  if (p.C.rows()) viol = std::max(viol, (p.d - p.C * res.x).maxCoeff());
  if (me) viol = std::max(viol, (p.E * res.x - p.e).cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) viol = std::max({viol, p.lb[i] - res.x[i], res.x[i] - p.ub[i]});
  if (ns) viol = std::max({viol, (p.h - p.G * res.x - res.s).maxCoeff(), -res.s.minCoeff()});
  res.primal_residual = z.allFinite() ? viol : std::numeric_limits<double>::infinity();
  Eigen::VectorXd rd = Q * z + q - At * lam;
  if (me) rd += Ez.transpose() * y;
  res.dual_residual = nz ? rd.cwiseAbs().maxCoeff() : 0.0;
  return res;
}

/// Sparse matrix from dense, dropping exact zeros.
inline SparseMatrix to_sparse(const Eigen::MatrixXd& m) { return m.sparseView(0.0, 0.0); }

}  // namespace cci

#endif  // CCI_QP_HPP_
