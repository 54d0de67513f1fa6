#pragma once

// Centralized dense QP solver used as an independent reference for the
// distributed ADMM path. Infeasible-start primal-dual interior point method on
// the full KKT system; no structure exploitation on purpose.

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>

#include "dmpc/qp.hpp"

namespace oracle {

using dmpc::Mat;
using dmpc::Vec;

struct DenseQp {
  Mat H;  // n x n, symmetric positive semidefinite
  Vec g;
  Mat Ae;  // equality rows Ae x = be
  Vec be;
  Mat Ci;  // inequality rows Ci x <= di
  Vec di;
};

struct DenseQpResult {
  Vec x;
  bool converged = false;
  int iters = 0;
  double objective = 0.0;
};

inline DenseQpResult solve_dense_qp(const DenseQp& qp, double tol = 1e-11,
                                    int max_iter = 200) {
  const int n = static_cast<int>(qp.H.rows());
  const int me = static_cast<int>(qp.Ae.rows());
  const int mi = static_cast<int>(qp.Ci.rows());
  DenseQpResult res;

  if (mi == 0) {
    // plain KKT solve
    Mat K(n + me, n + me);
    K.setZero();
    K.topLeftCorner(n, n) = qp.H;
    if (me > 0) {
      K.topRightCorner(n, me) = qp.Ae.transpose();
      K.bottomLeftCorner(me, n) = qp.Ae;
    }
    Vec rhs(n + me);
    rhs.head(n) = -qp.g;
    if (me > 0) rhs.tail(me) = qp.be;
    Vec sol = K.fullPivLu().solve(rhs);
    res.x = sol.head(n);
    res.converged = true;
    res.iters = 1;
    res.objective = 0.5 * res.x.dot(qp.H * res.x) + qp.g.dot(res.x);
    return res;
  }

  Vec x = Vec::Zero(n);
  Vec y = Vec::Zero(me);
  Vec lam = Vec::Ones(mi);
  Vec s = Vec::Ones(mi);

  const int dim = n + me + 2 * mi;
  Mat K(dim, dim);
  Vec rhs(dim);
  for (int it = 1; it <= max_iter; ++it) {
    Vec rd = qp.H * x + qp.g + qp.Ci.transpose() * lam;
    if (me > 0) rd += qp.Ae.transpose() * y;
    Vec rp = me > 0 ? Vec(qp.Ae * x - qp.be) : Vec(0);
    Vec rc = qp.Ci * x + s - qp.di;
    const double mu = lam.dot(s) / mi;

    double worst = rd.cwiseAbs().maxCoeff();
    if (me > 0) worst = std::max(worst, rp.cwiseAbs().maxCoeff());
    worst = std::max(worst, rc.cwiseAbs().maxCoeff());
    const double scale = 1.0 + qp.g.cwiseAbs().maxCoeff();
    if (worst <= tol * scale && mu <= tol * scale) {
      res.converged = true;
      res.iters = it;
      break;
    }

    const double sigma = 0.1;
    K.setZero();
    K.topLeftCorner(n, n) = qp.H;
    int r = n;
    if (me > 0) {
      K.block(0, r, n, me) = qp.Ae.transpose();
      K.block(r, 0, me, n) = qp.Ae;
      r += me;
    }
    K.block(0, r, n, mi) = qp.Ci.transpose();
    K.block(r, 0, mi, n) = qp.Ci;
    K.block(r, r + mi, mi, mi) = Mat::Identity(mi, mi);
    K.block(r + mi, r, mi, mi) = s.asDiagonal();
    K.block(r + mi, r + mi, mi, mi) = lam.asDiagonal();

    rhs.head(n) = -rd;
    int o = n;
    if (me > 0) {
      rhs.segment(o, me) = -rp;
      o += me;
    }
    rhs.segment(o, mi) = -rc;
    rhs.segment(o + mi, mi) = -(lam.cwiseProduct(s) - Vec::Constant(mi, sigma * mu));

    Vec d = K.fullPivLu().solve(rhs);
    Vec dx = d.head(n);
    Vec dy = me > 0 ? Vec(d.segment(n, me)) : Vec(0);
    Vec dl = d.segment(n + me, mi);
    Vec ds = d.tail(mi);

    double a = 1.0;
    for (int k = 0; k < mi; ++k) {
      if (dl(k) < 0.0) a = std::min(a, -lam(k) / dl(k));
      if (ds(k) < 0.0) a = std::min(a, -s(k) / ds(k));
    }
    a = std::min(1.0, 0.995 * a);
    x += a * dx;
    if (me > 0) y += a * dy;
    lam += a * dl;
    s += a * ds;
    res.iters = it;
  }
  res.x = x;
  res.objective = 0.5 * x.dot(qp.H * x) + qp.g.dot(x);
  return res;
}

/// Assembles the centralized dense equivalent of a graph-structured QP:
/// consensus copies are substituted by the owner's variables, two-sided rows
/// are split, and pinned rows become equalities.
inline DenseQp densify(const dmpc::GraphQp& qp) {
  const int m = qp.g.num_agents();
  std::vector<int> offset(m + 1, 0);
  for (int i = 0; i < m; ++i) offset[i + 1] = offset[i] + qp.agents[i].dim;
  const int n = offset[m];

  DenseQp d;
  d.H = Mat::Zero(n, n);
  d.g = Vec::Zero(n);

  std::vector<std::vector<int>> to_global(m);
  for (int i = 0; i < m; ++i) {
    const auto& a = qp.agents[i];
    for (int c = 0; c < a.dim; ++c) to_global[i].push_back(offset[i] + c);
    for (size_t k = 0; k < a.nb.size(); ++k)
      for (int c : a.slice[k]) to_global[i].push_back(offset[a.nb[k]] + c);
  }

  std::vector<Eigen::Triplet<double>> unused;
  int ne = 0, ni = 0;
  for (int i = 0; i < m; ++i) {
    const auto& a = qp.agents[i];
    for (int r = 0; r < a.A.rows(); ++r) {
      if (a.lo(r) == a.hi(r))
        ++ne;
      else {
        if (std::isfinite(a.hi(r))) ++ni;
        if (std::isfinite(a.lo(r))) ++ni;
      }
    }
  }
  d.Ae = Mat::Zero(ne, n);
  d.be = Vec::Zero(ne);
  d.Ci = Mat::Zero(ni, n);
  d.di = Vec::Zero(ni);

  int re = 0, ri = 0;
  for (int i = 0; i < m; ++i) {
    const auto& a = qp.agents[i];
    const auto& tg = to_global[i];
    for (int o = 0; o < a.P.outerSize(); ++o)
      for (dmpc::SpMat::InnerIterator it(a.P, o); it; ++it)
        d.H(tg[it.row()], tg[it.col()]) += it.value();
    for (int c = 0; c < a.q.size(); ++c) d.g(tg[c]) += a.q(c);

    Mat Arows = Mat::Zero(a.A.rows(), n);
    for (int o = 0; o < a.A.outerSize(); ++o)
      for (dmpc::SpMat::InnerIterator it(a.A, o); it; ++it)
        Arows(it.row(), tg[it.col()]) += it.value();
    for (int r = 0; r < a.A.rows(); ++r) {
      if (a.lo(r) == a.hi(r)) {
        d.Ae.row(re) = Arows.row(r);
        d.be(re++) = a.lo(r);
      } else {
        if (std::isfinite(a.hi(r))) {
          d.Ci.row(ri) = Arows.row(r);
          d.di(ri++) = a.hi(r);
        }
        if (std::isfinite(a.lo(r))) {
          d.Ci.row(ri) = -Arows.row(r);
          d.di(ri++) = -a.lo(r);
        }
      }
    }
  }
  // guard against roundoff asymmetry in the accumulated blocks
  d.H = 0.5 * (d.H + d.H.transpose()).eval();
  return d;
}

}  // namespace oracle
