#include "dmpc/qp.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dmpc {

void AdmmSettings::validate() const {
  if (!(rho > 0.0)) throw std::invalid_argument("AdmmSettings: rho must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("AdmmSettings: tol must be positive");
  if (max_iter <= 0) throw std::invalid_argument("AdmmSettings: max_iter must be positive");
  if (!(relax > 0.0 && relax < 2.0)) throw std::invalid_argument("AdmmSettings: relax must be in (0,2)");
  if (check_every <= 0) throw std::invalid_argument("AdmmSettings: check_every must be positive");
  if (equilibrate_iters < 0) throw std::invalid_argument("AdmmSettings: negative equilibrate_iters");
}

int AgentQpBlock::bundle_dim() const {
  int d = dim;
  for (const auto& s : slice) d += static_cast<int>(s.size());
  return d;
}

void GraphQp::validate() const {
  const int m = g.num_agents();
  if (static_cast<int>(agents.size()) != m)
    throw std::invalid_argument("GraphQp: agent block count mismatch");
  for (int i = 0; i < m; ++i) {
    const auto& a = agents[i];
    if (a.dim < 0) throw std::invalid_argument("GraphQp: negative block dimension");
    if (a.nb != g.neighbors(i))
      throw std::invalid_argument("GraphQp: neighbor list does not match the graph");
    if (a.slice.size() != a.nb.size())
      throw std::invalid_argument("GraphQp: slice count does not match neighbor count");
    for (size_t k = 0; k < a.nb.size(); ++k) {
      const auto& s = a.slice[k];
      const int dj = agents[a.nb[k]].dim;
      for (size_t c = 0; c < s.size(); ++c) {
        if (s[c] < 0 || s[c] >= dj)
          throw std::invalid_argument("GraphQp: slice index out of neighbor range");
        if (c > 0 && s[c] <= s[c - 1])
          throw std::invalid_argument("GraphQp: slice not strictly ascending");
      }
    }
    const int bd = a.bundle_dim();
    if (a.P.rows() != bd || a.P.cols() != bd)
      throw std::invalid_argument("GraphQp: P dimension mismatch");
    if (a.q.size() != bd) throw std::invalid_argument("GraphQp: q dimension mismatch");
    if (a.A.cols() != bd) throw std::invalid_argument("GraphQp: A column mismatch");
    if (a.lo.size() != a.A.rows() || a.hi.size() != a.A.rows())
      throw std::invalid_argument("GraphQp: row bound size mismatch");
    for (const auto& grp : a.groups)
      if (grp.offset < 0 || grp.offset + grp.rows > a.A.rows())
        throw std::invalid_argument("GraphQp: row group out of range");
  }
}

namespace {

struct Workspace {
  // bundle -> global variable index
  std::vector<std::vector<int>> to_global;
  std::vector<int> offset;
  int total_vars = 0;
  // averaging plan: for agent j, component c, the (agent, bundle position)
  // pairs contributing to the consensus value; owner first, then copiers in
  // ascending agent order
  std::vector<std::vector<std::vector<std::pair<int, int>>>> plan;
};

Workspace build_workspace(const GraphQp& qp) {
  const int m = qp.g.num_agents();
  Workspace w;
  w.offset.resize(m + 1, 0);
  for (int i = 0; i < m; ++i) w.offset[i + 1] = w.offset[i] + qp.agents[i].dim;
  w.total_vars = w.offset[m];

  w.to_global.resize(m);
  for (int i = 0; i < m; ++i) {
    const auto& a = qp.agents[i];
    auto& tg = w.to_global[i];
    tg.reserve(a.bundle_dim());
    for (int c = 0; c < a.dim; ++c) tg.push_back(w.offset[i] + c);
    for (size_t k = 0; k < a.nb.size(); ++k)
      for (int c : a.slice[k]) tg.push_back(w.offset[a.nb[k]] + c);
  }

  w.plan.resize(m);
  for (int j = 0; j < m; ++j) {
    w.plan[j].resize(qp.agents[j].dim);
    for (int c = 0; c < qp.agents[j].dim; ++c) w.plan[j][c].push_back({j, c});
  }
  for (int i = 0; i < m; ++i) {
    const auto& a = qp.agents[i];
    int pos = a.dim;
    for (size_t k = 0; k < a.nb.size(); ++k) {
      const int j = a.nb[k];
      for (int c : a.slice[k]) w.plan[j][c].push_back({i, pos++});
    }
  }
  // copier entries were appended in ascending i order by the loop above
  return w;
}

struct ScaledData {
  std::vector<SpMat> P, A;
  std::vector<Vec> q, lo, hi;
  Vec var_scale;                 // per global variable
  std::vector<Vec> row_scale;    // per agent row
  double cost_scale = 1.0;
};

ScaledData scale_problem(const GraphQp& qp, const Workspace& w, const AdmmSettings& st) {
  const int m = qp.g.num_agents();
  ScaledData sd;
  sd.P.resize(m);
  sd.A.resize(m);
  sd.q.resize(m);
  sd.lo.resize(m);
  sd.hi.resize(m);
  sd.row_scale.resize(m);
  sd.var_scale = Vec::Ones(w.total_vars);
  for (int i = 0; i < m; ++i) {
    sd.P[i] = qp.agents[i].P;
    sd.A[i] = qp.agents[i].A;
    sd.q[i] = qp.agents[i].q;
    sd.lo[i] = qp.agents[i].lo;
    sd.hi[i] = qp.agents[i].hi;
    sd.row_scale[i] = Vec::Ones(qp.agents[i].A.rows());
  }
  if (!st.equilibrate) return sd;

  for (int pass = 0; pass < st.equilibrate_iters; ++pass) {
    // per-variable column norms over all agents' P and A, aggregated by
    // global variable id so copies stay scaled consistently
    Vec vnorm = Vec::Zero(w.total_vars);
    std::vector<Vec> rnorm(m);
    for (int i = 0; i < m; ++i) {
      const auto& tg = w.to_global[i];
      for (int o = 0; o < sd.P[i].outerSize(); ++o)
        for (SpMat::InnerIterator it(sd.P[i], o); it; ++it) {
          const double a = std::abs(it.value());
          vnorm(tg[it.row()]) = std::max(vnorm(tg[it.row()]), a);
          vnorm(tg[it.col()]) = std::max(vnorm(tg[it.col()]), a);
        }
      rnorm[i] = Vec::Zero(sd.A[i].rows());
      for (int o = 0; o < sd.A[i].outerSize(); ++o)
        for (SpMat::InnerIterator it(sd.A[i], o); it; ++it) {
          const double a = std::abs(it.value());
          vnorm(tg[it.col()]) = std::max(vnorm(tg[it.col()]), a);
          rnorm[i](it.row()) = std::max(rnorm[i](it.row()), a);
        }
    }
    Vec dv(w.total_vars);
    for (int v = 0; v < w.total_vars; ++v)
      dv(v) = vnorm(v) > 1e-12 ? 1.0 / std::sqrt(vnorm(v)) : 1.0;
    std::vector<Vec> dr(m);
    for (int i = 0; i < m; ++i) {
      dr[i] = Vec(rnorm[i].size());
      for (int r = 0; r < rnorm[i].size(); ++r)
        dr[i](r) = rnorm[i](r) > 1e-12 ? 1.0 / std::sqrt(rnorm[i](r)) : 1.0;
    }
    for (int i = 0; i < m; ++i) {
      const auto& tg = w.to_global[i];
      for (int o = 0; o < sd.P[i].outerSize(); ++o)
        for (SpMat::InnerIterator it(sd.P[i], o); it; ++it)
          it.valueRef() *= dv(tg[it.row()]) * dv(tg[it.col()]);
      for (int o = 0; o < sd.A[i].outerSize(); ++o)
        for (SpMat::InnerIterator it(sd.A[i], o); it; ++it)
          it.valueRef() *= dr[i](it.row()) * dv(tg[it.col()]);
      for (int c = 0; c < sd.q[i].size(); ++c) sd.q[i](c) *= dv(tg[c]);
      sd.lo[i] = sd.lo[i].cwiseProduct(dr[i]);
      sd.hi[i] = sd.hi[i].cwiseProduct(dr[i]);
      sd.row_scale[i] = sd.row_scale[i].cwiseProduct(dr[i]);
    }
    sd.var_scale = sd.var_scale.cwiseProduct(dv);
  }

  // cost normalization so the objective gradient is O(1)
  double qinf = 0.0, psum = 0.0;
  Vec pcol = Vec::Zero(w.total_vars);
  for (int i = 0; i < m; ++i) {
    qinf = std::max(qinf, sd.q[i].size() > 0 ? sd.q[i].cwiseAbs().maxCoeff() : 0.0);
    const auto& tg = w.to_global[i];
    for (int o = 0; o < sd.P[i].outerSize(); ++o)
      for (SpMat::InnerIterator it(sd.P[i], o); it; ++it)
        pcol(tg[it.col()]) = std::max(pcol(tg[it.col()]), std::abs(it.value()));
  }
  if (w.total_vars > 0) psum = pcol.sum() / w.total_vars;
  const double denom = std::max(psum, qinf);
  sd.cost_scale = denom > 1e-12 ? 1.0 / denom : 1.0;
  for (int i = 0; i < m; ++i) {
    sd.P[i] *= sd.cost_scale;
    sd.q[i] *= sd.cost_scale;
  }
  return sd;
}

// per-round bytes sent per directed edge pair: copies and their duals flow to
// the owner, refreshed consensus values flow back to the copier
void edge_traffic(const GraphQp& qp, MessageLog& log) {
  const auto& edges = qp.g.edges();
  log.per_edge.assign(edges.size(), {});
  for (size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    const auto& ai = qp.agents[i];
    const auto& aj = qp.agents[j];
    const int ki = qp.g.neighbor_index(i, j);
    const int kj = qp.g.neighbor_index(j, i);
    const long long s_ij = static_cast<long long>(ai.slice[ki].size());  // i copies of z_j
    const long long s_ji = static_cast<long long>(aj.slice[kj].size());  // j copies of z_i
    const long long fwd = 8 * (2 * s_ij + s_ji);  // i -> j
    const long long bwd = 8 * (2 * s_ji + s_ij);  // j -> i
    log.per_edge[e].count = (fwd > 0 ? 1 : 0) + (bwd > 0 ? 1 : 0);
    log.per_edge[e].bytes = fwd + bwd;
  }
}

}  // namespace

QpSolution solve_qp_consensus_admm(const GraphQp& qp, const AdmmSettings& st,
                                   AdmmWarmStart* warm) {
  st.validate();
  qp.validate();
  const int m = qp.g.num_agents();
  const Workspace w = build_workspace(qp);
  ScaledData sd = scale_problem(qp, w, st);
  double rho = st.rho;
  const double gamma = st.relax;

  // cached local factorizations of P + rho A'A + rho I
  std::vector<Eigen::SimplicialLDLT<SpMat>> ldlt(m);
  auto factor = [&](double r) {
    for_each_agent(st.exec, m, [&](int i) {
      SpMat K = sd.P[i] + r * SpMat(sd.A[i].transpose() * sd.A[i]);
      SpMat I(K.rows(), K.cols());
      I.setIdentity();
      K = K + r * I;
      ldlt[i].compute(K);
    });
    for (int i = 0; i < m; ++i)
      if (ldlt[i].info() != Eigen::Success)
        throw std::runtime_error("solve_qp_consensus_admm: local factorization failed");
  };
  factor(rho);

  // iterates (equilibrated units)
  std::vector<Vec> v(m), s(m), alpha(m), beta(m), zeta(m);
  for (int i = 0; i < m; ++i) {
    const int bd = qp.agents[i].bundle_dim();
    v[i] = Vec::Zero(bd);
    beta[i] = Vec::Zero(bd);
    s[i] = Vec::Zero(sd.A[i].rows());
    alpha[i] = Vec::Zero(sd.A[i].rows());
    zeta[i] = Vec::Zero(qp.agents[i].dim);
  }
  if (warm && warm->valid) {
    for (int i = 0; i < m; ++i) {
      for (int c = 0; c < v[i].size(); ++c) {
        const double dv = sd.var_scale(w.to_global[i][c]);
        v[i](c) = warm->v[i](c) / dv;
        beta[i](c) = warm->beta[i](c) / dv;
      }
      s[i] = warm->s[i].cwiseProduct(sd.row_scale[i]);
      alpha[i] = warm->alpha[i].cwiseProduct(sd.row_scale[i]);
      for (int c = 0; c < zeta[i].size(); ++c)
        zeta[i](c) = warm->zeta[i](c) / sd.var_scale(w.offset[i] + c);
    }
  }

  auto gather = [&](int i, const std::vector<Vec>& z, Vec& out) {
    const auto& a = qp.agents[i];
    out.head(a.dim) = z[i];
    int pos = a.dim;
    for (size_t k = 0; k < a.nb.size(); ++k)
      for (int c : a.slice[k]) out(pos++) = z[a.nb[k]](c);
  };

  std::vector<Vec> Av(m), tA(m), tC(m), s_new(m), zeta_new(m), rhs(m), gz(m);
  for (int i = 0; i < m; ++i) {
    Av[i].resize(sd.A[i].rows());
    tA[i].resize(sd.A[i].rows());
    s_new[i].resize(sd.A[i].rows());
    rhs[i].resize(qp.agents[i].bundle_dim());
    tC[i].resize(qp.agents[i].bundle_dim());
    gz[i].resize(qp.agents[i].bundle_dim());
    zeta_new[i].resize(qp.agents[i].dim);
  }

  QpSolution sol;
  sol.log.rounds = 0;
  double prim = 0.0, dual = 0.0;
  int iter = 0;
  bool converged = false;

  for (iter = 1; iter <= st.max_iter; ++iter) {
    for_each_agent(st.exec, m, [&](int i) {
      gather(i, zeta, gz[i]);
      rhs[i].noalias() = -sd.q[i];
      rhs[i].noalias() += rho * (sd.A[i].transpose() * (s[i] - alpha[i]));
      rhs[i].noalias() += rho * (gz[i] - beta[i]);
      v[i] = ldlt[i].solve(rhs[i]);
      Av[i].noalias() = sd.A[i] * v[i];
      tA[i] = gamma * Av[i] + (1.0 - gamma) * s[i];
      tC[i] = gamma * v[i] + (1.0 - gamma) * gz[i];
    });
    for_each_agent(st.exec, m, [&](int i) {
      s_new[i] = (tA[i] + alpha[i]).cwiseMax(sd.lo[i]).cwiseMin(sd.hi[i]);
    });
    for_each_agent(st.exec, m, [&](int j) {
      for (int c = 0; c < zeta_new[j].size(); ++c) {
        double acc = 0.0;
        for (const auto& [i, pos] : w.plan[j][c]) acc += tC[i](pos) + beta[i](pos);
        zeta_new[j](c) = acc / static_cast<double>(w.plan[j][c].size());
      }
    });

    const bool check = (iter % st.check_every == 0) || iter == st.max_iter;
    double ref_p = 0.0, ref_d = 0.0;
    if (check) {
      prim = 0.0;
      dual = 0.0;
      std::vector<double> pr(m, 0.0), du(m, 0.0), rp(m, 0.0), rd(m, 0.0);
      for_each_agent(st.exec, m, [&](int i) {
        Vec gz_new(qp.agents[i].bundle_dim());
        gather(i, zeta_new, gz_new);
        double p = Av[i].size() > 0 ? (Av[i] - s_new[i]).cwiseAbs().maxCoeff() : 0.0;
        p = std::max(p, (v[i] - gz_new).cwiseAbs().maxCoeff());
        Vec dres = sd.A[i].transpose() * (s_new[i] - s[i]) + (gz_new - gz[i]);
        pr[i] = p;
        du[i] = rho * dres.cwiseAbs().maxCoeff();
        double refp = v[i].cwiseAbs().maxCoeff();
        if (Av[i].size() > 0)
          refp = std::max({refp, Av[i].cwiseAbs().maxCoeff(), s_new[i].cwiseAbs().maxCoeff()});
        rp[i] = refp;
        Vec grad = sd.P[i] * v[i] + sd.q[i];
        rd[i] = grad.cwiseAbs().maxCoeff();
      });
      for (int i = 0; i < m; ++i) {
        prim = std::max(prim, pr[i]);
        dual = std::max(dual, du[i]);
        ref_p = std::max(ref_p, rp[i]);
        ref_d = std::max(ref_d, rd[i]);
      }
    }

    for_each_agent(st.exec, m, [&](int i) {
      Vec gz_new(qp.agents[i].bundle_dim());
      gather(i, zeta_new, gz_new);
      alpha[i] += tA[i] - s_new[i];
      beta[i] += tC[i] - gz_new;
      s[i] = s_new[i];
    });
    std::swap(zeta, zeta_new);

    if (st.log_rounds) {
      for (size_t e = 0; e < qp.g.edges().size(); ++e) {
        const auto [i, j] = qp.g.edges()[e];
        const auto& ai = qp.agents[i];
        const auto& aj = qp.agents[j];
        const long long s_ij =
            static_cast<long long>(ai.slice[qp.g.neighbor_index(i, j)].size());
        const long long s_ji =
            static_cast<long long>(aj.slice[qp.g.neighbor_index(j, i)].size());
        if (2 * s_ij + s_ji > 0)
          sol.log.detail.push_back({iter, i, j, 8 * (2 * s_ij + s_ji)});
        if (2 * s_ji + s_ij > 0)
          sol.log.detail.push_back({iter, j, i, 8 * (2 * s_ji + s_ij)});
      }
    }

    if (check) {
      if (prim <= st.tol * (1.0 + ref_p) && dual <= st.tol * (1.0 + ref_d)) {
        converged = true;
        break;
      }
      if (st.adapt_rho && iter < st.max_iter) {
        // balance the residuals; rescaling the scaled duals keeps the
        // underlying multipliers unchanged
        const double rp_rel = prim / (1.0 + ref_p);
        const double rd_rel = dual / (1.0 + ref_d);
        double ratio = std::sqrt(rp_rel / std::max(rd_rel, 1e-16));
        ratio = std::min(std::max(ratio, 1e-2), 1e2);
        const double rho_new = std::min(std::max(rho * ratio, 1e-6), 1e6);
        if (rho_new > 5.0 * rho || rho_new < 0.2 * rho) {
          const double f = rho / rho_new;
          for_each_agent(st.exec, m, [&](int i) {
            alpha[i] *= f;
            beta[i] *= f;
          });
          rho = rho_new;
          factor(rho);
        }
      }
    }
  }
  if (iter > st.max_iter) iter = st.max_iter;

  sol.converged = converged;
  sol.iters = iter;
  sol.prim_res = prim;
  sol.dual_res = dual;
  sol.log.rounds = iter;
  edge_traffic(qp, sol.log);
  for (auto& e : sol.log.per_edge) {
    e.count *= iter;
    e.bytes *= iter;
  }

  // unscale and report consensus-consistent blocks
  sol.z.resize(m);
  sol.bundle.resize(m);
  for (int i = 0; i < m; ++i) {
    sol.z[i] = Vec(qp.agents[i].dim);
    for (int c = 0; c < qp.agents[i].dim; ++c)
      sol.z[i](c) = zeta[i](c) * sd.var_scale(w.offset[i] + c);
  }
  for (int i = 0; i < m; ++i) {
    sol.bundle[i] = Vec(qp.agents[i].bundle_dim());
    gather(i, sol.z, sol.bundle[i]);
    sol.objective += 0.5 * sol.bundle[i].dot(qp.agents[i].P * sol.bundle[i]) +
                     qp.agents[i].q.dot(sol.bundle[i]);
  }

  if (warm) {
    warm->valid = true;
    warm->v.resize(m);
    warm->s.resize(m);
    warm->alpha.resize(m);
    warm->beta.resize(m);
    warm->zeta.resize(m);
    for (int i = 0; i < m; ++i) {
      warm->v[i] = Vec(v[i].size());
      warm->beta[i] = Vec(beta[i].size());
      for (int c = 0; c < v[i].size(); ++c) {
        const double dv = sd.var_scale(w.to_global[i][c]);
        warm->v[i](c) = v[i](c) * dv;
        warm->beta[i](c) = beta[i](c) * dv;
      }
      warm->s[i] = s[i].cwiseQuotient(sd.row_scale[i]);
      warm->alpha[i] = alpha[i].cwiseQuotient(sd.row_scale[i]);
      warm->zeta[i] = Vec(zeta[i].size());
      for (int c = 0; c < zeta[i].size(); ++c)
        warm->zeta[i](c) = zeta[i](c) * sd.var_scale(w.offset[i] + c);
    }
  }
  return sol;
}

}  // namespace dmpc
