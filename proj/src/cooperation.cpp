#include "dmpc/cooperation.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace dmpc {

double pseudo_huber(double delta, double a) {
  const double r = a / delta;
  return delta * delta * (std::sqrt(1.0 + r * r) - 1.0);
}

double pseudo_huber_d1(double delta, double a) {
  const double r = a / delta;
  return a / std::sqrt(1.0 + r * r);
}

double pseudo_huber_d2(double delta, double a) {
  const double r = a / delta;
  return std::pow(1.0 + r * r, -1.5);
}

int CooperationObjective::local_dim(int i) const {
  int d = output_dim(i) + aux_dim(i);
  for (int j : graph().neighbors(i)) d += output_dim(j) + aux_dim(j);
  return d;
}

namespace {

const Vec kEmptyVec;

void check_point(const CooperationObjective& W, const CoopPoint& pt) {
  const int m = W.num_agents();
  if (static_cast<int>(pt.y.size()) != m)
    throw std::invalid_argument("cooperation: trajectory count mismatch");
  for (int i = 0; i < m; ++i) {
    if (pt.y[i].dim() != W.output_dim(i))
      throw std::invalid_argument("cooperation: output dimension mismatch");
    if (!pt.y[i].same_shape(pt.y[0]))
      throw std::invalid_argument("cooperation: inconsistent periods");
  }
  if (!pt.aux.empty()) {
    if (static_cast<int>(pt.aux.size()) != m)
      throw std::invalid_argument("cooperation: aux count mismatch");
    for (int i = 0; i < m; ++i)
      if (pt.aux[i].size() != W.aux_dim(i))
        throw std::invalid_argument("cooperation: aux dimension mismatch");
  } else {
    for (int i = 0; i < m; ++i)
      if (W.aux_dim(i) != 0)
        throw std::invalid_argument("cooperation: aux block missing");
  }
}

CoopArgs make_args(const CooperationObjective& W, const CoopPoint& pt, int i, int tau,
                   double time) {
  CoopArgs a;
  a.tau = tau;
  a.T = pt.period();
  a.time = time;
  a.y.push_back(&pt.y[i].at(tau));
  a.aux.push_back(pt.aux.empty() ? &kEmptyVec : &pt.aux[i]);
  for (int j : W.graph().neighbors(i)) {
    a.y.push_back(&pt.y[j].at(tau));
    a.aux.push_back(pt.aux.empty() ? &kEmptyVec : &pt.aux[j]);
  }
  return a;
}

}  // namespace

double eval_coop_cost(const CooperationObjective& W, const CoopPoint& pt, double time) {
  check_point(W, pt);
  const int T = pt.period();
  double total = 0.0;
  for (int i = 0; i < W.num_agents(); ++i)
    for (int tau = 0; tau < T; ++tau)
      total += W.eval(i, make_args(W, pt, i, tau, time), nullptr, nullptr);
  return total;
}

int coop_var_dim(const CooperationObjective& W, int T) {
  int d = 0;
  for (int i = 0; i < W.num_agents(); ++i) d += T * W.output_dim(i) + W.aux_dim(i);
  return d;
}

int coop_var_offset(const CooperationObjective& W, int T, int agent) {
  int d = 0;
  for (int i = 0; i < agent; ++i) d += T * W.output_dim(i) + W.aux_dim(i);
  return d;
}

Vec eval_coop_gradient(const CooperationObjective& W, const CoopPoint& pt, double time) {
  check_point(W, pt);
  const int T = pt.period();
  const int m = W.num_agents();
  Vec g = Vec::Zero(coop_var_dim(W, T));

  for (int i = 0; i < m; ++i) {
    Vec local(W.local_dim(i));
    for (int tau = 0; tau < T; ++tau) {
      local.setZero();
      W.eval(i, make_args(W, pt, i, tau, time), &local, nullptr);
      // scatter: own y(tau), own aux, then neighbor blocks ascending
      int pos = 0;
      auto scatter = [&](int agent) {
        const int p = W.output_dim(agent), a = W.aux_dim(agent);
        const int off = coop_var_offset(W, T, agent);
        g.segment(off + tau * p, p) += local.segment(pos, p);
        if (a > 0) g.segment(off + T * p, a) += local.segment(pos + p, a);
        pos += p + a;
      };
      scatter(i);
      for (int j : W.graph().neighbors(i)) scatter(j);
    }
  }
  return g;
}

double ChangePenalty::c_delta() const {
  return delta.size() > 0 ? 2.0 * delta.maxCoeff() : 0.0;
}

double eval_change_penalty(const ChangePenalty& pen, int i, const PeriodicTrajectory& y,
                           const PeriodicTrajectory& y_prev) {
  if (!y.same_shape(y_prev))
    throw std::invalid_argument("eval_change_penalty: shape mismatch");
  const auto& wrap_comps =
      static_cast<size_t>(i) < pen.angle.size() ? pen.angle[i] : std::vector<int>{};
  double acc = 0.0;
  for (int tau = 0; tau < y.period(); ++tau) {
    Vec d = y.at(tau) - y_prev.at(tau);
    for (int c : wrap_comps) d(c) = wrap_angle(d(c));
    acc += d.squaredNorm();
  }
  return pen.delta(i) * acc;
}

double eval_change_penalty_total(const ChangePenalty& pen, const CoopPoint& pt,
                                 const std::vector<PeriodicTrajectory>& y_prev) {
  if (pt.y.size() != y_prev.size())
    throw std::invalid_argument("eval_change_penalty_total: agent count mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < pt.y.size(); ++i)
    acc += eval_change_penalty(pen, static_cast<int>(i), pt.y[i], y_prev[i]);
  return acc;
}

Scaling Scaling::default_scaling() {
  Scaling s;
  s.lambda = [](int N) { return static_cast<double>(N + 1); };
  return s;
}

bool Scaling::valid_up_to(int N_max) const {
  if (!lambda) return false;
  for (int N = 0; N <= N_max; ++N)
    if (lambda(N) < std::max(N, 1)) return false;
  return true;
}

void CoopFeasibleSet::validate(const CooperationObjective& W, int T) const {
  const int m = W.num_agents();
  if (static_cast<int>(y_box.size()) != m)
    throw std::invalid_argument("CoopFeasibleSet: y_box count mismatch");
  for (int i = 0; i < m; ++i)
    if (y_box[i].size() != W.output_dim(i))
      throw std::invalid_argument("CoopFeasibleSet: y_box dimension mismatch");
  if (static_cast<int>(aux_box.size()) != m)
    throw std::invalid_argument("CoopFeasibleSet: aux_box count mismatch");
  for (int i = 0; i < m; ++i)
    if (aux_box[i].size() != W.aux_dim(i))
      throw std::invalid_argument("CoopFeasibleSet: aux_box dimension mismatch");
  if (!rows.empty() && static_cast<int>(rows.size()) != m)
    throw std::invalid_argument("CoopFeasibleSet: affine row count mismatch");
  for (size_t i = 0; i < rows.size(); ++i) {
    const int d = T * W.output_dim(static_cast<int>(i)) + W.aux_dim(static_cast<int>(i));
    if (rows[i].A.rows() > 0 && rows[i].A.cols() != d)
      throw std::invalid_argument("CoopFeasibleSet: affine row width mismatch");
    if (rows[i].lo.size() != rows[i].A.rows() || rows[i].hi.size() != rows[i].A.rows())
      throw std::invalid_argument("CoopFeasibleSet: affine bound size mismatch");
  }
}

namespace {

Vec pack_point(const CooperationObjective& W, const CoopPoint& pt) {
  const int T = pt.period();
  Vec z(coop_var_dim(W, T));
  for (int i = 0; i < W.num_agents(); ++i) {
    const int off = coop_var_offset(W, T, i);
    const int p = W.output_dim(i);
    for (int tau = 0; tau < T; ++tau) z.segment(off + tau * p, p) = pt.y[i].at(tau);
    if (W.aux_dim(i) > 0) z.segment(off + T * p, W.aux_dim(i)) = pt.aux[i];
  }
  return z;
}

CoopPoint unpack_point(const CooperationObjective& W, int T, const Vec& z) {
  CoopPoint pt;
  bool any_aux = false;
  for (int i = 0; i < W.num_agents(); ++i) any_aux = any_aux || W.aux_dim(i) > 0;
  for (int i = 0; i < W.num_agents(); ++i) {
    const int off = coop_var_offset(W, T, i);
    const int p = W.output_dim(i);
    PeriodicTrajectory y(T, p);
    for (int tau = 0; tau < T; ++tau) y.at(tau) = z.segment(off + tau * p, p);
    pt.y.push_back(std::move(y));
  }
  if (any_aux)
    for (int i = 0; i < W.num_agents(); ++i) {
      const int off = coop_var_offset(W, T, i);
      pt.aux.push_back(z.segment(off + T * W.output_dim(i), W.aux_dim(i)));
    }
  return pt;
}

}  // namespace

CoopPoint project_coop(const CoopFeasibleSet& set, const CooperationObjective& W,
                       const CoopPoint& pt, const AdmmSettings& settings) {
  check_point(W, pt);
  const int T = pt.period();
  set.validate(W, T);
  const int m = W.num_agents();

  GraphQp qp;
  qp.g = Graph::from_edges(m, {});
  for (int i = 0; i < m; ++i) {
    const int p = W.output_dim(i), a = W.aux_dim(i);
    const int d = T * p + a;
    AgentQpBlock b;
    b.dim = d;
    SpMat P(d, d);
    P.setIdentity();
    b.P = 2.0 * P;
    Vec c(d);
    for (int tau = 0; tau < T; ++tau) c.segment(tau * p, p) = pt.y[i].at(tau);
    if (a > 0) c.segment(T * p, a) = pt.aux[i];
    b.q = -2.0 * c;

    const int extra = set.rows.empty() ? 0 : static_cast<int>(set.rows[i].A.rows());
    SpMat A(d + extra, d);
    std::vector<Eigen::Triplet<double>> trip;
    for (int r = 0; r < d; ++r) trip.emplace_back(r, r, 1.0);
    if (extra > 0)
      for (int o = 0; o < set.rows[i].A.outerSize(); ++o)
        for (SpMat::InnerIterator it(set.rows[i].A, o); it; ++it)
          trip.emplace_back(d + it.row(), it.col(), it.value());
    A.setFromTriplets(trip.begin(), trip.end());
    b.A = A;
    b.lo = Vec(d + extra);
    b.hi = Vec(d + extra);
    for (int tau = 0; tau < T; ++tau) {
      b.lo.segment(tau * p, p) = set.y_box[i].lo;
      b.hi.segment(tau * p, p) = set.y_box[i].hi;
    }
    if (a > 0) {
      b.lo.segment(T * p, a) = set.aux_box[i].lo;
      b.hi.segment(T * p, a) = set.aux_box[i].hi;
    }
    if (extra > 0) {
      b.lo.tail(extra) = set.rows[i].lo;
      b.hi.tail(extra) = set.rows[i].hi;
    }
    qp.agents.push_back(std::move(b));
  }

  auto sol = solve_qp_consensus_admm(qp, settings);
  if (!sol.converged)
    throw std::runtime_error("project_coop: projection QP did not converge");
  Vec z(coop_var_dim(W, T));
  for (int i = 0; i < m; ++i) z.segment(coop_var_offset(W, T, i), qp.agents[i].dim) = sol.z[i];
  return unpack_point(W, T, z);
}

double estimate_grad_lipschitz(const CooperationObjective& W, const CoopPoint& at,
                               double time) {
  check_point(W, at);
  const int T = at.period();
  const int dim = coop_var_dim(W, T);
  const Vec z0 = pack_point(W, at);
  const Vec g0 = eval_coop_gradient(W, at, time);
  const double eps = 1e-6 * (1.0 + z0.norm());

  // seeded gaussian start: a constant vector can sit in the Hessian's null
  // space (consensus costs), which would stall the power iteration
  std::mt19937 rng(20240817);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec d(dim);
  for (int k = 0; k < dim; ++k) d(k) = gauss(rng);
  d /= d.norm();
  double L = 0.0;
  for (int it = 0; it < 30; ++it) {
    CoopPoint pert = unpack_point(W, T, z0 + eps * d);
    Vec diff = eval_coop_gradient(W, pert, time) - g0;
    const double nrm = diff.norm() / eps;
    if (nrm < 1e-14) break;
    L = nrm;
    d = diff / diff.norm();
  }
  return 1.2 * L + 1e-12;
}

PgCandidate projected_gradient_candidate(const CooperationObjective& W,
                                         const CoopFeasibleSet& set, const CoopPoint& y,
                                         double theta, double time,
                                         const AdmmSettings& settings) {
  if (!(theta >= 0.0 && theta <= 1.0))
    throw std::invalid_argument("projected_gradient_candidate: theta must be in [0,1]");
  const int T = y.period();
  double L = W.grad_lipschitz();
  if (L <= 0.0) L = estimate_grad_lipschitz(W, y, time);
  const double s = 2.0 / (L * theta + 2.0);

  const Vec z = pack_point(W, y);
  const Vec g = eval_coop_gradient(W, y, time);
  CoopPoint shifted = unpack_point(W, T, z - s * g);
  CoopPoint proj = project_coop(set, W, shifted, settings);
  const Vec pz = pack_point(W, proj);

  PgCandidate out;
  out.step = s;
  out.pg_norm = (pz - z).norm();
  out.y_hat = unpack_point(W, T, z + theta * (pz - z));
  out.cost_before = eval_coop_cost(W, y, time);
  out.cost_after = eval_coop_cost(W, out.y_hat, time);
  return out;
}

W0Estimate estimate_W0(const CooperationObjective& W, const CoopFeasibleSet& set,
                       const CoopPoint& start, double time, int max_iters, double tol,
                       const AdmmSettings& settings) {
  const int T = start.period();
  double L = W.grad_lipschitz();
  if (L <= 0.0) L = estimate_grad_lipschitz(W, start, time);
  const double step = 1.0 / std::max(L, 1e-12);

  W0Estimate est;
  CoopPoint y = project_coop(set, W, start, settings);
  est.value = eval_coop_cost(W, y, time);
  est.minimizer = y;
  for (int it = 1; it <= max_iters; ++it) {
    const Vec z = pack_point(W, y);
    const Vec g = eval_coop_gradient(W, y, time);
    CoopPoint next = project_coop(set, W, unpack_point(W, T, z - step * g), settings);
    const Vec zn = pack_point(W, next);
    const double move = (zn - z).norm();
    y = std::move(next);
    est.iters = it;
    const double val = eval_coop_cost(W, y, time);
    if (val < est.value) {
      est.value = val;
      est.minimizer = y;
    }
    if (move <= tol * (1.0 + z.norm())) {
      est.converged = true;
      break;
    }
  }
  return est;
}

// ---------------------------------------------------------------------------
// built-in objectives

namespace {

class ConsensusObjective final : public CooperationObjective {
 public:
  ConsensusObjective(Graph g, int p, double w) : g_(std::move(g)), p_(p), w_(w) {
    int deg = 0;
    for (int i = 0; i < g_.num_agents(); ++i)
      deg = std::max(deg, static_cast<int>(g_.neighbors(i).size()));
    lips_ = 4.0 * w_ * deg;
  }
  std::string name() const override { return "consensus"; }
  const Graph& graph() const override { return g_; }
  int output_dim(int) const override { return p_; }
  bool is_convex() const override { return true; }
  double grad_lipschitz() const override { return lips_; }
  bool has_known_minimum() const override { return true; }
  double known_minimum() const override { return 0.0; }

  double eval(int i, const CoopArgs& a, Vec* grad, Mat* hess) const override {
    const int nn = static_cast<int>(g_.neighbors(i).size());
    double val = 0.0;
    for (int k = 0; k < nn; ++k) {
      const Vec d = *a.y[0] - *a.y[k + 1];
      val += 0.5 * w_ * d.squaredNorm();
      if (grad) {
        grad->segment(0, p_) += w_ * d;
        grad->segment((k + 1) * p_, p_) -= w_ * d;
      }
      if (hess) {
        for (int c = 0; c < p_; ++c) {
          (*hess)(c, c) += w_;
          (*hess)((k + 1) * p_ + c, (k + 1) * p_ + c) += w_;
          (*hess)(c, (k + 1) * p_ + c) -= w_;
          (*hess)((k + 1) * p_ + c, c) -= w_;
        }
      }
    }
    return val;
  }

 private:
  Graph g_;
  int p_;
  double w_;
  double lips_;
};

class SatellitePhaseObjective final : public CooperationObjective {
 public:
  SatellitePhaseObjective(Graph g, double offset) : g_(std::move(g)), off_(offset) {
    double bound = 0.0;
    for (int i = 0; i < g_.num_agents(); ++i) {
      const double ni = static_cast<double>(g_.neighbors(i).size());
      double row = ni * ni;
      for (int j : g_.neighbors(i)) row += static_cast<double>(g_.neighbors(j).size());
      bound = std::max(bound, 2.0 * row);
    }
    lips_ = bound;
  }
  std::string name() const override { return "satellite_phase"; }
  const Graph& graph() const override { return g_; }
  int output_dim(int) const override { return 1; }
  bool is_convex() const override { return true; }
  double grad_lipschitz() const override { return lips_; }
  bool has_known_minimum() const override { return true; }
  double known_minimum() const override { return 0.0; }

  double eval(int i, const CoopArgs& a, Vec* grad, Mat* hess) const override {
    const auto& nb = g_.neighbors(i);
    const double w = static_cast<double>(nb.size());
    double val = 0.0;
    for (size_t k = 0; k < nb.size(); ++k) {
      const int j = nb[k];
      // lower index leads by the offset
      const double sign = j > i ? 1.0 : -1.0;
      const double delta = sign * ((*a.y[0])(0) - (*a.y[k + 1])(0)) - off_;
      val += 0.5 * w * delta * delta;
      const int jb = static_cast<int>(k + 1);
      if (grad) {
        (*grad)(0) += w * delta * sign;
        (*grad)(jb) -= w * delta * sign;
      }
      if (hess) {
        (*hess)(0, 0) += w;
        (*hess)(jb, jb) += w;
        (*hess)(0, jb) -= w;
        (*hess)(jb, 0) -= w;
      }
    }
    return val;
  }

 private:
  Graph g_;
  double off_;
  double lips_;
};

class PseudoHuberTargetObjective final : public CooperationObjective {
 public:
  PseudoHuberTargetObjective(Graph g, std::vector<Vec> targets, Vec w, double delta)
      : g_(std::move(g)), t_(std::move(targets)), w_(std::move(w)), delta_(delta) {
    if (static_cast<int>(t_.size()) != g_.num_agents() || w_.size() != g_.num_agents())
      throw std::invalid_argument("pseudo_huber_target: per-agent data mismatch");
  }
  std::string name() const override { return "pseudo_huber_target"; }
  const Graph& graph() const override { return g_; }
  int output_dim(int i) const override { return static_cast<int>(t_[i].size()); }
  // kept in the cautious class: the flat far-field of the penalty is treated
  // like a nonconvex landscape by the diagnostics
  bool is_convex() const override { return false; }
  bool has_known_minimum() const override { return true; }
  double known_minimum() const override { return 0.0; }

  double eval(int i, const CoopArgs& a, Vec* grad, Mat* hess) const override {
    const int p = output_dim(i);
    const double w = w_(i) / static_cast<double>(a.T);
    const Vec e = *a.y[0] - t_[i];
    const double gval = e.squaredNorm();
    const double val = w * pseudo_huber(delta_, gval);
    if (grad) grad->segment(0, p) += w * pseudo_huber_d1(delta_, gval) * 2.0 * e;
    if (hess) {
      const double d1 = pseudo_huber_d1(delta_, gval);
      const double d2 = pseudo_huber_d2(delta_, gval);
      hess->topLeftCorner(p, p) +=
          w * (4.0 * d2 * (e * e.transpose()) + 2.0 * d1 * Mat::Identity(p, p));
    }
    return val;
  }

 private:
  Graph g_;
  std::vector<Vec> t_;
  Vec w_;
  double delta_;
};

class CircleFormationObjective final : public CooperationObjective {
 public:
  CircleFormationObjective(Graph g, double phase_step) : g_(std::move(g)), ph_(phase_step) {}
  std::string name() const override { return "circle_formation"; }
  const Graph& graph() const override { return g_; }
  int output_dim(int) const override { return 3; }
  int aux_dim(int) const override { return 3; }  // radius, centre x, centre y
  bool is_convex() const override { return true; }
  // the per-agent phase is pinned to the period index, so a cyclic shift of
  // the trajectories rotates them against the pinned phases
  bool shift_invariant() const override { return false; }
  bool has_known_minimum() const override { return true; }
  double known_minimum() const override { return 0.0; }

  double eval(int i, const CoopArgs& a, Vec* grad, Mat* hess) const override {
    const double T = static_cast<double>(a.T);
    const auto& nb = g_.neighbors(i);
    const double ang = 2.0 * M_PI * a.tau / T + ph_ * i;
    const double ct = std::cos(ang), st = std::sin(ang);
    const Vec& y = *a.y[0];
    const Vec& ax = *a.aux[0];
    const double r = ax(0), c1 = ax(1), c2 = ax(2);

    // local coordinate offsets: own y at 0, own aux at 3, neighbor k at 6 + 6k
    auto yo = [](int k) { return k == 0 ? 0 : 6 * k; };
    auto ao = [](int k) { return k == 0 ? 3 : 6 * k + 3; };

    double val = 0.0;
    // circle residuals, linear in (y, r, c)
    {
      const double e1 = y(0) - r * ct - c1;
      const double e2 = y(1) - c2 - r * st;
      val += (e1 * e1 + e2 * e2) / T;
      if (grad) {
        (*grad)(yo(0) + 0) += 2.0 * e1 / T;
        (*grad)(ao(0) + 0) += 2.0 * (e1 * -ct + e2 * -st) / T;
        (*grad)(ao(0) + 1) += 2.0 * e1 * -1.0 / T;
        (*grad)(yo(0) + 1) += 2.0 * e2 / T;
        (*grad)(ao(0) + 2) += 2.0 * e2 * -1.0 / T;
      }
      if (hess) {
        const int idx1[3] = {yo(0) + 0, ao(0) + 0, ao(0) + 1};
        const double co1[3] = {1.0, -ct, -1.0};
        const int idx2[3] = {yo(0) + 1, ao(0) + 0, ao(0) + 2};
        const double co2[3] = {1.0, -st, -1.0};
        for (int rr = 0; rr < 3; ++rr)
          for (int cc = 0; cc < 3; ++cc) {
            (*hess)(idx1[rr], idx1[cc]) += 2.0 * co1[rr] * co1[cc] / T;
            (*hess)(idx2[rr], idx2[cc]) += 2.0 * co2[rr] * co2[cc] / T;
          }
      }
    }
    // altitude consensus
    for (size_t k = 0; k < nb.size(); ++k) {
      const double d = y(2) - (*a.y[k + 1])(2);
      val += d * d / (10.0 * T);
      if (grad) {
        (*grad)(yo(0) + 2) += 2.0 * d / (10.0 * T);
        (*grad)(yo(static_cast<int>(k) + 1) + 2) -= 2.0 * d / (10.0 * T);
      }
      if (hess) {
        const int u = yo(0) + 2, v = yo(static_cast<int>(k) + 1) + 2;
        (*hess)(u, u) += 2.0 / (10.0 * T);
        (*hess)(v, v) += 2.0 / (10.0 * T);
        (*hess)(u, v) -= 2.0 / (10.0 * T);
        (*hess)(v, u) -= 2.0 / (10.0 * T);
      }
    }
    // radius reward, shifted by the admissible maximum to stay nonnegative
    val += (2.0 - r) / T;
    if (grad) (*grad)(ao(0) + 0) -= 1.0 / T;
    // radius and centre consensus
    for (size_t k = 0; k < nb.size(); ++k) {
      const Vec& axj = *a.aux[k + 1];
      const int kb = static_cast<int>(k) + 1;
      for (int c = 0; c < 3; ++c) {
        const double d = ax(c) - axj(c);
        val += d * d / T;
        if (grad) {
          (*grad)(ao(0) + c) += 2.0 * d / T;
          (*grad)(ao(kb) + c) -= 2.0 * d / T;
        }
        if (hess) {
          const int u = ao(0) + c, v = ao(kb) + c;
          (*hess)(u, u) += 2.0 / T;
          (*hess)(v, v) += 2.0 / T;
          (*hess)(u, v) -= 2.0 / T;
          (*hess)(v, u) -= 2.0 / T;
        }
      }
    }
    return val;
  }

 private:
  Graph g_;
  double ph_;
};

class LeaderFollowObjective final : public CooperationObjective {
 public:
  LeaderFollowObjective(Graph g, int p, std::function<Vec(double)> ref, Vec metric)
      : g_(std::move(g)), p_(p), ref_(std::move(ref)), metric_(std::move(metric)) {
    if (metric_.size() != p_)
      throw std::invalid_argument("leader_follow: metric dimension mismatch");
    for (int i = 1; i < g_.num_agents(); ++i)
      if (!g_.adjacent(0, i))
        throw std::invalid_argument("leader_follow: every agent must neighbor agent 0");
  }
  std::string name() const override { return "leader_follow"; }
  const Graph& graph() const override { return g_; }
  int output_dim(int) const override { return p_; }
  bool is_convex() const override { return true; }
  bool time_varying() const override { return true; }
  bool has_known_minimum() const override { return true; }
  double known_minimum() const override { return 0.0; }

  double eval(int i, const CoopArgs& a, Vec* grad, Mat* hess) const override {
    const double w = 1.0 / static_cast<double>(a.T);
    if (i == 0) {
      const Vec e = *a.y[0] - ref_(a.time);
      if (grad) grad->segment(0, p_) += 2.0 * w * e;
      if (hess) hess->topLeftCorner(p_, p_) += 2.0 * w * Mat::Identity(p_, p_);
      return w * e.squaredNorm();
    }
    // agent 0 is the first neighbor block (ids ascend), right after the own block
    const int lo = p_;
    const Vec d = *a.y[0] - *a.y[1];
    double val = 0.0;
    for (int c = 0; c < p_; ++c) val += w * metric_(c) * d(c) * d(c);
    if (grad) {
      for (int c = 0; c < p_; ++c) {
        (*grad)(c) += 2.0 * w * metric_(c) * d(c);
        (*grad)(lo + c) -= 2.0 * w * metric_(c) * d(c);
      }
    }
    if (hess) {
      for (int c = 0; c < p_; ++c) {
        (*hess)(c, c) += 2.0 * w * metric_(c);
        (*hess)(lo + c, lo + c) += 2.0 * w * metric_(c);
        (*hess)(c, lo + c) -= 2.0 * w * metric_(c);
        (*hess)(lo + c, c) -= 2.0 * w * metric_(c);
      }
    }
    return val;
  }

 private:
  Graph g_;
  int p_;
  std::function<Vec(double)> ref_;
  Vec metric_;
};

}  // namespace

std::shared_ptr<CooperationObjective> make_consensus_objective(Graph g, int output_dim,
                                                               double weight) {
  return std::make_shared<ConsensusObjective>(std::move(g), output_dim, weight);
}

std::shared_ptr<CooperationObjective> make_satellite_phase_objective(Graph g,
                                                                    double offset_rad) {
  return std::make_shared<SatellitePhaseObjective>(std::move(g), offset_rad);
}

std::shared_ptr<CooperationObjective> make_pseudo_huber_target_objective(
    Graph g, std::vector<Vec> targets, Vec weights, double delta) {
  return std::make_shared<PseudoHuberTargetObjective>(std::move(g), std::move(targets),
                                                      std::move(weights), delta);
}

std::shared_ptr<CooperationObjective> make_circle_formation_objective(Graph g,
                                                                      double phase_step_rad) {
  return std::make_shared<CircleFormationObjective>(std::move(g), phase_step_rad);
}

std::shared_ptr<CooperationObjective> make_leader_follow_objective(
    Graph g, int output_dim, std::function<Vec(double)> reference, Vec metric_diag) {
  return std::make_shared<LeaderFollowObjective>(std::move(g), output_dim,
                                                 std::move(reference), std::move(metric_diag));
}

}  // namespace dmpc
