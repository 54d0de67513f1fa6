#include "dmpc/models.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dmpc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Physical constants of the orbit example.
constexpr double kMu = 3.986e14;        // m^3 / s^2
constexpr double kSatMass = 200.0;      // kg
constexpr double kSatThrust = 0.237e-3; // N
constexpr double kOrbitPeriod = 47.0 * 120.0;  // s
}  // namespace

Box Box::unbounded(int n) {
  Box b;
  b.lo = Vec::Constant(n, -kInf);
  b.hi = Vec::Constant(n, kInf);
  return b;
}

Box Box::symmetric(const Vec& half) {
  Box b;
  b.lo = -half;
  b.hi = half;
  return b;
}

Vec Box::clamp(const Vec& v) const {
  return v.cwiseMax(lo).cwiseMin(hi);
}

Vec Box::residuals(const Vec& v) const {
  if (v.size() != lo.size()) throw std::invalid_argument("Box::residuals: size mismatch");
  return (lo - v).cwiseMax(v - hi);
}

bool Box::contains(const Vec& v, double tol) const {
  return residuals(v).maxCoeff() <= tol;
}

Box Box::shrink_fraction(double frac) const {
  Box out = *this;
  for (int c = 0; c < size(); ++c) {
    if (std::isfinite(lo(c)) && std::isfinite(hi(c)) && hi(c) > lo(c)) {
      const double mid = 0.5 * (lo(c) + hi(c));
      const double w = 0.5 * (hi(c) - lo(c)) * (1.0 - frac);
      out.lo(c) = mid - w;
      out.hi(c) = mid + w;
    }
  }
  return out;
}

DiscreteDynamics rk4_discretize(const VectorField& vf, double h) {
  if (!vf.f) throw std::invalid_argument("rk4_discretize: missing vector field");
  DiscreteDynamics d;
  auto f = vf.f;
  d.step = [f, h](const Vec& x, const Vec& u) -> Vec {
    Vec k1 = f(x, u);
    Vec k2 = f(x + 0.5 * h * k1, u);
    Vec k3 = f(x + 0.5 * h * k2, u);
    Vec k4 = f(x + h * k3, u);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  if (vf.jacobian) {
    auto jac = vf.jacobian;
    const int n = vf.n;
    d.jacobian = [f, jac, h, n](const Vec& x, const Vec& u) {
      Vec k1 = f(x, u);
      Vec x2 = x + 0.5 * h * k1;
      Vec k2 = f(x2, u);
      Vec x3 = x + 0.5 * h * k2;
      Vec k3 = f(x3, u);
      Vec x4 = x + h * k3;

      DynamicsJacobian j1 = jac(x, u);
      DynamicsJacobian j2 = jac(x2, u);
      DynamicsJacobian j3 = jac(x3, u);
      DynamicsJacobian j4 = jac(x4, u);

      Mat I = Mat::Identity(n, n);
      Mat dk1 = j1.A;
      Mat dk2 = j2.A * (I + 0.5 * h * dk1);
      Mat dk3 = j3.A * (I + 0.5 * h * dk2);
      Mat dk4 = j4.A * (I + h * dk3);

      Mat bk1 = j1.B;
      Mat bk2 = j2.B + j2.A * (0.5 * h * bk1);
      Mat bk3 = j3.B + j3.A * (0.5 * h * bk2);
      Mat bk4 = j4.B + j4.A * (h * bk3);

      DynamicsJacobian out;
      out.A = I + (h / 6.0) * (dk1 + 2.0 * dk2 + 2.0 * dk3 + dk4);
      out.B = (h / 6.0) * (bk1 + 2.0 * bk2 + 2.0 * bk3 + bk4);
      return out;
    };
  }
  return d;
}

DiscreteDynamics euler_discretize(const VectorField& vf, double h) {
  if (!vf.f) throw std::invalid_argument("euler_discretize: missing vector field");
  DiscreteDynamics d;
  auto f = vf.f;
  d.step = [f, h](const Vec& x, const Vec& u) -> Vec { return x + h * f(x, u); };
  if (vf.jacobian) {
    auto jac = vf.jacobian;
    const int n = vf.n;
    d.jacobian = [jac, h, n](const Vec& x, const Vec& u) {
      DynamicsJacobian j = jac(x, u);
      DynamicsJacobian out;
      out.A = Mat::Identity(n, n) + h * j.A;
      out.B = h * j.B;
      return out;
    };
  }
  return d;
}

Mat finite_diff_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x) {
  const Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  for (int c = 0; c < x.size(); ++c) {
    const double dc = 1e-6 * (1.0 + std::abs(x(c)));
    Vec xp = x, xm = x;
    xp(c) += dc;
    xm(c) -= dc;
    J.col(c) = (f(xp) - f(xm)) / (2.0 * dc);
  }
  return J;
}

DynamicsJacobian AgentModel::jacobian(const Vec& x, const Vec& u) const {
  if (step_jacobian) return step_jacobian(x, u);
  DynamicsJacobian j;
  j.A = finite_diff_jacobian([&](const Vec& xx) { return step(xx, u); }, x);
  j.B = finite_diff_jacobian([&](const Vec& uu) { return step(x, uu); }, u);
  return j;
}

void AgentModel::output_jac(const Vec& x, const Vec& u, Mat& C, Mat& D) const {
  if (output_jacobian) {
    output_jacobian(x, u, C, D);
    return;
  }
  C = finite_diff_jacobian([&](const Vec& xx) { return output(xx, u); }, x);
  D = finite_diff_jacobian([&](const Vec& uu) { return output(x, uu); }, u);
}

void AgentModel::extra_gradient(const ExtraConstraint& c, const Vec& x, const Vec& u,
                                Vec& gx, Vec& gu) const {
  if (c.gradient) {
    c.gradient(x, u, gx, gu);
    return;
  }
  gx = finite_diff_jacobian([&](const Vec& xx) { return Vec::Constant(1, c.value(xx, u)); }, x)
           .row(0)
           .transpose();
  gu = finite_diff_jacobian([&](const Vec& uu) { return Vec::Constant(1, c.value(x, uu)); }, u)
           .row(0)
           .transpose();
}

Vec AgentModel::path_residuals(const Vec& x, const Vec& u) const {
  Vec out(n + q + static_cast<int>(extra.size()));
  out.head(n) = state_box.residuals(x);
  out.segment(n, q) = input_box.residuals(u);
  for (size_t e = 0; e < extra.size(); ++e) out(n + q + static_cast<int>(e)) = extra[e].value(x, u);
  return out;
}

bool AgentModel::is_angle_state(int c) const {
  return std::find(state_angle.begin(), state_angle.end(), c) != state_angle.end();
}

bool AgentModel::is_angle_output(int c) const {
  return std::find(output_angle.begin(), output_angle.end(), c) != output_angle.end();
}

Vec AgentModel::state_difference(const Vec& a, const Vec& b) const {
  Vec d = a - b;
  for (int c : state_angle) d(c) = wrap_angle(d(c));
  return d;
}

Vec AgentModel::output_difference(const Vec& a, const Vec& b) const {
  Vec d = a - b;
  for (int c : output_angle) d(c) = wrap_angle(d(c));
  return d;
}

void CouplingConstraint::eval_jacobian(const Vec& xi, const std::vector<Vec>& xn, Mat& dxi,
                                       std::vector<Mat>& dxn) const {
  if (jacobian) {
    jacobian(xi, xn, dxi, dxn);
    return;
  }
  dxi = finite_diff_jacobian([&](const Vec& v) { return residual(v, xn); }, xi);
  dxn.resize(xn.size());
  for (size_t k = 0; k < xn.size(); ++k) {
    dxn[k] = finite_diff_jacobian(
        [&](const Vec& v) {
          std::vector<Vec> pert = xn;
          pert[k] = v;
          return residual(xi, pert);
        },
        xn[k]);
  }
}

CouplingConstraint make_min_distance_coupling(int owner, int degree,
                                              std::vector<int> pos_index, double d_min,
                                              double tighten) {
  CouplingConstraint c;
  c.name = "min_distance";
  c.owner = owner;
  c.rows = degree;
  c.tighten = tighten;
  auto select = [pos_index](const Vec& x) {
    Vec p(pos_index.size());
    for (size_t k = 0; k < pos_index.size(); ++k) p(static_cast<int>(k)) = x(pos_index[k]);
    return p;
  };
  c.residual = [select, d_min, degree](const Vec& xi, const std::vector<Vec>& xn) {
    if (static_cast<int>(xn.size()) != degree)
      throw std::invalid_argument("min_distance: neighbor count mismatch");
    Vec r(degree);
    Vec pi = select(xi);
    for (int k = 0; k < degree; ++k) r(k) = d_min - (pi - select(xn[k])).norm();
    return r;
  };
  c.jacobian = [select, pos_index, degree](const Vec& xi, const std::vector<Vec>& xn, Mat& dxi,
                                           std::vector<Mat>& dxn) {
    const int d = static_cast<int>(pos_index.size());
    Vec pi = select(xi);
    dxi = Mat::Zero(degree, xi.size());
    dxn.assign(xn.size(), Mat());
    for (int k = 0; k < degree; ++k) {
      Vec diff = pi - select(xn[k]);
      double nrm = diff.norm();
      Vec dir;
      if (nrm > 1e-9) {
        dir = diff / nrm;
      } else {
        // coincident points: any unit direction is a valid subgradient choice
        dir = Vec::Zero(d);
        dir(0) = 1.0;
      }
      dxn[k] = Mat::Zero(degree, xn[k].size());
      for (int cc = 0; cc < d; ++cc) {
        dxi(k, pos_index[cc]) = -dir(cc);
        dxn[k](k, pos_index[cc]) = dir(cc);
      }
    }
  };
  return c;
}

ResidualReport constraint_residuals(const std::vector<AgentModel>& models,
                                    const std::vector<CouplingConstraint>& couplings,
                                    const Graph& g, const std::vector<Vec>& x,
                                    const std::vector<Vec>& u) {
  const int m = g.num_agents();
  if (static_cast<int>(models.size()) != m || static_cast<int>(x.size()) != m ||
      static_cast<int>(u.size()) != m)
    throw std::invalid_argument("constraint_residuals: per-agent data size mismatch");

  ResidualReport rep;
  auto add = [&rep](const std::string& group, int agent, double worst) {
    rep.entries.push_back({group, agent, worst});
    rep.max_violation = std::max(rep.max_violation, worst);
  };
  for (int i = 0; i < m; ++i) {
    const auto& mdl = models[i];
    add("state_box", i, mdl.state_box.residuals(x[i]).maxCoeff());
    if (mdl.q > 0) add("input_box", i, mdl.input_box.residuals(u[i]).maxCoeff());
    for (const auto& e : mdl.extra) add(e.name, i, e.value(x[i], u[i]));
  }
  for (const auto& c : couplings) {
    if (c.rows == 0) continue;
    auto xn = neighbor_slice(g, c.owner, x);
    add(c.name, c.owner, c.residual(x[c.owner], xn).maxCoeff());
  }
  return rep;
}

AgentModel make_double_integrator_model(int axes, double h) {
  if (axes <= 0) throw std::invalid_argument("make_double_integrator_model: axes must be positive");
  AgentModel m;
  m.name = "double_integrator";
  m.n = 2 * axes;
  m.q = axes;
  m.p = axes;
  m.h = h;

  VectorField vf;
  vf.n = m.n;
  vf.q = m.q;
  vf.f = [axes](const Vec& x, const Vec& u) {
    Vec dx(2 * axes);
    dx.head(axes) = x.tail(axes);
    dx.tail(axes) = u;
    return dx;
  };
  vf.jacobian = [axes](const Vec&, const Vec&) {
    DynamicsJacobian j;
    j.A = Mat::Zero(2 * axes, 2 * axes);
    j.A.topRightCorner(axes, axes) = Mat::Identity(axes, axes);
    j.B = Mat::Zero(2 * axes, axes);
    j.B.bottomRows(axes) = Mat::Identity(axes, axes);
    return j;
  };
  // the field is linear and nilpotent, so RK4 reproduces the exact ZOH map
  auto dyn = rk4_discretize(vf, h);
  m.step = dyn.step;
  m.step_jacobian = dyn.jacobian;

  m.output = [axes](const Vec& x, const Vec&) -> Vec { return x.head(axes); };
  m.output_jacobian = [axes](const Vec&, const Vec&, Mat& C, Mat& D) {
    C = Mat::Zero(axes, 2 * axes);
    C.leftCols(axes) = Mat::Identity(axes, axes);
    D = Mat::Zero(axes, axes);
  };
  m.state_box = Box::unbounded(m.n);
  m.input_box = Box::unbounded(m.q);
  m.state_scale = Vec::Ones(m.n);
  for (int a = 0; a < axes; ++a) {
    m.state_names.push_back("p" + std::to_string(a + 1));
    m.input_names.push_back("u" + std::to_string(a + 1));
    m.output_names.push_back("p" + std::to_string(a + 1));
  }
  for (int a = 0; a < axes; ++a) m.state_names.push_back("v" + std::to_string(a + 1));
  return m;
}

double satellite_nominal_radius() {
  const double w = 2.0 * M_PI / kOrbitPeriod;
  return std::cbrt(kMu / (w * w));
}

double satellite_nominal_rate() { return 2.0 * M_PI / kOrbitPeriod; }

AgentModel make_satellite_model(double h) {
  AgentModel m;
  m.name = "satellite";
  m.n = 4;
  m.q = 2;
  m.p = 1;
  m.h = h;

  VectorField vf;
  vf.n = 4;
  vf.q = 2;
  vf.f = [](const Vec& x, const Vec& u) {
    const double r = x(0), v = x(2), w = x(3);
    Vec dx(4);
    dx(0) = v;
    dx(1) = w;
    dx(2) = r * w * w - kMu / (r * r) + u(0) / kSatMass;
    dx(3) = -2.0 * v * w / r + u(1) / (kSatMass * r);
    return dx;
  };
  vf.jacobian = [](const Vec& x, const Vec& u) {
    const double r = x(0), v = x(2), w = x(3);
    DynamicsJacobian j;
    j.A = Mat::Zero(4, 4);
    j.A(0, 2) = 1.0;
    j.A(1, 3) = 1.0;
    j.A(2, 0) = w * w + 2.0 * kMu / (r * r * r);
    j.A(2, 3) = 2.0 * r * w;
    j.A(3, 0) = 2.0 * v * w / (r * r) - u(1) / (kSatMass * r * r);
    j.A(3, 2) = -2.0 * w / r;
    j.A(3, 3) = -2.0 * v / r;
    j.B = Mat::Zero(4, 2);
    j.B(2, 0) = 1.0 / kSatMass;
    j.B(3, 1) = 1.0 / (kSatMass * r);
    return j;
  };
  auto dyn = rk4_discretize(vf, h);
  m.step = dyn.step;
  m.step_jacobian = dyn.jacobian;

  m.output = [](const Vec& x, const Vec&) -> Vec { return x.segment(1, 1); };
  m.output_jacobian = [](const Vec&, const Vec&, Mat& C, Mat& D) {
    C = Mat::Zero(1, 4);
    C(0, 1) = 1.0;
    D = Mat::Zero(1, 2);
  };

  const double w0 = satellite_nominal_rate();
  m.state_box.lo = Vec(4);
  m.state_box.hi = Vec(4);
  m.state_box.lo << 6.5e6, -kInf, -50.0, 0.9 * w0;
  m.state_box.hi << 7.2e6, kInf, 50.0, 1.1 * w0;
  m.input_box = Box::symmetric(Vec::Constant(2, kSatThrust));
  m.state_angle = {1};
  m.output_angle = {0};
  m.state_scale = Vec(4);
  m.state_scale << 3.5e5, 2.0 * M_PI, 50.0, 0.1 * w0;
  m.state_names = {"r", "theta", "v", "omega"};
  m.input_names = {"F_r", "F_theta"};
  m.output_names = {"theta"};
  return m;
}

AgentModel make_quadrotor_model(double h) {
  AgentModel m;
  m.name = "quadrotor";
  m.n = 10;
  m.q = 3;
  m.p = 3;
  m.h = h;

  VectorField vf;
  vf.n = 10;
  vf.q = 3;
  vf.f = [](const Vec& x, const Vec& u) {
    Vec dx(10);
    dx(0) = x(5);
    dx(1) = x(6);
    dx(2) = x(7);
    dx(3) = x(8) - 8.0 * x(3);
    dx(4) = x(9) - 8.0 * x(4);
    dx(5) = 9.81 * std::tan(x(3));
    dx(6) = 9.81 * std::tan(x(4));
    dx(7) = 0.91 * u(2) - 9.81;
    dx(8) = 10.0 * (u(0) - x(3));
    dx(9) = 10.0 * (u(1) - x(4));
    return dx;
  };
  vf.jacobian = [](const Vec& x, const Vec&) {
    DynamicsJacobian j;
    j.A = Mat::Zero(10, 10);
    j.A(0, 5) = 1.0;
    j.A(1, 6) = 1.0;
    j.A(2, 7) = 1.0;
    j.A(3, 3) = -8.0;
    j.A(3, 8) = 1.0;
    j.A(4, 4) = -8.0;
    j.A(4, 9) = 1.0;
    const double c3 = std::cos(x(3)), c4 = std::cos(x(4));
    j.A(5, 3) = 9.81 / (c3 * c3);
    j.A(6, 4) = 9.81 / (c4 * c4);
    j.A(8, 3) = -10.0;
    j.A(9, 4) = -10.0;
    j.B = Mat::Zero(10, 3);
    j.B(7, 2) = 0.91;
    j.B(8, 0) = 10.0;
    j.B(9, 1) = 10.0;
    return j;
  };
  auto dyn = euler_discretize(vf, h);
  m.step = dyn.step;
  m.step_jacobian = dyn.jacobian;

  m.output = [](const Vec& x, const Vec&) -> Vec { return x.head(3); };
  m.output_jacobian = [](const Vec&, const Vec&, Mat& C, Mat& D) {
    C = Mat::Zero(3, 10);
    C.leftCols(3) = Mat::Identity(3, 3);
    D = Mat::Zero(3, 3);
  };

  Vec half(10);
  half << 21.0, 21.0, 21.0, M_PI / 4.0, M_PI / 4.0, 2.0, 2.0, 2.0, 3.0, 3.0;
  m.state_box = Box::symmetric(half);
  m.input_box.lo = Vec(3);
  m.input_box.hi = Vec(3);
  m.input_box.lo << -M_PI / 9.0, -M_PI / 9.0, 0.0;
  m.input_box.hi << M_PI / 9.0, M_PI / 9.0, 19.62;
  m.state_scale = half;
  m.state_names = {"px", "py", "pz", "tiltx", "tilty", "vx", "vy", "vz", "tiltx_rate", "tilty_rate"};
  m.input_names = {"cmd_tiltx", "cmd_tilty", "thrust"};
  m.output_names = {"px", "py", "pz"};
  return m;
}

Vec quadrotor_hover_state(const Vec& position) {
  if (position.size() != 3) throw std::invalid_argument("quadrotor_hover_state: need 3 coordinates");
  Vec x = Vec::Zero(10);
  x.head(3) = position;
  return x;
}

Vec quadrotor_hover_input() {
  Vec u = Vec::Zero(3);
  u(2) = 9.81 / 0.91;
  return u;
}

}  // namespace dmpc
