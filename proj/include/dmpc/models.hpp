#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dmpc/core.hpp"

namespace dmpc {

/// Componentwise interval bounds. Infinite entries mean no bound on that side;
/// lo == hi pins a component.
struct Box {
  Vec lo, hi;

  static Box unbounded(int n);
  static Box symmetric(const Vec& half);

  int size() const { return static_cast<int>(lo.size()); }
  Vec clamp(const Vec& v) const;

  /// Positive entries are violations, in the units of the component.
  Vec residuals(const Vec& v) const;
  bool contains(const Vec& v, double tol = 0.0) const;

  /// Shrinks every two-sided finite component toward its midpoint by the given
  /// fraction of the half width. One-sided, unbounded and pinned components
  /// are returned unchanged.
  Box shrink_fraction(double frac) const;
};

struct DynamicsJacobian {
  Mat A;  // d step / d x
  Mat B;  // d step / d u
};

/// Continuous-time dynamics x' = f(x,u) with an optional analytic Jacobian.
struct VectorField {
  int n = 0;
  int q = 0;
  std::function<Vec(const Vec&, const Vec&)> f;
  std::function<DynamicsJacobian(const Vec&, const Vec&)> jacobian;  // may be null
};

/// One-step discrete dynamics produced by a discretization rule.
struct DiscreteDynamics {
  std::function<Vec(const Vec&, const Vec&)> step;
  std::function<DynamicsJacobian(const Vec&, const Vec&)> jacobian;
};

/// Classic fourth-order Runge-Kutta step with the chain-rule Jacobian.
DiscreteDynamics rk4_discretize(const VectorField& vf, double h);

/// Forward Euler step x + h f(x,u).
DiscreteDynamics euler_discretize(const VectorField& vf, double h);

/// Central differences with per-component step 1e-6 * (1 + |x_c|).
Mat finite_diff_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x);

/// Discrete-time agent: dynamics, output map, decoupled constraints and the
/// metadata the rest of the pipeline needs (angle components, scales, labels).
class AgentModel {
 public:
  std::string name;
  int n = 0;  // states
  int q = 0;  // inputs
  int p = 0;  // outputs
  double h = 0.0;  // sample time in seconds, informational

  std::function<Vec(const Vec&, const Vec&)> step;
  std::function<DynamicsJacobian(const Vec&, const Vec&)> step_jacobian;  // null: finite differences
  std::function<Vec(const Vec&, const Vec&)> output;
  std::function<void(const Vec&, const Vec&, Mat&, Mat&)> output_jacobian;  // null: finite differences

  Box state_box, input_box;

  /// Indices of states/outputs living on the circle (period 2 pi). Differences
  /// of these components are always taken with wrap_angle.
  std::vector<int> state_angle;
  std::vector<int> output_angle;

  /// Characteristic magnitude per state, used to size solver trust regions.
  Vec state_scale;

  std::vector<std::string> state_names, input_names, output_names;

  /// Scalar constraint g(x,u) <= 0 beyond the boxes. ref_margin is added to g
  /// when the constraint is imposed on reference trajectories.
  struct ExtraConstraint {
    std::string name;
    std::function<double(const Vec&, const Vec&)> value;
    std::function<void(const Vec&, const Vec&, Vec&, Vec&)> gradient;  // null: finite differences
    double ref_margin = 0.0;
  };
  std::vector<ExtraConstraint> extra;

  DynamicsJacobian jacobian(const Vec& x, const Vec& u) const;
  void output_jac(const Vec& x, const Vec& u, Mat& C, Mat& D) const;
  void extra_gradient(const ExtraConstraint& c, const Vec& x, const Vec& u, Vec& gx, Vec& gu) const;

  /// Stacked [state box; input box; extra] residuals, positive = violated.
  Vec path_residuals(const Vec& x, const Vec& u) const;

  bool is_angle_state(int c) const;
  bool is_angle_output(int c) const;

  /// Componentwise difference a - b with angle components wrapped.
  Vec state_difference(const Vec& a, const Vec& b) const;
  Vec output_difference(const Vec& a, const Vec& b) const;
};

/// Pairwise constraint rows owned by one agent, evaluated on its own state and
/// the states of its neighbors (ascending order). Satisfied iff <= 0.
struct CouplingConstraint {
  std::string name;
  int owner = 0;
  int rows = 0;
  std::function<Vec(const Vec&, const std::vector<Vec>&)> residual;
  std::function<void(const Vec&, const std::vector<Vec>&, Mat&, std::vector<Mat>&)> jacobian;  // null: finite differences
  double tighten = 0.05;  // extra margin when imposed on references

  void eval_jacobian(const Vec& xi, const std::vector<Vec>& xn, Mat& dxi,
                     std::vector<Mat>& dxn) const;
};

/// Minimum-distance keep-out between the owner and each neighbor:
/// one row d_min - ||p_i - p_j|| per neighbor, positions being the states
/// indexed by pos_index.
CouplingConstraint make_min_distance_coupling(int owner, int degree,
                                              std::vector<int> pos_index, double d_min,
                                              double tighten);

/// System-wide audit of decoupled and coupling constraints at one time step.
struct ResidualReport {
  struct Entry {
    std::string group;
    int agent;
    double worst;  // most positive residual in the group
  };
  double max_violation = 0.0;  // max over entries, floored at 0
  std::vector<Entry> entries;
};

ResidualReport constraint_residuals(const std::vector<AgentModel>& models,
                                    const std::vector<CouplingConstraint>& couplings,
                                    const Graph& g, const std::vector<Vec>& x,
                                    const std::vector<Vec>& u);

/// Point mass integrator chains on the given number of axes; outputs are the
/// positions. Exact discretization (the field is linear).
AgentModel make_double_integrator_model(int axes, double h);

/// Planar orbit dynamics in polar coordinates, state (r, theta, v, omega),
/// thrust inputs (F_r, F_theta), output theta. RK4 with h seconds.
AgentModel make_satellite_model(double h = 120.0);

/// Radius of the circular orbit whose period is 47 steps of 120 s.
double satellite_nominal_radius();
/// Angular rate on that orbit, 2 pi / 5640 s.
double satellite_nominal_rate();

/// Ten-state quadrotor with small-angle thrust-vectoring dynamics, outputs the
/// position. Euler discretization with h seconds.
AgentModel make_quadrotor_model(double h = 0.1);

/// Hover equilibrium of the quadrotor model at a given position.
Vec quadrotor_hover_state(const Vec& position);
Vec quadrotor_hover_input();

}  // namespace dmpc
