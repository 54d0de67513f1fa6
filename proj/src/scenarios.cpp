#include "dmpc/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace dmpc {

ChangePenalty make_change_penalty(double coeff, const std::vector<AgentSpec>& agents,
                                  int T) {
  if (coeff <= 0.0 || T < 1)
    throw std::invalid_argument("make_change_penalty: coeff and T must be positive");
  ChangePenalty pen;
  pen.delta = Vec::Constant(static_cast<int>(agents.size()), coeff / T);
  for (const auto& a : agents) pen.angle.push_back(a.model.output_angle);
  return pen;
}

namespace {

void validate_task(const Scenario& s, const TaskSpec& task, const std::string& label) {
  if (!task.objective)
    throw std::invalid_argument("Scenario " + s.name + ": " + label + " has no objective");
  if (task.objective->num_agents() != s.num_agents())
    throw std::invalid_argument("Scenario " + s.name + ": " + label +
                                " objective agent count mismatch");
  for (int i = 0; i < s.num_agents(); ++i)
    if (task.objective->output_dim(i) != s.agents[i].model.p)
      throw std::invalid_argument("Scenario " + s.name + ": " + label +
                                  " objective output dimension mismatch");
  if (task.N < 0 || task.T < 1)
    throw std::invalid_argument("Scenario " + s.name + ": " + label +
                                " needs N >= 0 and T >= 1");
  task.coop_set.validate(*task.objective, task.T);
}

void audit_box_pair(const Box& ref, const Box& outer, const std::vector<int>& angle,
                    const std::string& label, std::vector<std::string>& out) {
  auto is_angle = [&](int c) {
    return std::find(angle.begin(), angle.end(), c) != angle.end();
  };
  for (int c = 0; c < ref.size(); ++c) {
    if (ref.lo(c) > ref.hi(c)) {
      out.push_back(label + " component " + std::to_string(c) + ": empty interval");
      continue;
    }
    if (ref.lo(c) == ref.hi(c)) {
      // pinned: the pinned value must be strictly inside the path bounds
      if (ref.lo(c) <= outer.lo(c) || ref.hi(c) >= outer.hi(c))
        out.push_back(label + " component " + std::to_string(c) +
                      ": pinned value not strictly inside the path bounds");
    } else {
      if (ref.lo(c) < outer.lo(c) || ref.hi(c) > outer.hi(c))
        out.push_back(label + " component " + std::to_string(c) +
                      ": reference interval exceeds the path bounds");
      if (!is_angle(c) && (!std::isfinite(ref.lo(c)) || !std::isfinite(ref.hi(c))))
        out.push_back(label + " component " + std::to_string(c) +
                      ": reference interval must be compact");
    }
  }
}

}  // namespace

void Scenario::validate() const {
  const int m = num_agents();
  if (static_cast<int>(agents.size()) != m)
    throw std::invalid_argument("Scenario " + name + ": agent count mismatch with graph");
  for (int i = 0; i < m; ++i) {
    const auto& a = agents[i];
    if (a.model.n <= 0 || a.model.q <= 0 || a.model.p <= 0)
      throw std::invalid_argument("Scenario " + name + ": agent " + std::to_string(i) +
                                  " has empty dimensions");
    if (a.ref_state_box.size() != a.model.n || a.ref_input_box.size() != a.model.q)
      throw std::invalid_argument("Scenario " + name + ": agent " + std::to_string(i) +
                                  " reference box dimensions mismatch");
    if (a.q_diag.size() != a.model.n || a.r_diag.size() != a.model.q)
      throw std::invalid_argument("Scenario " + name + ": agent " + std::to_string(i) +
                                  " stage weight dimensions mismatch");
    if (a.x0.size() != a.model.n || a.u_eq.size() != a.model.q)
      throw std::invalid_argument("Scenario " + name + ": agent " + std::to_string(i) +
                                  " initial state or input dimension mismatch");
    if ((a.q_diag.array() < 0.0).any() || (a.r_diag.array() <= 0.0).any())
      throw std::invalid_argument("Scenario " + name + ": agent " + std::to_string(i) +
                                  " stage weights must be nonnegative, R positive");
  }
  for (const auto& c : couplings) {
    if (c.owner < 0 || c.owner >= m)
      throw std::invalid_argument("Scenario " + name + ": coupling owner out of range");
    if (c.rows != static_cast<int>(graph.neighbors(c.owner).size()))
      throw std::invalid_argument("Scenario " + name +
                                  ": coupling row count must match the owner's degree");
  }
  validate_task(*this, task, "active task");
  for (const auto& [key, t] : task_bank) validate_task(*this, t, "bank task '" + key + "'");
  if (delta_coeff <= 0.0)
    throw std::invalid_argument("Scenario " + name + ": delta_coeff must be positive");
  if (default_steps < 0)
    throw std::invalid_argument("Scenario " + name + ": default_steps must be nonnegative");

  int prev_time = 0;
  for (const auto& e : events) {
    if (e.time <= prev_time)
      throw std::invalid_argument("Scenario " + name +
                                  ": event times must be strictly increasing");
    prev_time = e.time;
    if (e.kind == Event::Kind::remove_agents) {
      if (e.remove.empty())
        throw std::invalid_argument("Scenario " + name + ": removal event with no agents");
      for (int id : e.remove)
        if (id < 0 || id >= m)
          throw std::invalid_argument("Scenario " + name + ": removal id out of range");
      if (!objective_factory)
        throw std::invalid_argument("Scenario " + name +
                                    ": removal event needs an objective factory");
    } else {
      if (task_bank.find(e.task) == task_bank.end())
        throw std::invalid_argument("Scenario " + name + ": switch event targets unknown task '" +
                                    e.task + "'");
    }
  }
}

std::vector<std::string> Scenario::audit() const {
  validate();
  std::vector<std::string> out;
  for (int i = 0; i < num_agents(); ++i) {
    const auto& a = agents[i];
    const std::string who = "agent " + std::to_string(i);
    for (int c = 0; c < a.model.n; ++c) {
      const bool angle = a.model.is_angle_state(c);
      if (!angle && (!std::isfinite(a.model.state_box.lo(c)) ||
                     !std::isfinite(a.model.state_box.hi(c))))
        out.push_back(who + " state " + std::to_string(c) +
                      ": path bounds must be compact");
    }
    for (int c = 0; c < a.model.q; ++c)
      if (!std::isfinite(a.model.input_box.lo(c)) || !std::isfinite(a.model.input_box.hi(c)))
        out.push_back(who + " input " + std::to_string(c) +
                      ": input bounds must be compact");
    audit_box_pair(a.ref_state_box, a.model.state_box, a.model.state_angle,
                   who + " reference state", out);
    audit_box_pair(a.ref_input_box, a.model.input_box, {}, who + " reference input", out);
    const Vec res = a.model.state_box.residuals(a.x0);
    if (res.size() > 0 && res.maxCoeff() > 0.0)
      out.push_back(who + ": initial state violates the path bounds");
    if (!a.model.input_box.contains(a.u_eq))
      out.push_back(who + ": equilibrium input violates the input bounds");
  }
  for (const auto& c : couplings)
    if (c.tighten <= 0.0)
      out.push_back("coupling '" + c.name + "': tightening margin must be positive");
  int max_N = task.N;
  for (const auto& [key, t] : task_bank) max_N = std::max(max_N, t.N);
  if (!scaling.valid_up_to(max_N))
    out.push_back("scaling: lambda(N) >= max(N, 1) fails below N = " + std::to_string(max_N));
  return out;
}

// ---------------------------------------------------------------------------
// satellite constellation

Scenario make_satellite_scenario(const SatelliteParams& params) {
  if (params.m < 2) throw std::invalid_argument("satellite scenario needs at least 2 agents");
  Scenario s;
  s.name = "satellite";
  s.graph = Graph::path(params.m);

  const AgentModel base = make_satellite_model(120.0);
  // orbit matching the configured period: omega from T h, radius from
  // mu = omega^2 r^3 recovered from the nominal orbit
  const double mu = std::pow(satellite_nominal_rate(), 2) *
                    std::pow(satellite_nominal_radius(), 3);
  const double omega = 2.0 * M_PI / (params.T * base.h);
  const double radius = std::cbrt(mu / (omega * omega));
  const double spacing = params.spacing_deg * M_PI / 180.0;
  const double target = params.target_deg * M_PI / 180.0;

  for (int i = 0; i < params.m; ++i) {
    AgentSpec a;
    a.model = base;
    // references are pinned to the zero-thrust circular orbit; only the
    // angle stays free
    a.ref_state_box = Box::unbounded(4);
    a.ref_state_box.lo(0) = a.ref_state_box.hi(0) = radius;
    a.ref_state_box.lo(2) = a.ref_state_box.hi(2) = 0.0;
    a.ref_state_box.lo(3) = a.ref_state_box.hi(3) = omega;
    a.ref_input_box = Box::symmetric(Vec::Zero(2));
    a.q_diag = Vec(4);
    a.q_diag << 2e-8, 0.02, 2e-4, 2e-3;
    a.r_diag = Vec::Constant(2, 1e-7);
    a.x0 = Vec(4);
    // lower index ahead on the orbit, matching the phase objective
    a.x0 << radius, (params.m - i) * spacing, 0.0, omega;
    a.u_eq = Vec::Zero(2);
    s.agents.push_back(std::move(a));
  }

  s.task.objective = make_satellite_phase_objective(s.graph, target);
  s.task.N = params.N;
  s.task.T = params.T;
  s.task.known_W0 = 0.0;
  for (int i = 0; i < params.m; ++i) {
    s.task.coop_set.y_box.push_back(Box::unbounded(1));
    s.task.coop_set.aux_box.push_back(Box::unbounded(0));
  }
  // the admissible outputs advance by omega h each sample and close the
  // period with one full revolution
  s.task.coop_set.rows.resize(params.m);
  for (int i = 0; i < params.m; ++i) {
    const int T = params.T;
    SpMat A(T, T);
    std::vector<Eigen::Triplet<double>> trip;
    for (int tau = 0; tau + 1 < T; ++tau) {
      trip.emplace_back(tau, tau, -1.0);
      trip.emplace_back(tau, tau + 1, 1.0);
    }
    trip.emplace_back(T - 1, 0, 1.0);
    trip.emplace_back(T - 1, T - 1, -1.0);
    A.setFromTriplets(trip.begin(), trip.end());
    s.task.coop_set.rows[i].A = A;
    s.task.coop_set.rows[i].lo = Vec::Constant(T, omega * base.h);
    s.task.coop_set.rows[i].hi = Vec::Constant(T, omega * base.h);
    s.task.coop_set.rows[i].lo(T - 1) = omega * base.h - 2.0 * M_PI;
    s.task.coop_set.rows[i].hi(T - 1) = omega * base.h - 2.0 * M_PI;
  }

  s.objective_factory = [target](const Graph& g) {
    return make_satellite_phase_objective(g, target);
  };
  s.terminal = TerminalMode::equality;
  s.delta_coeff = 1e-4;
  s.default_steps = 1500;
  s.convex = false;  // nonlinear orbit dynamics

  if (params.deorbit && params.m == 5) {
    Event e;
    e.kind = Event::Kind::remove_agents;
    e.time = params.deorbit_time;
    e.remove = {1, 3};
    e.rebuild_path = true;  // survivors stay adjacent in orbit order
    s.events.push_back(e);
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// narrow path crossing

Scenario make_narrow_path_scenario(const NarrowPathParams& params) {
  Scenario s;
  s.name = "narrow_path";
  s.graph = Graph::complete(2);

  const double L = params.corridor_half_length;
  const double w = params.corridor_half_width;

  AgentModel base = make_double_integrator_model(2, 0.25);
  base.state_box.lo = Vec(4);
  base.state_box.hi = Vec(4);
  base.state_box.lo << -25.0, -25.0, -2.0, -2.0;
  base.state_box.hi << 25.0, 25.0, 2.0, 2.0;
  base.input_box = Box::symmetric(Vec::Constant(2, 2.0));
  base.state_scale = Vec(4);
  base.state_scale << 25.0, 25.0, 2.0, 2.0;

  AgentModel::ExtraConstraint corridor;
  corridor.name = "corridor_walls";
  // violated iff inside the corridor span but outside the channel:
  // min(L - |x1|, |x2| - w) <= 0
  corridor.value = [L, w](const Vec& x, const Vec&) {
    return std::min(L - std::abs(x(0)), std::abs(x(1)) - w);
  };
  corridor.gradient = [L, w](const Vec& x, const Vec&, Vec& gx, Vec& gu) {
    gx = Vec::Zero(4);
    gu = Vec::Zero(2);
    if (L - std::abs(x(0)) <= std::abs(x(1)) - w)
      gx(0) = x(0) >= 0.0 ? -1.0 : 1.0;
    else
      gx(1) = x(1) >= 0.0 ? 1.0 : -1.0;
  };
  corridor.ref_margin = 0.05;
  base.extra.push_back(corridor);

  const double targets[2][2] = {{20.0, 0.0}, {-20.0, 0.0}};
  for (int i = 0; i < 2; ++i) {
    AgentSpec a;
    a.model = base;
    a.ref_state_box = base.state_box.shrink_fraction(0.02);
    a.ref_input_box = base.input_box.shrink_fraction(0.02);
    a.q_diag = Vec(4);
    a.q_diag << 1.0, 1.0, 0.1, 0.1;
    a.r_diag = Vec::Constant(2, 0.1);
    a.x0 = Vec::Zero(4);
    a.x0(0) = -targets[i][0];  // each agent starts at the other's goal
    a.x0(1) = -targets[i][1];
    a.u_eq = Vec::Zero(2);
    s.agents.push_back(std::move(a));
  }

  for (int i = 0; i < 2; ++i)
    s.couplings.push_back(make_min_distance_coupling(i, 1, {0, 1}, params.min_distance,
                                                     params.eta));
  const double d_min = params.min_distance, eta = params.eta;
  s.coupling_factory = [d_min, eta](const Graph& g) {
    std::vector<CouplingConstraint> cs;
    for (int i = 0; i < g.num_agents(); ++i)
      cs.push_back(make_min_distance_coupling(
          i, static_cast<int>(g.neighbors(i).size()), {0, 1}, d_min, eta));
    return cs;
  };

  std::vector<Vec> t_vec;
  for (int i = 0; i < 2; ++i) {
    Vec t(2);
    t << targets[i][0], targets[i][1];
    t_vec.push_back(t);
  }
  Vec w_vec(2);
  w_vec << params.weight_1, params.weight_2;
  s.task.objective =
      make_pseudo_huber_target_objective(s.graph, t_vec, w_vec, params.huber_delta);
  s.task.N = params.N;
  s.task.T = params.T;
  s.task.known_W0 = 0.0;  // both targets lie inside the admissible set
  for (int i = 0; i < 2; ++i) {
    Box yb;
    yb.lo = s.agents[i].ref_state_box.lo.head(2);
    yb.hi = s.agents[i].ref_state_box.hi.head(2);
    s.task.coop_set.y_box.push_back(yb);
    s.task.coop_set.aux_box.push_back(Box::unbounded(0));
  }

  s.terminal = TerminalMode::lqr;
  s.delta_coeff = 1e-4;
  s.default_steps = 240;
  s.convex = false;  // corridor geometry and collision coupling
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// quadrotor synchronization and flocking

Scenario make_quadrotor_scenario(const QuadrotorParams& params) {
  Scenario s;
  s.name = "quadrotor";
  s.graph = Graph::complete(4);

  AgentModel base = make_quadrotor_model(0.1);

  Box ref_state(Box::unbounded(10));
  for (int c = 0; c < 3; ++c) {
    ref_state.lo(c) = -20.95;
    ref_state.hi(c) = 20.95;
  }
  for (int c = 3; c < 5; ++c) {
    ref_state.lo(c) = -0.75;
    ref_state.hi(c) = 0.75;
  }
  for (int c = 5; c < 8; ++c) {
    ref_state.lo(c) = -1.95;
    ref_state.hi(c) = 1.95;
  }
  for (int c = 8; c < 10; ++c) {
    ref_state.lo(c) = -2.9;
    ref_state.hi(c) = 2.9;
  }
  Box ref_input(Box::unbounded(3));
  ref_input.lo << -0.3, -0.3, 0.05;
  ref_input.hi << 0.3, 0.3, 19.5;

  const double corners[4][2] = {{2.0, 2.0}, {-2.0, 2.0}, {-2.0, -2.0}, {2.0, -2.0}};
  for (int i = 0; i < 4; ++i) {
    AgentSpec a;
    a.model = base;
    a.ref_state_box = ref_state;
    a.ref_input_box = ref_input;
    a.q_diag = Vec(10);
    a.q_diag << 0.5, 0.5, 0.5, 0.375, 0.375, 0.25, 0.25, 0.25, 0.125, 0.125;
    a.r_diag = Vec(3);
    a.r_diag << 0.25, 0.25, 0.005;
    Vec pos(3);
    pos << corners[i][0], corners[i][1], 0.0;
    a.x0 = quadrotor_hover_state(pos);
    a.u_eq = quadrotor_hover_input();
    s.agents.push_back(std::move(a));
  }

  for (int i = 0; i < 4; ++i)
    s.couplings.push_back(make_min_distance_coupling(i, 3, {0, 1, 2}, params.min_distance,
                                                     params.eta));

  auto position_boxes = [&](CoopFeasibleSet& set, bool with_circle_aux) {
    for (int i = 0; i < 4; ++i) {
      Box yb;
      yb.lo = Vec::Constant(3, -20.95);
      yb.hi = Vec::Constant(3, 20.95);
      set.y_box.push_back(yb);
      if (with_circle_aux) {
        Box ab(Box::unbounded(3));
        ab.lo << 1.0, -20.95, -20.95;
        ab.hi << 2.0, 20.95, 20.95;
        set.aux_box.push_back(ab);
      } else {
        set.aux_box.push_back(Box::unbounded(0));
      }
    }
  };

  s.task.objective = make_circle_formation_objective(s.graph, 45.0 * M_PI / 180.0);
  s.task.N = params.N1;
  s.task.T = params.T1;
  s.task.known_W0 = 0.0;  // full-radius circle inside the position boxes
  position_boxes(s.task.coop_set, true);

  const double t_sw = params.switch_time;
  auto leader_ref = [t_sw](double t) {
    Vec v(3);
    const double level = -10.0 + 20.0 * (t - t_sw) / 350.0;
    v << level, level, 0.0;
    return v;
  };
  Vec metric(3);
  metric << 1.0, 1.0, 0.1;
  TaskSpec follow;
  follow.objective = make_leader_follow_objective(s.graph, 3, leader_ref, metric);
  follow.N = params.N2;
  follow.T = params.T2;
  follow.known_W0 = 0.0;
  position_boxes(follow.coop_set, false);
  s.task_bank["leader_follow"] = std::move(follow);

  Event e;
  e.kind = Event::Kind::switch_task;
  e.time = params.switch_time;
  e.task = "leader_follow";
  s.events.push_back(e);

  s.terminal = TerminalMode::lqr;
  s.delta_coeff = 1e-4;
  s.default_steps = 700;
  s.convex = false;  // nonlinear dynamics and collision coupling
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// all-quadratic baseline

Scenario make_double_integrator_oracle_scenario(const OracleParams& params) {
  if (params.m < 2) throw std::invalid_argument("oracle scenario needs at least 2 agents");
  Scenario s;
  s.name = "double_integrator_oracle";
  s.graph = Graph::path(params.m);

  AgentModel base = make_double_integrator_model(1, 0.1);
  base.state_box.lo = Vec(2);
  base.state_box.hi = Vec(2);
  base.state_box.lo << -50.0, -5.0;
  base.state_box.hi << 50.0, 5.0;
  base.input_box = Box::symmetric(Vec::Constant(1, 5.0));
  base.state_scale = Vec(2);
  base.state_scale << 50.0, 5.0;

  for (int i = 0; i < params.m; ++i) {
    AgentSpec a;
    a.model = base;
    a.ref_state_box = base.state_box.shrink_fraction(0.02);
    a.ref_input_box = base.input_box.shrink_fraction(0.02);
    a.q_diag = Vec(2);
    a.q_diag << 1.0, 0.1;
    a.r_diag = Vec::Constant(1, 0.1);
    a.x0 = Vec::Zero(2);
    a.x0(0) = params.spacing * (i - 0.5 * (params.m - 1));
    a.u_eq = Vec::Zero(1);
    s.agents.push_back(std::move(a));
  }

  s.task.objective = make_consensus_objective(s.graph, 1);
  s.task.N = params.N;
  s.task.T = params.T;
  s.task.known_W0 = 0.0;
  for (int i = 0; i < params.m; ++i) {
    Box yb;
    yb.lo = s.agents[i].ref_state_box.lo.head(1);
    yb.hi = s.agents[i].ref_state_box.hi.head(1);
    s.task.coop_set.y_box.push_back(yb);
    s.task.coop_set.aux_box.push_back(Box::unbounded(0));
  }

  s.terminal = TerminalMode::equality;
  s.delta_coeff = 1e-4;
  s.default_steps = 60;
  s.convex = true;
  s.validate();
  return s;
}

Scenario make_double_integrator_oracle_scenario(int m, int N, int T) {
  OracleParams p;
  p.m = m;
  p.N = N;
  p.T = T;
  return make_double_integrator_oracle_scenario(p);
}

// ---------------------------------------------------------------------------
// config layer

std::vector<std::string> builtin_scenarios() {
  return {"double_integrator_oracle", "narrow_path", "quadrotor", "satellite"};
}

namespace {

using nlohmann::json;

class FieldReader {
 public:
  FieldReader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw std::invalid_argument(prefix_ + ": expected an object");
  }

  int get_int(const std::string& key, int def, int lo, int hi) {
    if (!j_.contains(key)) return def;
    seen_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_number_integer())
      throw std::invalid_argument(path(key) + ": expected an integer");
    const int x = v.get<int>();
    if (x < lo || x > hi)
      throw std::invalid_argument(path(key) + ": must be in [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "]");
    return x;
  }

  double get_double(const std::string& key, double def, double lo, double hi) {
    if (!j_.contains(key)) return def;
    seen_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_number()) throw std::invalid_argument(path(key) + ": expected a number");
    const double x = v.get<double>();
    if (!(x >= lo && x <= hi))
      throw std::invalid_argument(path(key) + ": must be in [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "]");
    return x;
  }

  bool get_bool(const std::string& key, bool def) {
    if (!j_.contains(key)) return def;
    seen_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw std::invalid_argument(path(key) + ": expected a boolean");
    return v.get<bool>();
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (seen_.find(item.key()) == seen_.end())
        throw std::invalid_argument(path(item.key()) + ": unknown key");
  }

 private:
  std::string path(const std::string& key) const { return prefix_ + "." + key; }
  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

}  // namespace

ScenarioConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected an object");
  ScenarioConfig c;
  if (!j.contains("scenario") || !j.at("scenario").is_string())
    throw std::invalid_argument("config.scenario: expected a string");
  c.scenario = j.at("scenario").get<std::string>();
  const auto known = builtin_scenarios();
  if (std::find(known.begin(), known.end(), c.scenario) == known.end()) {
    std::string names;
    for (const auto& n : known) names += (names.empty() ? "" : ", ") + n;
    throw std::invalid_argument("config.scenario: unknown scenario '" + c.scenario +
                                "' (known: " + names + ")");
  }
  if (j.contains("steps")) {
    if (!j.at("steps").is_number_integer() || j.at("steps").get<int>() < 0)
      throw std::invalid_argument("config.steps: expected a nonnegative integer");
    c.steps = j.at("steps").get<int>();
  }
  if (j.contains("params")) {
    if (!j.at("params").is_object())
      throw std::invalid_argument("config.params: expected an object");
    c.params = j.at("params");
  }
  for (const auto& item : j.items())
    if (item.key() != "scenario" && item.key() != "steps" && item.key() != "params")
      throw std::invalid_argument("config." + item.key() + ": unknown key");
  return c;
}

nlohmann::json config_to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["scenario"] = c.scenario;
  if (c.steps >= 0) j["steps"] = c.steps;
  j["params"] = c.params;
  return j;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config file " + path + ": " + e.what());
  }
  return config_from_json(j);
}

void save_scenario_config(const ScenarioConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open config file for writing: " + path);
  out << config_to_json(c).dump(2) << "\n";
}

ScenarioConfig default_config(const std::string& scenario) {
  ScenarioConfig c;
  c.scenario = scenario;
  if (scenario == "satellite") {
    SatelliteParams p;
    c.steps = 1500;
    c.params = {{"m", p.m},
                {"N", p.N},
                {"T", p.T},
                {"spacing_deg", p.spacing_deg},
                {"target_deg", p.target_deg},
                {"deorbit", p.deorbit},
                {"deorbit_time", p.deorbit_time}};
  } else if (scenario == "narrow_path") {
    NarrowPathParams p;
    c.steps = 240;
    c.params = {{"N", p.N},
                {"T", p.T},
                {"min_distance", p.min_distance},
                {"weight_1", p.weight_1},
                {"weight_2", p.weight_2},
                {"huber_delta", p.huber_delta},
                {"corridor_half_length", p.corridor_half_length},
                {"corridor_half_width", p.corridor_half_width},
                {"eta", p.eta}};
  } else if (scenario == "quadrotor") {
    QuadrotorParams p;
    c.steps = 700;
    c.params = {{"N1", p.N1},          {"T1", p.T1},
                {"N2", p.N2},          {"T2", p.T2},
                {"switch_time", p.switch_time},
                {"min_distance", p.min_distance},
                {"eta", p.eta}};
  } else if (scenario == "double_integrator_oracle") {
    OracleParams p;
    c.steps = 60;
    c.params = {{"m", p.m}, {"N", p.N}, {"T", p.T}, {"spacing", p.spacing}};
  } else {
    throw std::invalid_argument("default_config: unknown scenario '" + scenario + "'");
  }
  return c;
}

Scenario make_scenario(const ScenarioConfig& config) {
  FieldReader r(config.params, "params");
  Scenario s;
  if (config.scenario == "satellite") {
    SatelliteParams p;
    p.m = r.get_int("m", p.m, 2, 32);
    p.N = r.get_int("N", p.N, 0, 2000);
    // the angular-rate path bounds admit orbits between 43 and 52 samples
    p.T = r.get_int("T", p.T, 43, 52);
    p.spacing_deg = r.get_double("spacing_deg", p.spacing_deg, 1.0, 359.0);
    p.target_deg = r.get_double("target_deg", p.target_deg, 1.0, 359.0);
    p.deorbit = r.get_bool("deorbit", p.deorbit);
    p.deorbit_time = r.get_int("deorbit_time", p.deorbit_time, 1, 1000000);
    r.finish();
    s = make_satellite_scenario(p);
  } else if (config.scenario == "narrow_path") {
    NarrowPathParams p;
    p.N = r.get_int("N", p.N, 1, 2000);
    p.T = r.get_int("T", p.T, 1, 100);
    p.min_distance = r.get_double("min_distance", p.min_distance, 1e-3, 10.0);
    p.weight_1 = r.get_double("weight_1", p.weight_1, 1e-6, 1e9);
    p.weight_2 = r.get_double("weight_2", p.weight_2, 1e-6, 1e9);
    p.huber_delta = r.get_double("huber_delta", p.huber_delta, 1e-6, 10.0);
    p.corridor_half_length = r.get_double("corridor_half_length", p.corridor_half_length,
                                          0.1, 20.0);
    p.corridor_half_width = r.get_double("corridor_half_width", p.corridor_half_width,
                                         0.1, 20.0);
    p.eta = r.get_double("eta", p.eta, 1e-6, 10.0);
    r.finish();
    s = make_narrow_path_scenario(p);
  } else if (config.scenario == "quadrotor") {
    QuadrotorParams p;
    p.N1 = r.get_int("N1", p.N1, 1, 2000);
    p.T1 = r.get_int("T1", p.T1, 1, 500);
    p.N2 = r.get_int("N2", p.N2, 1, 2000);
    p.T2 = r.get_int("T2", p.T2, 1, 500);
    p.switch_time = r.get_int("switch_time", p.switch_time, 1, 1000000);
    p.min_distance = r.get_double("min_distance", p.min_distance, 1e-3, 10.0);
    p.eta = r.get_double("eta", p.eta, 1e-6, 10.0);
    r.finish();
    s = make_quadrotor_scenario(p);
  } else if (config.scenario == "double_integrator_oracle") {
    OracleParams p;
    p.m = r.get_int("m", p.m, 2, 64);
    p.N = r.get_int("N", p.N, 0, 2000);
    p.T = r.get_int("T", p.T, 1, 100);
    p.spacing = r.get_double("spacing", p.spacing, 1e-3, 50.0);
    r.finish();
    s = make_double_integrator_oracle_scenario(p);
  } else {
    throw std::invalid_argument("make_scenario: unknown scenario '" + config.scenario + "'");
  }
  if (config.steps >= 0) s.default_steps = config.steps;
  return s;
}

}  // namespace dmpc
