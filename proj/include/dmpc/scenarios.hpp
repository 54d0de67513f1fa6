#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmpc/cooperation.hpp"
#include "dmpc/core.hpp"
#include "dmpc/models.hpp"

namespace dmpc {

enum class TerminalMode { equality, lqr };

/// One agent of a scenario: its model, reference admissibility boxes (pin a
/// component with lo == hi), diagonal stage-cost weights, initial state and
/// the input holding it stationary (the cold-start guess).
struct AgentSpec {
  AgentModel model;
  Box ref_state_box;
  Box ref_input_box;
  Vec q_diag;
  Vec r_diag;
  Vec x0;
  Vec u_eq;
};

/// A cooperative task: objective, the convex output set used for projection
/// and optimum estimation, horizon and period, and the optimum when known
/// analytically (< 0 means estimate numerically).
struct TaskSpec {
  std::shared_ptr<CooperationObjective> objective;
  CoopFeasibleSet coop_set;
  int N = 1;
  int T = 1;
  double known_W0 = -1.0;
};

/// Mid-run change: agent removal (with graph rebuild) or a task switch to a
/// bank entry. The first solve after an event omits the change penalty.
struct Event {
  enum class Kind { remove_agents, switch_task };
  Kind kind = Kind::remove_agents;
  int time = 0;
  std::vector<int> remove;    // agent indices in the numbering current at the event
  bool rebuild_path = false;  // relink survivors as a path instead of the induced graph
  std::string task;           // task_bank key, for switch_task
};

struct Scenario {
  std::string name;
  Graph graph;
  std::vector<AgentSpec> agents;
  std::vector<CouplingConstraint> couplings;
  TaskSpec task;
  std::map<std::string, TaskSpec> task_bank;
  /// Rebuilds the active objective on a reduced graph after agent removal;
  /// null when the scenario has no removal events.
  std::function<std::shared_ptr<CooperationObjective>(const Graph&)> objective_factory;
  /// Rebuilds coupling constraints for a new graph; null keeps them fixed.
  std::function<std::vector<CouplingConstraint>(const Graph&)> coupling_factory;
  Scaling scaling = Scaling::default_scaling();
  TerminalMode terminal = TerminalMode::lqr;
  /// Change-penalty weight rule delta_i = delta_coeff / T.
  double delta_coeff = 1e-4;
  int default_steps = 100;
  /// Every ingredient quadratic or affine, so each per-step problem is a QP
  /// and the decrease diagnostics are asserted rather than just reported.
  bool convex = false;
  std::vector<Event> events;

  int num_agents() const { return graph.num_agents(); }
  /// Structural consistency; throws std::invalid_argument on mismatch.
  void validate() const;
  /// Static audit: compact constraint sets (angle components exempt),
  /// admissible initial state, positive tightening margins, scaling bound.
  /// Returns human-readable findings; empty means the audit passes.
  std::vector<std::string> audit() const;
};

/// delta_i = coeff / T for every listed agent, angle flags from the models.
ChangePenalty make_change_penalty(double coeff, const std::vector<AgentSpec>& agents,
                                  int T);

// Shipped scenarios.

struct SatelliteParams {
  int m = 5;
  int N = 141;
  int T = 47;
  double spacing_deg = 25.0;   // initial angular gap, satellite i at (m - i) * spacing
  double target_deg = 45.0;    // desired gap, lower index ahead
  bool deorbit = true;
  int deorbit_time = 750;
};

/// Satellites on a shared circular orbit reconfiguring their angular spacing.
/// Pinned references (radius, radial and angular rate, thrust) leave only the
/// angle free; terminal equality; deorbit event removes two agents.
Scenario make_satellite_scenario(const SatelliteParams& params = {});

struct NarrowPathParams {
  int N = 20;
  int T = 1;
  double min_distance = 0.8;
  double weight_1 = 2000.0;
  double weight_2 = 1000.0;
  double huber_delta = 0.01;
  double corridor_half_length = 4.0;
  double corridor_half_width = 0.5;
  double eta = 0.05;
};

/// Two planar double integrators exchanging positions through a corridor that
/// is too narrow to pass in, with asymmetric pseudo-Huber pulls breaking the
/// deadlock.
Scenario make_narrow_path_scenario(const NarrowPathParams& params = {});

struct QuadrotorParams {
  int N1 = 10;
  int T1 = 50;
  int N2 = 30;
  int T2 = 1;
  int switch_time = 350;
  double min_distance = 0.4;
  double eta = 0.05;
};

/// Four quadrotors: first agree on a circular trajectory (radius, centre and
/// altitude as parametric cooperation variables), then switch to following an
/// external reference behind agent 0, always keeping a minimum distance.
Scenario make_quadrotor_scenario(const QuadrotorParams& params = {});

struct OracleParams {
  int m = 3;
  int N = 4;
  int T = 1;
  double spacing = 1.0;  // initial positions spacing * (i - (m-1)/2)
};

/// All-quadratic baseline: scalar double integrators on a path graph with a
/// consensus objective. Every per-step problem is a QP, so solutions can be
/// checked against a dense oracle.
Scenario make_double_integrator_oracle_scenario(const OracleParams& params = {});
Scenario make_double_integrator_oracle_scenario(int m, int N, int T = 1);

// Config layer: named built-in plus parameter overrides, JSON-serializable.

struct ScenarioConfig {
  std::string scenario;
  int steps = -1;  // closed-loop length; -1 keeps the scenario default
  nlohmann::json params = nlohmann::json::object();

  bool operator==(const ScenarioConfig&) const = default;
};

std::vector<std::string> builtin_scenarios();

/// Parses and validates; errors name the offending field path, e.g.
/// "params.min_distance: expected a number".
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& c);
ScenarioConfig load_scenario_config(const std::string& path);
void save_scenario_config(const ScenarioConfig& c, const std::string& path);

/// The full parameter set of a built-in with its documented defaults, ready
/// to edit and feed back in.
ScenarioConfig default_config(const std::string& scenario);

/// Materializes the named built-in with overrides applied. Throws
/// std::invalid_argument on unknown names, keys, or out-of-range values.
Scenario make_scenario(const ScenarioConfig& config);

}  // namespace dmpc
