#pragma once

#include <map>
#include <string>
#include <vector>

#include "dmpc/qp.hpp"
#include "dmpc/scenarios.hpp"

namespace dmpc {

/// Terminal ingredients of one agent. Equality mode pins the last predicted
/// state to the reference sample. Quadratic mode asks for membership in the
/// ellipsoid (x - x_T)' P (x - x_T) <= alpha, which the local controller
/// u_T + K (x - x_T) keeps invariant with terminal cost decrease.
struct TerminalIngredients {
  enum class Mode { equality, quadratic };
  Mode mode = Mode::equality;
  Mat P;
  Mat K;
  double alpha = 0.0;
};

/// Quadratic terminal ingredients at an equilibrium reference: P from the
/// discrete Riccati equation of the linearization (iterated to residual
/// 1e-9), K the associated gain, and the level alpha halved from 1 until the
/// terminal cost decrease (under the true dynamics, margin 1e-8) and
/// constraint membership hold on 200 sampled boundary states. The optional
/// membership callback returns the worst extra residual (satisfied <= 0) of a
/// sampled terminal state and its control, used to fold in coupling margins.
/// Throws std::runtime_error when the linearization is not stabilizable or
/// alpha underflows below 1e-12.
TerminalIngredients lqr_terminal_synthesis(
    const AgentModel& model, const Vec& x_eq, const Vec& u_eq, const Vec& q_diag,
    const Vec& r_diag,
    const std::function<double(const Vec&, const Vec&)>& extra_membership = {});

/// Cyclic shift by one sample that keeps angle components unwrapped: the
/// sample moving across the period seam is lifted by the closest whole number
/// of turns so the trajectory keeps advancing instead of jumping back. With
/// no angle components this is shift_periodic(traj, 1).
PeriodicTrajectory shift_reference(const PeriodicTrajectory& traj,
                                   const std::vector<int>& angle_comps);

/// Residuals of one agent's periodic reference consistency: the state chain
/// follows the dynamics with wraparound (T n rows, angle differences on the
/// circle) and the outputs match the output map (T p rows). Zero means the
/// reference is a feasible periodic trajectory of the model.
Vec reference_consistency_residuals(const AgentModel& model, const PeriodicTrajectory& x_T,
                                    const PeriodicTrajectory& u_T,
                                    const PeriodicTrajectory& y_T);

/// Residuals of one coupling constraint imposed on references with its
/// tightening margin: g(x_T,own(tau), x_T,nb(tau)) + tighten per row and
/// sample, stacked sample-major. Throws std::invalid_argument when the
/// margin is not positive.
Vec tightened_coupling_residuals(const CouplingConstraint& coupling,
                                 const PeriodicTrajectory& own_xT,
                                 const std::vector<PeriodicTrajectory>& nb_xT);

/// Stage cost minimized over admissible inputs; with diagonal R the minimizer
/// is the componentwise clamp of u_T into the input box. Diagnostic only.
double input_minimized_stage_cost(const AgentModel& model, const Vec& q_diag,
                                  const Vec& r_diag, const Vec& x, const Vec& x_T,
                                  const Vec& u_T);

/// Decision variables of the per-step problem: one stacked vector per agent
/// with layout [u(0..N-1); y_T(0..T-1); x_T(0..T-1); u_T(0..T-1); aux].
using OcpBlocks = std::vector<Vec>;

/// Result of one per-step solve in structured form.
struct OcpSolution {
  enum class Status { optimal, suboptimal_feasible, infeasible };

  std::vector<Vec> u;  // per agent, inputs stacked over the horizon
  std::vector<PeriodicTrajectory> y_T;
  std::vector<PeriodicTrajectory> x_T;
  std::vector<PeriodicTrajectory> u_T;
  std::vector<Vec> aux;

  double objective = 0.0;
  std::map<std::string, double> group_residuals;  // worst residual per group
  double max_violation = 0.0;
  int sqp_iters = 0;
  int qp_iters = 0;  // inner iterations summed over the outer loop
  long long comm_rounds = 0;
  MessageLog log;
  Status status = Status::infeasible;
};

/// The per-step problem: tracking cost over the horizon, scaled cooperation
/// cost and change penalty on the reference period, single-shooting dynamics
/// (states are computed from the inputs, not decision variables), and all
/// constraint groups. Construction is single-threaded; evaluate and linearize
/// are reentrant and can fan out per agent.
class OcpProblem {
 public:
  int num_agents() const { return static_cast<int>(agents_.size()); }
  int N() const { return N_; }
  int T() const { return T_; }
  double lambda() const { return lambda_; }
  double time() const { return time_; }
  /// False at the first solve of a task, where no previous plan exists.
  bool change_penalty_active() const { return !y_pr_.empty(); }
  const Graph& graph() const { return graph_; }
  const std::vector<TerminalIngredients>& terminal() const { return terminal_; }
  const std::vector<Vec>& initial_state() const { return x0_; }
  const std::vector<PeriodicTrajectory>& previous_outputs() const { return y_pr_; }

  int block_dim(int i) const;
  int off_u(int i, int k) const;
  int off_y(int i, int tau) const;
  int off_xT(int i, int tau) const;
  int off_uT(int i, int tau) const;
  int off_aux(int i) const;

  /// Rows declared per constraint group, for the completeness audit.
  const std::map<std::string, int>& group_rows() const { return group_rows_; }

  /// Stationary cold start: hold the measured state with the equilibrium
  /// input, references clamped into their admissible boxes.
  OcpBlocks pack_initial_guess() const;

  /// Predicted state chain x(0..N) of agent i under the inputs in the block.
  std::vector<Vec> rollout(int i, const Vec& block) const;

  struct Eval {
    double objective = 0.0;
    double violation_l1 = 0.0;  // positive parts, equalities absolute
    std::map<std::string, double> group_max;

    double max_violation() const;
  };
  Eval evaluate(const OcpBlocks& z, ExecMode mode = ExecMode::serial) const;

  /// Quadratic model around z in step coordinates (next iterate = z + d):
  /// Gauss-Newton curvature of the tracking terms, exact curvature of the
  /// cooperation terms, every constraint group linearized. reg is added to
  /// the diagonal of each Hessian block.
  GraphQp linearize(const OcpBlocks& z, double reg, ExecMode mode = ExecMode::serial) const;

  /// Structured copy of the blocks into a solution shell (decision fields
  /// only; diagnostics are left untouched).
  void unpack(const OcpBlocks& z, OcpSolution& out) const;
  OcpBlocks pack(const OcpSolution& sol) const;

 private:
  friend OcpProblem build_ocp(const Scenario& s, const std::vector<Vec>& x,
                              const std::vector<PeriodicTrajectory>& y_pr, double t, int N,
                              int T, std::vector<TerminalIngredients> terminal);

  struct AgentData {
    AgentModel model;
    Vec q_diag, r_diag;
    Vec x0, u_eq;
    Box ref_state_box, ref_input_box;
    int aux = 0;
  };

  /// Which components of one neighbor's block this agent references, with the
  /// start of each contributing range inside the sorted component list.
  struct NeighborSlice {
    std::vector<int> comps;
    int u_pos = -1;
    int y_pos = -1;
    int xT_pos = -1;
    int aux_pos = -1;
  };

  void build_slices();
  void audit_completeness() const;
  void count_rows();

  Graph graph_;
  std::vector<AgentData> agents_;
  std::vector<CouplingConstraint> couplings_;
  std::shared_ptr<CooperationObjective> objective_;
  CoopFeasibleSet coop_set_;
  std::vector<TerminalIngredients> terminal_;
  std::vector<Vec> x0_;
  std::vector<PeriodicTrajectory> y_pr_;
  ChangePenalty penalty_;
  double lambda_ = 1.0;
  double time_ = 0.0;
  int N_ = 1;
  int T_ = 1;
  std::map<std::string, int> group_rows_;
};

/// Builds the per-step problem at state x and time t. y_pr carries the
/// shifted previous outputs; passing an empty vector omits the change
/// penalty (the first solve of a task). N and T may deviate from the task
/// defaults (horizon sweeps). Quadratic terminal mode requires one
/// synthesized ingredient per agent; equality mode takes an empty vector.
OcpProblem build_ocp(const Scenario& s, const std::vector<Vec>& x,
                     const std::vector<PeriodicTrajectory>& y_pr, double t, int N, int T,
                     std::vector<TerminalIngredients> terminal = {});

/// Warm-start candidate for the successor problem: references shifted one
/// sample (angle components kept unwrapped), inputs shifted with the
/// terminal controller appended. Feasibility for the successor state is the
/// recursive-feasibility guarantee and is checked by evaluating the result.
OcpBlocks candidate_solution(const OcpProblem& next, const OcpSolution& prev);

}  // namespace dmpc
