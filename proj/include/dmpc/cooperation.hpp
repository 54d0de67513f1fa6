#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dmpc/core.hpp"
#include "dmpc/models.hpp"
#include "dmpc/qp.hpp"

namespace dmpc {

/// delta^2 (sqrt(1 + a^2/delta^2) - 1): quadratic near zero, linear growth.
double pseudo_huber(double delta, double a);
double pseudo_huber_d1(double delta, double a);
double pseudo_huber_d2(double delta, double a);

/// Arguments of one agent's cooperation term at one period sample. Blocks are
/// ordered own-first, then neighbors ascending; aux entries are per-agent
/// parametric variables that are constant over the period.
struct CoopArgs {
  int tau = 0;
  int T = 1;
  double time = 0.0;  // absolute closed-loop step of the enclosing solve
  std::vector<const Vec*> y;
  std::vector<const Vec*> aux;
};

/// Separable cooperation objective: W(y) = sum_i sum_tau eval(i, tau). Terms
/// owned by agent i may read neighbor outputs and aux variables only. eval
/// accumulates the gradient and Hessian of the single term in the stacked
/// local coordinates [y_own; aux_own; y_nb1; aux_nb1; ...] when requested.
class CooperationObjective {
 public:
  virtual ~CooperationObjective() = default;
  virtual std::string name() const = 0;
  virtual const Graph& graph() const = 0;
  virtual int output_dim(int i) const = 0;
  virtual int aux_dim(int) const { return 0; }
  virtual bool is_convex() const = 0;
  virtual bool time_varying() const { return false; }
  /// Whether the total cost is unchanged by a cyclic shift of all output
  /// trajectories. Objectives that anchor the phase to the period index
  /// (circle formation) declare false; diagnostics relying on the shifted
  /// candidate then skip the cost-equality check.
  virtual bool shift_invariant() const { return true; }
  /// Lipschitz constant of the total gradient if known, else <= 0.
  virtual double grad_lipschitz() const { return 0.0; }
  virtual bool has_known_minimum() const { return false; }
  virtual double known_minimum() const { return 0.0; }
  virtual double eval(int i, const CoopArgs& a, Vec* grad, Mat* hess) const = 0;

  int num_agents() const { return graph().num_agents(); }
  /// Dimension of one term's stacked local coordinates for agent i.
  int local_dim(int i) const;
};

/// One point of the cooperation decision space: per-agent output trajectories
/// with a common period plus per-agent aux vectors.
struct CoopPoint {
  std::vector<PeriodicTrajectory> y;
  std::vector<Vec> aux;

  int period() const { return y.empty() ? 0 : y.front().period(); }
};

double eval_coop_cost(const CooperationObjective& W, const CoopPoint& pt, double time = 0.0);

/// Gradient in packed coordinates: per agent [y(0); ...; y(T-1); aux],
/// agents concatenated ascending.
Vec eval_coop_gradient(const CooperationObjective& W, const CoopPoint& pt, double time = 0.0);

int coop_var_dim(const CooperationObjective& W, int T);
int coop_var_offset(const CooperationObjective& W, int T, int agent);

/// Quadratic penalty on moving the cooperation outputs between consecutive
/// solves: delta_i * sum_tau ||y_i(tau) - y_prev_i(tau)||^2, with angle
/// components compared on the circle.
struct ChangePenalty {
  Vec delta;
  std::vector<std::vector<int>> angle;  // per agent: output components to wrap

  /// Curvature constant bounding the sum of penalties from above: 2 max delta.
  double c_delta() const;
};

double eval_change_penalty(const ChangePenalty& pen, int i, const PeriodicTrajectory& y,
                           const PeriodicTrajectory& y_prev);
double eval_change_penalty_total(const ChangePenalty& pen, const CoopPoint& pt,
                                 const std::vector<PeriodicTrajectory>& y_prev);

/// Horizon-dependent weight on the cooperation part of the objective.
struct Scaling {
  std::function<double(int)> lambda;

  static Scaling default_scaling();  // N + 1
  /// lambda(N) >= max(N, 1) for all N in [0, N_max]
  bool valid_up_to(int N_max) const;
};

/// Convex constraint description of the cooperation set: per-agent boxes on
/// every output sample and on aux, plus optional affine rows on the flattened
/// per-agent block [y; aux].
struct CoopFeasibleSet {
  std::vector<Box> y_box;
  std::vector<Box> aux_box;
  struct AffineRows {
    SpMat A;
    Vec lo, hi;
  };
  std::vector<AffineRows> rows;  // empty, or one entry per agent

  void validate(const CooperationObjective& W, int T) const;
};

/// Euclidean projection onto the set, computed with the consensus ADMM solver
/// on an edge-free graph (one independent block per agent).
CoopPoint project_coop(const CoopFeasibleSet& set, const CooperationObjective& W,
                       const CoopPoint& pt, const AdmmSettings& settings = {});

/// Estimates a Lipschitz constant of grad W by power iteration on gradient
/// differences around the given point. Deterministic.
double estimate_grad_lipschitz(const CooperationObjective& W, const CoopPoint& at,
                               double time = 0.0);

/// One projected-gradient step toward the cooperation set optimum, blended
/// with the current point: p = proj(y - s grad W), y_hat = y + theta (p - y),
/// s = 2 / (L theta + 2). For convex W this decreases W by at least
/// theta * ||p - y||^2.
struct PgCandidate {
  CoopPoint y_hat;
  double step = 0.0;
  double pg_norm = 0.0;  // ||p - y|| over all agents
  double cost_before = 0.0;
  double cost_after = 0.0;
};

PgCandidate projected_gradient_candidate(const CooperationObjective& W,
                                         const CoopFeasibleSet& set, const CoopPoint& y,
                                         double theta, double time = 0.0,
                                         const AdmmSettings& settings = {});

/// Iterated projected gradient estimate of min W over the set.
struct W0Estimate {
  double value = 0.0;
  bool converged = false;
  int iters = 0;
  CoopPoint minimizer;
};

W0Estimate estimate_W0(const CooperationObjective& W, const CoopFeasibleSet& set,
                       const CoopPoint& start, double time = 0.0, int max_iters = 5000,
                       double tol = 1e-10, const AdmmSettings& settings = {});

// Built-in cooperation objectives.

/// Neighbor output consensus: W_i = 0.5 weight sum_tau sum_j ||y_i - y_j||^2.
std::shared_ptr<CooperationObjective> make_consensus_objective(Graph g, int output_dim,
                                                               double weight = 1.0);

/// Relative phase spacing on a closed orbit: adjacent agents keep a fixed
/// angular offset, lower index ahead. Outputs are scalar angles.
std::shared_ptr<CooperationObjective> make_satellite_phase_objective(Graph g,
                                                                    double offset_rad);

/// Per-agent pseudo-Huber pull toward a fixed output target, averaged over
/// the period: W_i = weight_i / T * sum_tau L_delta(||y_i(tau) - target_i||^2).
/// With period 1 this is weight_i * L_delta(||y_i(0) - target_i||^2).
std::shared_ptr<CooperationObjective> make_pseudo_huber_target_objective(
    Graph g, std::vector<Vec> targets, Vec weights, double delta);

/// Circular formation with agreement on radius, centre and altitude. Outputs
/// are 3-D positions; aux is (radius, centre_x, centre_y) per agent. The
/// phase of each agent is pinned to the period index, which keeps the cost
/// quadratic in all decision variables but gives up shift invariance; the
/// radius reward is shifted by the admissible maximum so the cost is
/// nonnegative on the admissible set.
std::shared_ptr<CooperationObjective> make_circle_formation_objective(Graph g,
                                                                      double phase_step_rad);

/// Agent 0 tracks an external reference, the rest pull toward agent 0's
/// output with metric G, averaged over the period. Time varying; intended
/// period 1.
std::shared_ptr<CooperationObjective> make_leader_follow_objective(
    Graph g, int output_dim, std::function<Vec(double)> reference, Vec metric_diag);

}  // namespace dmpc
