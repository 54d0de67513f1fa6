#pragma once

#include <Eigen/Sparse>
#include <array>
#include <string>
#include <vector>

#include "dmpc/core.hpp"
#include "dmpc/parallel.hpp"

namespace dmpc {

using SpMat = Eigen::SparseMatrix<double>;

struct AdmmSettings {
  double rho = 1.0;        // initial penalty
  double tol = 1e-8;       // primal and dual stopping tolerance (equilibrated data)
  int max_iter = 20000;
  double relax = 1.6;      // over-relaxation factor in (0, 2)
  int check_every = 25;    // residual evaluation cadence
  bool equilibrate = true; // Ruiz scaling before iterating
  int equilibrate_iters = 10;
  bool adapt_rho = true;   // residual balancing; purely iterate-driven, stays deterministic
  ExecMode exec = ExecMode::serial;
  bool log_rounds = false; // keep a per-round message record (large)

  void validate() const;
};

/// Named span of constraint rows, used to attribute violations to a
/// constraint family when reporting.
struct QpRowGroup {
  std::string name;
  int offset = 0;
  int rows = 0;
};

/// One agent's share of a graph-structured QP.
///
/// The local variable bundle is [own block; copies of neighbor slices], with
/// neighbors in ascending id order. slice[k] lists which components of
/// neighbor nb[k]'s own block this agent references (sorted ascending, may be
/// empty). P, q, A are expressed in bundle coordinates. Rows are two-sided,
/// lo == hi makes an equality and infinities drop a side.
struct AgentQpBlock {
  int dim = 0;
  std::vector<int> nb;
  std::vector<std::vector<int>> slice;
  SpMat P;
  Vec q;
  SpMat A;
  Vec lo, hi;
  std::vector<QpRowGroup> groups;

  int bundle_dim() const;
};

struct GraphQp {
  Graph g;
  std::vector<AgentQpBlock> agents;

  void validate() const;
};

/// Neighbor-to-neighbor traffic of one solve. Counts are per directed send;
/// an entry in per_edge aggregates both directions of that graph edge.
struct MessageLog {
  long long rounds = 0;
  struct EdgeTraffic {
    long long count = 0;
    long long bytes = 0;
  };
  std::vector<EdgeTraffic> per_edge;  // parallel to Graph::edges()
  struct Record {
    long long round;
    int from, to;
    long long bytes;
  };
  std::vector<Record> detail;  // only with AdmmSettings::log_rounds
};

struct QpSolution {
  std::vector<Vec> z;       // per-agent own blocks (consensus values)
  std::vector<Vec> bundle;  // per-agent bundles gathered from the consensus values
  bool converged = false;
  int iters = 0;
  double prim_res = 0.0;
  double dual_res = 0.0;
  double objective = 0.0;  // evaluated on the returned bundles with the original data
  MessageLog log;
};

/// Internal iterates of a previous solve on the same structure, in physical
/// (unequilibrated) units. Passing one seeds the iteration and it is
/// overwritten with the final state on exit.
struct AdmmWarmStart {
  bool valid = false;
  std::vector<Vec> v, s, alpha, beta, zeta;
};

/// Solves the graph-structured QP by consensus ADMM. Each iteration runs one
/// per-agent local solve (cached sparse LDLT), a slack clamp, neighborhood
/// averaging of the shared copies and a dual update. Deterministic: results
/// are bitwise identical for both ExecModes and any thread count.
QpSolution solve_qp_consensus_admm(const GraphQp& qp, const AdmmSettings& settings,
                                   AdmmWarmStart* warm = nullptr);

}  // namespace dmpc
