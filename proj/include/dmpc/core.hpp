#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace dmpc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Undirected communication topology over agents 0..m-1.
/// Neighbor lists are kept sorted ascending and never contain the agent itself,
/// so that every iteration over a neighborhood has one deterministic order.
class Graph {
 public:
  Graph() = default;

  /// Build from an edge list. Edges are normalized to (min,max), deduplicated,
  /// and validated (no self loops, endpoints in range).
  static Graph from_edges(int m, std::vector<std::pair<int, int>> edges);

  /// Complete graph on m agents.
  static Graph complete(int m);

  /// Path graph 0-1-2-...-(m-1).
  static Graph path(int m);

  int num_agents() const { return m_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  /// Normalized (i,j) with i<j, sorted lexicographically.
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  /// Sorted ascending, excludes i.
  const std::vector<int>& neighbors(int i) const;

  bool adjacent(int i, int j) const;

  /// Position of j within neighbors(i), or -1.
  int neighbor_index(int i, int j) const;

  /// Induced subgraph on the kept agents (sorted ascending); agents are
  /// renumbered 0..kept-1 in that order.
  Graph induced(const std::vector<int>& keep) const;

 private:
  int m_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> nbrs_;
};

/// T periodic samples of a fixed-dimension signal. Indexing is modulo T, so
/// at(k) is defined for any k >= -T (shifted accesses never go further back).
class PeriodicTrajectory {
 public:
  PeriodicTrajectory() = default;
  PeriodicTrajectory(int period, int dim);

  static PeriodicTrajectory from_samples(std::vector<Vec> samples);

  int period() const { return static_cast<int>(samples_.size()); }
  int dim() const { return dim_; }

  const Vec& at(int k) const { return samples_[mod_index(k)]; }
  Vec& at(int k) { return samples_[mod_index(k)]; }

  /// All samples concatenated, sample 0 first.
  Vec flatten() const;
  static PeriodicTrajectory unflatten(const Vec& stacked, int period, int dim);

  bool same_shape(const PeriodicTrajectory& other) const {
    return period() == other.period() && dim_ == other.dim_;
  }

 private:
  int mod_index(int k) const;
  int dim_ = 0;
  std::vector<Vec> samples_;
};

/// Cyclic shift: result.at(k) == traj.at(k + shift) for all k.
PeriodicTrajectory shift_periodic(const PeriodicTrajectory& traj, int shift);

/// Sum over one period of the Euclidean sample distances. Throws on shape
/// mismatch (callers compare like with like; there is no implicit resampling).
double periodic_distance(const PeriodicTrajectory& a, const PeriodicTrajectory& b);

/// Extracts the blocks of agent i's neighbors from per-agent data, in
/// ascending neighbor order.
std::vector<Vec> neighbor_slice(const Graph& g, int i, const std::vector<Vec>& per_agent);

/// Closed-loop state of the whole system: physical states plus the previous
/// step's shifted cooperation outputs (the change-penalty anchor).
struct ExtendedState {
  std::vector<Vec> x;                       // per agent
  std::vector<PeriodicTrajectory> y_prev;   // per agent, empty before the first solve
};

/// Wraps a difference of angles (radians) to the representative in (-pi, pi].
double wrap_angle(double diff);

}  // namespace dmpc
