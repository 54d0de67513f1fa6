#include "dmpc/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dmpc {

Graph Graph::from_edges(int m, std::vector<std::pair<int, int>> edges) {
  if (m < 0) throw std::invalid_argument("Graph: negative agent count");
  for (auto& e : edges) {
    if (e.first == e.second) throw std::invalid_argument("Graph: self loop");
    if (e.first < 0 || e.second < 0 || e.first >= m || e.second >= m)
      throw std::invalid_argument("Graph: edge endpoint out of range");
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  Graph g;
  g.m_ = m;
  g.edges_ = std::move(edges);
  g.nbrs_.assign(m, {});
  for (const auto& [i, j] : g.edges_) {
    g.nbrs_[i].push_back(j);
    g.nbrs_[j].push_back(i);
  }
  for (auto& nb : g.nbrs_) std::sort(nb.begin(), nb.end());
  return g;
}

Graph Graph::complete(int m) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) e.emplace_back(i, j);
  return from_edges(m, std::move(e));
}

Graph Graph::path(int m) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < m; ++i) e.emplace_back(i, i + 1);
  return from_edges(m, std::move(e));
}

const std::vector<int>& Graph::neighbors(int i) const {
  if (i < 0 || i >= m_) throw std::out_of_range("Graph::neighbors: bad agent index");
  return nbrs_[i];
}

bool Graph::adjacent(int i, int j) const {
  return neighbor_index(i, j) >= 0;
}

int Graph::neighbor_index(int i, int j) const {
  const auto& nb = neighbors(i);
  auto it = std::lower_bound(nb.begin(), nb.end(), j);
  if (it == nb.end() || *it != j) return -1;
  return static_cast<int>(it - nb.begin());
}

Graph Graph::induced(const std::vector<int>& keep) const {
  std::vector<int> sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  if (std::unique(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("Graph::induced: duplicate agent index");
  std::vector<int> renum(m_, -1);
  for (size_t k = 0; k < sorted.size(); ++k) {
    if (sorted[k] < 0 || sorted[k] >= m_)
      throw std::invalid_argument("Graph::induced: agent index out of range");
    renum[sorted[k]] = static_cast<int>(k);
  }
  std::vector<std::pair<int, int>> e;
  for (const auto& [i, j] : edges_)
    if (renum[i] >= 0 && renum[j] >= 0) e.emplace_back(renum[i], renum[j]);
  return from_edges(static_cast<int>(sorted.size()), std::move(e));
}

PeriodicTrajectory::PeriodicTrajectory(int period, int dim) : dim_(dim) {
  if (period <= 0) throw std::invalid_argument("PeriodicTrajectory: period must be positive");
  if (dim < 0) throw std::invalid_argument("PeriodicTrajectory: negative dimension");
  samples_.assign(period, Vec::Zero(dim));
}

PeriodicTrajectory PeriodicTrajectory::from_samples(std::vector<Vec> samples) {
  if (samples.empty())
    throw std::invalid_argument("PeriodicTrajectory: no samples");
  PeriodicTrajectory t;
  t.dim_ = static_cast<int>(samples.front().size());
  for (const auto& s : samples)
    if (s.size() != t.dim_)
      throw std::invalid_argument("PeriodicTrajectory: inconsistent sample dimensions");
  t.samples_ = std::move(samples);
  return t;
}

int PeriodicTrajectory::mod_index(int k) const {
  const int T = period();
  int r = k % T;
  if (r < 0) r += T;
  return r;
}

Vec PeriodicTrajectory::flatten() const {
  Vec out(static_cast<Eigen::Index>(period()) * dim_);
  for (int k = 0; k < period(); ++k) out.segment(static_cast<Eigen::Index>(k) * dim_, dim_) = samples_[k];
  return out;
}

PeriodicTrajectory PeriodicTrajectory::unflatten(const Vec& stacked, int period, int dim) {
  if (stacked.size() != static_cast<Eigen::Index>(period) * dim)
    throw std::invalid_argument("PeriodicTrajectory::unflatten: size mismatch");
  PeriodicTrajectory t(period, dim);
  for (int k = 0; k < period; ++k) t.at(k) = stacked.segment(static_cast<Eigen::Index>(k) * dim, dim);
  return t;
}

PeriodicTrajectory shift_periodic(const PeriodicTrajectory& traj, int shift) {
  PeriodicTrajectory out(traj.period(), traj.dim());
  for (int k = 0; k < traj.period(); ++k) out.at(k) = traj.at(k + shift);
  return out;
}

double periodic_distance(const PeriodicTrajectory& a, const PeriodicTrajectory& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("periodic_distance: shape mismatch");
  double d = 0.0;
  for (int k = 0; k < a.period(); ++k) d += (a.at(k) - b.at(k)).norm();
  return d;
}

std::vector<Vec> neighbor_slice(const Graph& g, int i, const std::vector<Vec>& per_agent) {
  if (static_cast<int>(per_agent.size()) != g.num_agents())
    throw std::invalid_argument("neighbor_slice: per-agent data size mismatch");
  std::vector<Vec> out;
  out.reserve(g.neighbors(i).size());
  for (int j : g.neighbors(i)) out.push_back(per_agent[j]);
  return out;
}

double wrap_angle(double diff) {
  const double two_pi = 2.0 * M_PI;
  double r = std::remainder(diff, two_pi);
  if (r <= -M_PI) r += two_pi;  // remainder returns (-pi, pi]; guard the boundary
  return r;
}

}  // namespace dmpc
