#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "movenet/imputation.hpp"
#include "movenet/types.hpp"

namespace movenet {

/// Snapshot proximity graph: an edge iff the pair is strictly closer than
/// `radius` at that slice. A pair exactly at the radius is not connected.
inline DynamicNetwork proximity_network(const TrajectoryGrid& g, double radius) {
  if (!(radius > 0.0))
    throw std::invalid_argument("proximity_network: radius must be > 0");
  g.validate();
  const int n = g.n(), T = g.T();
  DynamicNetwork W(n, T);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double d = (g.pos[t].row(i) - g.pos[t].row(j)).norm();
        if (d < radius) W.set_edge(i, j, t, true);
      }
  return W;
}

/// Fraction of (pair, slice) cells that carry an edge.
inline double edge_density(const DynamicNetwork& W) {
  const int n = W.n_individuals(), T = W.n_times();
  long e = 0;
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) e += W.edge(i, j, t);
  return static_cast<double>(e) / (static_cast<double>(n) * (n - 1) / 2 * T);
}

/// Per-slice edge frequencies across the draws of an imputation bank.
struct EdgeSummary {
  std::vector<Eigen::MatrixXd> mean, sd;  // n x n per slice, zero diagonal
  std::vector<std::string> ids;
  int n = 0;
  int T = 0;
};

inline EdgeSummary proximity_summary(const ImputationBank& bank, double radius) {
  bank.validate();
  const int K = bank.K();
  const int n = bank.draws.front().n(), T = bank.draws.front().T();
  EdgeSummary out;
  out.n = n;
  out.T = T;
  out.ids = bank.draws.front().ids;
  out.mean.assign(T, Eigen::MatrixXd::Zero(n, n));
  out.sd.assign(T, Eigen::MatrixXd::Zero(n, n));
  for (const auto& g : bank.draws) {
    const DynamicNetwork W = proximity_network(g, radius);
    for (int t = 0; t < T; ++t)
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          if (W.edge(i, j, t)) {
            out.mean[t](i, j) += 1.0;
            out.mean[t](j, i) += 1.0;
          }
  }
  for (int t = 0; t < T; ++t) {
    out.mean[t] /= static_cast<double>(K);
    if (K > 1) {
      // edges are 0/1 across draws, so the sample variance is K m (1-m) / (K-1)
      const Eigen::ArrayXXd m = out.mean[t].array();
      out.sd[t] = (m * (1.0 - m) * K / (K - 1.0)).sqrt().matrix();
      out.sd[t].diagonal().setZero();
    }
  }
  return out;
}

/// Edge density of the proximity graph averaged over bank draws.
inline double proximity_density(const ImputationBank& bank, double radius) {
  bank.validate();
  double s = 0.0;
  for (const auto& g : bank.draws) s += edge_density(proximity_network(g, radius));
  return s / bank.K();
}

/// Radius from `radii` whose proximity-graph density is closest to `target`.
/// Radii must be strictly ascending; only a strict improvement moves the
/// choice, so exact ties resolve to the smallest radius.
inline double density_matched_radius(const ImputationBank& bank,
                                     const std::vector<double>& radii, double target) {
  if (radii.empty())
    throw std::invalid_argument("density_matched_radius: empty radius grid");
  for (std::size_t k = 1; k < radii.size(); ++k)
    if (!(radii[k] > radii[k - 1]))
      throw std::invalid_argument("density_matched_radius: radii must be strictly ascending");
  if (!(target >= 0.0 && target <= 1.0))
    throw std::invalid_argument("density_matched_radius: target must lie in [0, 1]");
  double best_r = radii.front();
  double best_gap = std::abs(proximity_density(bank, radii.front()) - target);
  for (std::size_t k = 1; k < radii.size(); ++k) {
    const double gap = std::abs(proximity_density(bank, radii[k]) - target);
    if (gap < best_gap) {
      best_gap = gap;
      best_r = radii[k];
    }
  }
  return best_r;
}

}  // namespace movenet
