#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "movenet/ctcrw.hpp"
#include "movenet/observations.hpp"
#include "movenet/rng.hpp"
#include "movenet/types.hpp"

namespace movenet {

/// Grid request: a uniform time grid over the common observed span. When
/// spacing is absent it is chosen so the span holds target_T points.
struct GridSpec {
  std::optional<double> start;
  std::optional<double> spacing;
  int target_T = 100;
};

/// Uniform grid over [max_i first obs, min_i last obs]. Every individual's
/// track must cover every grid time, so imputation never extrapolates.
inline std::vector<double> common_grid(const ObservationSet& obs, const GridSpec& spec) {
  obs.validate();
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const auto& tr : obs.tracks) {
    lo = std::max(lo, tr.time.front());
    hi = std::min(hi, tr.time.back());
  }
  if (!(hi > lo))
    throw std::invalid_argument("common_grid: tracks share no common time span");
  const double start = spec.start.value_or(lo);
  if (start < lo || start >= hi)
    throw std::invalid_argument("common_grid: start lies outside the common span");
  double spacing;
  if (spec.spacing) {
    spacing = *spec.spacing;
    if (!(spacing > 0.0)) throw std::invalid_argument("common_grid: spacing must be > 0");
  } else {
    if (spec.target_T < 2)
      throw std::invalid_argument("common_grid: target_T must be >= 2");
    spacing = (hi - start) / (spec.target_T - 1);
  }
  std::vector<double> grid;
  const double tol = 1e-9 * spacing;
  for (int k = 0;; ++k) {
    const double t = start + k * spacing;
    if (t > hi + tol) break;
    grid.push_back(t);
  }
  if (grid.size() < 2)
    throw std::invalid_argument("common_grid: fewer than two grid points fit the span");
  return grid;
}

/// Per-track CTCRW maximum likelihood fits, in track order.
inline std::vector<CtcrwModel> fit_all_tracks(const ObservationSet& obs) {
  obs.validate();
  std::vector<CtcrwModel> models;
  models.reserve(obs.tracks.size());
  for (const auto& tr : obs.tracks) models.push_back(fit_ctcrw(tr));
  return models;
}

/// K complete synchronized trajectory draws on a shared grid. Draw k of
/// individual i uses the child stream spawn(k * n + i) of the supplied rng, so
/// any (k, i) cell is reproducible independently of evaluation order.
struct ImputationBank {
  std::vector<TrajectoryGrid> draws;

  int K() const { return static_cast<int>(draws.size()); }

  void validate() const {
    if (draws.empty()) throw std::invalid_argument("ImputationBank: no draws");
    const auto& first = draws.front();
    first.validate();
    for (const auto& g : draws) {
      g.validate();
      if (g.n() != first.n() || g.T() != first.T() || g.ids != first.ids ||
          g.time_step != first.time_step || g.start_time != first.start_time)
        throw std::invalid_argument("ImputationBank: draws disagree on the grid");
    }
  }
};

inline ImputationBank build_bank(const ObservationSet& obs,
                                 const std::vector<CtcrwModel>& models,
                                 const std::vector<double>& grid, int K, const Rng& rng,
                                 double diffuse_var = 1e8) {
  obs.validate();
  if (models.size() != obs.tracks.size())
    throw std::invalid_argument("build_bank: one model per track required");
  if (K < 1) throw std::invalid_argument("build_bank: K must be >= 1");
  if (grid.size() < 2) throw std::invalid_argument("build_bank: need >= 2 grid times");
  const int n = obs.n();
  const int T = static_cast<int>(grid.size());
  const double spacing = grid[1] - grid[0];
  for (int t = 1; t < T; ++t)
    if (std::abs(grid[t] - grid[t - 1] - spacing) > 1e-9 * spacing)
      throw std::invalid_argument("build_bank: grid must be uniformly spaced");

  ImputationBank bank;
  bank.draws.reserve(K);
  for (int k = 0; k < K; ++k) {
    TrajectoryGrid g;
    g.time_step = spacing;
    g.start_time = grid.front();
    g.pos.assign(T, Eigen::MatrixX2d(n, 2));
    for (int i = 0; i < n; ++i) {
      g.ids.push_back(obs.tracks[i].id);
      Rng child = rng.spawn(static_cast<std::uint64_t>(k) * n + i);
      const Eigen::MatrixX2d path =
          ctcrw_draw_path(models[i].params, obs.tracks[i], grid, child, diffuse_var);
      for (int t = 0; t < T; ++t) g.pos[t].row(i) = path.row(t);
    }
    bank.draws.push_back(std::move(g));
  }
  bank.validate();
  return bank;
}

}  // namespace movenet
