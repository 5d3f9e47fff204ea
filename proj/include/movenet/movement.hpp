#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>

#include "movenet/network.hpp"
#include "movenet/rng.hpp"
#include "movenet/types.hpp"

namespace movenet {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// Effective ego-network size w^c_{i+}(t): the degree when positive, else c.
inline double ego_size(const DynamicNetwork& W, int i, int t, double c) {
  if (!(c > 0.0)) throw std::domain_error("ego_size: c must be > 0");
  const int d = W.degree(i, t);
  return d > 0 ? static_cast<double>(d) : c;
}

/// Mean position of i's connections at network slice t, weights w_ij / degree.
/// Only defined for degree > 0; callers must check.
inline Eigen::Vector2d ego_mean(const Eigen::MatrixX2d& mu, const DynamicNetwork& W,
                                int i, int t) {
  const int n = static_cast<int>(mu.rows());
  if (n != W.n_individuals())
    throw std::invalid_argument("ego_mean: positions and network disagree on n");
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  int deg = 0;
  for (int j = 0; j < n; ++j) {
    if (j != i && W.edge(i, j, t)) {
      sum += mu.row(j).transpose();
      ++deg;
    }
  }
  if (deg == 0) throw std::domain_error("ego_mean: individual has no connections");
  return sum / static_cast<double>(deg);
}

/// Unit vector from mu_i toward the ego mean; exactly zero when i has no
/// connections or coincides with its ego mean.
inline Eigen::Vector2d attraction_direction(const Eigen::MatrixX2d& mu,
                                            const DynamicNetwork& W, int i, int t) {
  const int n = static_cast<int>(mu.rows());
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  int deg = 0;
  for (int j = 0; j < n; ++j) {
    if (j != i && W.edge(i, j, t)) {
      sum += mu.row(j).transpose();
      ++deg;
    }
  }
  if (deg == 0) return Eigen::Vector2d::Zero();
  const Eigen::Vector2d gap = sum / static_cast<double>(deg) - mu.row(i).transpose();
  const double len = gap.norm();
  if (len == 0.0) return Eigen::Vector2d::Zero();
  return gap / len;
}

/// Attraction directions for all individuals, rows indexed by individual.
inline Eigen::MatrixX2d attraction_directions(const Eigen::MatrixX2d& mu,
                                              const DynamicNetwork& W, int t) {
  const int n = static_cast<int>(mu.rows());
  if (n != W.n_individuals())
    throw std::invalid_argument("attraction_directions: positions and network disagree on n");
  Eigen::MatrixX2d out(n, 2);
  for (int i = 0; i < n; ++i) out.row(i) = attraction_direction(mu, W, i, t).transpose();
  return out;
}

namespace detail {
// Network slice whose edges define the ego mean for the step t-1 -> t.
inline int ego_slice(int t, EgoMeanConvention conv) {
  return conv == EgoMeanConvention::previous_slice ? t - 1 : t;
}
}  // namespace detail

/// Mean of the joint conditional [mu(t) | mu(t-1), W]: row i is
/// mu_i(t-1) + beta * direction_i. The alignment term has zero mean jointly;
/// it appears only in the precision.
inline Eigen::MatrixX2d joint_step_mean(const Eigen::MatrixX2d& mu_prev,
                                        const DynamicNetwork& W, int t,
                                        const ModelParams& p,
                                        EgoMeanConvention conv = EgoMeanConvention::previous_slice) {
  if (t < 1 || t >= W.n_times())
    throw std::out_of_range("joint_step_mean: t must lie in [1, T-1]");
  return mu_prev + p.beta * attraction_directions(mu_prev, W, detail::ego_slice(t, conv));
}

/// sigma^2-free precision kernel Q0(t): diagonal w^c_{i+}(t), off-diagonal
/// -alpha w_ij(t). The full precision of the 2n-vector is sigma^{-2} Q0 (x) I2.
/// Positive definite for |alpha| < 1 by diagonal dominance.
inline Eigen::MatrixXd build_precision_kernel(const DynamicNetwork& W, int t,
                                              double alpha, double c) {
  if (!(alpha > -1.0 && alpha < 1.0))
    throw std::domain_error("build_precision_kernel: alpha must lie in (-1, 1)");
  if (!(c > 0.0)) throw std::domain_error("build_precision_kernel: c must be > 0");
  const int n = W.n_individuals();
  Eigen::MatrixXd Q0 = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    int deg = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (W.edge(i, j, t)) {
        Q0(i, j) = -alpha;
        ++deg;
      }
    }
    Q0(i, i) = deg > 0 ? static_cast<double>(deg) : c;
  }
  return Q0;
}

/// Full 2n x 2n precision of the stacked vector (x_1, y_1, ..., x_n, y_n).
inline Eigen::MatrixXd build_precision(const DynamicNetwork& W, int t,
                                       const ModelParams& p) {
  const Eigen::MatrixXd Q0 = build_precision_kernel(W, t, p.alpha, p.c);
  const int n = static_cast<int>(Q0.rows());
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Q(2 * i, 2 * j) = Q0(i, j) / p.sigma2;
      Q(2 * i + 1, 2 * j + 1) = Q0(i, j) / p.sigma2;
    }
  return Q;
}

/// Conditional mean of individual i at time t given everyone else at t and the
/// whole configuration at t-1:
///   mu_i(t-1) + beta dir_i + sum_j alpha w_ij(t)/w^c_{i+}(t) (mu_j(t) - m_j)
/// with m_j the joint step mean of j.
inline Eigen::Vector2d conditional_mean(const Eigen::MatrixX2d& mu_prev,
                                        const Eigen::MatrixX2d& mu_now,
                                        const DynamicNetwork& W, int t,
                                        const ModelParams& p, int i,
                                        EgoMeanConvention conv = EgoMeanConvention::previous_slice) {
  const int n = static_cast<int>(mu_prev.rows());
  if (i < 0 || i >= n) throw std::out_of_range("conditional_mean: bad individual");
  const Eigen::MatrixX2d m = joint_step_mean(mu_prev, W, t, p, conv);
  const double wc = ego_size(W, i, t, p.c);
  Eigen::Vector2d out = m.row(i).transpose();
  for (int j = 0; j < n; ++j) {
    if (j != i && W.edge(i, j, t))
      out += (p.alpha / wc) * (mu_now.row(j) - m.row(j)).transpose();
  }
  return out;
}

namespace detail {
// qf = dx' Q0 dx + dy' Q0 dy with d = mu_now - mean, fixed summation order.
inline double quad_form(const Eigen::MatrixXd& Q0, const Eigen::MatrixX2d& diff) {
  const int n = static_cast<int>(Q0.rows());
  double qf = 0.0;
  for (int i = 0; i < n; ++i) {
    qf += Q0(i, i) * (diff(i, 0) * diff(i, 0) + diff(i, 1) * diff(i, 1));
    for (int j = i + 1; j < n; ++j) {
      if (Q0(i, j) != 0.0)
        qf += 2.0 * Q0(i, j) * (diff(i, 0) * diff(j, 0) + diff(i, 1) * diff(j, 1));
    }
  }
  return qf;
}

// log det of an SPD kernel via Cholesky; throws if not positive definite.
inline double chol_logdet(const Eigen::MatrixXd& Q0, Eigen::LLT<Eigen::MatrixXd>& llt) {
  llt.compute(Q0);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("movement: precision kernel not positive definite");
  double ld = 0.0;
  const auto& L = llt.matrixLLT();
  for (int i = 0; i < Q0.rows(); ++i) ld += std::log(L(i, i));
  return 2.0 * ld;
}
}  // namespace detail

/// Log density of one step [mu(t) | mu(t-1), W, params]. Both coordinates
/// share the kernel, so
///   -n log(2 pi) - n log sigma^2 + log det Q0(t) - qf / (2 sigma^2).
inline double step_log_density(const Eigen::MatrixX2d& mu_prev,
                               const Eigen::MatrixX2d& mu_now,
                               const DynamicNetwork& W, int t, const ModelParams& p,
                               EgoMeanConvention conv = EgoMeanConvention::previous_slice) {
  const int n = static_cast<int>(mu_prev.rows());
  const Eigen::MatrixX2d mean = joint_step_mean(mu_prev, W, t, p, conv);
  const Eigen::MatrixXd Q0 = build_precision_kernel(W, t, p.alpha, p.c);
  Eigen::LLT<Eigen::MatrixXd> llt;
  const double logdet = detail::chol_logdet(Q0, llt);
  const double qf = detail::quad_form(Q0, mu_now - mean);
  return -n * kLog2Pi - n * std::log(p.sigma2) + logdet - qf / (2.0 * p.sigma2);
}

/// Log density of the whole path given the network, conditioning on mu(0).
inline double movement_log_density(const TrajectoryGrid& mu, const DynamicNetwork& W,
                                   const ModelParams& p,
                                   EgoMeanConvention conv = EgoMeanConvention::previous_slice) {
  mu.validate();
  if (W.n_individuals() != mu.n() || W.n_times() != mu.T())
    throw std::invalid_argument("movement_log_density: network and grid shapes differ");
  double ld = 0.0;
  for (int t = 1; t < mu.T(); ++t)
    ld += step_log_density(mu.pos[t - 1], mu.pos[t], W, t, p, conv);
  return ld;
}

/// Draw mu(t) | mu(t-1). Noise order is fixed: one (x, y) normal pair per
/// individual, in index order. u solves L' u = z so that u ~ N(0, Q0^{-1}),
/// and the step is mean + sigma u per coordinate.
inline Eigen::MatrixX2d simulate_step(const Eigen::MatrixX2d& mu_prev,
                                      const DynamicNetwork& W, int t,
                                      const ModelParams& p, Rng& rng,
                                      EgoMeanConvention conv = EgoMeanConvention::previous_slice) {
  const int n = static_cast<int>(mu_prev.rows());
  const Eigen::MatrixX2d mean = joint_step_mean(mu_prev, W, t, p, conv);
  const Eigen::MatrixXd Q0 = build_precision_kernel(W, t, p.alpha, p.c);
  Eigen::LLT<Eigen::MatrixXd> llt(Q0);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("simulate_step: precision kernel not positive definite");
  Eigen::MatrixX2d z(n, 2);
  for (int i = 0; i < n; ++i) {
    z(i, 0) = rng.normal();
    z(i, 1) = rng.normal();
  }
  const double sigma = std::sqrt(p.sigma2);
  Eigen::MatrixX2d out = mean;
  out.col(0) += sigma * llt.matrixU().solve(z.col(0));
  out.col(1) += sigma * llt.matrixU().solve(z.col(1));
  return out;
}

/// Forward-simulate positions (and the network unless one is supplied).
/// Draw order: the full network first, then steps t = 1..T-1.
inline std::pair<TrajectoryGrid, DynamicNetwork> simulate_paths(
    const ModelParams& p, int n, int T, const Eigen::MatrixX2d& mu_init, Rng& rng,
    const std::optional<DynamicNetwork>& W_given = std::nullopt,
    EgoMeanConvention conv = EgoMeanConvention::previous_slice, double time_step = 1.0,
    double start_time = 0.0) {
  p.validate();
  if (T < 2) throw std::invalid_argument("simulate_paths: need T >= 2");
  if (mu_init.rows() != n)
    throw std::invalid_argument("simulate_paths: mu_init must have n rows");
  if (W_given && (W_given->n_individuals() != n || W_given->n_times() != T))
    throw std::invalid_argument("simulate_paths: supplied network has wrong shape");
  DynamicNetwork W = W_given ? *W_given : simulate_network(p.p1, p.phi, n, T, rng);
  TrajectoryGrid grid;
  grid.time_step = time_step;
  grid.start_time = start_time;
  grid.pos.reserve(T);
  grid.pos.push_back(mu_init);
  for (int t = 1; t < T; ++t)
    grid.pos.push_back(simulate_step(grid.pos[t - 1], W, t, p, rng, conv));
  return {std::move(grid), std::move(W)};
}

}  // namespace movenet
