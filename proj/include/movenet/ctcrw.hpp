#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "movenet/observations.hpp"
#include "movenet/rng.hpp"

namespace movenet {

/// Continuous-time correlated random walk: per coordinate the state is
/// (position, velocity) with velocity an Ornstein-Uhlenbeck process,
///   d nu = -theta nu dt + sigma_v dB,    d xi = nu dt.
/// theta > 0 is the velocity reversion rate, sigma_v2 the diffusion variance.
struct CtcrwParams {
  double theta = 1.0;
  double sigma_v2 = 1.0;

  void validate() const {
    if (!(theta > 0.0)) throw std::domain_error("CtcrwParams: theta must be > 0");
    if (!(sigma_v2 >= 0.0))
      throw std::domain_error("CtcrwParams: sigma_v2 must be >= 0");
  }
};

struct OuTransition {
  Eigen::Matrix2d A;
  Eigen::Matrix2d Q;
};

/// Exact discretization of the (position, velocity) pair over a step dt.
/// Small theta*dt uses a series; the limit is integrated Brownian motion.
inline OuTransition ou_transition(double theta, double sigma_v2, double dt) {
  if (!(theta > 0.0)) throw std::domain_error("ou_transition: theta must be > 0");
  if (!(sigma_v2 >= 0.0)) throw std::domain_error("ou_transition: sigma_v2 must be >= 0");
  if (!(dt >= 0.0)) throw std::invalid_argument("ou_transition: dt must be >= 0");
  OuTransition out;
  if (dt == 0.0) {
    out.A = Eigen::Matrix2d::Identity();
    out.Q = Eigen::Matrix2d::Zero();
    return out;
  }
  const double a = theta * dt;
  const double e1 = -std::expm1(-a);        // 1 - exp(-a)
  const double e2 = -std::expm1(-2.0 * a);  // 1 - exp(-2a)
  out.A << 1.0, e1 / theta, 0.0, 1.0 - e1;
  // g(a) = a - 2(1-e^-a) + (1-e^-2a)/2, the position-variance kernel
  double g;
  if (a < 1e-3) {
    g = a * a * a * (1.0 / 3.0 - a / 4.0 + 7.0 * a * a / 60.0);
  } else {
    g = a - 2.0 * e1 + 0.5 * e2;
  }
  const double q11 = sigma_v2 * g / (theta * theta * theta);
  const double q12 = sigma_v2 * e1 * e1 / (2.0 * theta * theta);
  const double q22 = sigma_v2 * e2 / (2.0 * theta);
  out.Q << q11, q12, q12, q22;
  return out;
}

namespace detail {

struct Event {
  double time;
  int obs_idx;  // -1 when the event is a pure grid point
};

// Merge observation and grid times into one strictly increasing event list.
// Times equal within tolerance collapse into a single event.
inline std::vector<Event> merge_events(const Track& track,
                                       const std::vector<double>& grid,
                                       std::vector<int>* grid_pos) {
  const double span = std::max(1.0, std::abs(track.time.back() - track.time.front()));
  const double tol = 1e-9 * span;
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (!(grid[g] > grid[g - 1]))
      throw std::invalid_argument("ctcrw: grid times must be strictly increasing");
  if (!grid.empty() &&
      (grid.front() < track.time.front() - tol || grid.back() > track.time.back() + tol))
    throw std::invalid_argument(
        "ctcrw: grid extends outside the observed span of track '" + track.id + "'");

  std::vector<Event> ev;
  ev.reserve(grid.size() + track.time.size());
  if (grid_pos) grid_pos->assign(grid.size(), -1);
  std::size_t io = 0, ig = 0;
  while (io < track.time.size() || ig < grid.size()) {
    const bool take_obs =
        ig >= grid.size() ||
        (io < track.time.size() && track.time[io] <= grid[ig] + tol);
    if (take_obs) {
      ev.push_back({track.time[io], static_cast<int>(io)});
      if (ig < grid.size() && std::abs(grid[ig] - track.time[io]) <= tol) {
        if (grid_pos) (*grid_pos)[ig] = static_cast<int>(ev.size()) - 1;
        ++ig;
      }
      ++io;
    } else {
      ev.push_back({grid[ig], -1});
      if (grid_pos) (*grid_pos)[ig] = static_cast<int>(ev.size()) - 1;
      ++ig;
    }
  }
  return ev;
}

// 2x2 PSD pseudo-inverse; eigenvalues below tol are treated as exact zeros.
inline Eigen::Matrix2d psd_pinv(const Eigen::Matrix2d& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(M);
  const Eigen::Vector2d ev = es.eigenvalues();
  const double tol = 1e-13 * std::max(1.0, std::max(std::abs(ev(0)), std::abs(ev(1))));
  Eigen::Vector2d inv;
  for (int k = 0; k < 2; ++k) inv(k) = ev(k) > tol ? 1.0 / ev(k) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

// 2x2 PSD square root with negative eigenvalues clamped to zero.
inline Eigen::Matrix2d psd_sqrt(const Eigen::Matrix2d& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(M);
  Eigen::Vector2d ev = es.eigenvalues();
  for (int k = 0; k < 2; ++k) ev(k) = ev(k) > 0.0 ? std::sqrt(ev(k)) : 0.0;
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

// Forward Kalman pass over the merged event timeline. The x and y coordinates
// share the transition and measurement variances, hence one covariance
// recursion serves both coordinate means.
struct FilterStore {
  std::vector<Event> events;
  std::vector<int> grid_pos;
  std::vector<Eigen::Vector2d> mx_pred, my_pred, mx_filt, my_filt;
  std::vector<Eigen::Matrix2d> P_pred, P_filt, A_in;  // A_in[k]: transition into k
  double loglik = 0.0;
};

inline FilterStore run_filter(const CtcrwParams& par, const Track& track,
                              const std::vector<double>& grid, double diffuse_var) {
  par.validate();
  track.validate();
  FilterStore fs;
  fs.events = merge_events(track, grid, &fs.grid_pos);
  const int N = static_cast<int>(fs.events.size());
  fs.mx_pred.resize(N);
  fs.my_pred.resize(N);
  fs.mx_filt.resize(N);
  fs.my_filt.resize(N);
  fs.P_pred.resize(N);
  fs.P_filt.resize(N);
  fs.A_in.resize(N);

  constexpr double log2pi = 1.8378770664093454835606594728112;
  const double vel_var = par.sigma_v2 > 0.0 ? par.sigma_v2 / (2.0 * par.theta) : 0.0;

  for (int k = 0; k < N; ++k) {
    if (k == 0) {
      // the first event is always the first observation; the prior is diffuse
      // in position (centered on that observation) and stationary in velocity
      fs.A_in[0] = Eigen::Matrix2d::Identity();
      fs.mx_pred[0] = Eigen::Vector2d(track.x[0], 0.0);
      fs.my_pred[0] = Eigen::Vector2d(track.y[0], 0.0);
      fs.P_pred[0] = Eigen::Vector2d(diffuse_var, vel_var).asDiagonal();
    } else {
      const double dt = fs.events[k].time - fs.events[k - 1].time;
      const OuTransition tr = ou_transition(par.theta, par.sigma_v2, dt);
      fs.A_in[k] = tr.A;
      fs.mx_pred[k] = tr.A * fs.mx_filt[k - 1];
      fs.my_pred[k] = tr.A * fs.my_filt[k - 1];
      Eigen::Matrix2d P = tr.A * fs.P_filt[k - 1] * tr.A.transpose() + tr.Q;
      fs.P_pred[k] = 0.5 * (P + P.transpose());
    }

    const int io = fs.events[k].obs_idx;
    if (io >= 0) {
      const double R = track.error_sd[io] * track.error_sd[io];
      const double F = fs.P_pred[k](0, 0) + R;
      if (!(F > 0.0)) {
        // a fully deterministic state can only absorb a redundant exact fix
        const double vx0 = track.x[io] - fs.mx_pred[k](0);
        const double vy0 = track.y[io] - fs.my_pred[k](0);
        if (std::abs(vx0) > 1e-8 || std::abs(vy0) > 1e-8)
          throw std::runtime_error(
              "ctcrw filter: exact observation contradicts a deterministic state");
        fs.mx_filt[k] = fs.mx_pred[k];
        fs.my_filt[k] = fs.my_pred[k];
        fs.P_filt[k] = fs.P_pred[k];
        continue;
      }
      const Eigen::Vector2d K = fs.P_pred[k].col(0) / F;
      const double vx = track.x[io] - fs.mx_pred[k](0);
      const double vy = track.y[io] - fs.my_pred[k](0);
      fs.mx_filt[k] = fs.mx_pred[k] + K * vx;
      fs.my_filt[k] = fs.my_pred[k] + K * vy;
      Eigen::Matrix2d IKH = Eigen::Matrix2d::Identity();
      IKH(0, 0) -= K(0);
      IKH(1, 0) -= K(1);
      Eigen::Matrix2d P =
          IKH * fs.P_pred[k] * IKH.transpose() + R * K * K.transpose();
      fs.P_filt[k] = 0.5 * (P + P.transpose());
      fs.loglik += -log2pi - std::log(F) - (vx * vx + vy * vy) / (2.0 * F);
    } else {
      fs.mx_filt[k] = fs.mx_pred[k];
      fs.my_filt[k] = fs.my_pred[k];
      fs.P_filt[k] = fs.P_pred[k];
    }
  }
  return fs;
}

}  // namespace detail

/// Marginal log likelihood of one track under the CTCRW observation model.
inline double ctcrw_loglik(const CtcrwParams& par, const Track& track,
                           double diffuse_var = 1e8) {
  return detail::run_filter(par, track, {}, diffuse_var).loglik;
}

struct KalmanEstimate {
  double time = 0.0;
  Eigen::Vector2d mean_x = Eigen::Vector2d::Zero();
  Eigen::Vector2d mean_y = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();  // per coordinate, shared by x and y
};

struct SmootherResult {
  std::vector<double> times;   // merged event times
  std::vector<int> grid_pos;   // event index of each requested grid time
  std::vector<KalmanEstimate> states;
  double loglik = 0.0;
};

/// Rauch-Tung-Striebel smoother over the merged observation/grid timeline.
inline SmootherResult ctcrw_smooth(const CtcrwParams& par, const Track& track,
                                   const std::vector<double>& grid,
                                   double diffuse_var = 1e8) {
  detail::FilterStore fs = detail::run_filter(par, track, grid, diffuse_var);
  const int N = static_cast<int>(fs.events.size());
  SmootherResult out;
  out.loglik = fs.loglik;
  out.grid_pos = fs.grid_pos;
  out.times.resize(N);
  out.states.resize(N);
  std::vector<Eigen::Vector2d> msx(N), msy(N);
  std::vector<Eigen::Matrix2d> Ps(N);
  msx[N - 1] = fs.mx_filt[N - 1];
  msy[N - 1] = fs.my_filt[N - 1];
  Ps[N - 1] = fs.P_filt[N - 1];
  for (int k = N - 2; k >= 0; --k) {
    const Eigen::Matrix2d G =
        fs.P_filt[k] * fs.A_in[k + 1].transpose() * detail::psd_pinv(fs.P_pred[k + 1]);
    msx[k] = fs.mx_filt[k] + G * (msx[k + 1] - fs.mx_pred[k + 1]);
    msy[k] = fs.my_filt[k] + G * (msy[k + 1] - fs.my_pred[k + 1]);
    Eigen::Matrix2d P =
        fs.P_filt[k] + G * (Ps[k + 1] - fs.P_pred[k + 1]) * G.transpose();
    Ps[k] = 0.5 * (P + P.transpose());
  }
  for (int k = 0; k < N; ++k) {
    out.times[k] = fs.events[k].time;
    out.states[k] = {fs.events[k].time, msx[k], msy[k], Ps[k]};
  }
  return out;
}

/// One posterior draw of the positions at the grid times, by forward filtering
/// and backward sampling over the event timeline. Draw order is fixed: at each
/// event, two normals for x then two for y, moving backward in time.
inline Eigen::MatrixX2d ctcrw_draw_path(const CtcrwParams& par, const Track& track,
                                        const std::vector<double>& grid, Rng& rng,
                                        double diffuse_var = 1e8) {
  if (grid.empty()) throw std::invalid_argument("ctcrw_draw_path: empty grid");
  detail::FilterStore fs = detail::run_filter(par, track, grid, diffuse_var);
  const int N = static_cast<int>(fs.events.size());
  std::vector<Eigen::Vector2d> sx(N), sy(N);
  auto draw_pair = [&rng](const Eigen::Vector2d& mx, const Eigen::Vector2d& my,
                          const Eigen::Matrix2d& cov, Eigen::Vector2d& outx,
                          Eigen::Vector2d& outy) {
    const Eigen::Matrix2d S = detail::psd_sqrt(cov);
    const Eigen::Vector2d zx(rng.normal(), rng.normal());
    const Eigen::Vector2d zy(rng.normal(), rng.normal());
    outx = mx + S * zx;
    outy = my + S * zy;
  };
  draw_pair(fs.mx_filt[N - 1], fs.my_filt[N - 1], fs.P_filt[N - 1], sx[N - 1], sy[N - 1]);
  for (int k = N - 2; k >= 0; --k) {
    const Eigen::Matrix2d G =
        fs.P_filt[k] * fs.A_in[k + 1].transpose() * detail::psd_pinv(fs.P_pred[k + 1]);
    const Eigen::Vector2d cmx = fs.mx_filt[k] + G * (sx[k + 1] - fs.mx_pred[k + 1]);
    const Eigen::Vector2d cmy = fs.my_filt[k] + G * (sy[k + 1] - fs.my_pred[k + 1]);
    Eigen::Matrix2d C = fs.P_filt[k] - G * fs.P_pred[k + 1] * G.transpose();
    C = 0.5 * (C + C.transpose());
    draw_pair(cmx, cmy, C, sx[k], sy[k]);
  }
  Eigen::MatrixX2d out(static_cast<int>(grid.size()), 2);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const int k = fs.grid_pos[g];
    out(static_cast<int>(g), 0) = sx[k](0);
    out(static_cast<int>(g), 1) = sy[k](0);
  }
  return out;
}

/// Fitted movement model of one track plus fit diagnostics.
struct CtcrwModel {
  CtcrwParams params;
  double loglik = std::numeric_limits<double>::quiet_NaN();
  bool low_information = false;
};

namespace detail {

// Nelder-Mead on R^d. Returns the best vertex; stops on f-spread or max_iter.
inline Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x0, double step, int max_iter,
                                   double* fbest) {
  const int d = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> X(d + 1, x0);
  std::vector<double> F(d + 1);
  for (int k = 1; k <= d; ++k) X[k](k - 1) += step;
  for (int k = 0; k <= d; ++k) F[k] = f(X[k]);
  for (int it = 0; it < max_iter; ++it) {
    // order ascending
    for (int a = 0; a <= d; ++a)
      for (int b = a + 1; b <= d; ++b)
        if (F[b] < F[a]) {
          std::swap(F[a], F[b]);
          std::swap(X[a], X[b]);
        }
    if (std::abs(F[d] - F[0]) < 1e-10 * (1.0 + std::abs(F[0]))) break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int k = 0; k < d; ++k) centroid += X[k];
    centroid /= d;
    const Eigen::VectorXd xr = centroid + (centroid - X[d]);
    const double fr = f(xr);
    if (fr < F[0]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - X[d]);
      const double fe = f(xe);
      if (fe < fr) {
        X[d] = xe;
        F[d] = fe;
      } else {
        X[d] = xr;
        F[d] = fr;
      }
    } else if (fr < F[d - 1]) {
      X[d] = xr;
      F[d] = fr;
    } else {
      const Eigen::VectorXd xc = centroid + 0.5 * (X[d] - centroid);
      const double fc = f(xc);
      if (fc < F[d]) {
        X[d] = xc;
        F[d] = fc;
      } else {
        for (int k = 1; k <= d; ++k) {
          X[k] = X[0] + 0.5 * (X[k] - X[0]);
          F[k] = f(X[k]);
        }
      }
    }
  }
  int best = 0;
  for (int k = 1; k <= d; ++k)
    if (F[k] < F[best]) best = k;
  if (fbest) *fbest = F[best];
  return X[best];
}

}  // namespace detail

/// Maximum likelihood fit of (theta, sigma_v2) for one track, multi-start
/// Nelder-Mead on the log scale. Fewer than four observations set the
/// low_information flag; the fit still runs.
inline CtcrwModel fit_ctcrw(const Track& track, double diffuse_var = 1e8) {
  track.validate();
  if (track.size() < 2)
    throw std::invalid_argument("fit_ctcrw: need at least two observations");

  const int m = track.size();
  const double mean_dt = (track.time.back() - track.time.front()) / (m - 1);
  double vel2 = 0.0;
  for (int k = 1; k < m; ++k) {
    const double dt = track.time[k] - track.time[k - 1];
    const double dx = track.x[k] - track.x[k - 1];
    const double dy = track.y[k] - track.y[k - 1];
    vel2 += (dx * dx + dy * dy) / (2.0 * dt * dt);
  }
  vel2 = std::max(vel2 / (m - 1), 1e-8);
  const double theta0 = 1.0 / mean_dt;
  const double s0 = 2.0 * theta0 * vel2;

  auto objective = [&](const Eigen::VectorXd& u) -> double {
    const double lt = std::clamp(u(0), -30.0, 30.0);
    const double ls = std::clamp(u(1), -30.0, 30.0);
    CtcrwParams par{std::exp(lt), std::exp(ls)};
    double ll;
    try {
      ll = ctcrw_loglik(par, track, diffuse_var);
    } catch (const std::exception&) {
      return 1e300;
    }
    return std::isfinite(ll) ? -ll : 1e300;
  };

  const std::vector<Eigen::Vector2d> starts = {
      {std::log(theta0), std::log(s0)},
      {std::log(theta0 / 10.0), std::log(s0)},
      {std::log(theta0 * 10.0), std::log(10.0 * s0)}};

  double fbest = std::numeric_limits<double>::infinity();
  Eigen::VectorXd ubest;
  for (const auto& s : starts) {
    double fs = 0.0;
    const Eigen::VectorXd u = detail::nelder_mead(objective, s, 0.7, 250, &fs);
    if (fs < fbest) {
      fbest = fs;
      ubest = u;
    }
  }
  if (!(fbest < 1e299)) {
    std::ostringstream msg;
    msg << "fit_ctcrw: no finite likelihood found for track '" << track.id
        << "'; starts were";
    for (const auto& s : starts)
      msg << " (theta=" << std::exp(s(0)) << ", sigma_v2=" << std::exp(s(1)) << ")";
    throw std::runtime_error(msg.str());
  }
  CtcrwModel model;
  model.params.theta = std::exp(std::clamp(ubest(0), -30.0, 30.0));
  model.params.sigma_v2 = std::exp(std::clamp(ubest(1), -30.0, 30.0));
  model.loglik = -fbest;
  model.low_information = m < 4;
  return model;
}

}  // namespace movenet
