#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace movenet {

/// Scalar parameters of the movement + network model.
///
/// alpha  - alignment strength; the GMRF precision is valid only for |alpha| < 1
/// beta   - attraction step length (distance per time step)
/// p1     - stationary edge probability of the dynamic network
/// phi    - temporal stability of the network, 0 = independence, ->1 = static
/// c      - effective ego-network size of an isolated individual (precision floor)
/// sigma2 - per-coordinate step variance scale
struct ModelParams {
  double alpha = 0.0;
  double beta = 0.0;
  double p1 = 0.2;
  double phi = 0.5;
  double c = 1.0;
  double sigma2 = 1.0;

  // Domain checks for forward-model inputs. The sampler relaxes beta to the
  // whole real line (its prior is a Gaussian centered at zero).
  void validate() const {
    if (!(alpha > -1.0 && alpha < 1.0))
      throw std::domain_error("ModelParams: alpha must lie in (-1, 1)");
    if (!(beta >= 0.0)) throw std::domain_error("ModelParams: beta must be >= 0");
    if (!(p1 > 0.0 && p1 < 1.0))
      throw std::domain_error("ModelParams: p1 must lie in (0, 1)");
    if (!(phi >= 0.0 && phi < 1.0))
      throw std::domain_error("ModelParams: phi must lie in [0, 1)");
    if (!(c > 0.0)) throw std::domain_error("ModelParams: c must be > 0");
    if (!(sigma2 > 0.0)) throw std::domain_error("ModelParams: sigma2 must be > 0");
  }
};

/// Binary symmetric edge indicators w_ij(t) with zero diagonal, for all pairs
/// and times. Symmetry and a zero diagonal are maintained by construction.
class DynamicNetwork {
 public:
  DynamicNetwork(int n, int T) : n_(n), T_(T) {
    if (n < 2) throw std::invalid_argument("DynamicNetwork: need n >= 2");
    if (T < 1) throw std::invalid_argument("DynamicNetwork: need T >= 1");
    w_.assign(static_cast<std::size_t>(n) * n * T, 0);
  }

  int n_individuals() const { return n_; }
  int n_times() const { return T_; }

  bool edge(int i, int j, int t) const {
    check(i, j, t);
    return w_[idx(i, j, t)] != 0;
  }

  void set_edge(int i, int j, int t, bool v) {
    check(i, j, t);
    if (i == j) throw std::invalid_argument("DynamicNetwork: no self edges");
    w_[idx(i, j, t)] = v ? 1 : 0;
    w_[idx(j, i, t)] = v ? 1 : 0;
  }

  /// Number of connections of individual i at time t.
  int degree(int i, int t) const {
    check(i, i, t);
    int d = 0;
    const std::uint8_t* row = &w_[idx(i, 0, t)];
    for (int j = 0; j < n_; ++j) d += row[j];
    return d;
  }

  bool operator==(const DynamicNetwork& o) const {
    return n_ == o.n_ && T_ == o.T_ && w_ == o.w_;
  }

 private:
  std::size_t idx(int i, int j, int t) const {
    return (static_cast<std::size_t>(t) * n_ + i) * n_ + j;
  }
  void check(int i, int j, int t) const {
    if (i < 0 || i >= n_ || j < 0 || j >= n_ || t < 0 || t >= T_)
      throw std::out_of_range("DynamicNetwork: index out of range");
  }

  int n_;
  int T_;
  std::vector<std::uint8_t> w_;
};

/// Positions of n individuals on a regular synchronized time grid.
/// pos[t] is an n x 2 matrix of planar coordinates (km by convention).
struct TrajectoryGrid {
  std::vector<Eigen::MatrixX2d> pos;
  double time_step = 1.0;
  double start_time = 0.0;
  std::vector<std::string> ids;

  int n() const { return pos.empty() ? 0 : static_cast<int>(pos.front().rows()); }
  int T() const { return static_cast<int>(pos.size()); }
  double time_at(int t) const { return start_time + t * time_step; }

  void validate() const {
    if (T() < 2) throw std::invalid_argument("TrajectoryGrid: need T >= 2");
    if (n() < 2) throw std::invalid_argument("TrajectoryGrid: need n >= 2");
    if (!(time_step > 0.0))
      throw std::invalid_argument("TrajectoryGrid: time_step must be > 0");
    if (!ids.empty() && static_cast<int>(ids.size()) != n())
      throw std::invalid_argument("TrajectoryGrid: ids size does not match n");
    for (const auto& slice : pos) {
      if (slice.rows() != n())
        throw std::invalid_argument("TrajectoryGrid: ragged position slices");
      if (!slice.allFinite())
        throw std::invalid_argument("TrajectoryGrid: non-finite coordinate");
    }
  }
};

/// Which network slice defines the ego mean entering the attraction term of
/// the step from t-1 to t: the slice at t-1 (default) or the slice at t.
enum class EgoMeanConvention { previous_slice, current_slice };

}  // namespace movenet
