#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace movenet {

/// Effective sample size via the initial-positive-sequence estimator. Pairs
/// of autocovariances Gamma_m = gamma(2m) + gamma(2m+1) are summed until the
/// first nonpositive pair; for a reversible chain every Gamma_m is positive
/// in expectation, so the truncation point is where noise takes over. A
/// constant chain has ESS 0 by convention.
inline double effective_sample_size(const std::vector<double>& chain) {
  const std::size_t N = chain.size();
  if (N < 10) throw std::invalid_argument("effective_sample_size: need at least 10 samples");
  double mean = 0.0;
  for (double x : chain) mean += x;
  mean /= static_cast<double>(N);
  auto gamma = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < N; ++t)
      s += (chain[t] - mean) * (chain[t + lag] - mean);
    return s / static_cast<double>(N);
  };
  const double g0 = gamma(0);
  if (!(g0 > 0.0)) return 0.0;
  double asym_var = -g0;
  for (std::size_t m = 0; 2 * m + 1 < N; ++m) {
    const double pair = gamma(2 * m) + gamma(2 * m + 1);
    if (pair <= 0.0) break;
    asym_var += 2.0 * pair;
  }
  if (!(asym_var > 0.0)) return static_cast<double>(N);
  return static_cast<double>(N) * g0 / asym_var;
}

}  // namespace movenet
