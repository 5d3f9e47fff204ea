#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "movenet/mcmc.hpp"

namespace movenet {

/// Linear-interpolation sample quantile (the convention where h = (n-1)q and
/// the result interpolates between order statistics floor(h) and floor(h)+1).
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q must lie in [0, 1]");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

struct IntervalSummary {
  double lower = 0.0, median = 0.0, upper = 0.0, mean = 0.0;
};

/// Equal-tailed credible interval plus median and mean of a chain.
inline IntervalSummary credible_interval(const std::vector<double>& chain,
                                         double level = 0.95) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("credible_interval: level must lie in (0, 1)");
  IntervalSummary s;
  const double tail = 0.5 * (1.0 - level);
  s.lower = quantile(chain, tail);
  s.median = quantile(chain, 0.5);
  s.upper = quantile(chain, 1.0 - tail);
  double m = 0.0;
  for (double x : chain) m += x;
  s.mean = m / static_cast<double>(chain.size());
  return s;
}

/// Posterior mean of one edge across time.
inline std::vector<double> edge_posterior_series(const PosteriorSamples& s, int i, int j) {
  if (i < 0 || i >= s.n || j < 0 || j >= s.n || i == j)
    throw std::out_of_range("edge_posterior_series: bad pair");
  std::vector<double> series;
  series.reserve(s.w_mean.size());
  for (const auto& m : s.w_mean) series.push_back(m(i, j));
  return series;
}

struct NetworkStats {
  double density = 0.0;
  std::vector<double> degree;
  double transitivity = 0.0;
};

/// Statistics of the graph obtained by keeping edges whose weight exceeds
/// `threshold` (strictly). Transitivity is 3 * triangles / wedges, zero on a
/// wedge-free graph.
inline NetworkStats network_statistics(const Eigen::MatrixXd& w, double threshold = 0.5) {
  const int n = static_cast<int>(w.rows());
  if (w.cols() != n || n < 2)
    throw std::invalid_argument("network_statistics: need a square matrix, n >= 2");
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (w(i, j) > threshold) a(i, j) = a(j, i) = 1;

  NetworkStats st;
  st.degree.resize(n);
  long edges = 0;
  for (int i = 0; i < n; ++i) {
    st.degree[i] = a.row(i).sum();
    edges += a.row(i).sum();
  }
  edges /= 2;
  st.density = static_cast<double>(edges) / (static_cast<double>(n) * (n - 1) / 2);

  long triangles = 0, wedges = 0;
  for (int i = 0; i < n; ++i) {
    const long d = a.row(i).sum();
    wedges += d * (d - 1) / 2;
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        if (a(i, j) && a(j, k) && a(i, k)) ++triangles;
  st.transitivity = wedges > 0 ? 3.0 * triangles / static_cast<double>(wedges) : 0.0;
  return st;
}

}  // namespace movenet
