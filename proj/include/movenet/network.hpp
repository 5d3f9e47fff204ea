#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "movenet/rng.hpp"
#include "movenet/types.hpp"

namespace movenet {

/// One-step and initial edge probabilities of the stationary two-state chain
/// parameterized by (p1, phi):
///   P(w=1 | prev=0) = (1 - phi) p1
///   P(w=1 | prev=1) = 1 - (1 - phi)(1 - p1)
/// phi = 0 gives temporal independence, phi -> 1 a frozen network, and p1 is
/// the stationary probability for every phi in [0, 1).
struct EdgeTransition {
  double p1 = 0.0;
  double phi = 0.0;
  double p_1_given_0 = 0.0;
  double p_1_given_1 = 0.0;
  // log probabilities, safe for phi near 1 and p1 near 0 or 1;
  // log_xy = log P(next = x | prev = y)
  double log_init1 = 0.0, log_init0 = 0.0;
  double log_10 = 0.0, log_00 = 0.0;
  double log_11 = 0.0, log_01 = 0.0;
};

inline EdgeTransition transition_probs(double p1, double phi) {
  if (!(p1 > 0.0 && p1 < 1.0))
    throw std::domain_error("transition_probs: p1 must lie in (0, 1)");
  if (!(phi >= 0.0 && phi < 1.0))
    throw std::domain_error("transition_probs: phi must lie in [0, 1)");
  EdgeTransition tp;
  tp.p1 = p1;
  tp.phi = phi;
  tp.p_1_given_0 = (1.0 - phi) * p1;
  tp.p_1_given_1 = 1.0 - (1.0 - phi) * (1.0 - p1);
  tp.log_init1 = std::log(p1);
  tp.log_init0 = std::log1p(-p1);
  tp.log_10 = std::log1p(-phi) + std::log(p1);
  tp.log_00 = std::log1p(-(1.0 - phi) * p1);
  tp.log_11 = std::log1p(-(1.0 - phi) * (1.0 - p1));
  tp.log_01 = std::log1p(-phi) + std::log1p(-p1);
  return tp;
}

/// Draw a full network trajectory. Pair-major order: for each pair (i<j) in
/// lexicographic order the whole chain t = 0..T-1 is drawn before moving on.
inline DynamicNetwork simulate_network(double p1, double phi, int n, int T, Rng& rng) {
  const EdgeTransition tp = transition_probs(p1, phi);
  DynamicNetwork W(n, T);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      bool w = rng.bernoulli(tp.p1);
      W.set_edge(i, j, 0, w);
      for (int t = 1; t < T; ++t) {
        w = rng.bernoulli(w ? tp.p_1_given_1 : tp.p_1_given_0);
        W.set_edge(i, j, t, w);
      }
    }
  }
  return W;
}

/// Sufficient statistics of a network trajectory under the pairwise chain:
/// transition counts over t >= 1 plus initial-state counts.
struct EdgeCounts {
  std::int64_t n00 = 0, n01 = 0, n10 = 0, n11 = 0;  // prev -> next
  std::int64_t n1_init = 0, n0_init = 0;
};

inline EdgeCounts edge_counts(const DynamicNetwork& W) {
  EdgeCounts cnt;
  const int n = W.n_individuals(), T = W.n_times();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      bool prev = W.edge(i, j, 0);
      (prev ? cnt.n1_init : cnt.n0_init) += 1;
      for (int t = 1; t < T; ++t) {
        const bool cur = W.edge(i, j, t);
        if (prev) {
          (cur ? cnt.n11 : cnt.n10) += 1;
        } else {
          (cur ? cnt.n01 : cnt.n00) += 1;
        }
        prev = cur;
      }
    }
  }
  return cnt;
}

/// Log probability mass of a full network trajectory given (p1, phi).
/// Returns -inf when the trajectory contains a transition that is impossible
/// under the parameters; a zero count never contributes, even if its log
/// probability is -inf.
inline double network_log_mass(const DynamicNetwork& W, double p1, double phi) {
  const EdgeTransition tp = transition_probs(p1, phi);
  const EdgeCounts cnt = edge_counts(W);
  auto term = [](std::int64_t k, double logp) -> double {
    if (k == 0) return 0.0;
    if (logp == -std::numeric_limits<double>::infinity())
      return -std::numeric_limits<double>::infinity();
    return static_cast<double>(k) * logp;
  };
  return term(cnt.n1_init, tp.log_init1) + term(cnt.n0_init, tp.log_init0) +
         term(cnt.n01, tp.log_10) + term(cnt.n00, tp.log_00) +
         term(cnt.n11, tp.log_11) + term(cnt.n10, tp.log_01);
}

inline double network_log_mass(const EdgeCounts& cnt, const EdgeTransition& tp) {
  auto term = [](std::int64_t k, double logp) -> double {
    if (k == 0) return 0.0;
    if (logp == -std::numeric_limits<double>::infinity())
      return -std::numeric_limits<double>::infinity();
    return static_cast<double>(k) * logp;
  };
  return term(cnt.n1_init, tp.log_init1) + term(cnt.n0_init, tp.log_init0) +
         term(cnt.n01, tp.log_10) + term(cnt.n00, tp.log_00) +
         term(cnt.n11, tp.log_11) + term(cnt.n10, tp.log_01);
}

/// Log mass terms of the chain of a single pair that involve w_ij(t) = v,
/// holding the neighboring slices of W fixed: the initial or incoming
/// transition term plus the outgoing transition term when t+1 exists.
inline double edge_prior_log_term(bool v, const DynamicNetwork& W, int i, int j, int t,
                                  const EdgeTransition& tp) {
  double lp = 0.0;
  if (t == 0) {
    lp += v ? tp.log_init1 : tp.log_init0;
  } else {
    const bool prev = W.edge(i, j, t - 1);
    lp += prev ? (v ? tp.log_11 : tp.log_01) : (v ? tp.log_10 : tp.log_00);
  }
  if (t + 1 < W.n_times()) {
    const bool next = W.edge(i, j, t + 1);
    lp += v ? (next ? tp.log_11 : tp.log_01) : (next ? tp.log_10 : tp.log_00);
  }
  return lp;
}

}  // namespace movenet
