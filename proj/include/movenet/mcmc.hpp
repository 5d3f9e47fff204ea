#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "movenet/imputation.hpp"
#include "movenet/movement.hpp"
#include "movenet/network.hpp"
#include "movenet/rng.hpp"
#include "movenet/types.hpp"

namespace movenet {

enum class ScalarParam { alpha, beta, c };

/// Hyperparameters. Inverse gamma is parameterized so that the density is
/// proportional to x^(-shape-1) exp(-rate/x). alpha and p1 carry flat priors
/// on their domains.
struct Priors {
  double beta_mean = 0.0;
  double beta_var = 1000.0;
  double phi_a = 17.2;
  double phi_b = 1.5;
  double c_shape = 1.5;
  double c_rate = 3.5;
  double sigma2_shape = 0.1;
  double sigma2_rate = 0.001;

  void validate() const {
    if (!(beta_var > 0.0) || !(phi_a > 0.0) || !(phi_b > 0.0) || !(c_shape > 0.0) ||
        !(c_rate > 0.0) || !(sigma2_shape > 0.0) || !(sigma2_rate > 0.0))
      throw std::domain_error("Priors: hyperparameters must be positive");
  }
};

/// Random-walk proposal scales on the transformed parameter scales.
struct MhScales {
  double alpha = 0.5;
  double beta = 0.1;
  double c = 0.5;
  double network = 0.3;
};

struct SamplerConfig {
  int n_iter = 20000;
  int burn_in = 5000;
  int thin = 5;
  std::uint64_t seed = 1;
  MhScales scales;
  Priors priors;
  int adapt_window = 50;
  double target_accept = 0.44;
  EgoMeanConvention convention = EgoMeanConvention::previous_slice;
  bool exact_beta_update = false;
  bool random_scan_edges = false;

  void validate() const {
    if (n_iter < 1) throw std::invalid_argument("SamplerConfig: n_iter must be >= 1");
    if (burn_in < 0 || burn_in >= n_iter)
      throw std::invalid_argument("SamplerConfig: need 0 <= burn_in < n_iter");
    if (thin < 1) throw std::invalid_argument("SamplerConfig: thin must be >= 1");
    if (adapt_window < 1)
      throw std::invalid_argument("SamplerConfig: adapt_window must be >= 1");
    if (!(target_accept > 0.0 && target_accept < 1.0))
      throw std::invalid_argument("SamplerConfig: target_accept must lie in (0, 1)");
    if (!(scales.alpha > 0.0 && scales.beta > 0.0 && scales.c > 0.0 &&
          scales.network > 0.0))
      throw std::invalid_argument("SamplerConfig: proposal scales must be positive");
    priors.validate();
  }
};

/// Posterior output: thinned scalar chains, running edge moments over all
/// post-burn-in iterations, and sampler diagnostics.
struct PosteriorSamples {
  std::vector<double> alpha, beta, p1, phi, c, sigma2;
  std::vector<int> imputation_index;
  std::vector<Eigen::MatrixXd> w_mean, w_sd;  // per time slice, n x n
  std::map<std::string, double> acceptance;
  std::map<std::string, double> adapted_scale;
  std::vector<std::string> ids;
  int n = 0;
  int T = 0;

  static const std::vector<std::string>& scalar_names() {
    static const std::vector<std::string> names = {"alpha", "beta", "p1",
                                                   "phi",   "c",    "sigma2"};
    return names;
  }

  const std::vector<double>& chain(const std::string& name) const {
    if (name == "alpha") return alpha;
    if (name == "beta") return beta;
    if (name == "p1") return p1;
    if (name == "phi") return phi;
    if (name == "c") return c;
    if (name == "sigma2") return sigma2;
    throw std::out_of_range("PosteriorSamples: unknown parameter '" + name + "'");
  }
};

namespace detail {

inline double log_inv_gamma_kernel(double x, double shape, double rate) {
  return -(shape + 1.0) * std::log(x) - rate / x;
}

inline double log_beta_kernel(double x, double a, double b) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x);
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }
inline double inv_logit(double u) { return 1.0 / (1.0 + std::exp(-u)); }

}  // namespace detail

/// One random-walk Metropolis step on an arbitrary log target; returns
/// whether the proposal was accepted.
template <class LogTarget>
bool mh_step(double& x, double scale, LogTarget&& log_target, Rng& rng) {
  const double prop = x + scale * rng.normal();
  if (std::log(rng.uniform_pos()) < log_target(prop) - log_target(x)) {
    x = prop;
    return true;
  }
  return false;
}

/// Exact full conditional P(w_ij(t) = 1 | everything else), evaluated from
/// scratch. The movement term touches only the step densities whose kernel or
/// attraction slice involves w(t); the network term is the pair's local chain
/// mass. The sampler's incremental path must match this function.
inline double edge_full_conditional(const TrajectoryGrid& mu, const DynamicNetwork& W,
                                    const ModelParams& p, int i, int j, int t,
                                    EgoMeanConvention conv = EgoMeanConvention::previous_slice) {
  if (i == j) throw std::invalid_argument("edge_full_conditional: i and j must differ");
  const int T = W.n_times();
  if (t < 0 || t >= T) throw std::out_of_range("edge_full_conditional: bad time index");
  const EdgeTransition tp = transition_probs(p.p1, p.phi);
  double s1 = edge_prior_log_term(true, W, i, j, t, tp);
  double s0 = edge_prior_log_term(false, W, i, j, t, tp);
  DynamicNetwork W1 = W;
  W1.set_edge(i, j, t, true);
  DynamicNetwork W0 = W;
  W0.set_edge(i, j, t, false);
  std::vector<int> slices;
  if (t >= 1) slices.push_back(t);
  if (conv == EgoMeanConvention::previous_slice && t + 1 <= T - 1)
    slices.push_back(t + 1);
  for (int s : slices) {
    s1 += step_log_density(mu.pos[s - 1], mu.pos[s], W1, s, p, conv);
    s0 += step_log_density(mu.pos[s - 1], mu.pos[s], W0, s, p, conv);
  }
  return 1.0 / (1.0 + std::exp(s0 - s1));
}

/// Blocked Gibbs/Metropolis sampler over (W, alpha, beta, c, p1, phi, sigma2)
/// with the trajectory drawn uniformly from an imputation bank each iteration.
///
/// Per modeled transition t the sampler caches the precision kernel Q0(t), its
/// log determinant, the conditional step mean, and the quadratic form, all
/// free of sigma2. Updates touch only the slices their parameter enters.
class Sampler {
 public:
  // The sampler borrows the bank; it must outlive the sampler.
  Sampler(ImputationBank&& bank, const SamplerConfig& cfg) = delete;

  Sampler(const ImputationBank& bank, const SamplerConfig& cfg)
      : bank_(&bank), cfg_(cfg), W_(checked_front(bank).n(), checked_front(bank).T()) {
    cfg_.validate();
    bank.validate();
    n_ = bank.draws.front().n();
    T_ = bank.draws.front().T();
    if (T_ < 2) throw std::invalid_argument("Sampler: need T >= 2");
    mu_ = &bank_->draws.front();

    par_.alpha = 0.0;
    par_.beta = 0.0;
    par_.c = 1.0;
    par_.p1 = 0.2;
    par_.phi = 0.5;
    par_.sigma2 = initial_sigma2();

    scale_alpha_ = cfg_.scales.alpha;
    scale_beta_ = cfg_.scales.beta;
    scale_c_ = cfg_.scales.c;
    scale_net_ = cfg_.scales.network;
    tp_ = transition_probs(par_.p1, par_.phi);

    Q0_.assign(T_, Eigen::MatrixXd());
    logdet_.assign(T_, 0.0);
    qf_.assign(T_, 0.0);
    mean_.assign(T_, Eigen::MatrixX2d());
    cand_Q0_.resize(n_, n_);
    cand_logdet_.assign(T_, 0.0);
    cand_qf_.assign(T_, 0.0);
    cand_Q0_all_.assign(T_, Eigen::MatrixXd());
    cand_mean_.assign(T_, Eigen::MatrixX2d());
    refresh_all();
  }

  const ModelParams& params() const { return par_; }
  const DynamicNetwork& network() const { return W_; }
  int trajectory_index() const { return cur_draw_; }
  const TrajectoryGrid& trajectory() const { return *mu_; }

  void set_params(const ModelParams& p) {
    if (!(p.alpha > -1.0 && p.alpha < 1.0) || !(p.c > 0.0) || !(p.sigma2 > 0.0) ||
        !(p.p1 > 0.0 && p.p1 < 1.0) || !(p.phi >= 0.0 && p.phi < 1.0))
      throw std::domain_error("Sampler::set_params: parameter out of domain");
    par_ = p;
    tp_ = transition_probs(par_.p1, par_.phi);
    refresh_all();
  }

  void set_network(const DynamicNetwork& W) {
    if (W.n_individuals() != n_ || W.n_times() != T_)
      throw std::invalid_argument("Sampler::set_network: shape mismatch");
    W_ = W;
    refresh_all();
  }

  void set_trajectory(int bank_index) {
    if (bank_index < 0 || bank_index >= bank_->K())
      throw std::out_of_range("Sampler::set_trajectory: bad bank index");
    cur_draw_ = bank_index;
    mu_ = &bank_->draws[bank_index];
    for (int t = 1; t < T_; ++t) {
      rebuild_mean(t);
      rebuild_qf(t);
    }
  }

  /// Movement log density at the current state, composed from the cache.
  double movement_log_density_current() const {
    double s = 0.0;
    for (int t = 1; t < T_; ++t) s += logdet_[t] - qf_[t] / (2.0 * par_.sigma2);
    return s + (T_ - 1) * n_ * (-kLog2Pi - std::log(par_.sigma2));
  }

  /// P(w_ij(t) = 1 | rest) along the incremental path; no state change.
  double edge_probability(int i, int j, int t) {
    const EdgeScores es = edge_scores(i, j, t);
    return 1.0 / (1.0 + std::exp(es.score0 - es.score1));
  }

  void update_edge(int i, int j, int t, Rng& rng) {
    const EdgeScores es = edge_scores(i, j, t);
    const double p1cond = 1.0 / (1.0 + std::exp(es.score0 - es.score1));
    const bool newv = rng.uniform() < p1cond;
    if (newv != W_.edge(i, j, t)) commit_edge(i, j, t, newv, es);
  }

  /// One systematic scan over all pairs (lexicographic) and times (ascending),
  /// or as many random draws when random-scan is configured.
  void sweep_edges(Rng& rng) {
    if (cfg_.random_scan_edges) {
      const int npairs = n_ * (n_ - 1) / 2;
      const int visits = npairs * T_;
      for (int v = 0; v < visits; ++v) {
        const int pr = rng.uniform_int(npairs);
        const int t = rng.uniform_int(T_);
        int i = 0, j = 0, k = pr;
        for (i = 0; i < n_; ++i) {
          const int row = n_ - 1 - i;
          if (k < row) {
            j = i + 1 + k;
            break;
          }
          k -= row;
        }
        update_edge(i, j, t, rng);
      }
      return;
    }
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        for (int t = 0; t < T_; ++t) update_edge(i, j, t, rng);
  }

  /// Conjugate inverse gamma draw given the current quadratic forms.
  void update_sigma2(Rng& rng) {
    const double shape = cfg_.priors.sigma2_shape + n_ * (T_ - 1);
    double rate = cfg_.priors.sigma2_rate;
    for (int t = 1; t < T_; ++t) rate += 0.5 * qf_[t];
    par_.sigma2 = rng.inverse_gamma(shape, rate);
  }

  /// Random-walk Metropolis on the transformed scale; returns acceptance.
  bool update_scalar(ScalarParam which, Rng& rng) {
    switch (which) {
      case ScalarParam::alpha: {
        const double u = 2.0 * std::atanh(par_.alpha);
        const double u_new = u + scale_alpha_ * rng.normal();
        const double a_new = std::tanh(0.5 * u_new);
        const double lj_cur = std::log1p(-par_.alpha * par_.alpha);
        const double lj_new = std::log1p(-a_new * a_new);
        const double cur = kernel_slice_sum(logdet_, qf_) + lj_cur;
        for (int t = 1; t < T_; ++t) {
          cand_Q0_all_[t] = build_precision_kernel(W_, t, a_new, par_.c);
          cand_logdet_[t] = detail::chol_logdet(cand_Q0_all_[t], llt_);
          cand_qf_[t] = detail::quad_form(cand_Q0_all_[t], mu_->pos[t] - mean_[t]);
        }
        const double prop = kernel_slice_sum(cand_logdet_, cand_qf_) + lj_new;
        if (std::log(rng.uniform_pos()) < prop - cur) {
          par_.alpha = a_new;
          std::swap(Q0_, cand_Q0_all_);
          std::swap(logdet_, cand_logdet_);
          std::swap(qf_, cand_qf_);
          return true;
        }
        return false;
      }
      case ScalarParam::c: {
        const double v = std::log(par_.c);
        const double v_new = v + scale_c_ * rng.normal();
        const double c_new = std::exp(v_new);
        const double lp_cur =
            detail::log_inv_gamma_kernel(par_.c, cfg_.priors.c_shape, cfg_.priors.c_rate) + v;
        const double lp_new =
            detail::log_inv_gamma_kernel(c_new, cfg_.priors.c_shape, cfg_.priors.c_rate) + v_new;
        const double cur = kernel_slice_sum(logdet_, qf_) + lp_cur;
        for (int t = 1; t < T_; ++t) {
          cand_Q0_all_[t] = build_precision_kernel(W_, t, par_.alpha, c_new);
          cand_logdet_[t] = detail::chol_logdet(cand_Q0_all_[t], llt_);
          cand_qf_[t] = detail::quad_form(cand_Q0_all_[t], mu_->pos[t] - mean_[t]);
        }
        const double prop = kernel_slice_sum(cand_logdet_, cand_qf_) + lp_new;
        if (std::log(rng.uniform_pos()) < prop - cur) {
          par_.c = c_new;
          std::swap(Q0_, cand_Q0_all_);
          std::swap(logdet_, cand_logdet_);
          std::swap(qf_, cand_qf_);
          return true;
        }
        return false;
      }
      case ScalarParam::beta: {
        const double b_new = par_.beta + scale_beta_ * rng.normal();
        const double lp_cur = -0.5 * (par_.beta - cfg_.priors.beta_mean) *
                              (par_.beta - cfg_.priors.beta_mean) / cfg_.priors.beta_var;
        const double lp_new = -0.5 * (b_new - cfg_.priors.beta_mean) *
                              (b_new - cfg_.priors.beta_mean) / cfg_.priors.beta_var;
        double cur = lp_cur, prop = lp_new;
        for (int t = 1; t < T_; ++t) {
          cur += -qf_[t] / (2.0 * par_.sigma2);
          cand_mean_[t] = mu_->pos[t - 1] +
                          b_new * attraction_directions(mu_->pos[t - 1], W_, ego_slice_of(t));
          cand_qf_[t] = detail::quad_form(Q0_[t], mu_->pos[t] - cand_mean_[t]);
          prop += -cand_qf_[t] / (2.0 * par_.sigma2);
        }
        if (std::log(rng.uniform_pos()) < prop - cur) {
          par_.beta = b_new;
          std::swap(mean_, cand_mean_);
          std::swap(qf_, cand_qf_);
          return true;
        }
        return false;
      }
    }
    throw std::logic_error("update_scalar: unreachable");
  }

  /// Exact Gaussian full-conditional draw of beta (the step mean is linear in
  /// beta and the prior is Gaussian).
  void update_beta_exact(Rng& rng) {
    double prec = 1.0 / cfg_.priors.beta_var;
    double num = cfg_.priors.beta_mean / cfg_.priors.beta_var;
    for (int t = 1; t < T_; ++t) {
      const Eigen::MatrixX2d u =
          attraction_directions(mu_->pos[t - 1], W_, ego_slice_of(t));
      const Eigen::MatrixX2d r = mu_->pos[t] - mu_->pos[t - 1];
      const Eigen::MatrixX2d Qu = Q0_[t] * u.matrix();
      prec += (u.col(0).dot(Qu.col(0)) + u.col(1).dot(Qu.col(1))) / par_.sigma2;
      num += (r.col(0).dot(Qu.col(0)) + r.col(1).dot(Qu.col(1))) / par_.sigma2;
    }
    par_.beta = num / prec + rng.normal() / std::sqrt(prec);
    for (int t = 1; t < T_; ++t) {
      rebuild_mean(t);
      rebuild_qf(t);
    }
  }

  /// Joint random-walk Metropolis on (logit p1, logit phi).
  bool update_network_params(Rng& rng) {
    const EdgeCounts counts = edge_counts(W_);
    const double u1 = detail::logit(par_.p1);
    const double u2 = detail::logit(par_.phi);
    const double v1 = u1 + scale_net_ * rng.normal();
    const double v2 = u2 + scale_net_ * rng.normal();
    const double p1_new = detail::inv_logit(v1);
    const double phi_new = detail::inv_logit(v2);
    if (!(p1_new > 0.0 && p1_new < 1.0 && phi_new > 0.0 && phi_new < 1.0)) return false;
    auto target = [&](double p1, double phi) {
      return network_log_mass(counts, transition_probs(p1, phi)) +
             detail::log_beta_kernel(phi, cfg_.priors.phi_a, cfg_.priors.phi_b) +
             std::log(p1) + std::log1p(-p1) + std::log(phi) + std::log1p(-phi);
    };
    const double cur = target(par_.p1, par_.phi);
    const double prop = target(p1_new, phi_new);
    if (std::log(rng.uniform_pos()) < prop - cur) {
      par_.p1 = p1_new;
      par_.phi = phi_new;
      tp_ = transition_probs(par_.p1, par_.phi);
      return true;
    }
    return false;
  }

  PosteriorSamples run() {
    Rng rng(cfg_.seed);
    const int K = bank_->K();
    PosteriorSamples out;
    out.ids = bank_->draws.front().ids;
    out.n = n_;
    out.T = T_;

    std::vector<Eigen::MatrixXd> wsum(T_, Eigen::MatrixXd::Zero(n_, n_));
    std::vector<Eigen::MatrixXd> wm2(T_, Eigen::MatrixXd::Zero(n_, n_));
    long w_count = 0;

    long acc_a = 0, acc_b = 0, acc_c = 0, acc_net = 0, attempts = 0;
    long win_a = 0, win_b = 0, win_c = 0, win_net = 0, win_n = 0, batch = 0;

    try {
      for (int iter = 0; iter < cfg_.n_iter; ++iter) {
        if (K > 1)
          set_trajectory(rng.uniform_int(K));
        else if (iter == 0)
          set_trajectory(0);
        sweep_edges(rng);
        update_sigma2(rng);
        const bool a_ok = update_scalar(ScalarParam::alpha, rng);
        bool b_ok = true;
        if (cfg_.exact_beta_update)
          update_beta_exact(rng);
        else
          b_ok = update_scalar(ScalarParam::beta, rng);
        const bool c_ok = update_scalar(ScalarParam::c, rng);
        const bool n_ok = update_network_params(rng);

        if (iter < cfg_.burn_in) {
          win_a += a_ok;
          win_b += b_ok;
          win_c += c_ok;
          win_net += n_ok;
          ++win_n;
          if (win_n == cfg_.adapt_window) {
            ++batch;
            const double step = std::min(0.25, 1.0 / std::sqrt(static_cast<double>(batch)));
            auto adapt = [&](double& scale, long acc) {
              const double rate = static_cast<double>(acc) / win_n;
              scale *= std::exp(step * (rate - cfg_.target_accept));
              scale = std::min(std::max(scale, 1e-4), 1e4);
            };
            adapt(scale_alpha_, win_a);
            if (!cfg_.exact_beta_update) adapt(scale_beta_, win_b);
            adapt(scale_c_, win_c);
            adapt(scale_net_, win_net);
            win_a = win_b = win_c = win_net = 0;
            win_n = 0;
          }
        } else {
          acc_a += a_ok;
          acc_b += b_ok;
          acc_c += c_ok;
          acc_net += n_ok;
          ++attempts;
          ++w_count;
          for (int t = 0; t < T_; ++t)
            for (int i = 0; i < n_; ++i)
              for (int j = i + 1; j < n_; ++j) {
                const double x = W_.edge(i, j, t) ? 1.0 : 0.0;
                const double d = x - wsum[t](i, j);
                wsum[t](i, j) += d / w_count;
                wm2[t](i, j) += d * (x - wsum[t](i, j));
              }
          if ((iter - cfg_.burn_in) % cfg_.thin == 0) {
            out.alpha.push_back(par_.alpha);
            out.beta.push_back(par_.beta);
            out.p1.push_back(par_.p1);
            out.phi.push_back(par_.phi);
            out.c.push_back(par_.c);
            out.sigma2.push_back(par_.sigma2);
            out.imputation_index.push_back(cur_draw_);
          }
        }
      }
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "mcmc: failure (alpha=" << par_.alpha << ", beta=" << par_.beta
          << ", c=" << par_.c << ", sigma2=" << par_.sigma2 << ", p1=" << par_.p1
          << ", phi=" << par_.phi << "): " << e.what();
      throw std::runtime_error(msg.str());
    }

    out.w_mean.assign(T_, Eigen::MatrixXd::Zero(n_, n_));
    out.w_sd.assign(T_, Eigen::MatrixXd::Zero(n_, n_));
    for (int t = 0; t < T_; ++t)
      for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j) {
          out.w_mean[t](i, j) = out.w_mean[t](j, i) = wsum[t](i, j);
          const double sd =
              w_count > 1 ? std::sqrt(wm2[t](i, j) / (w_count - 1)) : 0.0;
          out.w_sd[t](i, j) = out.w_sd[t](j, i) = sd;
        }

    const double denom = attempts > 0 ? static_cast<double>(attempts) : 1.0;
    out.acceptance["alpha"] = acc_a / denom;
    out.acceptance["beta"] = acc_b / denom;
    out.acceptance["c"] = acc_c / denom;
    out.acceptance["network"] = acc_net / denom;
    out.adapted_scale["alpha"] = scale_alpha_;
    out.adapted_scale["beta"] = scale_beta_;
    out.adapted_scale["c"] = scale_c_;
    out.adapted_scale["network"] = scale_net_;
    return out;
  }

 private:
  static const TrajectoryGrid& checked_front(const ImputationBank& bank) {
    if (bank.draws.empty())
      throw std::invalid_argument("Sampler: imputation bank is empty");
    return bank.draws.front();
  }

  int ego_slice_of(int t) const {
    return cfg_.convention == EgoMeanConvention::previous_slice ? t - 1 : t;
  }

  double initial_sigma2() const {
    const TrajectoryGrid& g = bank_->draws.front();
    double s = 0.0;
    for (int t = 1; t < g.T(); ++t) s += (g.pos[t] - g.pos[t - 1]).squaredNorm();
    return std::max(s / (2.0 * g.n() * (g.T() - 1)), 1e-8);
  }

  void rebuild_kernel(int t) {
    Q0_[t] = build_precision_kernel(W_, t, par_.alpha, par_.c);
    logdet_[t] = detail::chol_logdet(Q0_[t], llt_);
  }
  void rebuild_mean(int t) {
    mean_[t] = mu_->pos[t - 1] +
               par_.beta * attraction_directions(mu_->pos[t - 1], W_, ego_slice_of(t));
  }
  void rebuild_qf(int t) { qf_[t] = detail::quad_form(Q0_[t], mu_->pos[t] - mean_[t]); }

  void refresh_all() {
    for (int t = 1; t < T_; ++t) {
      rebuild_kernel(t);
      rebuild_mean(t);
      rebuild_qf(t);
    }
  }

  double kernel_slice_sum(const std::vector<double>& logdet,
                          const std::vector<double>& qf) const {
    double s = 0.0;
    for (int t = 1; t < T_; ++t) s += logdet[t] - qf[t] / (2.0 * par_.sigma2);
    return s;
  }

  // Candidate quantities for flipping w_ij(t). score1/score0 are the log full
  // conditionals of w = 1 and w = 0 up to a shared constant.
  struct EdgeScores {
    double score1 = 0.0, score0 = 0.0;
    // slice t: kernel (and mean under the current_slice convention)
    bool kernel_slice = false;
    double flip_logdet = 0.0, flip_qf = 0.0;
    Eigen::Vector2d flip_mean_i, flip_mean_j;  // current_slice convention only
    // slice t+1: mean rows (previous_slice convention)
    bool mean_slice = false;
    double flip_qf_next = 0.0;
    Eigen::Vector2d flip_mean_next_i, flip_mean_next_j;
  };

  // Attraction direction of k at network slice ts with w_ij forced to `forced`.
  Eigen::Vector2d attraction_flipped(const Eigen::MatrixX2d& mu, int k, int i, int j,
                                     int ts, bool forced) const {
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    int deg = 0;
    for (int l = 0; l < n_; ++l) {
      if (l == k) continue;
      const bool w = ((k == i && l == j) || (k == j && l == i))
                         ? forced
                         : W_.edge(k, l, ts);
      if (w) {
        sum += mu.row(l).transpose();
        ++deg;
      }
    }
    if (deg == 0) return Eigen::Vector2d::Zero();
    const Eigen::Vector2d gap = sum / static_cast<double>(deg) - mu.row(k).transpose();
    const double len = gap.norm();
    if (len == 0.0) return Eigen::Vector2d::Zero();
    return gap / len;
  }

  EdgeScores edge_scores(int i, int j, int t) {
    EdgeScores es;
    const bool cur = W_.edge(i, j, t);
    const bool flip = !cur;
    double s_cur = edge_prior_log_term(cur, W_, i, j, t, tp_);
    double s_flip = edge_prior_log_term(flip, W_, i, j, t, tp_);
    const double inv2s = 1.0 / (2.0 * par_.sigma2);
    const bool prev_conv = cfg_.convention == EgoMeanConvention::previous_slice;

    if (t >= 1) {
      es.kernel_slice = true;
      s_cur += logdet_[t] - qf_[t] * inv2s;
      cand_Q0_ = Q0_[t];
      cand_Q0_(i, j) = cand_Q0_(j, i) = flip ? -par_.alpha : 0.0;
      const int di = W_.degree(i, t) + (flip ? 1 : -1);
      const int dj = W_.degree(j, t) + (flip ? 1 : -1);
      cand_Q0_(i, i) = di > 0 ? static_cast<double>(di) : par_.c;
      cand_Q0_(j, j) = dj > 0 ? static_cast<double>(dj) : par_.c;
      es.flip_logdet = detail::chol_logdet(cand_Q0_, llt_);
      if (prev_conv) {
        // mean unchanged: only rows/cols i, j of the kernel moved
        const Eigen::MatrixX2d diff = mu_->pos[t] - mean_[t];
        const double dQii = cand_Q0_(i, i) - Q0_[t](i, i);
        const double dQjj = cand_Q0_(j, j) - Q0_[t](j, j);
        const double dQij = cand_Q0_(i, j) - Q0_[t](i, j);
        es.flip_qf = qf_[t] +
                     dQii * (diff(i, 0) * diff(i, 0) + diff(i, 1) * diff(i, 1)) +
                     dQjj * (diff(j, 0) * diff(j, 0) + diff(j, 1) * diff(j, 1)) +
                     2.0 * dQij * (diff(i, 0) * diff(j, 0) + diff(i, 1) * diff(j, 1));
      } else {
        // ego slice is t: rows i, j of the mean move as well
        scratch_diff_ = mu_->pos[t] - mean_[t];
        const Eigen::Vector2d mi =
            mu_->pos[t - 1].row(i).transpose() +
            par_.beta * attraction_flipped(mu_->pos[t - 1], i, i, j, t, flip);
        const Eigen::Vector2d mj =
            mu_->pos[t - 1].row(j).transpose() +
            par_.beta * attraction_flipped(mu_->pos[t - 1], j, i, j, t, flip);
        es.flip_mean_i = mi;
        es.flip_mean_j = mj;
        scratch_diff_.row(i) = mu_->pos[t].row(i) - mi.transpose();
        scratch_diff_.row(j) = mu_->pos[t].row(j) - mj.transpose();
        es.flip_qf = detail::quad_form(cand_Q0_, scratch_diff_);
      }
      s_flip += es.flip_logdet - es.flip_qf * inv2s;
    }

    if (prev_conv && t + 1 <= T_ - 1) {
      es.mean_slice = true;
      const int s = t + 1;
      s_cur += -qf_[s] * inv2s;  // logdet identical on both sides
      const Eigen::Vector2d mi =
          mu_->pos[s - 1].row(i).transpose() +
          par_.beta * attraction_flipped(mu_->pos[s - 1], i, i, j, t, flip);
      const Eigen::Vector2d mj =
          mu_->pos[s - 1].row(j).transpose() +
          par_.beta * attraction_flipped(mu_->pos[s - 1], j, i, j, t, flip);
      es.flip_mean_next_i = mi;
      es.flip_mean_next_j = mj;
      scratch_diff_ = mu_->pos[s] - mean_[s];
      scratch_diff_.row(i) = mu_->pos[s].row(i) - mi.transpose();
      scratch_diff_.row(j) = mu_->pos[s].row(j) - mj.transpose();
      es.flip_qf_next = detail::quad_form(Q0_[s], scratch_diff_);
      s_flip += -es.flip_qf_next * inv2s;
    }

    if (cur) {
      es.score1 = s_cur;
      es.score0 = s_flip;
    } else {
      es.score1 = s_flip;
      es.score0 = s_cur;
    }
    return es;
  }

  void commit_edge(int i, int j, int t, bool newv, const EdgeScores& es) {
    W_.set_edge(i, j, t, newv);
    if (es.kernel_slice) {
      Q0_[t](i, j) = Q0_[t](j, i) = newv ? -par_.alpha : 0.0;
      const int di = W_.degree(i, t);
      const int dj = W_.degree(j, t);
      Q0_[t](i, i) = di > 0 ? static_cast<double>(di) : par_.c;
      Q0_[t](j, j) = dj > 0 ? static_cast<double>(dj) : par_.c;
      logdet_[t] = es.flip_logdet;
      qf_[t] = es.flip_qf;
      if (cfg_.convention == EgoMeanConvention::current_slice) {
        mean_[t].row(i) = es.flip_mean_i.transpose();
        mean_[t].row(j) = es.flip_mean_j.transpose();
      }
    }
    if (es.mean_slice) {
      mean_[t + 1].row(i) = es.flip_mean_next_i.transpose();
      mean_[t + 1].row(j) = es.flip_mean_next_j.transpose();
      qf_[t + 1] = es.flip_qf_next;
    }
  }

  const ImputationBank* bank_;
  SamplerConfig cfg_;
  DynamicNetwork W_;
  const TrajectoryGrid* mu_ = nullptr;
  ModelParams par_;
  EdgeTransition tp_;
  int n_ = 0, T_ = 0, cur_draw_ = 0;

  std::vector<Eigen::MatrixXd> Q0_;
  std::vector<double> logdet_, qf_;
  std::vector<Eigen::MatrixX2d> mean_;

  Eigen::MatrixXd cand_Q0_;
  Eigen::MatrixX2d scratch_diff_;
  std::vector<Eigen::MatrixXd> cand_Q0_all_;
  std::vector<double> cand_logdet_, cand_qf_;
  std::vector<Eigen::MatrixX2d> cand_mean_;
  Eigen::LLT<Eigen::MatrixXd> llt_;

  double scale_alpha_, scale_beta_, scale_c_, scale_net_;
};

inline PosteriorSamples run_mcmc(const ImputationBank& bank, const SamplerConfig& cfg) {
  Sampler sampler(bank, cfg);
  return sampler.run();
}

}  // namespace movenet
