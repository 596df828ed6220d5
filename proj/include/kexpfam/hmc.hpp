#pragma once

#include "kexpfam/common.hpp"
#include "kexpfam/rng.hpp"

#include <cmath>
#include <functional>
#include <utility>

namespace kexpfam {

/// Log-density (up to a constant) and its gradient at a point.
using LogDensityGrad = std::function<std::pair<double, Vec>(const Vec&)>;

struct HmcConfig {
  double step_size = 0.1;
  int leapfrog_steps = 20;
  int chain_length = 1000;
  int burn_in = 200;
  uint64_t seed = 0;
  bool tune_step = true;  // adapt step size toward 0.7 acceptance in burn-in

  void validate() const {
    require(step_size > 0.0, "HmcConfig: step_size must be positive");
    require(leapfrog_steps >= 1, "HmcConfig: leapfrog_steps must be >= 1");
    require(chain_length >= 1, "HmcConfig: chain_length must be >= 1");
    require(burn_in >= 0 && burn_in < chain_length,
            "HmcConfig: burn_in must be below chain_length");
  }
};

struct HmcResult {
  Mat draws;  // (chain_length - burn_in) x d
  double acceptance_rate = 0.0;
  double tuned_step = 0.0;
};

/// One leapfrog trajectory; returns final (position, momentum).
inline std::pair<Vec, Vec> leapfrog(const LogDensityGrad& target, Vec q, Vec p,
                                    double step, int n_steps) {
  auto [logp, grad] = target(q);
  (void)logp;
  for (int s = 0; s < n_steps; ++s) {
    p += 0.5 * step * grad;
    q += step * p;
    std::tie(logp, grad) = target(q);
    p += 0.5 * step * grad;
  }
  return {std::move(q), std::move(p)};
}

/// Standard HMC with Metropolis correction and unit mass matrix.
inline HmcResult hmc_sample(const LogDensityGrad& target, const HmcConfig& cfg,
                            const Vec& init) {
  cfg.validate();
  auto [lp0, g0] = target(init);
  if (!std::isfinite(lp0) || !g0.allFinite())
    throw NumericError("hmc_sample: non-finite energy at the initial point");

  Rng rng(derive_seed(cfg.seed, "hmc"));
  const int d = static_cast<int>(init.size());
  Vec q = init;
  double logp = lp0;
  double step = cfg.step_size;
  long accepted = 0, proposed = 0;
  long accepted_window = 0, window = 0;

  HmcResult result;
  result.draws.resize(cfg.chain_length - cfg.burn_in, d);

  for (int it = 0; it < cfg.chain_length; ++it) {
    Vec p = rng.normal_vec(d);
    double h0 = -logp + 0.5 * p.squaredNorm();
    auto [q_new, p_new] = leapfrog(target, q, p, step, cfg.leapfrog_steps);
    auto [logp_new, grad_new] = target(q_new);
    (void)grad_new;
    double h1 = -logp_new + 0.5 * p_new.squaredNorm();
    ++proposed;
    ++window;
    bool accept = std::isfinite(h1) && std::log(rng.uniform_pos()) < h0 - h1;
    if (accept) {
      q = q_new;
      logp = logp_new;
      ++accepted;
      ++accepted_window;
    }
    if (cfg.tune_step && it < cfg.burn_in && window >= 50) {
      double rate = static_cast<double>(accepted_window) / window;
      if (rate < 0.6)
        step *= 0.8;
      else if (rate > 0.8)
        step *= 1.25;
      accepted_window = 0;
      window = 0;
    }
    if (it >= cfg.burn_in) result.draws.row(it - cfg.burn_in) = q.transpose();
  }
  result.acceptance_rate = static_cast<double>(accepted) / proposed;
  result.tuned_step = step;
  return result;
}

}  // namespace kexpfam
