#pragma once

#include "kexpfam/common.hpp"
#include "kexpfam/data.hpp"
#include "kexpfam/kernel.hpp"
#include "kexpfam/reference.hpp"
#include "kexpfam/rkhs.hpp"
#include "kexpfam/rng.hpp"
#include "kexpfam/sampler.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kexpfam {

/// All training scalars and loop counts. Defaults follow the 5:3 update
/// schedule with gradient clipping at norm 5 and width-128 networks; the
/// step-size scalars were tuned on the synthetic suite (see configs/).
struct TrainConfig {
  double lambda = 5.0;
  double eta = 0.05;
  int inner_iters = 15;         // K: functional gradient steps per refresh
  int outer_iters = 2000;       // L: sampler update rounds
  int batch = 64;               // B: minibatch for all stochastic estimates
  double tau0 = 0.5;            // inner step schedule tau_k = tau0 / (1 + k/k0)
  double k0 = 8000.0;
  double rho0 = 0.15;           // outer step schedule rho_l = rho0 / (1 + l/l0)
  double l0 = 800.0;
  int sampler_updates_per_f = 5;
  int nu_updates_per_sampler = 3;
  double clip_norm = 5.0;
  double nu_shrink = 0.1;       // small L2 shrink keeping nu's expansion fresh
  int max_expansion_terms = 2000;
  uint64_t seed = 0;
  RkhsBackend backend = RkhsBackend::expansion;
  int feature_count = 4096;     // r, random_feature backend only
  int hidden_dim = 128;
  int depth = 3;
  int noise_dim = 128;
  double inflation = 2.0;       // reference-measure covariance inflation
  bool normalize = true;
  bool cold_start = false;      // restart (f, nu) from zero each outer round
  bool init_sampler_to_base = true;  // moment-match g's output to p0 at init
  bool full_data_side = true;   // rf backend: exact data mean embedding in f updates
  std::string rho_schedule = "decay";  // "decay" or "constant_theory"
  int curve_every = 1;          // record the training curve every this many rounds
  int curve_mc = 256;           // Monte-Carlo draws per curve estimate

  void validate() const {
    require(lambda > 0.0 && eta > 0.0, "TrainConfig: lambda and eta must be positive");
    require(inner_iters >= 1, "TrainConfig: inner_iters must be >= 1");
    require(outer_iters >= 0, "TrainConfig: outer_iters must be >= 0");
    require(batch >= 1, "TrainConfig: batch must be >= 1");
    require(tau0 > 0.0 && k0 > 0.0 && rho0 > 0.0 && l0 > 0.0,
            "TrainConfig: step schedule scalars must be positive");
    require(sampler_updates_per_f >= 1, "TrainConfig: sampler_updates_per_f >= 1");
    require(nu_updates_per_sampler >= 1, "TrainConfig: nu_updates_per_sampler >= 1");
    require(clip_norm > 0.0, "TrainConfig: clip_norm must be positive");
    require(max_expansion_terms >= 0, "TrainConfig: max_expansion_terms >= 0");
    require(eta * tau0 < 1.0, "TrainConfig: eta * tau0 must stay below 1");
    require(hidden_dim >= 1 && depth >= 1 && noise_dim >= 1,
            "TrainConfig: bad architecture");
    require(feature_count >= 1, "TrainConfig: feature_count must be >= 1");
    require(inflation > 0.0, "TrainConfig: inflation must be positive");
    require(curve_every >= 1 && curve_mc >= 1, "TrainConfig: bad curve settings");
    require(rho_schedule == "decay" || rho_schedule == "constant_theory",
            "TrainConfig: unknown rho_schedule");
  }

  double rho(int l) const {
    if (rho_schedule == "constant_theory")
      return std::min(1.0 / outer_iters, rho0 / std::sqrt(double(outer_iters)));
    return rho0 / (1.0 + static_cast<double>(l) / l0);
  }
};

enum class TrainMode { unconditional, conditional };

/// Update counts and peak expansion sizes, recorded during training.
struct TrainStats {
  long inner_refreshes = 0;
  long inner_iterations = 0;
  long sampler_updates = 0;
  long nu_refinements = 0;
  long peak_f_terms = 0;
  long peak_nu_terms = 0;
  /// Peak stored doubles across both expansions: terms * (dim + 1).
  long peak_expansion_doubles = 0;
};

struct CurvePoint {
  int outer_iter = 0;
  double objective = 0.0;
  double mmd_to_train = 0.0;
};

struct TrainedModel {
  RkhsFunction f;
  RkhsFunction nu;
  TransportSampler sampler;
  ReferenceMeasure base;
  TrainConfig config;
  TrainMode mode = TrainMode::unconditional;
  std::optional<Normalization> normalization;
  std::vector<int> x_cols;
  std::vector<int> y_cols;
  TrainStats stats;
  std::vector<CurvePoint> curve;

  int x_dim() const { return static_cast<int>(x_cols.size()); }
  int y_dim() const { return static_cast<int>(y_cols.size()); }
};

namespace detail {

/// f and nu share one feature map: both live in the same approximated space.
inline RkhsFunction make_rkhs_function(const ProductKernel& kernel,
                                       const TrainConfig& cfg) {
  if (cfg.backend == RkhsBackend::expansion)
    return RkhsFunction::expansion(kernel);
  return RkhsFunction::random_feature(
      kernel, sample_feature_map(kernel, cfg.feature_count,
                                 derive_seed(cfg.seed, "features")));
}

inline void track_peaks(TrainStats& stats, const RkhsFunction& f,
                        const RkhsFunction& nu) {
  stats.peak_f_terms = std::max<long>(stats.peak_f_terms, f.term_count());
  stats.peak_nu_terms = std::max<long>(stats.peak_nu_terms, nu.term_count());
  long doubles = static_cast<long>(f.term_count() + nu.term_count()) *
                 (f.input_dim() + 1);
  stats.peak_expansion_doubles = std::max(stats.peak_expansion_doubles, doubles);
}

/// Unbiased MMD^2 U-statistic used for the training curve.
inline double quick_mmd_sq(const Mat& X, const Mat& Y, const ProductKernel& k) {
  const int n = static_cast<int>(X.rows());
  const int m = static_cast<int>(Y.rows());
  Mat kxx = gram_matrix(k, X, X);
  Mat kyy = gram_matrix(k, Y, Y);
  Mat kxy = gram_matrix(k, X, Y);
  double sxx = (kxx.sum() - n) / (double(n) * (n - 1));
  double syy = (kyy.sum() - m) / (double(m) * (m - 1));
  double sxy = kxy.sum() / (double(n) * m);
  return sxx + syy - 2.0 * sxy;
}

}  // namespace detail

/// Monte-Carlo estimate of the saddle objective
///   E_D[f] - E_q[f] - (eta/2)||f||^2 + (1/lambda)(E_q[nu] - E_p0[exp(nu)] + 1)
/// on explicit matrices. The +1 makes the nu-optimum equal the KL term.
inline double estimate_saddle_objective(const RkhsFunction& f,
                                        const RkhsFunction& nu, const Mat& data,
                                        const Mat& generated, const Mat& base_draws,
                                        double lambda, double eta) {
  require(generated.rows() >= 1 && base_draws.rows() >= 1 && data.rows() >= 1,
          "estimate_saddle_objective: empty inputs");
  double e_data_f = f.eval_rows(data).mean();
  double e_gen_f = f.eval_rows(generated).mean();
  Vec nu_gen = nu.eval_rows(generated);
  Vec nu_base = nu.eval_rows(base_draws);
  double e_exp = 0.0;
  for (int i = 0; i < nu_base.size(); ++i) {
    double e = std::exp(nu_base[i]);
    if (!std::isfinite(e))
      throw NumericError("estimate_saddle_objective: exp(nu) overflowed");
    e_exp += e;
  }
  e_exp /= nu_base.size();
  return e_data_f - e_gen_f - 0.5 * eta * f.norm_sq() +
         (nu_gen.mean() - e_exp + 1.0) / lambda;
}

/// Objective estimate for a trained model with fresh seeded draws; the
/// sampler's live noise stream is not disturbed.
inline double objective_estimate(const TrainedModel& model, const Dataset& data,
                                 int n_mc, uint64_t seed) {
  require(n_mc >= 1, "objective_estimate: n_mc must be >= 1");
  TransportSampler sampler = model.sampler;
  sampler.reseed_noise(derive_seed(seed, "objective_noise"));
  Rng rng(derive_seed(seed, "objective_base"));
  Mat data_pts;
  Mat generated;
  if (model.mode == TrainMode::unconditional) {
    data_pts = model.normalization ? model.normalization->apply(data.samples)
                                   : data.samples;
    generated = sampler.sample(n_mc);
    Mat base_draws = model.base.sample_rows(n_mc, rng);
    return estimate_saddle_objective(model.f, model.nu, data_pts, generated,
                                     base_draws, model.config.lambda,
                                     model.config.eta);
  }
  Mat all = model.normalization ? model.normalization->apply(data.samples)
                                : data.samples;
  Dataset scratch;
  scratch.samples = all;
  scratch.x_cols = model.x_cols;
  scratch.y_cols = model.y_cols;
  Mat xs = scratch.x_matrix();
  Mat ys = scratch.y_matrix();
  const int n = static_cast<int>(xs.rows());
  Mat data_xy(n, xs.cols() + ys.cols());
  data_xy << xs, ys;
  Mat xb(n_mc, xs.cols());
  for (int i = 0; i < n_mc; ++i) xb.row(i) = xs.row(rng.uniform_int(n));
  Mat input(n_mc, xs.cols() + sampler.noise_dim());
  input << xb, sampler.draw_noise(n_mc);
  Mat yg = sampler.forward(input);
  Mat gen_xy(n_mc, xs.cols() + ys.cols());
  gen_xy << xb, yg;
  Mat base_xy(n_mc, xs.cols() + ys.cols());
  base_xy << xb, model.base.sample_rows(n_mc, rng);
  return estimate_saddle_objective(model.f, model.nu, data_xy, gen_xy, base_xy,
                                   model.config.lambda, model.config.eta);
}

inline double objective_estimate(const TrainedModel& model, const Dataset& data,
                                 int n_mc) {
  return objective_estimate(model, data, n_mc,
                            derive_seed(model.config.seed, "objective"));
}

/// Alternating saddle-point training: per outer round one warm-started
/// functional-gradient refresh of (f, nu), then `sampler_updates_per_f`
/// descent steps on the transport map, each preceded by
/// `nu_updates_per_sampler` extra nu refinements.
inline TrainedModel train(const Dataset& data, TrainConfig cfg) {
  cfg.validate();
  require(data.n() >= 2, "train: need at least 2 samples");

  TrainedModel model;
  model.mode = TrainMode::unconditional;
  model.config = cfg;

  Mat X = data.samples;
  if (cfg.normalize) {
    Normalization norm = fit_normalization(X);
    X = norm.apply(X);
    model.normalization = norm;
  } else if (data.normalization) {
    model.normalization = data.normalization;
  }
  const int d = static_cast<int>(X.cols());

  ProductKernel kernel{KernelSpec(
      median_bandwidth(X, derive_seed(cfg.seed, "median")), d)};
  model.base = make_reference(X, cfg.inflation);
  model.sampler = TransportSampler::mlp(cfg.noise_dim, cfg.noise_dim, d,
                                        cfg.hidden_dim, cfg.depth,
                                        derive_seed(cfg.seed, "init"),
                                        derive_seed(cfg.seed, "noise"));
  if (cfg.init_sampler_to_base)
    model.sampler.calibrate_output(model.base.mean,
                                   model.base.variance().cwiseSqrt(),
                                   derive_seed(cfg.seed, "calibrate"));
  InnerLoopState state{detail::make_rkhs_function(kernel, cfg),
                       detail::make_rkhs_function(kernel, cfg), 0,
                       StepSchedule{cfg.tau0, cfg.k0}};

  Rng rng_inner(derive_seed(cfg.seed, "inner"));
  Rng rng_eval(derive_seed(cfg.seed, "curve"));

  InnerLoopOptions inner_opt;
  inner_opt.iters = cfg.inner_iters;
  inner_opt.batch = cfg.batch;
  inner_opt.eta = cfg.eta;
  inner_opt.lambda = cfg.lambda;
  inner_opt.max_expansion_terms = cfg.max_expansion_terms;
  inner_opt.nu_shrink = cfg.nu_shrink;
  Mat data_features;
  if (cfg.backend == RkhsBackend::random_feature) {
    data_features = state.f.feature_map().features_rows(X);
    inner_opt.data_features = &data_features;
  }
  Mat mean_data_feature;
  if (cfg.backend == RkhsBackend::random_feature && cfg.full_data_side) {
    mean_data_feature = data_features.colwise().mean();
    inner_opt.mean_data_feature = &mean_data_feature;
  }

  for (int l = 0; l < cfg.outer_iters; ++l) {
    if (cfg.cold_start) {
      state.f = detail::make_rkhs_function(kernel, cfg);
      state.nu = detail::make_rkhs_function(kernel, cfg);
      state.k = 0;
    }
    try {
      auto counters = run_inner_loop(state, X, model.sampler, model.base,
                                     inner_opt, rng_inner);
      model.stats.inner_refreshes++;
      model.stats.inner_iterations += counters.iterations;
      detail::track_peaks(model.stats, state.f, state.nu);

      const double rho = cfg.rho(l);
      for (int u = 0; u < cfg.sampler_updates_per_f; ++u) {
        for (int v = 0; v < cfg.nu_updates_per_sampler; ++v) {
          double tau = state.schedule.tau(state.k);
          Mat gen = model.sampler.forward(model.sampler.draw_noise(cfg.batch));
          Mat base_pts = model.base.sample_rows(cfg.batch, rng_inner);
          if (cfg.backend == RkhsBackend::random_feature) {
            const auto& map = state.nu.feature_map();
            Mat phi_gen = map.features_rows(gen);
            Mat phi_base = map.features_rows(base_pts);
            detail::apply_nu_update(state.nu, tau, cfg.lambda, gen, base_pts,
                                    &phi_gen, &phi_base, cfg.nu_shrink);
          } else {
            detail::apply_nu_update(state.nu, tau, cfg.lambda, gen, base_pts,
                                    nullptr, nullptr, cfg.nu_shrink);
          }
          ++state.k;
          model.stats.nu_refinements++;
        }
        if (cfg.max_expansion_terms > 0 &&
            state.nu.term_count() > cfg.max_expansion_terms)
          state.nu = truncate_expansion(state.nu, cfg.max_expansion_terms).fn;
        ParamGradient grad =
            dual_gradient(model.sampler, state.f, state.nu, cfg.lambda, cfg.batch);
        apply_update(model.sampler, grad, rho, cfg.clip_norm);
        model.stats.sampler_updates++;
      }
      detail::track_peaks(model.stats, state.f, state.nu);
    } catch (const NumericError& err) {
      throw NumericError("train: aborted at outer iteration " +
                         std::to_string(l) + ": " + err.what());
    }

    if (l % cfg.curve_every == 0 || l == cfg.outer_iters - 1) {
      CurvePoint pt;
      pt.outer_iter = l;
      TransportSampler snapshot = model.sampler;
      snapshot.reseed_noise(derive_seed(cfg.seed, "curve_noise"));
      Mat gen = snapshot.sample(cfg.curve_mc);
      Mat base_draws = model.base.sample_rows(cfg.curve_mc, rng_eval);
      pt.objective = estimate_saddle_objective(state.f, state.nu, X, gen,
                                               base_draws, cfg.lambda, cfg.eta);
      pt.mmd_to_train = detail::quick_mmd_sq(gen, X, kernel);
      model.curve.push_back(pt);
    }
  }

  model.f = std::move(state.f);
  model.nu = std::move(state.nu);
  return model;
}

/// Conditional variant: f and nu live on the product kernel over (x, y); the
/// sampler consumes (x, xi) and emits y; the base measure is on y only, with
/// base expectations paired against minibatch x draws.
inline TrainedModel train_conditional(const Dataset& data, TrainConfig cfg) {
  cfg.validate();
  require(data.conditional(),
          "train_conditional: dataset needs x_cols and y_cols");
  require(data.n() >= 2, "train_conditional: need at least 2 samples");

  TrainedModel model;
  model.mode = TrainMode::conditional;
  model.config = cfg;
  model.x_cols = data.x_cols;
  model.y_cols = data.y_cols;

  Mat all = data.samples;
  if (cfg.normalize) {
    Normalization norm = fit_normalization(all);
    all = norm.apply(all);
    model.normalization = norm;
  } else if (data.normalization) {
    model.normalization = data.normalization;
  }
  Dataset scratch;
  scratch.samples = all;
  scratch.x_cols = data.x_cols;
  scratch.y_cols = data.y_cols;
  Mat xs = scratch.x_matrix();
  Mat ys = scratch.y_matrix();
  const int dx = static_cast<int>(xs.cols());
  const int dy = static_cast<int>(ys.cols());
  const int n = static_cast<int>(xs.rows());

  ProductKernel kernel{std::vector<KernelSpec>{
      KernelSpec(median_bandwidth(xs, derive_seed(cfg.seed, "median_x")), dx),
      KernelSpec(median_bandwidth(ys, derive_seed(cfg.seed, "median_y")), dy)}};
  model.base = make_reference(ys, cfg.inflation);
  model.sampler = TransportSampler::mlp(dx + cfg.noise_dim, cfg.noise_dim, dy,
                                        cfg.hidden_dim, cfg.depth,
                                        derive_seed(cfg.seed, "init"),
                                        derive_seed(cfg.seed, "noise"));
  if (cfg.init_sampler_to_base)
    model.sampler.calibrate_output(model.base.mean,
                                   model.base.variance().cwiseSqrt(),
                                   derive_seed(cfg.seed, "calibrate"));
  InnerLoopState state{detail::make_rkhs_function(kernel, cfg),
                       detail::make_rkhs_function(kernel, cfg), 0,
                       StepSchedule{cfg.tau0, cfg.k0}};

  Rng rng_inner(derive_seed(cfg.seed, "inner"));
  Rng rng_eval(derive_seed(cfg.seed, "curve"));

  const bool rf = cfg.backend == RkhsBackend::random_feature;
  Mat joint(n, dx + dy);
  joint << xs, ys;
  Mat joint_features, mean_joint_feature;
  if (rf) {
    joint_features = state.f.feature_map().features_rows(joint);
    if (cfg.full_data_side) mean_joint_feature = joint_features.colwise().mean();
  }

  struct JointBatch {
    Mat data_xy, gen_xy, base_xy;
    Mat phi_data, phi_gen, phi_base;
    bool rf = false;
  };
  auto draw_joint = [&](JointBatch& jb) {
    Mat xb(cfg.batch, dx), yb(cfg.batch, dy);
    std::vector<int> idx(static_cast<size_t>(cfg.batch));
    for (int b = 0; b < cfg.batch; ++b) {
      int i = rng_inner.uniform_int(n);
      idx[static_cast<size_t>(b)] = i;
      xb.row(b) = xs.row(i);
      yb.row(b) = ys.row(i);
    }
    Mat input(cfg.batch, dx + cfg.noise_dim);
    input << xb, model.sampler.draw_noise(cfg.batch);
    Mat yg = model.sampler.forward(input);
    jb.data_xy.resize(cfg.batch, dx + dy);
    jb.data_xy << xb, yb;
    jb.gen_xy.resize(cfg.batch, dx + dy);
    jb.gen_xy << xb, yg;
    jb.base_xy.resize(cfg.batch, dx + dy);
    jb.base_xy << xb, model.base.sample_rows(cfg.batch, rng_inner);
    jb.rf = rf;
    if (rf) {
      const auto& map = state.f.feature_map();
      jb.phi_data.resize(cfg.batch, map.feature_count());
      for (int b = 0; b < cfg.batch; ++b)
        jb.phi_data.row(b) = joint_features.row(idx[static_cast<size_t>(b)]);
      jb.phi_gen = map.features_rows(jb.gen_xy);
      jb.phi_base = map.features_rows(jb.base_xy);
    }
  };

  for (int l = 0; l < cfg.outer_iters; ++l) {
    if (cfg.cold_start) {
      state.f = detail::make_rkhs_function(kernel, cfg);
      state.nu = detail::make_rkhs_function(kernel, cfg);
      state.k = 0;
    }
    try {
      for (int it = 0; it < cfg.inner_iters; ++it) {
        double tau = state.schedule.tau(state.k);
        JointBatch jb;
        draw_joint(jb);
        if (jb.rf && cfg.full_data_side)
          detail::apply_f_update(state.f, tau, cfg.eta,
                                 jb.data_xy.topRows(1), jb.gen_xy,
                                 &mean_joint_feature, &jb.phi_gen);
        else
          detail::apply_f_update(state.f, tau, cfg.eta, jb.data_xy, jb.gen_xy,
                                 jb.rf ? &jb.phi_data : nullptr,
                                 jb.rf ? &jb.phi_gen : nullptr);
        detail::apply_nu_update(state.nu, tau, cfg.lambda, jb.gen_xy, jb.base_xy,
                                jb.rf ? &jb.phi_gen : nullptr,
                                jb.rf ? &jb.phi_base : nullptr, cfg.nu_shrink);
        ++state.k;
        model.stats.inner_iterations++;
        if (cfg.max_expansion_terms > 0) {
          if (state.f.term_count() > cfg.max_expansion_terms)
            state.f = truncate_expansion(state.f, cfg.max_expansion_terms).fn;
          if (state.nu.term_count() > cfg.max_expansion_terms)
            state.nu = truncate_expansion(state.nu, cfg.max_expansion_terms).fn;
        }
      }
      model.stats.inner_refreshes++;
      detail::track_peaks(model.stats, state.f, state.nu);

      const double rho = cfg.rho(l);
      for (int u = 0; u < cfg.sampler_updates_per_f; ++u) {
        for (int v = 0; v < cfg.nu_updates_per_sampler; ++v) {
          double tau = state.schedule.tau(state.k);
          JointBatch jb;
          draw_joint(jb);
          detail::apply_nu_update(state.nu, tau, cfg.lambda, jb.gen_xy, jb.base_xy,
                                  jb.rf ? &jb.phi_gen : nullptr,
                                  jb.rf ? &jb.phi_base : nullptr, cfg.nu_shrink);
          ++state.k;
          model.stats.nu_refinements++;
        }
        if (cfg.max_expansion_terms > 0 &&
            state.nu.term_count() > cfg.max_expansion_terms)
          state.nu = truncate_expansion(state.nu, cfg.max_expansion_terms).fn;

        // Dual gradient through y only: x is an input, not generated.
        Mat xb(cfg.batch, dx);
        for (int b = 0; b < cfg.batch; ++b)
          xb.row(b) = xs.row(rng_inner.uniform_int(n));
        Mat input(cfg.batch, dx + cfg.noise_dim);
        input << xb, model.sampler.draw_noise(cfg.batch);
        TransportSampler::ForwardCache cache;
        Mat yg = model.sampler.forward_cached(input, cache);
        Mat upstream(cfg.batch, dy);
        for (int b = 0; b < cfg.batch; ++b) {
          Vec xy(dx + dy);
          xy << xb.row(b).transpose(), yg.row(b).transpose();
          Vec g = -state.f.grad_x(xy) + state.nu.grad_x(xy) / cfg.lambda;
          upstream.row(b) = g.tail(dy).transpose();
        }
        ParamGradient grad = model.sampler.backprop(cache, upstream);
        apply_update(model.sampler, grad, rho, cfg.clip_norm);
        model.stats.sampler_updates++;
      }
      detail::track_peaks(model.stats, state.f, state.nu);
    } catch (const NumericError& err) {
      throw NumericError("train_conditional: aborted at outer iteration " +
                         std::to_string(l) + ": " + err.what());
    }

    if (l % cfg.curve_every == 0 || l == cfg.outer_iters - 1) {
      CurvePoint pt;
      pt.outer_iter = l;
      int m = std::min(cfg.curve_mc, n);
      Mat input(m, dx + cfg.noise_dim);
      TransportSampler snapshot = model.sampler;
      snapshot.reseed_noise(derive_seed(cfg.seed, "curve_noise"));
      input << xs.topRows(m), snapshot.draw_noise(m);
      Mat yg = snapshot.forward(input);
      Mat gen_xy(m, dx + dy);
      gen_xy << xs.topRows(m), yg;
      Mat data_xy(n, dx + dy);
      data_xy << xs, ys;
      Mat base_xy(m, dx + dy);
      base_xy << xs.topRows(m), model.base.sample_rows(m, rng_eval);
      pt.objective = estimate_saddle_objective(state.f, state.nu, data_xy,
                                               gen_xy, base_xy, cfg.lambda,
                                               cfg.eta);
      pt.mmd_to_train = detail::quick_mmd_sq(gen_xy, data_xy, kernel);
      model.curve.push_back(pt);
    }
  }

  model.f = std::move(state.f);
  model.nu = std::move(state.nu);
  return model;
}

/// Draws n samples from a trained unconditional model in the original data
/// units (normalization inverted on the way out).
inline Mat sample_from_model(TrainedModel& model, int n) {
  require(model.mode == TrainMode::unconditional,
          "sample_from_model: unconditional models only");
  Mat Z = model.sampler.sample(n);
  return model.normalization ? model.normalization->invert(Z) : Z;
}

/// Conditional draws: one y per row of X_orig (original units).
inline Mat sample_conditional(TrainedModel& model, const Mat& X_orig) {
  require(model.mode == TrainMode::conditional,
          "sample_conditional: conditional models only");
  const int dx = model.x_dim();
  const int dy = model.y_dim();
  require(X_orig.cols() == dx, "sample_conditional: x dimension mismatch");
  Mat xs = X_orig;
  if (model.normalization) {
    Normalization nx = model.normalization->subset(model.x_cols);
    xs = nx.apply(xs);
  }
  Mat input(xs.rows(), dx + model.sampler.noise_dim());
  input << xs, model.sampler.draw_noise(static_cast<int>(xs.rows()));
  Mat yg = model.sampler.forward(input);
  if (model.normalization) {
    Normalization ny = model.normalization->subset(model.y_cols);
    yg = ny.invert(yg);
  }
  (void)dy;
  return yg;
}

}  // namespace kexpfam
