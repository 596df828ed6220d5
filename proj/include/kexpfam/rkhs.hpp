#pragma once

#include "kexpfam/common.hpp"
#include "kexpfam/kernel.hpp"
#include "kexpfam/reference.hpp"
#include "kexpfam/rng.hpp"
#include "kexpfam/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

namespace kexpfam {

enum class RkhsBackend { expansion, random_feature };

/// A function in the RKHS, either as a weighted kernel expansion
/// f(.) = sum_i c_i k(x_i, .) or as a random-feature linear model beta . Phi(.).
/// Coefficient shrinks are applied lazily through a single global multiplier.
class RkhsFunction {
 public:
  RkhsFunction() = default;

  static RkhsFunction expansion(ProductKernel kernel) {
    RkhsFunction f;
    f.backend_ = RkhsBackend::expansion;
    f.kernel_ = std::move(kernel);
    f.points_.resize(0, f.kernel_.input_dim());
    f.coeffs_.resize(0);
    return f;
  }

  static RkhsFunction random_feature(ProductKernel kernel, RandomFeatureMap map) {
    require(map.input_dim() == kernel.input_dim(),
            "RkhsFunction: feature map dimension mismatch");
    RkhsFunction f;
    f.backend_ = RkhsBackend::random_feature;
    f.kernel_ = std::move(kernel);
    f.map_ = std::move(map);
    f.beta_ = Vec::Zero(f.map_->feature_count());
    return f;
  }

  static RkhsFunction random_feature_with_beta(ProductKernel kernel,
                                               RandomFeatureMap map, Vec beta) {
    RkhsFunction f = random_feature(std::move(kernel), std::move(map));
    require(beta.size() == f.map_->feature_count(),
            "RkhsFunction: beta size mismatch");
    f.beta_ = std::move(beta);
    return f;
  }

  RkhsBackend backend() const { return backend_; }
  const ProductKernel& kernel() const { return kernel_; }
  int input_dim() const { return kernel_.input_dim(); }
  int term_count() const { return terms_; }

  /// Support points (expansion backend), one per row.
  Mat support_points() const { return points_.topRows(terms_); }

  /// Effective coefficients with the lazy scale folded in.
  Vec coefficients() const { return scale_ * coeffs_.head(terms_); }

  const Vec& beta() const { return beta_; }
  const RandomFeatureMap& feature_map() const {
    require(map_.has_value(), "RkhsFunction: no feature map");
    return *map_;
  }

  bool is_zero() const {
    return backend_ == RkhsBackend::expansion ? terms_ == 0
                                              : beta_.isZero(0.0);
  }

  double eval(const Vec& x) const {
    require(x.size() == input_dim(), "RkhsFunction::eval: dimension mismatch");
    if (backend_ == RkhsBackend::random_feature) return beta_.dot(map_->features(x));
    if (terms_ == 0) return 0.0;
    Vec k = kernel_.eval_rows(points_.topRows(terms_), x);
    return scale_ * coeffs_.head(terms_).dot(k);
  }

  Vec eval_rows(const Mat& X) const {
    require(X.cols() == input_dim(), "RkhsFunction::eval_rows: dimension mismatch");
    if (backend_ == RkhsBackend::random_feature)
      return map_->features_rows(X) * beta_;
    Vec out = Vec::Zero(X.rows());
    if (terms_ == 0) return out;
    parallel_for(static_cast<int>(X.rows()), [&](int begin, int end) {
      for (int i = begin; i < end; ++i) {
        Vec k = kernel_.eval_rows(points_.topRows(terms_), X.row(i).transpose());
        out[i] = scale_ * coeffs_.head(terms_).dot(k);
      }
    });
    return out;
  }

  Vec grad_x(const Vec& x) const {
    require(x.size() == input_dim(), "RkhsFunction::grad_x: dimension mismatch");
    if (backend_ == RkhsBackend::random_feature)
      return map_->weighted_grad(beta_, x);
    Vec g = Vec::Zero(input_dim());
    if (terms_ == 0) return g;
    Vec k = kernel_.eval_rows(points_.topRows(terms_), x);
    Vec ck = coeffs_.head(terms_).cwiseProduct(k);
    double total = ck.sum();
    int off = 0;
    for (const auto& b : kernel_.blocks) {
      g.segment(off, b.input_dim) =
          (-2.0 / b.bandwidth_sq) *
          (total * x.segment(off, b.input_dim) -
           points_.block(0, off, terms_, b.input_dim).transpose() * ck);
      off += b.input_dim;
    }
    return scale_ * g;
  }

  /// Squared RKHS norm: alpha' K alpha for expansions (clamped at zero),
  /// ||beta||^2 for the random-feature backend.
  double norm_sq() const {
    if (backend_ == RkhsBackend::random_feature) return beta_.squaredNorm();
    if (terms_ == 0) return 0.0;
    Vec row_vals(terms_);
    const Mat pts = points_.topRows(terms_);
    parallel_for(terms_, [&](int begin, int end) {
      for (int i = begin; i < end; ++i) {
        Vec k = kernel_.eval_rows(pts, pts.row(i).transpose());
        row_vals[i] = coeffs_[i] * coeffs_.head(terms_).dot(k);
      }
    });
    double q = scale_ * scale_ * row_vals.sum();
    return q < 0.0 ? 0.0 : q;
  }

  /// Multiplies the whole function by `a` (lazy for expansions).
  void scale_by(double a) {
    if (backend_ == RkhsBackend::random_feature) {
      beta_ *= a;
      return;
    }
    if (terms_ == 0) {
      scale_ = 1.0;
      return;
    }
    scale_ *= a;
    if (std::abs(scale_) < 1e-8) fold_scale();
  }

  /// Adds w * k(p, .) (expansion: appends a term; rf: beta += w * Phi(p)).
  void add_point_mass(const Vec& p, double w) {
    require(p.size() == input_dim(), "add_point_mass: dimension mismatch");
    if (backend_ == RkhsBackend::random_feature) {
      beta_ += w * map_->features(p);
      return;
    }
    ensure_capacity(terms_ + 1);
    points_.row(terms_) = p.transpose();
    coeffs_[terms_] = w / scale_;
    ++terms_;
  }

  /// Adds sum_b w_b k(P.row(b), .).
  void add_point_masses(const Mat& P, const Vec& w) {
    require(P.rows() == w.size() && P.cols() == input_dim(),
            "add_point_masses: shape mismatch");
    if (backend_ == RkhsBackend::random_feature) {
      beta_ += map_->features_rows(P).transpose() * w;
      return;
    }
    ensure_capacity(terms_ + static_cast<int>(P.rows()));
    for (int b = 0; b < P.rows(); ++b) {
      points_.row(terms_) = P.row(b);
      coeffs_[terms_] = w[b] / scale_;
      ++terms_;
    }
  }

  /// Random-feature fast paths on precomputed feature rows, shared across the
  /// updates that touch the same batch.
  void add_feature_masses(const Mat& phi, const Vec& w) {
    require(backend_ == RkhsBackend::random_feature,
            "add_feature_masses: random-feature backend only");
    require(phi.rows() == w.size() && phi.cols() == beta_.size(),
            "add_feature_masses: shape mismatch");
    beta_ += phi.transpose() * w;
  }

  Vec eval_features(const Mat& phi) const {
    require(backend_ == RkhsBackend::random_feature,
            "eval_features: random-feature backend only");
    return phi * beta_;
  }

 private:
  void ensure_capacity(int needed) {
    if (points_.rows() >= needed) return;
    int cap = std::max(needed, static_cast<int>(points_.rows()) * 2 + 16);
    Mat np(cap, input_dim());
    Vec nc(cap);
    if (terms_ > 0) {
      np.topRows(terms_) = points_.topRows(terms_);
      nc.head(terms_) = coeffs_.head(terms_);
    }
    points_ = std::move(np);
    coeffs_ = std::move(nc);
  }

  void fold_scale() {
    coeffs_.head(terms_) *= scale_;
    scale_ = 1.0;
  }

  RkhsBackend backend_ = RkhsBackend::expansion;
  ProductKernel kernel_;
  Mat points_;      // capacity rows; first terms_ are live
  Vec coeffs_;      // raw coefficients; effective = scale_ * coeffs_
  int terms_ = 0;
  double scale_ = 1.0;
  std::optional<RandomFeatureMap> map_;
  Vec beta_;
};

inline double eval_function(const RkhsFunction& fn, const Vec& x) {
  return fn.eval(x);
}

inline Vec grad_function_x(const RkhsFunction& fn, const Vec& x) {
  return fn.grad_x(x);
}

inline double rkhs_norm_sq(const RkhsFunction& fn) { return fn.norm_sq(); }

struct TruncationResult {
  RkhsFunction fn;
  double dropped_norm = 0.0;  // RKHS norm of the removed part
  int dropped_terms = 0;
};

/// Drops the smallest-|coefficient| terms until at most max_terms remain.
/// Function values change by at most dropped_norm since k(x, x) = 1.
inline TruncationResult truncate_expansion(const RkhsFunction& fn, int max_terms) {
  require(max_terms >= 1, "truncate_expansion: max_terms must be >= 1");
  if (fn.backend() != RkhsBackend::expansion || fn.term_count() <= max_terms)
    return {fn, 0.0, 0};

  const Mat pts = fn.support_points();
  const Vec coefs = fn.coefficients();
  const int n = fn.term_count();
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(coefs[a]) > std::abs(coefs[b]);
  });

  RkhsFunction kept = RkhsFunction::expansion(fn.kernel());
  Mat kept_pts(max_terms, pts.cols());
  Vec kept_coefs(max_terms);
  for (int i = 0; i < max_terms; ++i) {
    kept_pts.row(i) = pts.row(order[static_cast<size_t>(i)]);
    kept_coefs[i] = coefs[order[static_cast<size_t>(i)]];
  }
  kept.add_point_masses(kept_pts, kept_coefs);

  const int n_drop = n - max_terms;
  Mat drop_pts(n_drop, pts.cols());
  Vec drop_coefs(n_drop);
  for (int i = 0; i < n_drop; ++i) {
    drop_pts.row(i) = pts.row(order[static_cast<size_t>(max_terms + i)]);
    drop_coefs[i] = coefs[order[static_cast<size_t>(max_terms + i)]];
  }
  double q = 0.0;
  for (int i = 0; i < n_drop; ++i) {
    Vec k = fn.kernel().eval_rows(drop_pts, drop_pts.row(i).transpose());
    q += drop_coefs[i] * drop_coefs.dot(k);
  }
  return {std::move(kept), std::sqrt(std::max(0.0, q)), n_drop};
}

/// Inner step size schedule tau_k = tau0 / (1 + k / k0): positive,
/// non-increasing in k.
struct StepSchedule {
  double tau0 = 0.5;
  double k0 = 1000.0;

  double tau(int k) const {
    require(k >= 0, "StepSchedule: negative iteration");
    return tau0 / (1.0 + static_cast<double>(k) / k0);
  }
};

/// State threaded through the stochastic functional gradient loop.
struct InnerLoopState {
  RkhsFunction f;
  RkhsFunction nu;
  int k = 0;
  StepSchedule schedule;
};

namespace detail {

/// f <- (1 - eta tau) f + tau (mean_b k(data_b, .) - mean_b k(gen_b, .)).
/// phi_* are optional precomputed feature rows (random-feature backend).
inline void apply_f_update(RkhsFunction& f, double tau, double eta,
                           const Mat& data_pts, const Mat& sampler_pts,
                           const Mat* phi_data = nullptr,
                           const Mat* phi_sampler = nullptr) {
  require(tau > 0.0 && eta > 0.0, "f update: tau and eta must be positive");
  if (eta * tau >= 1.0)
    throw StepSizeError("f update: eta * tau must stay below 1");
  require(data_pts.rows() >= 1 && sampler_pts.rows() >= 1,
          "f update: empty batch");
  f.scale_by(1.0 - eta * tau);
  Vec w_data = Vec::Constant(data_pts.rows(), tau / data_pts.rows());
  Vec w_gen = Vec::Constant(sampler_pts.rows(), -tau / sampler_pts.rows());
  if (phi_data)
    f.add_feature_masses(*phi_data, w_data);
  else
    f.add_point_masses(data_pts, w_data);
  if (phi_sampler)
    f.add_feature_masses(*phi_sampler, w_gen);
  else
    f.add_point_masses(sampler_pts, w_gen);
}

/// nu <- (1 - shrink tau) nu + (tau/lambda)(mean_b k(gen_b, .)
///        - mean_b exp(nu(base_b)) k(base_b, .)).
/// exp(nu) is evaluated at the pre-update nu. The shrink defaults to zero,
/// matching the plain update rule; training enables a small value so that
/// stale terms decay and size truncation drops old mass instead of new
/// updates (whose coefficients otherwise shrink with the step size).
inline void apply_nu_update(RkhsFunction& nu, double tau, double lambda,
                            const Mat& sampler_pts, const Mat& base_pts,
                            const Mat* phi_sampler = nullptr,
                            const Mat* phi_base = nullptr,
                            double shrink = 0.0) {
  require(tau > 0.0 && lambda > 0.0, "nu update: tau and lambda must be positive");
  require(shrink >= 0.0 && shrink * tau < 1.0, "nu update: bad shrink");
  require(sampler_pts.rows() >= 1 && base_pts.rows() >= 1,
          "nu update: empty batch");
  Vec nu_vals = phi_base ? nu.eval_features(*phi_base) : nu.eval_rows(base_pts);
  Vec weights(base_pts.rows());
  for (int b = 0; b < base_pts.rows(); ++b) {
    double e = std::exp(nu_vals[b]);
    if (!std::isfinite(e))
      throw NuDivergenceError("nu update: exp(nu(x')) overflowed (nu = " +
                              std::to_string(nu_vals[b]) + ")");
    weights[b] = -(tau / lambda) * e / base_pts.rows();
  }
  if (shrink > 0.0) nu.scale_by(1.0 - shrink * tau);
  Vec w_gen =
      Vec::Constant(sampler_pts.rows(), (tau / lambda) / sampler_pts.rows());
  if (phi_sampler)
    nu.add_feature_masses(*phi_sampler, w_gen);
  else
    nu.add_point_masses(sampler_pts, w_gen);
  if (phi_base)
    nu.add_feature_masses(*phi_base, weights);
  else
    nu.add_point_masses(base_pts, weights);
}

}  // namespace detail

/// Single functional gradient step on f; increments the iteration counter.
inline void update_f(InnerLoopState& state, const Mat& data_pts,
                     const Mat& sampler_pts, double eta) {
  detail::apply_f_update(state.f, state.schedule.tau(state.k), eta, data_pts,
                         sampler_pts);
  ++state.k;
}

inline void update_f(InnerLoopState& state, const Vec& data_point,
                     const Vec& sampler_point, double eta) {
  update_f(state, Mat(data_point.transpose()), Mat(sampler_point.transpose()),
           eta);
}

/// Single functional gradient step on nu; increments the iteration counter.
inline void update_nu(InnerLoopState& state, const Mat& sampler_pts,
                      const Mat& base_pts, double lambda) {
  detail::apply_nu_update(state.nu, state.schedule.tau(state.k), lambda,
                          sampler_pts, base_pts);
  ++state.k;
}

inline void update_nu(InnerLoopState& state, const Vec& sampler_point,
                      const Vec& base_point, double lambda) {
  update_nu(state, Mat(sampler_point.transpose()), Mat(base_point.transpose()),
            lambda);
}

struct InnerLoopOptions {
  int iters = 1;
  int batch = 1;
  double eta = 0.5;
  double lambda = 1.0;
  int max_expansion_terms = 0;  // 0 disables truncation
  double nu_shrink = 0.0;       // small L2 shrink on nu; 0 = plain update rule
  /// Optional cache of feature rows for every data row (random-feature
  /// backend with a map shared by f and nu).
  const Mat* data_features = nullptr;
  /// Optional 1 x r mean feature row of the full dataset; when set, f's data
  /// term uses the exact empirical embedding instead of a minibatch.
  const Mat* mean_data_feature = nullptr;
  std::function<void(int, const InnerLoopState&)> observer;
};

struct InnerLoopCounters {
  long iterations = 0;
  long peak_f_terms = 0;
  long peak_nu_terms = 0;
  double f_dropped_norm = 0.0;
  double nu_dropped_norm = 0.0;
};

/// Stochastic functional gradient ascent on (f, nu): per iteration draw a
/// noise batch through the sampler, a base batch from p0 and a data minibatch,
/// then apply both updates with a shared step size.
inline InnerLoopCounters run_inner_loop(InnerLoopState& state, const Mat& data,
                                        TransportSampler& sampler,
                                        const ReferenceMeasure& base,
                                        const InnerLoopOptions& opt, Rng& rng) {
  require(opt.iters >= 1, "run_inner_loop: need at least one iteration");
  require(opt.batch >= 1, "run_inner_loop: batch must be >= 1");
  require(data.rows() >= 1, "run_inner_loop: empty data");
  const int n = static_cast<int>(data.rows());
  const bool shared_features =
      state.f.backend() == RkhsBackend::random_feature &&
      state.nu.backend() == RkhsBackend::random_feature &&
      state.f.feature_map().seed == state.nu.feature_map().seed;
  InnerLoopCounters counters;
  for (int it = 0; it < opt.iters; ++it) {
    double tau = state.schedule.tau(state.k);
    Mat gen = sampler.forward(sampler.draw_noise(opt.batch));
    Mat base_pts = base.sample_rows(opt.batch, rng);
    Mat batch(opt.batch, data.cols());
    std::vector<int> idx(static_cast<size_t>(opt.batch));
    for (int b = 0; b < opt.batch; ++b) {
      idx[static_cast<size_t>(b)] = rng.uniform_int(n);
      batch.row(b) = data.row(idx[static_cast<size_t>(b)]);
    }
    if (shared_features) {
      const auto& map = state.f.feature_map();
      Mat phi_gen = map.features_rows(gen);
      Mat phi_base = map.features_rows(base_pts);
      Mat phi_batch;
      if (opt.data_features) {
        phi_batch.resize(opt.batch, map.feature_count());
        for (int b = 0; b < opt.batch; ++b)
          phi_batch.row(b) = opt.data_features->row(idx[static_cast<size_t>(b)]);
      } else {
        phi_batch = map.features_rows(batch);
      }
      if (opt.mean_data_feature)
        detail::apply_f_update(state.f, tau, opt.eta, batch.topRows(1), gen,
                               opt.mean_data_feature, &phi_gen);
      else
        detail::apply_f_update(state.f, tau, opt.eta, batch, gen, &phi_batch,
                               &phi_gen);
      detail::apply_nu_update(state.nu, tau, opt.lambda, gen, base_pts,
                              &phi_gen, &phi_base, opt.nu_shrink);
    } else {
      detail::apply_f_update(state.f, tau, opt.eta, batch, gen);
      detail::apply_nu_update(state.nu, tau, opt.lambda, gen, base_pts, nullptr,
                              nullptr, opt.nu_shrink);
    }
    ++state.k;
    counters.iterations++;
    counters.peak_f_terms = std::max<long>(counters.peak_f_terms, state.f.term_count());
    counters.peak_nu_terms = std::max<long>(counters.peak_nu_terms, state.nu.term_count());
    if (opt.max_expansion_terms > 0) {
      if (state.f.term_count() > opt.max_expansion_terms) {
        auto t = truncate_expansion(state.f, opt.max_expansion_terms);
        state.f = std::move(t.fn);
        counters.f_dropped_norm += t.dropped_norm;
      }
      if (state.nu.term_count() > opt.max_expansion_terms) {
        auto t = truncate_expansion(state.nu, opt.max_expansion_terms);
        state.nu = std::move(t.fn);
        counters.nu_dropped_norm += t.dropped_norm;
      }
    }
    if (opt.observer) opt.observer(it, state);
  }
  return counters;
}

}  // namespace kexpfam
