#pragma once

#include "kexpfam/common.hpp"
#include "kexpfam/data.hpp"
#include "kexpfam/kernel.hpp"
#include "kexpfam/reference.hpp"
#include "kexpfam/rng.hpp"
#include "kexpfam/trainer.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace kexpfam {

struct MmdReport {
  double mmd_biased = 0.0;    // V-statistic estimate of squared MMD, >= 0
  double mmd_unbiased = 0.0;  // U-statistic estimate (may be negative)
  KernelSpec kernel;
  int n_x = 0;
  int n_y = 0;
};

/// Biased (V-statistic) and unbiased (U-statistic) estimates of squared MMD.
inline MmdReport mmd(const Mat& X, const Mat& Y, const KernelSpec& kernel) {
  require(X.cols() == kernel.input_dim && Y.cols() == kernel.input_dim,
          "mmd: dimension mismatch");
  const int n = static_cast<int>(X.rows());
  const int m = static_cast<int>(Y.rows());
  require(n >= 2 && m >= 2, "mmd: need at least 2 samples per set");
  ProductKernel k(kernel);
  Mat kxx = gram_matrix(k, X, X);
  Mat kyy = gram_matrix(k, Y, Y);
  Mat kxy = gram_matrix(k, X, Y);
  double sxx = kxx.sum();
  double syy = kyy.sum();
  double sxy = kxy.sum();
  MmdReport report;
  report.kernel = kernel;
  report.n_x = n;
  report.n_y = m;
  double biased = sxx / (double(n) * n) + syy / (double(m) * m) -
                  2.0 * sxy / (double(n) * m);
  report.mmd_biased = biased < 0.0 ? 0.0 : biased;
  double diag_x = kxx.diagonal().sum();
  double diag_y = kyy.diagonal().sum();
  report.mmd_unbiased = (sxx - diag_x) / (double(n) * (n - 1)) +
                        (syy - diag_y) / (double(m) * (m - 1)) -
                        2.0 * sxy / (double(n) * m);
  if (!std::isfinite(report.mmd_unbiased) || !std::isfinite(report.mmd_biased))
    throw NumericError("mmd: non-finite estimate");
  return report;
}

/// MMD with the kernel bandwidth set by the median heuristic on the pooled
/// inputs, decoupling the metric from any training kernel.
inline MmdReport mmd_median_kernel(const Mat& X, const Mat& Y,
                                   uint64_t seed = 0) {
  Mat pooled(X.rows() + Y.rows(), X.cols());
  pooled << X, Y;
  KernelSpec kernel(median_bandwidth(pooled, seed),
                    static_cast<int>(X.cols()));
  return mmd(X, Y, kernel);
}

namespace detail {

/// Uniform tensor grid over a box, with trapezoid weights.
struct QuadGrid {
  Mat points;   // g x d
  Vec log_w;    // log quadrature weights
};

inline QuadGrid make_quad_grid(const Vec& lo, const Vec& hi, int points_per_dim) {
  const int d = static_cast<int>(lo.size());
  require(d >= 1 && d <= 2, "quadrature: dimension must be 1 or 2");
  require(points_per_dim >= 2, "quadrature: need at least 2 points per dim");
  std::vector<Vec> axes;
  std::vector<Vec> wts;
  for (int j = 0; j < d; ++j) {
    require(hi[j] > lo[j], "quadrature: empty box");
    Vec ax(points_per_dim);
    Vec w = Vec::Constant(points_per_dim,
                          (hi[j] - lo[j]) / (points_per_dim - 1));
    w[0] *= 0.5;
    w[points_per_dim - 1] *= 0.5;
    for (int i = 0; i < points_per_dim; ++i)
      ax[i] = lo[j] + (hi[j] - lo[j]) * i / (points_per_dim - 1);
    axes.push_back(ax);
    wts.push_back(w);
  }
  QuadGrid grid;
  if (d == 1) {
    grid.points.resize(points_per_dim, 1);
    grid.log_w.resize(points_per_dim);
    for (int i = 0; i < points_per_dim; ++i) {
      grid.points(i, 0) = axes[0][i];
      grid.log_w[i] = std::log(wts[0][i]);
    }
  } else {
    grid.points.resize(points_per_dim * points_per_dim, 2);
    grid.log_w.resize(points_per_dim * points_per_dim);
    int idx = 0;
    for (int i = 0; i < points_per_dim; ++i)
      for (int j = 0; j < points_per_dim; ++j, ++idx) {
        grid.points(idx, 0) = axes[0][i];
        grid.points(idx, 1) = axes[1][j];
        grid.log_w[idx] = std::log(wts[0][i]) + std::log(wts[1][j]);
      }
  }
  return grid;
}

inline double logsumexp(const Vec& v) {
  double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

/// Default box: mean +/- 6 sd per coordinate, covering > 1 - 1e-6 of p0.
inline void default_box(const ReferenceMeasure& base, Vec& lo, Vec& hi) {
  Vec sd = base.variance().cwiseSqrt();
  lo = base.mean - 6.0 * sd;
  hi = base.mean + 6.0 * sd;
}

}  // namespace detail

/// Trapezoid-rule evaluation of A(lambda f) = log Int exp(lambda f) p0 via
/// log-sum-exp; restricted to dimension <= 2.
inline double log_partition_quadrature(
    const std::function<double(const Vec&)>& f, const ReferenceMeasure& base,
    const Vec& lo, const Vec& hi, int points_per_dim, double lambda = 1.0) {
  if (base.dim() > 2)
    throw ContractError("log_partition_quadrature: dimension > 2 unsupported");
  detail::QuadGrid grid = detail::make_quad_grid(lo, hi, points_per_dim);
  Vec terms(grid.points.rows());
  for (int i = 0; i < grid.points.rows(); ++i) {
    Vec x = grid.points.row(i).transpose();
    double t = lambda * f(x) + base.log_density(x) + grid.log_w[i];
    if (std::isnan(t))
      throw NumericError("log_partition_quadrature: non-finite integrand");
    terms[i] = t;
  }
  return detail::logsumexp(terms);
}

inline double log_partition_quadrature(
    const std::function<double(const Vec&)>& f, const ReferenceMeasure& base,
    int points_per_dim = 2001, double lambda = 1.0) {
  Vec lo, hi;
  detail::default_box(base, lo, hi);
  return log_partition_quadrature(f, base, lo, hi, points_per_dim, lambda);
}

struct ImportanceEstimate {
  double estimate = 0.0;
  double std_err = 0.0;
};

/// A(lambda f) = log E_p0[exp(lambda f)] by Monte Carlo with a delta-method
/// standard error.
inline ImportanceEstimate log_partition_importance(
    const std::function<double(const Vec&)>& f, const ReferenceMeasure& base,
    int n_mc, uint64_t seed, double lambda = 1.0) {
  require(n_mc >= 100, "log_partition_importance: n_mc must be >= 100");
  Rng rng(derive_seed(seed, "log_partition_is"));
  Vec vals(n_mc);
  for (int i = 0; i < n_mc; ++i) vals[i] = lambda * f(base.sample(rng));
  double m = vals.maxCoeff();
  if (!std::isfinite(m))
    throw NumericError(
        "log_partition_importance: all weights underflowed; use quadrature or "
        "larger n_mc");
  Eigen::ArrayXd w = (vals.array() - m).exp();
  double mean_w = w.mean();
  double var_w = (w - mean_w).square().sum() / std::max(1, n_mc - 1);
  ImportanceEstimate out;
  out.estimate = m + std::log(mean_w);
  out.std_err = std::sqrt(var_w / n_mc) / mean_w;
  if (!std::isfinite(out.estimate))
    throw NumericError(
        "log_partition_importance: estimate underflowed; use quadrature or "
        "larger n_mc");
  return out;
}

struct NllReport {
  double mean_nll = 0.0;
  double std_err = 0.0;
  std::vector<ImportanceEstimate> partition_estimates;  // A_x per test row
};

/// Held-out conditional negative log-likelihood
///   -[lambda f(x,y) + log p0(y) - A_x(lambda f)]
/// with A_x estimated per condition by importance sampling from p0(y).
/// Reported in the original data units (normalization Jacobian applied).
inline NllReport nll_conditional(const TrainedModel& model, const Dataset& test,
                                 int n_mc, uint64_t seed) {
  require(model.mode == TrainMode::conditional,
          "nll_conditional: conditional models only");
  require(n_mc >= 100, "nll_conditional: n_mc must be >= 100");
  Mat all = model.normalization ? model.normalization->apply(test.samples)
                                : test.samples;
  Dataset scratch;
  scratch.samples = all;
  scratch.x_cols = model.x_cols;
  scratch.y_cols = model.y_cols;
  Mat xs = scratch.x_matrix();
  Mat ys = scratch.y_matrix();
  const int n = static_cast<int>(xs.rows());
  const int dx = static_cast<int>(xs.cols());
  const int dy = static_cast<int>(ys.cols());
  require(n >= 1, "nll_conditional: empty test set");

  double jacobian = 0.0;
  if (model.normalization) {
    Normalization ny = model.normalization->subset(model.y_cols);
    for (int j = 0; j < ny.scale.size(); ++j) jacobian += std::log(ny.scale[j]);
  }

  const double lambda = model.config.lambda;
  NllReport report;
  report.partition_estimates.resize(static_cast<size_t>(n));
  Vec nll(n);
  parallel_for(n, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      Vec x = xs.row(i).transpose();
      Vec xy(dx + dy);
      xy << x, ys.row(i).transpose();
      auto f_given_x = [&](const Vec& y) {
        Vec pt(dx + dy);
        pt << x, y;
        return model.f.eval(pt);
      };
      ImportanceEstimate ax = log_partition_importance(
          f_given_x, model.base, n_mc,
          derive_seed(seed, "ax_" + std::to_string(i)), lambda);
      report.partition_estimates[static_cast<size_t>(i)] = ax;
      double log_py = lambda * model.f.eval(xy) +
                      model.base.log_density(ys.row(i).transpose()) -
                      ax.estimate;
      nll[i] = -log_py + jacobian;
    }
  });
  report.mean_nll = nll.mean();
  double var = (nll.array() - report.mean_nll).square().sum() /
               std::max(1, n - 1);
  report.std_err = std::sqrt(var / n);
  if (!std::isfinite(report.mean_nll))
    throw NumericError("nll_conditional: non-finite NLL");
  return report;
}

}  // namespace kexpfam
