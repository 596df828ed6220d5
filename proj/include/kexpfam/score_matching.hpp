#pragma once

#include "kexpfam/common.hpp"
#include "kexpfam/data.hpp"
#include "kexpfam/kernel.hpp"
#include "kexpfam/reference.hpp"

#include <cmath>
#include <string>

namespace kexpfam {

/// Score-matching kernel exponential family fit. The natural parameter is
/// restricted to span{d_j k(x_i, .)}, so the fit solves an (n*d) x (n*d)
/// regularized system over the derivative-feature Gram matrix.
struct ScoreMatchingModel {
  Mat support;        // n x d data points
  Vec coefficients;   // n*d, ordered (sample-major, coordinate-minor)
  KernelSpec kernel;
  double lambda = 1.0;
  double eta = 0.0;
  ReferenceMeasure base;
  long gram_entries = 0;  // (n*d)^2, recorded for cost instrumentation

  int n() const { return static_cast<int>(support.rows()); }
  int dim() const { return static_cast<int>(support.cols()); }
};

namespace sm_detail {

/// Assembles the derivative-feature Gram matrix
///   G[(i,j),(m,l)] = d^2 k(u, v) / du_j dv_l at u = x_i, v = x_m
/// for k(u, v) = exp(-a ||u - v||^2), a = 1 / bandwidth_sq.
inline Mat derivative_gram(const Mat& X, const KernelSpec& kernel) {
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  const double a = 1.0 / kernel.bandwidth_sq;
  Mat G(n * d, n * d);
  parallel_for(n, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      for (int m = 0; m < n; ++m) {
        Vec delta = (X.row(i) - X.row(m)).transpose();
        double k = std::exp(-a * delta.squaredNorm());
        for (int j = 0; j < d; ++j)
          for (int l = 0; l < d; ++l) {
            double v = -4.0 * a * a * delta[j] * delta[l] * k;
            if (j == l) v += 2.0 * a * k;
            G(i * d + j, m * d + l) = v;
          }
      }
    }
  });
  return G;
}

/// h[(i,j)] = (1/n) sum_m sum_l d^3 k(u, v) / du_j dv_l^2 at u = x_i, v = x_m,
/// the projection of the second-derivative part of delta-hat onto the features.
inline Vec second_derivative_projection(const Mat& X, const KernelSpec& kernel) {
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  const double a = 1.0 / kernel.bandwidth_sq;
  Vec h = Vec::Zero(n * d);
  parallel_for(n, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      for (int m = 0; m < n; ++m) {
        Vec delta = (X.row(i) - X.row(m)).transpose();
        double sq = delta.squaredNorm();
        double k = std::exp(-a * sq);
        double factor = 4.0 * a * a * k * (d + 2.0 - 2.0 * a * sq);
        for (int j = 0; j < d; ++j) h[i * d + j] += factor * delta[j];
      }
    }
  });
  return h / static_cast<double>(n);
}

}  // namespace sm_detail

/// Fits the regularized score-matching objective
///   J(f) = (lambda^2/2) <f, C f> + lambda <f, delta> + (eta/2) ||f||^2
/// restricted to the derivative-feature span. Stationarity gives
///   (lambda^2/n G^2 + eta G) a = -lambda (G b + h)
/// with b[(i,j)] = (1/n) d_j log p0(x_i).
inline ScoreMatchingModel fit_score_matching(const Dataset& data,
                                             const KernelSpec& kernel,
                                             double eta,
                                             const ReferenceMeasure& base,
                                             double lambda = 1.0) {
  const Mat& X = data.samples;
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  require(n >= 1, "fit_score_matching: empty data");
  require(d == kernel.input_dim && d == base.dim(),
          "fit_score_matching: dimension mismatch");
  require(eta > 0.0, "fit_score_matching: eta must be positive");
  if (static_cast<long>(n) * d > 8000)
    throw ResourceError("fit_score_matching: n*d exceeds the dense-solve guard (8000)");

  Mat G = sm_detail::derivative_gram(X, kernel);
  Vec h = sm_detail::second_derivative_projection(X, kernel);
  Vec b(n * d);
  for (int i = 0; i < n; ++i) {
    Vec gl = base.grad_log_density(X.row(i).transpose());
    for (int j = 0; j < d; ++j) b[i * d + j] = gl[j] / n;
  }

  Mat A = (lambda * lambda / n) * (G * G) + eta * G;
  A.diagonal().array() += 1e-10;
  Vec rhs = -lambda * (G * b + h);
  Eigen::LDLT<Mat> solver(A);
  Vec coef = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !coef.allFinite())
    throw NumericError("fit_score_matching: system not positive definite");

  ScoreMatchingModel model;
  model.support = X;
  model.coefficients = coef;
  model.kernel = kernel;
  model.lambda = lambda;
  model.eta = eta;
  model.base = base;
  model.gram_entries = static_cast<long>(n) * d * n * d;
  return model;
}

/// f(x) = sum_{i,j} a_{ij} d_j k(u, x)|_{u = x_i}.
inline double eval_score_matching_f(const ScoreMatchingModel& model, const Vec& x) {
  require(x.size() == model.dim(), "eval_score_matching_f: dimension mismatch");
  const double a = 1.0 / model.kernel.bandwidth_sq;
  double acc = 0.0;
  for (int i = 0; i < model.n(); ++i) {
    Vec delta = model.support.row(i).transpose() - x;
    double k = std::exp(-a * delta.squaredNorm());
    double dot = 0.0;
    for (int j = 0; j < model.dim(); ++j)
      dot += model.coefficients[i * model.dim() + j] * delta[j];
    acc += -2.0 * a * k * dot;
  }
  return acc;
}

inline Vec grad_score_matching_f(const ScoreMatchingModel& model, const Vec& x) {
  require(x.size() == model.dim(), "grad_score_matching_f: dimension mismatch");
  const double a = 1.0 / model.kernel.bandwidth_sq;
  const int d = model.dim();
  Vec g = Vec::Zero(d);
  for (int i = 0; i < model.n(); ++i) {
    Vec delta = model.support.row(i).transpose() - x;
    double k = std::exp(-a * delta.squaredNorm());
    Vec ai = model.coefficients.segment(i * d, d);
    double dot = ai.dot(delta);
    g += k * (2.0 * a * ai - 4.0 * a * a * dot * delta);
  }
  return g;
}

/// Quadratic objective J(f) for a coefficient vector in the feature span;
/// used to check stationarity of the fit.
inline double score_matching_objective(const ScoreMatchingModel& model,
                                       const Vec& coef) {
  const int n = model.n();
  const int d = model.dim();
  require(coef.size() == n * d, "score_matching_objective: bad coefficient size");
  Mat G = sm_detail::derivative_gram(model.support, model.kernel);
  Vec h = sm_detail::second_derivative_projection(model.support, model.kernel);
  Vec b(n * d);
  for (int i = 0; i < n; ++i) {
    Vec gl = model.base.grad_log_density(model.support.row(i).transpose());
    for (int j = 0; j < d; ++j) b[i * d + j] = gl[j] / n;
  }
  Vec Gc = G * coef;
  double quad = 0.5 * model.lambda * model.lambda / n * Gc.squaredNorm();
  double lin = model.lambda * (coef.dot(G * b) + coef.dot(h));
  double reg = 0.5 * model.eta * coef.dot(Gc);
  return quad + lin + reg;
}

}  // namespace kexpfam
