#pragma once

#include "kexpfam/common.hpp"
#include "kexpfam/rng.hpp"

#include <cmath>
#include <numbers>

namespace kexpfam {

/// Diagonal Gaussian base measure p0: data mean, per-coordinate data variance
/// inflated by a scalar factor. Provides density, gradient and sampling.
struct ReferenceMeasure {
  Vec mean;
  Vec base_variance;  // per-coordinate data variance (before inflation)
  double inflation = 1.0;

  int dim() const { return static_cast<int>(mean.size()); }

  Vec variance() const { return inflation * base_variance; }

  double log_density(const Vec& x) const {
    require(x.size() == mean.size(), "ReferenceMeasure: dimension mismatch");
    double acc = 0.0;
    for (int j = 0; j < mean.size(); ++j) {
      double v = inflation * base_variance[j];
      double d = x[j] - mean[j];
      acc += -0.5 * (d * d / v + std::log(2.0 * std::numbers::pi * v));
    }
    return acc;
  }

  Vec grad_log_density(const Vec& x) const {
    require(x.size() == mean.size(), "ReferenceMeasure: dimension mismatch");
    return -(x - mean).cwiseQuotient(variance());
  }

  Vec sample(Rng& rng) const {
    Vec x(mean.size());
    for (int j = 0; j < mean.size(); ++j)
      x[j] = mean[j] + std::sqrt(inflation * base_variance[j]) * rng.normal();
    return x;
  }

  Mat sample_rows(int n, Rng& rng) const {
    Mat X(n, mean.size());
    for (int i = 0; i < n; ++i) X.row(i) = sample(rng).transpose();
    return X;
  }
};

/// Gaussian moment fit with inflated diagonal covariance (population moments).
inline ReferenceMeasure make_reference(const Mat& data, double inflation = 2.0) {
  require(data.rows() >= 1, "make_reference: data must be nonempty");
  require(inflation > 0.0, "make_reference: inflation must be positive");
  ReferenceMeasure ref;
  ref.inflation = inflation;
  ref.mean = data.colwise().mean();
  ref.base_variance.resize(data.cols());
  for (int j = 0; j < data.cols(); ++j) {
    double v = (data.col(j).array() - ref.mean[j]).square().mean();
    if (v <= 0.0)
      throw DegenerateDataError("make_reference: zero-variance coordinate " +
                                std::to_string(j));
    ref.base_variance[j] = v;
  }
  return ref;
}

}  // namespace kexpfam
