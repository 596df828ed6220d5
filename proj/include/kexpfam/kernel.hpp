#pragma once

#include "kexpfam/common.hpp"
#include "kexpfam/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace kexpfam {

/// Gaussian RBF kernel k(x, x') = exp(-||x - x'||^2 / bandwidth_sq).
/// Note there is no factor 2 in the exponent; the median heuristic output is
/// used as bandwidth_sq directly.
struct KernelSpec {
  double bandwidth_sq = 1.0;
  int input_dim = 1;

  KernelSpec() = default;
  KernelSpec(double bw_sq, int dim) : bandwidth_sq(bw_sq), input_dim(dim) {
    require(bw_sq > 0.0, "KernelSpec: bandwidth_sq must be positive");
    require(dim >= 1, "KernelSpec: input_dim must be positive");
  }
};

inline double eval_kernel(const KernelSpec& spec, const Vec& x, const Vec& y) {
  require(x.size() == spec.input_dim && y.size() == spec.input_dim,
          "eval_kernel: dimension mismatch");
  return std::exp(-(x - y).squaredNorm() / spec.bandwidth_sq);
}

/// d k(x, y) / dx = -(2 / bandwidth_sq) (x - y) k(x, y).
inline Vec grad_kernel_x(const KernelSpec& spec, const Vec& x, const Vec& y) {
  require(x.size() == spec.input_dim && y.size() == spec.input_dim,
          "grad_kernel_x: dimension mismatch");
  double k = std::exp(-(x - y).squaredNorm() / spec.bandwidth_sq);
  return (-2.0 / spec.bandwidth_sq) * k * (x - y);
}

/// Median of pairwise squared Euclidean distances, used as bandwidth_sq.
/// Above `subsample_cap` rows a seeded subsample keeps the pair count O(cap^2).
inline double median_bandwidth(const Mat& samples, uint64_t subsample_seed = 0,
                               int subsample_cap = 2000) {
  const int n = static_cast<int>(samples.rows());
  require(n >= 2, "median_bandwidth: need at least 2 samples");
  require(subsample_cap >= 2, "median_bandwidth: cap must be >= 2");

  Mat pool;
  if (n > subsample_cap) {
    Rng rng(derive_seed(subsample_seed, "median_subsample"));
    std::vector<int> idx(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i)
      std::swap(idx[static_cast<size_t>(i)],
                idx[static_cast<size_t>(rng.uniform_int(i + 1))]);
    pool.resize(subsample_cap, samples.cols());
    for (int i = 0; i < subsample_cap; ++i)
      pool.row(i) = samples.row(idx[static_cast<size_t>(i)]);
  } else {
    pool = samples;
  }

  const int m = static_cast<int>(pool.rows());
  std::vector<double> d2;
  d2.reserve(static_cast<size_t>(m) * static_cast<size_t>(m - 1) / 2);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      d2.push_back((pool.row(i) - pool.row(j)).squaredNorm());

  std::sort(d2.begin(), d2.end());
  if (d2.back() <= 0.0)
    throw DegenerateDataError("median_bandwidth: all pairwise distances are zero");
  size_t k = d2.size();
  double med = (k % 2 == 1) ? d2[k / 2] : 0.5 * (d2[k / 2 - 1] + d2[k / 2]);
  if (med <= 0.0) {
    // Median landed on duplicated points; fall back to the smallest nonzero
    // distance so the kernel stays well defined.
    for (double v : d2)
      if (v > 0.0) return v;
  }
  return med;
}

/// Product of RBF kernels over consecutive column blocks. A single block is a
/// plain RBF; two blocks realize the conditional kernel
/// k((x,y),(x',y')) = k_x(x,x') k_y(y,y').
struct ProductKernel {
  std::vector<KernelSpec> blocks;

  ProductKernel() = default;
  explicit ProductKernel(KernelSpec spec) : blocks{spec} {}
  explicit ProductKernel(std::vector<KernelSpec> b) : blocks(std::move(b)) {
    require(!blocks.empty(), "ProductKernel: needs at least one block");
  }

  int input_dim() const {
    int d = 0;
    for (const auto& b : blocks) d += b.input_dim;
    return d;
  }

  /// Combined exponent: sum_b ||x_b - y_b||^2 / bw_b.
  double scaled_sq_dist(const Vec& x, const Vec& y) const {
    double acc = 0.0;
    int off = 0;
    for (const auto& b : blocks) {
      acc += (x.segment(off, b.input_dim) - y.segment(off, b.input_dim))
                 .squaredNorm() /
             b.bandwidth_sq;
      off += b.input_dim;
    }
    return acc;
  }

  double eval(const Vec& x, const Vec& y) const {
    require(x.size() == input_dim() && y.size() == input_dim(),
            "ProductKernel::eval: dimension mismatch");
    return std::exp(-scaled_sq_dist(x, y));
  }

  Vec grad_x(const Vec& x, const Vec& y) const {
    require(x.size() == input_dim() && y.size() == input_dim(),
            "ProductKernel::grad_x: dimension mismatch");
    double k = std::exp(-scaled_sq_dist(x, y));
    Vec g(input_dim());
    int off = 0;
    for (const auto& b : blocks) {
      g.segment(off, b.input_dim) =
          (-2.0 / b.bandwidth_sq) * k *
          (x.segment(off, b.input_dim) - y.segment(off, b.input_dim));
      off += b.input_dim;
    }
    return g;
  }

  /// Kernel values between every row of P and the point x.
  Vec eval_rows(const Mat& P, const Vec& x) const {
    require(P.cols() == input_dim() && x.size() == input_dim(),
            "ProductKernel::eval_rows: dimension mismatch");
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(P.rows());
    int off = 0;
    for (const auto& b : blocks) {
      acc += (P.middleCols(off, b.input_dim).rowwise() -
              x.segment(off, b.input_dim).transpose())
                 .rowwise()
                 .squaredNorm()
                 .array() /
             b.bandwidth_sq;
      off += b.input_dim;
    }
    return (-acc).exp().matrix();
  }
};

/// Dense kernel matrix K(i, j) = k(X.row(i), Y.row(j)). Row assembly is
/// data-parallel; every entry depends only on its indices.
inline Mat gram_matrix(const ProductKernel& kernel, const Mat& X, const Mat& Y) {
  require(X.cols() == kernel.input_dim() && Y.cols() == kernel.input_dim(),
          "gram_matrix: dimension mismatch");
  Mat K(X.rows(), Y.rows());
  parallel_for(static_cast<int>(X.rows()), [&](int begin, int end) {
    for (int i = begin; i < end; ++i)
      K.row(i) = kernel.eval_rows(Y, X.row(i).transpose()).transpose();
  });
  return K;
}

inline Mat gram_matrix(const KernelSpec& spec, const Mat& X, const Mat& Y) {
  return gram_matrix(ProductKernel(spec), X, Y);
}

/// Random Fourier features for the RBF kernel: Phi_i(x) = scale * cos(w_i.x + p_i)
/// with w drawn from the kernel's spectral density and p uniform on [0, 2*pi).
/// E[Phi(x).Phi(x')] = k(x, x').
struct RandomFeatureMap {
  Mat frequencies;  // r x d
  Vec phases;       // r
  double scale = 0.0;
  uint64_t seed = 0;

  int feature_count() const { return static_cast<int>(frequencies.rows()); }
  int input_dim() const { return static_cast<int>(frequencies.cols()); }

  Vec features(const Vec& x) const {
    require(x.size() == input_dim(), "RandomFeatureMap::features: dimension mismatch");
    return scale * ((frequencies * x + phases).array().cos()).matrix();
  }

  /// n x r feature matrix for row-wise inputs.
  Mat features_rows(const Mat& X) const {
    require(X.cols() == input_dim(), "RandomFeatureMap: dimension mismatch");
    Mat A = X * frequencies.transpose();
    A.rowwise() += phases.transpose();
    return scale * A.array().cos().matrix();
  }

  /// Gradient of beta . Phi(x) with respect to x.
  Vec weighted_grad(const Vec& beta, const Vec& x) const {
    require(beta.size() == feature_count() && x.size() == input_dim(),
            "RandomFeatureMap::weighted_grad: dimension mismatch");
    Vec s = (frequencies * x + phases).array().sin().matrix();
    return -scale * frequencies.transpose() * beta.cwiseProduct(s);
  }
};

/// Draws features whose block frequencies follow N(0, 2 / bandwidth_sq I),
/// the spectral density of exp(-||.||^2 / bandwidth_sq).
inline RandomFeatureMap sample_feature_map(const ProductKernel& kernel, int r,
                                           uint64_t seed) {
  require(r >= 1, "sample_feature_map: r must be >= 1");
  Rng rng(derive_seed(seed, "random_features"));
  RandomFeatureMap map;
  map.seed = seed;
  map.frequencies.resize(r, kernel.input_dim());
  int off = 0;
  for (const auto& b : kernel.blocks) {
    double sd = std::sqrt(2.0 / b.bandwidth_sq);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < b.input_dim; ++j)
        map.frequencies(i, off + j) = sd * rng.normal();
    off += b.input_dim;
  }
  map.phases.resize(r);
  for (int i = 0; i < r; ++i)
    map.phases[i] = 2.0 * std::numbers::pi * rng.uniform();
  map.scale = std::sqrt(2.0 / static_cast<double>(r));
  return map;
}

inline RandomFeatureMap sample_feature_map(const KernelSpec& spec, int r,
                                           uint64_t seed) {
  return sample_feature_map(ProductKernel(spec), r, seed);
}

}  // namespace kexpfam
