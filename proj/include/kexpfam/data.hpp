#pragma once

#include "kexpfam/common.hpp"
#include "kexpfam/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace kexpfam {

/// Per-column affine normalization: z = (x - mean) / scale.
struct Normalization {
  Vec mean;
  Vec scale;

  Mat apply(const Mat& X) const {
    require(X.cols() == mean.size(), "Normalization: dimension mismatch");
    Mat Z = X;
    Z.rowwise() -= mean.transpose();
    Z.array().rowwise() /= scale.transpose().array();
    return Z;
  }

  Mat invert(const Mat& Z) const {
    require(Z.cols() == mean.size(), "Normalization: dimension mismatch");
    Mat X = Z;
    X.array().rowwise() *= scale.transpose().array();
    X.rowwise() += mean.transpose();
    return X;
  }

  /// Restricted to a column subset (for conditional y-only transforms).
  Normalization subset(const std::vector<int>& cols) const {
    Normalization sub;
    sub.mean.resize(static_cast<int>(cols.size()));
    sub.scale.resize(static_cast<int>(cols.size()));
    for (size_t i = 0; i < cols.size(); ++i) {
      sub.mean[static_cast<int>(i)] = mean[cols[i]];
      sub.scale[static_cast<int>(i)] = scale[cols[i]];
    }
    return sub;
  }
};

/// Fits population mean/sd per column. Zero-variance columns are an error.
inline Normalization fit_normalization(const Mat& X) {
  require(X.rows() >= 1, "fit_normalization: empty data");
  Normalization norm;
  norm.mean = X.colwise().mean();
  norm.scale.resize(X.cols());
  for (int j = 0; j < X.cols(); ++j) {
    double v = (X.col(j).array() - norm.mean[j]).square().mean();
    if (v <= 0.0)
      throw DegenerateDataError("fit_normalization: zero-variance column " +
                                std::to_string(j));
    norm.scale[j] = std::sqrt(v);
  }
  return norm;
}

/// Row-major sample matrix with optional conditional column split and the
/// normalization fitted on whatever split produced it.
struct Dataset {
  Mat samples;  // n x d, one sample per row
  std::vector<int> x_cols;
  std::vector<int> y_cols;
  std::optional<Normalization> normalization;
  uint64_t seed = 0;

  int n() const { return static_cast<int>(samples.rows()); }
  int dim() const { return static_cast<int>(samples.cols()); }
  bool conditional() const { return !x_cols.empty() && !y_cols.empty(); }

  Mat columns(const std::vector<int>& cols) const {
    Mat out(samples.rows(), static_cast<int>(cols.size()));
    for (size_t i = 0; i < cols.size(); ++i) {
      require(cols[i] >= 0 && cols[i] < dim(), "Dataset: column out of range");
      out.col(static_cast<int>(i)) = samples.col(cols[i]);
    }
    return out;
  }

  Mat x_matrix() const { return columns(x_cols); }
  Mat y_matrix() const { return columns(y_cols); }
};

/// Three concentric circles of radii {1, 3, 5} with radial Gaussian noise;
/// coordinates beyond the first two are pure noise.
inline Dataset gen_ring(int n, int d, double noise_sd, uint64_t seed) {
  require(n >= 3, "gen_ring: n must be >= 3");
  require(d >= 2, "gen_ring: d must be >= 2");
  require(noise_sd >= 0.0, "gen_ring: noise_sd must be nonnegative");
  static const double radii[3] = {1.0, 3.0, 5.0};
  Rng rng(derive_seed(seed, "gen_ring"));
  Dataset ds;
  ds.seed = seed;
  ds.samples.resize(n, d);
  for (int i = 0; i < n; ++i) {
    double r = radii[rng.uniform_int(3)] + noise_sd * rng.normal();
    double theta = 2.0 * std::numbers::pi * rng.uniform();
    ds.samples(i, 0) = r * std::cos(theta);
    ds.samples(i, 1) = r * std::sin(theta);
    for (int j = 2; j < d; ++j) ds.samples(i, j) = noise_sd * rng.normal();
  }
  return ds;
}

/// Mixture of d Gaussians, component i centered at the i-th standard basis
/// vertex of the unit hypercube, isotropic sd `component_sd`.
inline Dataset gen_grid(int n, int d, uint64_t seed, double component_sd = 0.1) {
  require(n >= 1, "gen_grid: n must be >= 1");
  require(d >= 1, "gen_grid: d must be >= 1");
  Rng rng(derive_seed(seed, "gen_grid"));
  Dataset ds;
  ds.seed = seed;
  ds.samples.resize(n, d);
  for (int i = 0; i < n; ++i) {
    int c = rng.uniform_int(d);
    for (int j = 0; j < d; ++j)
      ds.samples(i, j) = (j == c ? 1.0 : 0.0) + component_sd * rng.normal();
  }
  return ds;
}

/// Two-moons Gibbs potential. The log-sum term acts on the first coordinate.
inline double two_moons_potential(double x1, double x2) {
  double r = std::sqrt(x1 * x1 + x2 * x2);
  double ring = 0.5 * std::pow((r - 2.0) / 0.4, 2.0);
  double m1 = -0.5 * std::pow((x1 - 2.0) / 0.6, 2.0);
  double m2 = -0.5 * std::pow((x1 + 2.0) / 0.6, 2.0);
  double m = std::max(m1, m2);
  return ring - (m + std::log(std::exp(m1 - m) + std::exp(m2 - m)));
}

/// Unnormalized log-density log exp(-U(x)) of the two-moons target.
inline double two_moons_log_unnormalized(const Vec& x) {
  require(x.size() == 2, "two_moons: 2-d only");
  return -two_moons_potential(x[0], x[1]);
}

/// Exact draws from exp(-U) by rejection sampling against a centered Gaussian
/// envelope on the box [-4, 4]^2. The envelope constant is calibrated on a
/// grid with a safety margin.
inline Dataset gen_two_moons(int n, uint64_t seed) {
  require(n >= 1, "gen_two_moons: n must be >= 1");
  const double box = 4.0;
  const double env_sd = 2.0;

  // Envelope bound M >= max target / proposal over the box.
  double log_m = -std::numeric_limits<double>::infinity();
  const int grid = 400;
  for (int i = 0; i <= grid; ++i) {
    for (int j = 0; j <= grid; ++j) {
      double x1 = -box + 2.0 * box * i / grid;
      double x2 = -box + 2.0 * box * j / grid;
      double lt = -two_moons_potential(x1, x2);
      double lp = -0.5 * (x1 * x1 + x2 * x2) / (env_sd * env_sd) -
                  std::log(2.0 * std::numbers::pi * env_sd * env_sd);
      log_m = std::max(log_m, lt - lp);
    }
  }
  log_m += std::log(1.5);  // margin for inter-grid maxima

  Rng rng(derive_seed(seed, "gen_two_moons"));
  Dataset ds;
  ds.seed = seed;
  ds.samples.resize(n, 2);
  long proposals = 0, accepted = 0;
  while (accepted < n) {
    double x1 = env_sd * rng.normal();
    double x2 = env_sd * rng.normal();
    ++proposals;
    if (proposals > 4000 && accepted < proposals / 1000)
      throw NumericError("gen_two_moons: envelope rejection rate above 0.999");
    if (std::abs(x1) > box || std::abs(x2) > box) continue;
    double lt = -two_moons_potential(x1, x2);
    double lp = -0.5 * (x1 * x1 + x2 * x2) / (env_sd * env_sd) -
                std::log(2.0 * std::numbers::pi * env_sd * env_sd);
    if (std::log(rng.uniform_pos()) < lt - lp - log_m) {
      ds.samples(accepted, 0) = x1;
      ds.samples(accepted, 1) = x2;
      ++accepted;
    }
  }
  return ds;
}

/// Writes a numeric CSV with header; values round-trip through decimal.
inline void save_csv(const std::string& path, const Mat& X,
                     const std::vector<std::string>& header = {}) {
  std::ofstream out(path);
  if (!out) throw ResourceError("save_csv: cannot open " + path);
  char buf[64];
  for (int j = 0; j < X.cols(); ++j) {
    if (j) out << ',';
    if (!header.empty())
      out << header[static_cast<size_t>(j)];
    else
      out << 'x' << j;
  }
  out << '\n';
  for (int i = 0; i < X.rows(); ++i) {
    for (int j = 0; j < X.cols(); ++j) {
      if (j) out << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", X(i, j));
      out << buf;
    }
    out << '\n';
  }
}

struct CsvFile {
  std::vector<std::string> header;
  Mat values;
};

inline CsvFile read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("read_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ContractError("read_csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  CsvFile csv;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) csv.header.push_back(cell);
  }
  const size_t cols = csv.header.size();
  std::vector<double> flat;
  size_t rows = 0;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        flat.push_back(v);
      } catch (const std::exception&) {
        throw ContractError("read_csv: non-numeric cell at row " +
                            std::to_string(lineno) + ", column " +
                            std::to_string(col + 1) + " of " + path);
      }
      ++col;
    }
    if (col != cols)
      throw ContractError("read_csv: row " + std::to_string(lineno) + " has " +
                          std::to_string(col) + " cells, expected " +
                          std::to_string(cols));
    ++rows;
  }
  csv.values.resize(static_cast<int>(rows), static_cast<int>(cols));
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j)
      csv.values(static_cast<int>(i), static_cast<int>(j)) = flat[i * cols + j];
  return csv;
}

/// Loads a CSV, splits 50/50 by seeded permutation and (optionally) fits
/// normalization on the train half, applying it to both halves.
inline std::pair<Dataset, Dataset> load_csv(const std::string& path,
                                            std::vector<int> x_cols,
                                            std::vector<int> y_cols,
                                            bool normalize, uint64_t split_seed) {
  CsvFile csv = read_csv(path);
  const int n = static_cast<int>(csv.values.rows());
  require(n >= 2, "load_csv: need at least 2 rows to split");

  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(split_seed, "load_csv_split"));
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[static_cast<size_t>(i)],
              perm[static_cast<size_t>(rng.uniform_int(i + 1))]);

  const int n_train = n - n / 2;
  Dataset train, test;
  train.seed = split_seed;
  test.seed = split_seed;
  train.x_cols = x_cols;
  train.y_cols = y_cols;
  test.x_cols = std::move(x_cols);
  test.y_cols = std::move(y_cols);
  train.samples.resize(n_train, csv.values.cols());
  test.samples.resize(n - n_train, csv.values.cols());
  for (int i = 0; i < n_train; ++i)
    train.samples.row(i) = csv.values.row(perm[static_cast<size_t>(i)]);
  for (int i = n_train; i < n; ++i)
    test.samples.row(i - n_train) = csv.values.row(perm[static_cast<size_t>(i)]);

  if (normalize) {
    Normalization norm = fit_normalization(train.samples);
    train.samples = norm.apply(train.samples);
    test.samples = norm.apply(test.samples);
    train.normalization = norm;
    test.normalization = norm;
  }
  return {std::move(train), std::move(test)};
}

}  // namespace kexpfam
