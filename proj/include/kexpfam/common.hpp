#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace kexpfam {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Caller broke an operation's precondition (dimension mismatch, bad flag).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure at runtime: overflow, divergence, non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A size guard tripped before an expensive computation.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data cannot support the requested statistic (e.g. zero variance).
class DegenerateDataError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Step size violates a stability bound (eta * tau >= 1).
class StepSizeError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// exp(nu(x')) overflowed: the dual function diverged.
class NuDivergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

/// Thread cap for internal data-parallel loops. KEXP_THREADS overrides.
inline int max_threads() {
  if (const char* env = std::getenv("KEXP_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Runs fn(begin, end) over disjoint chunks covering [0, n). Each index's
/// outputs must depend only on the index, so results are identical for any
/// thread count.
inline void parallel_for(int n, const std::function<void(int, int)>& fn) {
  if (n <= 0) return;
  int threads = std::min(max_threads(), n);
  if (threads <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads) - 1);
  int chunk = (n + threads - 1) / threads;
  for (int t = 1; t < threads; ++t) {
    int begin = t * chunk;
    int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(fn, begin, end);
  }
  fn(0, std::min(n, chunk));
  for (auto& th : pool) th.join();
}

}  // namespace kexpfam
