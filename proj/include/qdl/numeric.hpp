// Numerical plumbing shared by every module: error types, compensated
// summation, adaptive quadrature and deterministic chunked parallelism.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qdl {

/// Raised when a numerical routine cannot certify its own accuracy target.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a documented precondition is violated.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kEulerGammaLiteral = 0.57721566490153286060651209008240243;
inline const double kTwoPiE = 2.0 * kPi * std::exp(1.0);

/// Neumaier's variant of Kahan summation. Order-insensitive to ~1 ulp of the
/// total for the series we feed it.
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(double v) : sum_(v) {}

  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  CompensatedSum& operator+=(const CompensatedSum& o) {
    add(o.sum_);
    add(o.comp_);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct QuadOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-10;
  int max_intervals = 4000;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

using RealFn = std::function<double(double)>;

/// Globally adaptive 21-point Gauss-Kronrod on [a, b]. Throws NumericalError
/// when the subdivision cap is reached before the tolerance is met.
QuadResult integrate(const RealFn& f, double a, double b, const QuadOptions& opt = {});

/// Same, split at every interior breakpoint (sorted, clipped to (a, b)).
QuadResult integrate(const RealFn& f, double a, double b, std::vector<double> breakpoints,
                     const QuadOptions& opt = {});

/// Fixed n-point Gauss-Legendre rule mapped onto [a, b]; n in {20, 30, 64}.
double gauss_legendre(const RealFn& f, double a, double b, int n = 30);

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
void gauss_legendre_rule(int n, std::vector<double>& nodes, std::vector<double>& weights);

// ---------------------------------------------------------------------------
// Deterministic parallelism: the work is cut into chunks whose boundaries
// depend only on the problem size, so reductions are bit-stable across
// thread counts.

void set_thread_count(int n);  // 0 = hardware concurrency
int thread_count();

template <class R, class F>
std::vector<R> parallel_chunks(std::size_t n, std::size_t chunk, F&& f) {
  if (chunk == 0) chunk = 1;
  const std::size_t nchunks = (n + chunk - 1) / chunk;
  std::vector<R> out(nchunks);
  const int threads = std::max(1, std::min<int>(thread_count(), static_cast<int>(nchunks)));
  auto worker = [&](int tid) {
    for (std::size_t c = static_cast<std::size_t>(tid); c < nchunks; c += threads) {
      const std::size_t b = c * chunk;
      out[c] = f(b, std::min(n, b + chunk));
    }
  };
  if (threads <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  return out;
}

}  // namespace qdl
