// The cutoff weight w and its transforms: w_hat, the Mellin transform, the
// repetition weight w~, g(y) = w_hat(4 pi e y^2), h(y) = w_hat(2 pi e y^2),
// their Fourier transforms and the Moebius-averaged kernels h1, h2.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "qdl/arith.hpp"

namespace qdl {

using Mp50 = boost::multiprecision::cpp_bin_float_50;

struct WeightFunction {
  std::string name;
  std::function<double(double)> w;
  std::function<double(double)> w_hat;
  std::function<double(double)> mellin;  // real s > 0
  double w_log_moment = 0.0;             // int_0^inf w(x) log x dx
  double w_second_moment = 0.0;          // int_R x^2 w(x) dx
  bool is_even = true;
  bool smooth_closed_forms = false;
  // 50-digit versions used where double precision cannot resolve a residual.
  std::function<Mp50(const Mp50&)> w_mp;
  std::function<Mp50(const Mp50&)> mellin_mp;

  double w_hat0() const { return w_hat(0.0); }
};

/// w(x) = e^{-pi x^2}, self-dual under the chosen Fourier convention.
WeightFunction gaussian_weight();

/// Builds a registered weight by name ("gaussian").
WeightFunction make_weight(const std::string& name);

/// w~(x) = sum_{n >= 1} w(n^2 x). Throws DomainError for x = 0.
double wtilde(const WeightFunction& w, double x);

double g_transform(const WeightFunction& w, double y);  // w_hat(4 pi e y^2)
double h_transform(const WeightFunction& w, double y);  // w_hat(2 pi e y^2)

/// Cosine transform of an even, rapidly decaying function f, tabulated on
/// {0} U log-spaced nodes in [t_min, t_max] and interpolated by cubic
/// Hermite; zero beyond t_max.
class FourierTable {
 public:
  FourierTable(std::function<double(double)> f, double t_max = 50.0, int min_nodes = 2000,
               double interp_tol = 1e-9);

  double operator()(double t) const;
  /// Direct adaptive quadrature, relative tolerance 1e-10.
  double direct(double t) const;
  double t_max() const { return t_max_; }
  double support_radius() const { return radius_; }
  std::size_t nodes() const { return t_.size(); }
  /// Largest |value| over the nodes.
  double max_abs() const { return max_abs_; }
  /// Worst interpolation error seen at the refinement check points.
  double interpolation_error() const { return interp_err_; }

 private:
  double derivative(double t) const;
  void tabulate(int n);

  std::function<double(double)> f_;
  double t_max_, radius_ = 0.0, max_abs_ = 0.0, interp_err_ = 0.0;
  std::vector<double> t_, v_, dv_;
};

/// g_hat and h_hat for a given weight, built once and shared.
struct WeightTransforms {
  WeightFunction weight;
  std::shared_ptr<const FourierTable> g_hat;
  std::shared_ptr<const FourierTable> h_hat;
};

WeightTransforms build_transforms(const WeightFunction& w);

class MobiusKernels {
 public:
  MobiusKernels(const WeightTransforms& tr, const SieveTables& tables, std::int64_t s_cutoff);

  std::int64_t s_cutoff() const { return s_cutoff_; }
  /// h1(x) = (3 zeta(2)/w_hat(0)) sum_{s odd} mu(s)/s (g_hat(2sx) - g_hat(sx)).
  double h1(double x) const;
  /// h2(x) = (3 zeta(2)/w_hat(0)) sum_{s odd} mu(s)/s^2 (g(x/2s)/2 - g(x/s)),
  /// summed as sum_{s <= S} mu(s)/s^2 (k(x/s) + 1/2) - M/2, M = 4/(3 zeta(2)).
  double h2(double x) const;
  /// Bound on the Moebius truncation error of h1(x) + h2(x).
  double tail_estimate(double x) const;
  double prefactor() const { return prefactor_; }
  const WeightTransforms& transforms() const { return tr_; }
  /// k(y) = g(y/2)/2 - g(y), the kernel inside h2.
  double k(double y) const;
  /// The odd squarefree s <= s_cutoff and mu(s).
  const std::vector<std::int64_t>& odd_s() const { return s_; }
  const std::vector<int>& odd_mu() const { return mu_; }

 private:
  WeightTransforms tr_;
  std::int64_t s_cutoff_;
  double prefactor_, m2_, kappa_;
  std::vector<std::int64_t> s_;
  std::vector<int> mu_;
};

/// Builds the kernels; with validate = true throws NumericalError when the
/// tail estimate exceeds 1e-6 anywhere on a log-spaced sample of [1, 100].
MobiusKernels build_mobius_kernels(const WeightTransforms& tr, const SieveTables& tables,
                                   std::int64_t s_cutoff, bool validate = true);

/// |w~(1/X) - (sqrt X / 2) int w(t^2) dt + w(0)/2|, evaluated in 50 digits.
double poisson_identity_check(const WeightFunction& w, double X);

/// int_R w(t^2) dt and int_R w_hat(t^2) dt by independent quadratures.
double integral_w_of_square(const WeightFunction& w);
double integral_w_hat_of_square(const WeightFunction& w);

}  // namespace qdl
