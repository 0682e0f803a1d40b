// Test functions phi: even, Schwartz, with compactly supported Fourier
// transform phi_hat(u) = int phi(x) e^{-2 pi i x u} dx.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qdl {

/// One kernel family. Implementations must be even in x and u and use |x|.
class Kernel {
 public:
  virtual ~Kernel() = default;
  virtual double phi(double x) const = 0;
  virtual double phi_hat(double u) const = 0;
  /// Order-th derivative of phi_hat at u, or nullopt when phi_hat is not
  /// that often differentiable at u. The default uses central differences.
  virtual std::optional<double> phi_hat_deriv(int order, double u) const;
  virtual double sigma() const = 0;
  /// |phi(x)| <= decay_constant() * |x|^{-decay_exponent()} for |x| >= 1.
  virtual double decay_exponent() const = 0;
  virtual double decay_constant() const = 0;
  /// Points in [0, sigma] where phi_hat loses smoothness (quadrature splits).
  virtual std::vector<double> breakpoints() const { return {0.0, sigma()}; }
  virtual std::string name() const = 0;
};

/// Central finite difference of order k with step ~ eps^{1/(k+2)}.
double finite_difference(const std::function<double(double)>& f, int order, double u);

/// A finite linear combination of kernels; cheap to copy.
class TestFunction {
 public:
  TestFunction() = default;
  explicit TestFunction(std::shared_ptr<const Kernel> k, double coeff = 1.0);

  double sigma() const;
  double decay_exponent() const;
  double decay_constant() const;
  double phi(double x) const;
  double phi_hat(double u) const;
  std::optional<double> phi_hat_deriv(int order, double u) const;
  /// Sorted breakpoints of all components inside [0, sigma].
  std::vector<double> breakpoints() const;
  std::string name() const;

  /// Bound on |phi(x)| for |x| >= 1 from the decay certificate.
  double decay_bound(double x) const;

  TestFunction operator+(const TestFunction& o) const;
  TestFunction operator*(double c) const;
  friend TestFunction operator*(double c, const TestFunction& f) { return f * c; }

 private:
  std::vector<std::pair<double, std::shared_ptr<const Kernel>>> terms_;
};

/// phi(x) = sigma sinc^2(sigma x), phi_hat(u) = max(0, 1 - |u|/sigma).
TestFunction fejer(double sigma);

/// phi_hat = normalized self-convolution of the triangle of half-width
/// sigma/2 (cubic B-spline on [-sigma, sigma]); phi(x) = (3 sigma/4) sinc^4(sigma x / 2).
TestFunction fejer_squared(double sigma);

/// User kernel from callables; derivatives by finite differences.
TestFunction custom_kernel(std::string name, std::function<double(double)> phi,
                           std::function<double(double)> phi_hat, double sigma,
                           double decay_exponent, double decay_constant,
                           std::vector<double> breakpoints = {});

/// Builds a kernel by name ("fejer" or "fejer_squared").
TestFunction make_kernel(const std::string& name, double sigma);

/// phi(iL/4pi) = int_{-sigma}^{sigma} e^{Lu/2} phi_hat(u) du.
double phi_at_imaginary(const TestFunction& phi, double L);

/// phi_hat(u0), phi_hat'(u0), ..., phi_hat^{(K)}(u0). Throws DomainError where
/// phi_hat is not K times differentiable at u0.
std::vector<double> taylor_at(const TestFunction& phi, double u0, int K);

/// int_a^b phi_hat(u) du, split at the kernel breakpoints.
double phi_hat_integral(const TestFunction& phi, double a, double b);

}  // namespace qdl
