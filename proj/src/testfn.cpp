#include "qdl/testfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qdl/numeric.hpp"

namespace qdl {

namespace {

double sinc(double y) {
  if (std::fabs(y) < 1e-4) {
    const double z = kPi * y;
    return 1.0 - z * z / 6.0 + z * z * z * z / 120.0;
  }
  return std::sin(kPi * y) / (kPi * y);
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

class Fejer final : public Kernel {
 public:
  explicit Fejer(double sigma) : sigma_(sigma) {}

  double phi(double x) const override {
    const double s = sinc(sigma_ * std::fabs(x));
    return sigma_ * s * s;
  }
  double phi_hat(double u) const override { return std::max(0.0, 1.0 - std::fabs(u) / sigma_); }
  std::optional<double> phi_hat_deriv(int order, double u) const override {
    const double a = std::fabs(u);
    if (order == 0) return phi_hat(u);
    if (a > sigma_) return 0.0;
    if (a == sigma_) return std::nullopt;
    if (a == 0.0) {
      if (order == 1) return 0.0;  // symmetric derivative of an even function
      return std::nullopt;
    }
    if (order == 1) return u > 0 ? -1.0 / sigma_ : 1.0 / sigma_;
    return 0.0;
  }
  double sigma() const override { return sigma_; }
  double decay_exponent() const override { return 2.0; }
  double decay_constant() const override { return 1.0 / (kPi * kPi * sigma_); }
  std::string name() const override {
    std::ostringstream os;
    os << "fejer(" << sigma_ << ")";
    return os.str();
  }

 private:
  double sigma_;
};

// Centered cubic B-spline on [-2, 2] and its derivatives in t >= 0.
double bspline(int order, double t) {
  if (t >= 2.0) return 0.0;
  if (t <= 1.0) {
    switch (order) {
      case 0: return 2.0 / 3.0 - t * t + 0.5 * t * t * t;
      case 1: return -2.0 * t + 1.5 * t * t;
      case 2: return -2.0 + 3.0 * t;
      case 3: return 3.0;
      default: return 0.0;
    }
  }
  const double r = 2.0 - t;
  switch (order) {
    case 0: return r * r * r / 6.0;
    case 1: return -0.5 * r * r;
    case 2: return r;
    case 3: return -1.0;
    default: return 0.0;
  }
}

class FejerSquared final : public Kernel {
 public:
  explicit FejerSquared(double sigma) : sigma_(sigma) {}

  double phi(double x) const override {
    const double s = sinc(0.5 * sigma_ * std::fabs(x));
    return 0.75 * sigma_ * s * s * s * s;
  }
  double phi_hat(double u) const override { return 1.5 * bspline(0, 2.0 * std::fabs(u) / sigma_); }
  std::optional<double> phi_hat_deriv(int order, double u) const override {
    const double t = 2.0 * std::fabs(u) / sigma_;
    if (order == 0) return phi_hat(u);
    if (t > 2.0) return 0.0;
    // phi_hat is C^2; the third derivative jumps at t = 0, 1, 2.
    if (order >= 3 && (t == 0.0 || t == 1.0 || t == 2.0)) return std::nullopt;
    const double sign = (order % 2 == 1 && u < 0) ? -1.0 : 1.0;
    return sign * 1.5 * std::pow(2.0 / sigma_, order) * bspline(order, t);
  }
  double sigma() const override { return sigma_; }
  double decay_exponent() const override { return 4.0; }
  double decay_constant() const override {
    const double c = 2.0 / (kPi * sigma_);
    return 0.75 * sigma_ * c * c * c * c;
  }
  std::vector<double> breakpoints() const override { return {0.0, 0.5 * sigma_, sigma_}; }
  std::string name() const override {
    std::ostringstream os;
    os << "fejer_squared(" << sigma_ << ")";
    return os.str();
  }

 private:
  double sigma_;
};

class CustomKernel final : public Kernel {
 public:
  CustomKernel(std::string name, std::function<double(double)> phi,
               std::function<double(double)> phi_hat, double sigma, double decay_exponent,
               double decay_constant, std::vector<double> breakpoints)
      : name_(std::move(name)),
        phi_(std::move(phi)),
        phi_hat_(std::move(phi_hat)),
        sigma_(sigma),
        decay_exponent_(decay_exponent),
        decay_constant_(decay_constant),
        breakpoints_(std::move(breakpoints)) {
    breakpoints_.push_back(0.0);
    breakpoints_.push_back(sigma_);
    std::sort(breakpoints_.begin(), breakpoints_.end());
    breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
  }
  double phi(double x) const override { return phi_(std::fabs(x)); }
  double phi_hat(double u) const override {
    const double a = std::fabs(u);
    return a >= sigma_ ? 0.0 : phi_hat_(a);
  }
  double sigma() const override { return sigma_; }
  double decay_exponent() const override { return decay_exponent_; }
  double decay_constant() const override { return decay_constant_; }
  std::vector<double> breakpoints() const override { return breakpoints_; }
  std::string name() const override { return name_; }

 private:
  std::string name_;
  std::function<double(double)> phi_, phi_hat_;
  double sigma_, decay_exponent_, decay_constant_;
  std::vector<double> breakpoints_;
};

}  // namespace

double finite_difference(const std::function<double(double)>& f, int order, double u) {
  if (order == 0) return f(u);
  const double h = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (order + 2)) *
                   std::max(1.0, std::fabs(u));
  double acc = 0.0;
  for (int j = 0; j <= order; ++j) {
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    acc += sign * binomial(order, j) * f(u + (0.5 * order - j) * h);
  }
  return acc / std::pow(h, order);
}

std::optional<double> Kernel::phi_hat_deriv(int order, double u) const {
  if (order == 1 && u == 0.0) return 0.0;
  return finite_difference([this](double v) { return phi_hat(v); }, order, u);
}

TestFunction::TestFunction(std::shared_ptr<const Kernel> k, double coeff) {
  if (!k) throw DomainError("TestFunction: null kernel");
  terms_.emplace_back(coeff, std::move(k));
}

double TestFunction::sigma() const {
  double s = 0.0;
  for (const auto& [c, k] : terms_)
    if (c != 0.0) s = std::max(s, k->sigma());
  return s;
}

double TestFunction::decay_exponent() const {
  double e = std::numeric_limits<double>::infinity();
  for (const auto& [c, k] : terms_)
    if (c != 0.0) e = std::min(e, k->decay_exponent());
  return std::isinf(e) ? 0.0 : e;
}

double TestFunction::decay_constant() const {
  double s = 0.0;
  for (const auto& [c, k] : terms_) s += std::fabs(c) * k->decay_constant();
  return s;
}

double TestFunction::decay_bound(double x) const {
  const double ax = std::max(1.0, std::fabs(x));
  double s = 0.0;
  for (const auto& [c, k] : terms_) s += std::fabs(c) * k->decay_constant() * std::pow(ax, -k->decay_exponent());
  return s;
}

double TestFunction::phi(double x) const {
  double s = 0.0;
  for (const auto& [c, k] : terms_) s += c * k->phi(x);
  return s;
}

double TestFunction::phi_hat(double u) const {
  double s = 0.0;
  for (const auto& [c, k] : terms_) s += c * k->phi_hat(u);
  return s;
}

std::optional<double> TestFunction::phi_hat_deriv(int order, double u) const {
  double s = 0.0;
  for (const auto& [c, k] : terms_) {
    if (c == 0.0) continue;
    const auto v = k->phi_hat_deriv(order, u);
    if (!v) return std::nullopt;
    s += c * *v;
  }
  return s;
}

std::vector<double> TestFunction::breakpoints() const {
  std::vector<double> out;
  const double s = sigma();
  for (const auto& [c, k] : terms_)
    for (double b : k->breakpoints())
      if (b >= 0.0 && b <= s) out.push_back(b);
  out.push_back(0.0);
  out.push_back(s);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string TestFunction::name() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i) os << " + ";
    if (terms_[i].first != 1.0) os << terms_[i].first << "*";
    os << terms_[i].second->name();
  }
  return os.str();
}

TestFunction TestFunction::operator+(const TestFunction& o) const {
  TestFunction r = *this;
  r.terms_.insert(r.terms_.end(), o.terms_.begin(), o.terms_.end());
  return r;
}

TestFunction TestFunction::operator*(double c) const {
  TestFunction r = *this;
  for (auto& t : r.terms_) t.first *= c;
  return r;
}

TestFunction fejer(double sigma) {
  if (!(sigma > 0.0)) throw DomainError("fejer: sigma must be positive");
  return TestFunction(std::make_shared<Fejer>(sigma));
}

TestFunction fejer_squared(double sigma) {
  if (!(sigma > 0.0)) throw DomainError("fejer_squared: sigma must be positive");
  return TestFunction(std::make_shared<FejerSquared>(sigma));
}

TestFunction custom_kernel(std::string name, std::function<double(double)> phi,
                           std::function<double(double)> phi_hat, double sigma,
                           double decay_exponent, double decay_constant,
                           std::vector<double> breakpoints) {
  if (!(sigma > 0.0)) throw DomainError("custom_kernel: sigma must be positive");
  return TestFunction(std::make_shared<CustomKernel>(std::move(name), std::move(phi),
                                                     std::move(phi_hat), sigma, decay_exponent,
                                                     decay_constant, std::move(breakpoints)));
}

TestFunction make_kernel(const std::string& name, double sigma) {
  if (name == "fejer") return fejer(sigma);
  if (name == "fejer_squared") return fejer_squared(sigma);
  throw DomainError("unknown kernel '" + name + "' (expected fejer or fejer_squared)");
}

double phi_hat_integral(const TestFunction& phi, double a, double b) {
  if (b <= a) return 0.0;
  const double s = phi.sigma();
  a = std::max(a, -s);
  b = std::min(b, s);
  if (b <= a) return 0.0;
  std::vector<double> bps;
  for (double p : phi.breakpoints()) {
    bps.push_back(p);
    bps.push_back(-p);
  }
  QuadOptions opt;
  opt.abs_tol = 1e-14;
  return integrate([&](double u) { return phi.phi_hat(u); }, a, b, bps, opt).value;
}

double phi_at_imaginary(const TestFunction& phi, double L) {
  if (!(L >= 0.0)) throw DomainError("phi_at_imaginary: L must be >= 0");
  const double s = phi.sigma();
  QuadOptions opt;
  opt.abs_tol = 1e-14;
  opt.rel_tol = 1e-13;
  const double v = integrate([&](double u) { return std::cosh(0.5 * L * u) * phi.phi_hat(u); }, 0.0, s,
                             phi.breakpoints(), opt)
                       .value;
  return 2.0 * v;
}

std::vector<double> taylor_at(const TestFunction& phi, double u0, int K) {
  if (K < 0) throw DomainError("taylor_at: K must be >= 0");
  std::vector<double> out;
  for (int k = 0; k <= K; ++k) {
    const auto v = phi.phi_hat_deriv(k, u0);
    if (!v)
      throw DomainError("taylor_at: " + phi.name() + " is not " + std::to_string(k) +
                        " times differentiable at u = " + std::to_string(u0));
    out.push_back(*v);
  }
  return out;
}

}  // namespace qdl
