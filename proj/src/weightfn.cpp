#include "qdl/weightfn.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "qdl/numeric.hpp"
#include "qdl/special.hpp"

namespace qdl {

WeightFunction gaussian_weight() {
  WeightFunction w;
  w.name = "gaussian";
  w.w = [](double x) { return std::exp(-kPi * x * x); };
  w.w_hat = [](double xi) { return std::exp(-kPi * xi * xi); };
  w.mellin = [](double s) {
    if (!(s > 0.0)) throw DomainError("mellin: requires s > 0");
    return 0.5 * std::pow(kPi, -0.5 * s) * std::tgamma(0.5 * s);
  };
  // d/ds M w(s) at s = 1 equals M w(1) (psi(1/2) - log pi) / 2.
  w.w_log_moment = 0.25 * (digamma(0.5) - std::log(kPi));
  w.w_second_moment = 1.0 / (2.0 * kPi);
  w.smooth_closed_forms = true;
  w.w_mp = [](const Mp50& x) {
    return Mp50(exp(-boost::math::constants::pi<Mp50>() * x * x));
  };
  w.mellin_mp = [](const Mp50& s) {
    const Mp50 pi = boost::math::constants::pi<Mp50>();
    return Mp50(pow(pi, -s / 2) * boost::math::tgamma(Mp50(s / 2)) / 2);
  };
  return w;
}

WeightFunction make_weight(const std::string& name) {
  if (name == "gaussian") return gaussian_weight();
  throw DomainError("unknown weight '" + name + "' (expected gaussian)");
}

double wtilde(const WeightFunction& w, double x) {
  if (x == 0.0) throw DomainError("wtilde: diverges at x = 0");
  const double ax = std::fabs(x);
  CompensatedSum s;
  for (long long n = 1;; ++n) {
    const double arg = static_cast<double>(n) * static_cast<double>(n) * ax;
    const double term = w.w(arg);
    s += term;
    if (arg > 1.0 && std::fabs(term) <= 1e-16 * std::fabs(s.value())) break;
    if (arg > 1.0 && s.value() == 0.0) break;
  }
  return s.value();
}

double g_transform(const WeightFunction& w, double y) { return w.w_hat(4.0 * kPi * std::exp(1.0) * y * y); }
double h_transform(const WeightFunction& w, double y) { return w.w_hat(2.0 * kPi * std::exp(1.0) * y * y); }

namespace {

// Smallest R with |f(y)| < thr |f(0)| for y >= R, assuming eventual monotone decay.
double find_support_radius(const std::function<double(double)>& f, double thr) {
  const double f0 = std::fabs(f(0.0));
  double hi = 1.0;
  while (std::fabs(f(hi)) >= thr * f0) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::fabs(f(mid)) >= thr * f0 ? lo : hi) = mid;
  }
  return hi;
}

constexpr double kTableStart = 1e-3;

}  // namespace

FourierTable::FourierTable(std::function<double(double)> f, double t_max, int min_nodes,
                           double interp_tol)
    : f_(std::move(f)), t_max_(t_max) {
  radius_ = find_support_radius(f_, 1e-20);
  int n = std::max(min_nodes, 16);
  for (int attempt = 0;; ++attempt, n *= 2) {
    tabulate(n);
    // Compare against direct quadrature at log-midpoints of a subset of cells.
    interp_err_ = 0.0;
    for (std::size_t i = 1; i + 1 < t_.size(); i += 7) {
      const double tm = std::sqrt(t_[i] * t_[i + 1]);
      interp_err_ = std::max(interp_err_, std::fabs((*this)(tm) - direct(tm)));
    }
    if (interp_err_ < interp_tol) break;
    if (attempt == 4) throw NumericalError("FourierTable: interpolation did not reach tolerance");
  }
}

double FourierTable::direct(double t) const {
  t = std::fabs(t);
  std::vector<double> bps;
  const int panels = std::max(8, static_cast<int>(std::ceil(4.0 * radius_ * t)));
  for (int i = 1; i < panels; ++i) bps.push_back(radius_ * i / panels);
  QuadOptions opt;
  opt.abs_tol = 1e-17;
  opt.rel_tol = 1e-12;
  opt.max_intervals = 20000;
  return 2.0 * integrate([&](double y) { return f_(y) * std::cos(2.0 * kPi * y * t); }, 0.0, radius_, bps, opt).value;
}

double FourierTable::derivative(double t) const {
  std::vector<double> bps;
  const int panels = std::max(8, static_cast<int>(std::ceil(4.0 * radius_ * t)));
  for (int i = 1; i < panels; ++i) bps.push_back(radius_ * i / panels);
  QuadOptions opt;
  opt.abs_tol = 1e-17;
  opt.rel_tol = 1e-12;
  opt.max_intervals = 20000;
  return -4.0 * kPi *
         integrate([&](double y) { return y * f_(y) * std::sin(2.0 * kPi * y * t); }, 0.0, radius_, bps, opt)
             .value;
}

void FourierTable::tabulate(int n) {
  t_.assign(static_cast<std::size_t>(n), 0.0);
  const double l0 = std::log(kTableStart), l1 = std::log(t_max_);
  for (int i = 1; i < n; ++i) t_[i] = std::exp(l0 + (l1 - l0) * (i - 1) / (n - 2));
  t_[n - 1] = t_max_;
  v_.assign(t_.size(), 0.0);
  dv_.assign(t_.size(), 0.0);
  auto parts = parallel_chunks<int>(t_.size(), 64, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      v_[i] = direct(t_[i]);
      dv_[i] = i == 0 ? 0.0 : derivative(t_[i]);
    }
    return 0;
  });
  max_abs_ = 0.0;
  for (double v : v_) max_abs_ = std::max(max_abs_, std::fabs(v));
}

double FourierTable::operator()(double t) const {
  t = std::fabs(t);
  if (t >= t_max_) return 0.0;
  std::size_t i;
  if (t < kTableStart) {
    i = 0;
  } else {
    const double l0 = std::log(kTableStart), l1 = std::log(t_max_);
    const auto n = static_cast<double>(t_.size());
    i = static_cast<std::size_t>((std::log(t) - l0) / (l1 - l0) * (n - 2.0)) + 1;
    i = std::min(i, t_.size() - 2);
    while (i > 0 && t_[i] > t) --i;
    while (i + 2 < t_.size() && t_[i + 1] < t) ++i;
  }
  const double a = t_[i], b = t_[i + 1], h = b - a;
  const double s = (t - a) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * v_[i] + h10 * h * dv_[i] + h01 * v_[i + 1] + h11 * h * dv_[i + 1];
}

WeightTransforms build_transforms(const WeightFunction& w) {
  WeightTransforms tr;
  tr.weight = w;
  tr.g_hat = std::make_shared<FourierTable>([w](double y) { return g_transform(w, y); });
  tr.h_hat = std::make_shared<FourierTable>([w](double y) { return h_transform(w, y); });
  return tr;
}

MobiusKernels::MobiusKernels(const WeightTransforms& tr, const SieveTables& tables, std::int64_t s_cutoff)
    : tr_(tr), s_cutoff_(s_cutoff) {
  if (s_cutoff < 1) throw DomainError("MobiusKernels: s_cutoff must be >= 1");
  if (s_cutoff > tables.limit) throw DomainError("MobiusKernels: s_cutoff exceeds the sieve limit");
  const double zeta2 = zeta_real(2.0);
  prefactor_ = 3.0 * zeta2 / tr_.weight.w_hat0();
  m2_ = 4.0 / (3.0 * zeta2);
  const double c = 4.0 * kPi * std::exp(1.0);
  kappa_ = (1.0 / 32.0 + 1.0) * 2.0 * kPi * kPi * tr_.weight.w_second_moment * c * c;
  for (std::int64_t s = 1; s <= s_cutoff; s += 2) {
    const int m = tables.mu(s);
    if (m == 0) continue;
    s_.push_back(s);
    mu_.push_back(m);
  }
}

double MobiusKernels::k(double y) const {
  const auto& w = tr_.weight;
  return 0.5 * g_transform(w, 0.5 * y) - g_transform(w, y);
}

double MobiusKernels::h1(double x) const {
  const double a = std::fabs(x);
  if (a == 0.0) throw DomainError("h1: x must be nonzero");
  const auto& gh = *tr_.g_hat;
  CompensatedSum acc;
  for (std::size_t i = 0; i < s_.size(); ++i) {
    const double s = static_cast<double>(s_[i]);
    if (s * a >= gh.t_max()) break;
    acc += mu_[i] / s * (gh(2.0 * s * a) - gh(s * a));
  }
  return prefactor_ * acc.value();
}

double MobiusKernels::h2(double x) const {
  const double a = std::fabs(x);
  const double half_w0 = 0.5 * tr_.weight.w_hat0();
  CompensatedSum acc;
  for (std::size_t i = 0; i < s_.size(); ++i) {
    const double s = static_cast<double>(s_[i]);
    const double y = a / s;
    // Remaining terms are below kappa y^4 / s^2 each; stop once negligible.
    if (kappa_ * y * y * y * y * s / 5.0 < 1e-17) break;
    acc += mu_[i] / (s * s) * (k(y) + half_w0);
  }
  return prefactor_ * (acc.value() - half_w0 * m2_);
}

double MobiusKernels::tail_estimate(double x) const {
  const double a = std::fabs(x);
  const double S = static_cast<double>(s_cutoff_);
  const auto& gh = *tr_.g_hat;
  double t1 = 1e-12 * std::log(gh.t_max() / std::min(a, 1.0) + 1.0);
  if (a > 0.0 && S * a < gh.t_max()) t1 += 2.0 * gh.max_abs() * (std::log(gh.t_max() / (a * S)) + 1.0 / S);
  const double t2 = kappa_ * a * a * a * a / (5.0 * S * S * S * S * S);
  return prefactor_ * (t1 + t2);
}

MobiusKernels build_mobius_kernels(const WeightTransforms& tr, const SieveTables& tables,
                                   std::int64_t s_cutoff, bool validate) {
  MobiusKernels k(tr, tables, s_cutoff);
  if (validate) {
    for (int i = 0; i <= 40; ++i) {
      const double x = std::pow(100.0, i / 40.0);
      if (k.tail_estimate(x) > 1e-6)
        throw NumericalError("build_mobius_kernels: s_cutoff " + std::to_string(s_cutoff) +
                             " too small (tail estimate " + std::to_string(k.tail_estimate(x)) +
                             " at x = " + std::to_string(x) + ")");
    }
  }
  return k;
}

double poisson_identity_check(const WeightFunction& w, double X) {
  if (!(X >= 1.0)) throw DomainError("poisson_identity_check: requires X >= 1");
  if (!w.w_mp || !w.mellin_mp) throw DomainError("poisson_identity_check: weight lacks 50-digit forms");
  const Mp50 x = Mp50(1) / Mp50(X);
  Mp50 lhs = 0;
  for (long long n = 1;; ++n) {
    const Mp50 nn = Mp50(n) * n;
    const Mp50 term = w.w_mp(nn * x);
    lhs += term;
    if (nn * x > 1 && term < Mp50("1e-60") * lhs) break;
  }
  // int_R w(t^2) dt = int_0^inf x^{-1/2} w(x) dx = M w(1/2).
  const Mp50 rhs = sqrt(Mp50(X)) / 2 * w.mellin_mp(Mp50(0.5)) - w.w_mp(Mp50(0)) / 2;
  return static_cast<double>(abs(lhs - rhs));
}

namespace {

double integral_of_square(const std::function<double(double)>& f) {
  auto sq = [&](double t) { return f(t * t); };
  const double R = find_support_radius(sq, 1e-22);
  QuadOptions opt;
  opt.abs_tol = 1e-15;
  opt.rel_tol = 1e-13;
  return 2.0 * integrate(sq, 0.0, R, opt).value;
}

}  // namespace

double integral_w_of_square(const WeightFunction& w) { return integral_of_square(w.w); }
double integral_w_hat_of_square(const WeightFunction& w) { return integral_of_square(w.w_hat); }

}  // namespace qdl
