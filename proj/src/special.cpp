#include "qdl/special.hpp"

#include <array>
#include <cmath>
#include <string>

#include "qdl/numeric.hpp"

namespace qdl {

namespace {

// Exact rationals B_{2k}, k = 1..16.
constexpr std::array<long double, 16> kBernoulli = {
    1.0L / 6.0L,
    -1.0L / 30.0L,
    1.0L / 42.0L,
    -1.0L / 30.0L,
    5.0L / 66.0L,
    -691.0L / 2730.0L,
    7.0L / 6.0L,
    -3617.0L / 510.0L,
    43867.0L / 798.0L,
    -174611.0L / 330.0L,
    854513.0L / 138.0L,
    -236364091.0L / 2730.0L,
    8553103.0L / 6.0L,
    -23749461029.0L / 870.0L,
    8615841276005.0L / 14322.0L,
    -7709321041217.0L / 510.0L,
};

long double factorial(int n) {
  long double f = 1.0L;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

double bernoulli_2k(int k) {
  if (k < 1 || k > 16) throw DomainError("bernoulli_2k: k out of range");
  return static_cast<double>(kBernoulli[k - 1]);
}

double digamma(double x) {
  if (!(x > 0.0)) throw DomainError("digamma: requires x > 0");
  long double acc = 0.0L;
  long double y = x;
  while (y < 12.0L) {
    acc -= 1.0L / y;
    y += 1.0L;
  }
  const long double inv2 = 1.0L / (y * y);
  long double pw = inv2;
  long double series = 0.0L;
  for (int k = 1; k <= 10; ++k) {
    series += kBernoulli[k - 1] / (2 * k) * pw;
    pw *= inv2;
  }
  return static_cast<double>(acc + std::log(y) - 0.5L / y - series);
}

Complex log_gamma(Complex z) {
  if (!(z.real() > 0.0)) throw DomainError("log_gamma: requires Re z > 0");
  using CL = std::complex<long double>;
  CL w(z.real(), z.imag());
  CL shift = 0.0L;
  while (std::abs(w) < 20.0L || w.real() < 10.0L) {
    shift += std::log(w);
    w += 1.0L;
  }
  const CL inv = 1.0L / w;
  const CL inv2 = inv * inv;
  CL pw = inv;
  CL series = 0.0L;
  for (int k = 1; k <= 12; ++k) {
    series += kBernoulli[k - 1] / static_cast<long double>(2 * k * (2 * k - 1)) * pw;
    pw *= inv2;
  }
  const long double half_log_2pi = 0.91893853320467274178032973640562L;
  CL r = (w - 0.5L) * std::log(w) - w + half_log_2pi + series - shift;
  return {static_cast<double>(r.real()), static_cast<double>(r.imag())};
}

Complex hurwitz_zeta(Complex s, double a) {
  if (!(a > 0.0 && a <= 1.0)) throw DomainError("hurwitz_zeta: requires 0 < a <= 1");
  if (!(s.real() > -3.0)) throw DomainError("hurwitz_zeta: requires Re s > -3");
  if (s == Complex(1.0, 0.0)) throw DomainError("hurwitz_zeta: pole at s = 1");
  using CL = std::complex<long double>;
  const CL sl(s.real(), s.imag());
  const long double abs_s = std::abs(sl);
  int n_terms = static_cast<int>(std::ceil((abs_s + 30.0L) / kPi)) + 2;
  for (int attempt = 0; attempt < 6; ++attempt, n_terms *= 2) {
    CL direct = 0.0L;
    long double abs_sum = 0.0L;
    for (int n = 0; n < n_terms; ++n) {
      const CL t = std::exp(-sl * std::log(static_cast<long double>(n) + a));
      direct += t;
      abs_sum += std::abs(t);
    }
    const long double x = static_cast<long double>(n_terms) + a;
    const CL x_pow = std::exp(-sl * std::log(x));  // x^{-s}
    CL tail = x * x_pow / (sl - 1.0L) + 0.5L * x_pow;
    CL rising = sl;  // s (s+1) ... (s + 2k - 2)
    CL pw = x_pow / x;
    const long double inv_x2 = 1.0L / (x * x);
    CL last = 0.0L;
    for (int k = 1; k <= 16; ++k) {
      const CL term = kBernoulli[k - 1] / factorial(2 * k) * rising * pw;
      if (k == 16) {
        last = term;  // first omitted correction
        break;
      }
      tail += term;
      rising *= (sl + static_cast<long double>(2 * k - 1)) * (sl + static_cast<long double>(2 * k));
      pw *= inv_x2;
    }
    const CL result = direct + tail;
    const long double mag = std::abs(result);
    if (std::abs(last) < 1e-14L * std::max(mag, 1e-300L)) {
      // Scale against max(|result|, 1): a genuine zero is not a precision loss.
      if (abs_sum > 1e6L * std::max(mag, 1.0L))
        throw NumericalError("hurwitz_zeta: cancellation exceeds 1e6 at s = (" +
                             std::to_string(s.real()) + ", " + std::to_string(s.imag()) + ")");
      return {static_cast<double>(result.real()), static_cast<double>(result.imag())};
    }
  }
  throw NumericalError("hurwitz_zeta: Euler-Maclaurin did not converge");
}

double zeta_real(double s) {
  if (s == 1.0) throw DomainError("zeta_real: pole at s = 1");
  return hurwitz_zeta(Complex(s, 0.0), 1.0).real();
}

double zeta_prime_real(double s) {
  if (s == 1.0) throw DomainError("zeta_prime_real: pole at s = 1");
  const int n_terms = 40;
  long double sum = 0.0L;
  for (int n = 2; n < n_terms; ++n) sum -= std::log(static_cast<long double>(n)) * std::pow(static_cast<long double>(n), -s);
  const long double x = n_terms;
  const long double lx = std::log(x);
  const long double xs = std::pow(x, -static_cast<long double>(s));
  sum += -x * xs * lx / (s - 1.0L) - x * xs / ((s - 1.0L) * (s - 1.0L));
  sum += -0.5L * lx * xs;
  // d/ds of B_{2k}/(2k)! * P_k(s) x^{-s-2k+1}, P_k(s) = s (s+1) ... (s+2k-2)
  long double pw = xs / x;
  for (int k = 1; k <= 15; ++k) {
    long double p = 1.0L, dlog = 0.0L;
    for (int j = 0; j <= 2 * k - 2; ++j) {
      p *= (s + j);
      dlog += 1.0L / (s + j);
    }
    sum += kBernoulli[k - 1] / factorial(2 * k) * pw * p * (dlog - lx);
    pw /= x * x;
  }
  return static_cast<double>(sum);
}

double euler_gamma_em() {
  const int n = 50;
  long double h = 0.0L;
  for (int k = 1; k <= n; ++k) h += 1.0L / k;
  long double g = h - std::log(static_cast<long double>(n)) - 0.5L / n;
  long double pw = 1.0L / (static_cast<long double>(n) * n);
  for (int k = 1; k <= 10; ++k) {
    g += kBernoulli[k - 1] / (2 * k) * pw;
    pw /= static_cast<long double>(n) * n;
  }
  return static_cast<double>(g);
}

}  // namespace qdl
