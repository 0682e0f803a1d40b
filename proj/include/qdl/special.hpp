// Special functions evaluated from first principles: Bernoulli numbers,
// digamma, complex log-gamma, the Riemann and Hurwitz zeta functions.
#pragma once

#include <complex>

namespace qdl {

using Complex = std::complex<double>;

/// B_{2k} for 1 <= k <= 16.
double bernoulli_2k(int k);

/// psi(x) for real x > 0 (recurrence lift to x >= 12, then Stirling series).
double digamma(double x);

/// Principal-branch-continuous log Gamma(z) for Re z > 0.
Complex log_gamma(Complex z);

/// Hurwitz zeta(s, a) = sum_{n>=0} (n + a)^{-s} by Euler-Maclaurin.
/// Requires Re s > -3, s != 1 and 0 < a <= 1.
Complex hurwitz_zeta(Complex s, double a);

/// Riemann zeta and its derivative for real s != 1 (Euler-Maclaurin).
double zeta_real(double s);
double zeta_prime_real(double s);

/// Euler's constant from the Euler-Maclaurin expansion of H_N - log N.
double euler_gamma_em();

}  // namespace qdl
