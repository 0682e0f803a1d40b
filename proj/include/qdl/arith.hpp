// Integer and prime infrastructure: Kronecker symbols, sieves, Chebyshev
// theta, harmonic numbers and the numerical constants used downstream.
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace qdl {

/// Kronecker symbol (d/n) for n >= 0. Throws DomainError on (0, 0) or n < 0.
int kronecker(long long d, long long n);

/// Trial-division squarefree test, used for inputs outside any sieve.
bool is_squarefree(long long n);

/// Deterministic Miller-Rabin for 64-bit integers.
bool is_prime(std::uint64_t n);

/// The real primitive character attached to a squarefree d != 0: chi_D with
/// fundamental discriminant D = d (d = 1 mod 4) or 4d (otherwise).
struct QuadraticCharacter {
  long long D = 1;
  long long conductor() const { return D < 0 ? -D : D; }
  int parity() const { return D < 0 ? 1 : 0; }  // a = 1 iff chi(-1) = -1
  int operator()(long long n) const { return kronecker(D, n); }
};

/// Throws DomainError unless d is squarefree and nonzero.
QuadraticCharacter character_of_squarefree(long long d);

struct SieveTables {
  std::int64_t limit = 0;
  std::vector<bool> squarefree_flags;  // index n, n in [0, limit]
  std::vector<std::int8_t> mobius;     // index n
  std::vector<std::uint32_t> primes;
  std::vector<double> log_primes;

  bool squarefree(std::int64_t n) const { return squarefree_flags[static_cast<std::size_t>(n)]; }
  int mu(std::int64_t n) const { return mobius[static_cast<std::size_t>(n)]; }
};

/// Bytes the tables for `limit` will occupy (rough upper estimate).
std::size_t sieve_memory_estimate(std::int64_t limit);

/// Throws DomainError if limit < 2 or the estimate exceeds memory_budget.
SieveTables build_sieves(std::int64_t limit, std::size_t memory_budget = std::size_t{3} << 30);

/// theta(t) = sum_{p <= t} log p.
double chebyshev_theta(double t, const SieveTables& tables);

/// H_{floor(u)} for u >= 1.
double harmonic(double u);

struct Bounded {
  double value = 0.0;
  double error = 0.0;  // tail bound or heuristic uncertainty, always >= 0
};

/// sum_{3 <= p <= cutoff} log p / (p (p^2 - 1)) with a rigorous tail bound.
Bounded prime_constant(const SieveTables& tables, std::int64_t cutoff);

/// int_2^T (theta(t) - t) / t^2 dt, summed exactly over prime gaps, with the
/// heuristic uncertainty 2 sqrt(T) (log T)^2 / T.
Bounded theta_integral(double T, const SieveTables& tables);

/// The same integral continued to infinity through Mertens' second theorem:
/// -gamma - 1 + log 2 - sum_p log p / (p (p - 1)), the prime series summed to
/// `cutoff` with a PNT tail correction.
Bounded theta_integral_mertens(const SieveTables& tables, std::int64_t cutoff);

struct Constants {
  double euler_gamma = 0.0;
  double zeta_2 = 0.0;
  double zeta_half = 0.0;
  double zeta_prime_over_zeta_at_2 = 0.0;
  Bounded prime_constant;
  Bounded theta_integral_value;    // truncated at the sieve limit
  Bounded theta_integral_refined;  // Mertens continuation
};

/// Computes every constant from first principles using `tables`.
Constants compute_constants(const SieveTables& tables);

}  // namespace qdl
