#include "qdl/arith.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qdl/numeric.hpp"
#include "qdl/special.hpp"

namespace qdl {

int kronecker(long long d, long long n) {
  if (n < 0) throw DomainError("kronecker: negative n is not supported");
  if (n == 0) {
    if (d == 0) throw DomainError("kronecker: (0/0) is undefined");
    return (d == 1 || d == -1) ? 1 : 0;
  }
  int result = 1;
  if (n % 2 == 0) {
    if (d % 2 == 0) return 0;
    int v = 0;
    while (n % 2 == 0) {
      n /= 2;
      ++v;
    }
    const long long r = ((d % 8) + 8) % 8;
    if ((v & 1) && (r == 3 || r == 5)) result = -result;
  }
  // Jacobi symbol (d/n) for odd n > 0.
  long long a = ((d % n) + n) % n;
  long long m = n;
  while (a != 0) {
    while (a % 2 == 0) {
      a /= 2;
      const long long r = m % 8;
      if (r == 3 || r == 5) result = -result;
    }
    std::swap(a, m);
    if (a % 4 == 3 && m % 4 == 3) result = -result;
    a %= m;
  }
  return m == 1 ? result : 0;
}

bool is_squarefree(long long n) {
  if (n == 0) return false;
  unsigned long long m = n < 0 ? -static_cast<unsigned long long>(n) : n;
  for (unsigned long long p = 2; p * p <= m; ++p) {
    if (m % p == 0) {
      m /= p;
      if (m % p == 0) return false;
    }
  }
  return true;
}

QuadraticCharacter character_of_squarefree(long long d) {
  if (d == 0 || !is_squarefree(d))
    throw DomainError("character_of_squarefree: " + std::to_string(d) + " is not a nonzero squarefree integer");
  const long long r = ((d % 4) + 4) % 4;
  return {r == 1 ? d : 4 * d};
}

namespace {

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t pow_mod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1;
  b %= m;
  while (e) {
    if (e & 1) r = mul_mod(r, b, m);
    b = mul_mod(b, b, m);
    e >>= 1;
  }
  return r;
}

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++s;
  }
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    std::uint64_t x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::size_t sieve_memory_estimate(std::int64_t limit) {
  const double n = static_cast<double>(std::max<std::int64_t>(limit, 2));
  const double prime_count = 1.3 * n / std::log(n) + 10.0;
  return static_cast<std::size_t>(n * (1.0 + 2.0 / 8.0) + prime_count * 12.0);
}

SieveTables build_sieves(std::int64_t limit, std::size_t memory_budget) {
  if (limit < 2) throw DomainError("build_sieves: limit must be >= 2");
  if (sieve_memory_estimate(limit) > memory_budget)
    throw DomainError("build_sieves: limit " + std::to_string(limit) +
                      " exceeds the memory budget of " + std::to_string(memory_budget) + " bytes");
  SieveTables t;
  t.limit = limit;
  const auto n = static_cast<std::size_t>(limit);
  std::vector<bool> composite(n + 1, false);
  t.mobius.assign(n + 1, 1);
  t.mobius[0] = 0;
  for (std::size_t p = 2; p <= n; ++p) {
    if (composite[p]) continue;
    t.primes.push_back(static_cast<std::uint32_t>(p));
    for (std::size_t m = p; m <= n; m += p) {
      if (m > p) composite[m] = true;
      t.mobius[m] = static_cast<std::int8_t>(-t.mobius[m]);
    }
    if (p <= n / p) {
      for (std::size_t m = p * p; m <= n; m += p * p) t.mobius[m] = 0;
    }
  }
  t.squarefree_flags.assign(n + 1, false);
  for (std::size_t m = 1; m <= n; ++m) t.squarefree_flags[m] = t.mobius[m] != 0;
  t.log_primes.reserve(t.primes.size());
  for (auto p : t.primes) t.log_primes.push_back(std::log(static_cast<double>(p)));
  return t;
}

double chebyshev_theta(double t, const SieveTables& tables) {
  if (t < 0.0) throw DomainError("chebyshev_theta: t must be >= 0");
  if (t > static_cast<double>(tables.limit))
    throw DomainError("chebyshev_theta: t exceeds the sieve limit");
  CompensatedSum s;
  for (std::size_t i = 0; i < tables.primes.size() && tables.primes[i] <= t; ++i)
    s += tables.log_primes[i];
  return s.value();
}

double harmonic(double u) {
  if (!(u >= 1.0)) throw DomainError("harmonic: requires u >= 1");
  const auto n = static_cast<long long>(std::floor(u));
  if (n > 100000) {
    // Asymptotic series, exact to double precision at this size.
    const double x = static_cast<double>(n);
    return std::log(x) + kEulerGammaLiteral + 0.5 / x - 1.0 / (12.0 * x * x) +
           1.0 / (120.0 * x * x * x * x);
  }
  CompensatedSum s;
  for (long long k = n; k >= 1; --k) s += 1.0 / static_cast<double>(k);
  return s.value();
}

Bounded prime_constant(const SieveTables& tables, std::int64_t cutoff) {
  if (cutoff < 1 || cutoff > tables.limit)
    throw DomainError("prime_constant: cutoff outside [1, sieve limit]");
  CompensatedSum s;
  for (std::size_t i = 0; i < tables.primes.size() && tables.primes[i] <= cutoff; ++i) {
    const double p = tables.primes[i];
    if (p < 3) continue;
    s += tables.log_primes[i] / (p * (p * p - 1.0));
  }
  const double c = static_cast<double>(std::max<std::int64_t>(cutoff, 3));
  const double tail = (2.0 * std::log(c) + 1.0) / (4.0 * c * c) * (1.0 + 1.0 / (c * c - 1.0));
  return {s.value(), tail};
}

Bounded theta_integral(double T, const SieveTables& tables) {
  if (T < 2.0) throw DomainError("theta_integral: requires T >= 2");
  if (T > static_cast<double>(tables.limit))
    throw DomainError("theta_integral: T exceeds the sieve limit");
  // On [a, b) theta is constant, and int_a^b (theta - t)/t^2 = theta (1/a - 1/b) - log(b/a).
  CompensatedSum s;
  double theta = 0.0;
  double a = 2.0;
  for (std::size_t i = 0; i < tables.primes.size(); ++i) {
    const double p = tables.primes[i];
    if (p > T) break;
    if (p > a) {
      s += theta * (1.0 / a - 1.0 / p) - std::log(p / a);
      a = p;
    }
    theta += tables.log_primes[i];
  }
  if (T > a) s += theta * (1.0 / a - 1.0 / T) - std::log(T / a);
  const double lt = std::log(T);
  return {s.value(), 2.0 * std::sqrt(T) * lt * lt / T};
}

Bounded theta_integral_mertens(const SieveTables& tables, std::int64_t cutoff) {
  if (cutoff < 3 || cutoff > tables.limit)
    throw DomainError("theta_integral_mertens: cutoff outside [3, sieve limit]");
  CompensatedSum s;
  for (std::size_t i = 0; i < tables.primes.size() && tables.primes[i] <= cutoff; ++i) {
    const double p = tables.primes[i];
    s += tables.log_primes[i] / (p * (p - 1.0));
  }
  // Prime number theorem: sum_{p > c} log p / (p (p - 1)) ~ int_c^inf dt / (t (t - 1)).
  const double c = static_cast<double>(cutoff);
  s += std::log(c / (c - 1.0));
  const double lc = std::log(c);
  const double uncertainty = 2.0 * lc * lc / (c * std::sqrt(c));
  return {-euler_gamma_em() - 1.0 + std::log(2.0) - s.value(), uncertainty};
}

Constants compute_constants(const SieveTables& tables) {
  Constants c;
  c.euler_gamma = euler_gamma_em();
  c.zeta_2 = zeta_real(2.0);
  c.zeta_half = zeta_real(0.5);
  c.zeta_prime_over_zeta_at_2 = zeta_prime_real(2.0) / c.zeta_2;
  c.prime_constant = prime_constant(tables, tables.limit);
  c.theta_integral_value = theta_integral(static_cast<double>(tables.limit), tables);
  c.theta_integral_refined = theta_integral_mertens(tables, tables.limit);
  return c;
}

}  // namespace qdl
