#include "qdl/explicit_formula.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qdl/numeric.hpp"
#include "qdl/special.hpp"

namespace qdl {

std::string family_name(Family f) { return f == Family::F_star ? "F_star" : "F_all"; }

Family parse_family(const std::string& s) {
  if (s == "F_star" || s == "star") return Family::F_star;
  if (s == "F_all" || s == "all") return Family::F_all;
  throw DomainError("unknown family '" + s + "' (expected F_star or F_all)");
}

double L_of(double X) { return std::log(X / kTwoPiE); }

namespace {

constexpr std::size_t kChunk = 4096;

double sum_chunks(const std::vector<double>& parts) {
  CompensatedSum s;
  for (double v : parts) s += v;
  return s.value();
}

// Per-d weights for 1 <= d <= D (index d), zero outside the family.
std::vector<double> weight_table(const FamilySpec& spec) {
  const std::size_t n = static_cast<std::size_t>(spec.d_truncation) + 1;
  std::vector<double> omega(n, 0.0);
  parallel_chunks<int>(n, kChunk, [&](std::size_t b, std::size_t e) {
    for (std::size_t d = std::max<std::size_t>(b, 1); d < e; ++d) omega[d] = family_weight(spec, static_cast<std::int64_t>(d));
    return 0;
  });
  return omega;
}

template <class F>
double sum_over_d(std::size_t n, F&& f) {
  return sum_chunks(parallel_chunks<double>(n, kChunk, [&](std::size_t b, std::size_t e) {
    CompensatedSum s;
    for (std::size_t d = std::max<std::size_t>(b, 1); d < e; ++d) s += f(static_cast<std::int64_t>(d));
    return s.value();
  }));
}

// Family weight summed over both signs.
double total_from(const std::vector<double>& omega) {
  return 2.0 * sum_over_d(omega.size(), [&](std::int64_t d) { return omega[static_cast<std::size_t>(d)]; });
}

bool literal_b_is_zero(std::int64_t d) { return d > 0 && (d & 1); }

void check_sieve(const SieveTables& tables, std::int64_t need, const char* what) {
  if (tables.limit < need)
    throw DomainError(std::string("sieve limit ") + std::to_string(tables.limit) + " does not cover " + what +
                      " = " + std::to_string(need));
}

std::int64_t prime_limit(double sigma, double L) {
  const double e = sigma * L;
  if (e < std::log(2.0)) return 1;
  return static_cast<std::int64_t>(std::floor(std::exp(e) * (1.0 + 1e-12)));
}

}  // namespace

double family_weight(const FamilySpec& spec, std::int64_t d) {
  if (d <= 0 || d > spec.d_truncation) return 0.0;
  if (!spec.tables->squarefree(d)) return 0.0;
  const double x = static_cast<double>(d) / spec.X;
  if (spec.family == Family::F_star) return (d & 1) ? spec.weight.w(x) : 0.0;
  return wtilde(spec.weight, x);
}

FamilySpec make_family_spec(Family family, double X, const SieveTables& tables, const WeightFunction& w,
                            Convention convention) {
  if (!(X >= 10.0)) throw DomainError("family X must be >= 10");
  FamilySpec spec;
  spec.family = family;
  spec.X = X;
  spec.tables = &tables;
  spec.weight = w;
  spec.convention = convention;

  // Tail sums of w(d/X) for d beyond a generous ceiling are far below 1e-300.
  const auto ceiling = static_cast<std::int64_t>(std::ceil(8.0 * X)) + 16;
  std::vector<double> tail(static_cast<std::size_t>(ceiling) + 2, 0.0);
  for (std::int64_t d = ceiling; d >= 1; --d)
    tail[static_cast<std::size_t>(d)] = tail[static_cast<std::size_t>(d) + 1] + 2.0 * w.w(static_cast<double>(d) / X);
  // W is estimated with the ceiling as truncation; the family density of d
  // only shrinks W, so the resulting D is conservative.
  spec.d_truncation = std::min<std::int64_t>(ceiling, tables.limit);
  const double W_est = total_weight(spec);
  std::int64_t D = 1;
  while (D < ceiling && tail[static_cast<std::size_t>(D) + 1] >= 1e-14 * W_est) ++D;
  if (D >= ceiling) throw NumericalError("make_family_spec: weight tail does not decay below 1e-14 W");
  check_sieve(tables, D, "d_truncation");
  spec.d_truncation = D;
  const double W = total_weight(spec);
  // Recompute the certificate independently of the scan above.
  CompensatedSum cert;
  for (std::int64_t d = ceiling; d > D; --d) cert += 2.0 * w.w(static_cast<double>(d) / X);
  spec.tail_certificate = cert.value() / W;
  if (!(spec.tail_certificate < 1e-14)) throw NumericalError("make_family_spec: tail certificate failed");
  return spec;
}

double total_weight(const FamilySpec& spec) {
  check_sieve(*spec.tables, spec.d_truncation, "d_truncation");
  return 2.0 * sum_over_d(static_cast<std::size_t>(spec.d_truncation) + 1,
                          [&](std::int64_t d) { return family_weight(spec, d); });
}

double total_weight_direct(const FamilySpec& spec) {
  return 2.0 * sum_over_d(static_cast<std::size_t>(spec.d_truncation) + 1,
                          [&](std::int64_t d) { return spec.weight.w(static_cast<double>(d) / spec.X); });
}

double log_conductor_average(const FamilySpec& spec) {
  const auto n = static_cast<std::size_t>(spec.d_truncation) + 1;
  const double W = total_weight(spec);
  const double s = 2.0 * sum_over_d(n, [&](std::int64_t d) {
    const double o = family_weight(spec, d);
    return o == 0.0 ? 0.0 : o * std::log(static_cast<double>(d));
  });
  return s / W;
}

double family_character_sum(const FamilySpec& spec, std::int64_t n) {
  const std::int64_t c = spec.family == Family::F_star ? 8 : 1;
  return sum_over_d(static_cast<std::size_t>(spec.d_truncation) + 1, [&](std::int64_t d) {
    const double o = family_weight(spec, d);
    if (o == 0.0) return 0.0;
    return o * (kronecker(c * d, n) + kronecker(-c * d, n));
  });
}

std::pair<std::int64_t, int> character_conductor(Family family, std::int64_t d, Convention convention) {
  if (d == 0 || !is_squarefree(d)) throw DomainError("character: d = " + std::to_string(d) + " is not squarefree and nonzero");
  const std::int64_t ad = d < 0 ? -d : d;
  const int a = d < 0 ? 1 : 0;
  if (family == Family::F_star) {
    if (!(ad & 1)) throw DomainError("F_star: d = " + std::to_string(d) + " must be odd");
    return {8 * ad, a};
  }
  if (convention == Convention::primitive) return {character_of_squarefree(d).conductor(), a};
  return {literal_b_is_zero(d) ? ad : 4 * ad, a};
}

int character_value(Family family, std::int64_t d, Convention convention, std::int64_t n) {
  if (family == Family::F_star) return kronecker(8 * d, n);
  if (convention == Convention::primitive) return character_of_squarefree(d)(n);
  return kronecker(d, n);
}

std::pair<double, double> prime_sums(const FamilySpec& spec, const TestFunction& phi, std::int64_t prime_cutoff) {
  const double L = L_of(spec.X);
  const double sigma = phi.sigma();
  const std::int64_t P = prime_limit(sigma, L);
  if (P < 2) return {0.0, 0.0};
  const std::int64_t cutoff = prime_cutoff > 0 ? prime_cutoff : P;
  check_sieve(*spec.tables, std::max(cutoff, spec.d_truncation), "prime cutoff");
  const auto& primes = spec.tables->primes;
  const std::size_t np = static_cast<std::size_t>(
      std::upper_bound(primes.begin(), primes.end(), static_cast<std::uint32_t>(cutoff)) - primes.begin());

  const std::vector<double> omega = weight_table(spec);
  const std::size_t nd = omega.size();
  const double W = total_from(omega);
  const std::int64_t c = spec.family == Family::F_star ? 8 : 1;
  const bool primitive = spec.family == Family::F_all && spec.convention == Convention::primitive;

  // Per prime: bin the positive-d weights by d mod M, then read chi_{+-d}(p^m)
  // off a residue table for each m. Negative d sit in residue class M - r.
  std::vector<double> odd(np, 0.0), even(np, 0.0);
  parallel_chunks<int>(np, 16, [&](std::size_t b, std::size_t e) {
    std::vector<double> bins;
    std::vector<int> leg;
    for (std::size_t i = b; i < e; ++i) {
      const std::int64_t p = primes[i];
      const double logp = spec.tables->log_primes[i];
      int mmax = 0;
      while (phi.phi_hat((mmax + 1) * logp / L) != 0.0) ++mmax;
      if (mmax == 0) continue;
      const std::int64_t M = p == 2 ? 8 : p;
      bins.assign(static_cast<std::size_t>(M), 0.0);
      std::int64_t r = 1 % M;
      for (std::size_t d = 1; d < nd; ++d) {
        bins[static_cast<std::size_t>(r)] += omega[d];
        if (++r == M) r = 0;
      }
      if (p != 2) {
        leg.assign(static_cast<std::size_t>(p), -1);
        leg[0] = 0;
        for (std::int64_t x = 1; x <= p / 2; ++x) leg[static_cast<std::size_t>(x * x % p)] = 1;
      }
      // chi at residue class rr (which may be negative) for odd m and even m.
      auto chi = [&](std::int64_t rr, int m) -> int {
        if (p != 2) {
          const std::int64_t v = ((c * rr) % p + p) % p;
          const int l = leg[static_cast<std::size_t>(v)];
          return (m & 1) ? l : l * l;
        }
        if (c == 8) return 0;
        const std::int64_t r8 = ((rr % 8) + 8) % 8;
        if (primitive && r8 % 4 != 1) return 0;
        const int k = kronecker(r8, 2);
        return (m & 1) ? k : k * k;
      };
      CompensatedSum so, se;
      for (int m = 1; m <= mmax; ++m) {
        CompensatedSum cs;
        for (std::int64_t rr = 0; rr < M; ++rr) {
          const double bv = bins[static_cast<std::size_t>(rr)];
          if (bv == 0.0) continue;
          cs += bv * (chi(rr, m) + chi(-rr, m));
        }
        const double term = logp * std::exp(-0.5 * m * logp) * phi.phi_hat(m * logp / L) * cs.value();
        ((m & 1) ? so : se) += term;
      }
      odd[i] = so.value();
      even[i] = se.value();
    }
    return 0;
  });
  const double pre = -2.0 / (L * W);
  return {pre * sum_chunks(odd), pre * sum_chunks(even)};
}

double gamma_integral_parity(const TestFunction& phi, double L_value, int a) {
  if (!(L_value > 0.0)) throw DomainError("gamma_integral: L must be > 0");
  if (a != 0 && a != 1) throw DomainError("gamma_integral: parity must be 0 or 1");
  const double c = 0.5 + a;
  const double f0 = phi.phi_hat(0.0);
  const double B = phi.sigma() * L_value;
  auto f = [&](double x) {
    if (x <= 0.0) return 0.0;
    return std::exp(-c * x) / -std::expm1(-2.0 * x) * (f0 - phi.phi_hat(x / L_value));
  };
  std::vector<double> bps;
  for (double u : phi.breakpoints()) bps.push_back(u * L_value);
  QuadOptions opt;
  opt.abs_tol = 1e-14;
  opt.rel_tol = 1e-12;
  const double body = integrate(f, 0.0, B, bps, opt).value;
  // Beyond sigma L the bracket is phi_hat(0): sum_k e^{-(c+2k)B}/(c+2k).
  CompensatedSum tail;
  for (int k = 0;; ++k) {
    const double t = std::exp(-(c + 2.0 * k) * B) / (c + 2.0 * k);
    tail += t;
    if (t <= 1e-18 * std::fabs(tail.value()) || t == 0.0) break;
  }
  return body + f0 * tail.value();
}

double gamma_integral(const TestFunction& phi, double L_value) {
  return (gamma_integral_parity(phi, L_value, 0) + gamma_integral_parity(phi, L_value, 1)) / L_value;
}

DensityBreakdown density(const FamilySpec& spec, const TestFunction& phi) {
  DensityBreakdown out;
  out.family = spec.family;
  out.X = spec.X;
  out.sigma = phi.sigma();
  out.outside_proven_range = phi.sigma() >= 2.0;
  const double L = L_of(spec.X);
  out.L_value = L;
  const double f0 = phi.phi_hat(0.0);

  const std::vector<double> omega = weight_table(spec);
  const std::size_t nd = omega.size();
  const double W = total_from(omega);
  out.total_weight = W;
  const double log_sum =
      2.0 * sum_over_d(nd, [&](std::int64_t d) {
        const double o = omega[static_cast<std::size_t>(d)];
        return o == 0.0 ? 0.0 : o * std::log(static_cast<double>(d));
      });
  out.log_conductor_average = log_sum / W;
  out.term_log_conductor = f0 / L * out.log_conductor_average;

  const double psi_even = digamma(0.25), psi_odd = digamma(0.75);
  const double log_pi = std::log(kPi), log4 = std::log(4.0);
  if (spec.family == Family::F_star) {
    // log(8|d|/pi) = log|d| + log(8/pi); each sign carries its own digamma.
    const double pos = sum_over_d(nd, [&](std::int64_t d) { return omega[static_cast<std::size_t>(d)]; });
    const double neg = pos;
    out.term_gamma_constant = f0 / L * (std::log(8.0) - log_pi + (pos * psi_even + neg * psi_odd) / W);
  } else {
    const bool primitive = spec.convention == Convention::primitive;
    // Sum over d > 0 and d < 0 separately with the conductor exponent b(d).
    const double s = sum_over_d(nd, [&](std::int64_t d) {
      const double o = omega[static_cast<std::size_t>(d)];
      if (o == 0.0) return 0.0;
      double v = 0.0;
      for (std::int64_t sd : {d, -d}) {
        const bool b0 = primitive ? (((sd % 4) + 4) % 4 == 1) : literal_b_is_zero(sd);
        v += o * ((b0 ? 0.0 : log4) - log_pi + (sd > 0 ? psi_even : psi_odd));
      }
      return v;
    });
    out.term_gamma_constant = f0 / L * s / W;
    const double g = sum_over_d(nd, [&](std::int64_t d) {
                       if (!(d & 1) || 2 * d >= static_cast<std::int64_t>(nd)) return 0.0;
                       return omega[static_cast<std::size_t>(2 * d)];
                     }) /
                     W;
    out.gamma_constant_grouped = -f0 / L * (kEulerGammaLiteral + log_pi + log4 * (1.0 - g));
    out.term_pole = 2.0 * omega[1] / W * phi_at_imaginary(phi, L);
  }
  const auto [so, se] = prime_sums(spec, phi);
  out.term_S_odd = so;
  out.term_S_even = se;
  out.term_gamma_integral = gamma_integral(phi, L);
  out.total = out.term_log_conductor + out.term_gamma_constant + out.term_S_odd + out.term_S_even +
              out.term_gamma_integral + out.term_pole;
  return out;
}

double single_L_density(Family family, std::int64_t d, const TestFunction& phi, double X, const SieveTables& tables,
                        Convention convention) {
  const auto [q, a] = character_conductor(family, d, convention);
  const QuadraticCharacter prim =
      family == Family::F_all && convention == Convention::primitive ? character_of_squarefree(d) : QuadraticCharacter{};
  auto chi_of = [&](std::int64_t n) {
    if (family == Family::F_star) return kronecker(8 * d, n);
    return convention == Convention::primitive ? prim(n) : kronecker(d, n);
  };
  const double L = L_of(X);
  const double f0 = phi.phi_hat(0.0);
  const double arch = f0 / L * (std::log(static_cast<double>(q) / kPi) + digamma(0.25 + 0.5 * a));
  const std::int64_t P = prime_limit(phi.sigma(), L);
  CompensatedSum primes_sum;
  if (P >= 2) {
    check_sieve(tables, P, "prime cutoff");
    for (std::size_t i = 0; i < tables.primes.size() && tables.primes[i] <= P; ++i) {
      const std::int64_t p = tables.primes[i];
      const double logp = tables.log_primes[i];
      std::int64_t pm = 1;
      for (int m = 1;; ++m) {
        const double ph = phi.phi_hat(m * logp / L);
        if (ph == 0.0) break;
        pm *= p;
        const int chi = chi_of(pm);
        if (chi != 0) primes_sum += chi * logp * std::exp(-0.5 * m * logp) * ph;
      }
    }
  }
  double v = arch - 2.0 / L * primes_sum.value() + 2.0 / L * gamma_integral_parity(phi, L, a);
  if (family == Family::F_all && d == 1) v += 2.0 * phi_at_imaginary(phi, L);
  return v;
}

}  // namespace qdl
