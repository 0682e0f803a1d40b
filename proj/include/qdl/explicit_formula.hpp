// Exact 1-level densities of the quadratic families through the explicit
// formula: finite weighted sums over d and prime powers, no zeros needed.
#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "qdl/arith.hpp"
#include "qdl/testfn.hpp"
#include "qdl/weightfn.hpp"

namespace qdl {

enum class Family { F_star, F_all };

/// How chi_d is read for the family of all squarefree d.
/// kronecker_literal: chi_d(n) = (d/n), conductor 4^b |d| with b = 0 iff d > 0 odd.
/// primitive: the primitive character of discriminant d or 4d (they differ at p = 2 only).
enum class Convention { kronecker_literal, primitive };

std::string family_name(Family f);
Family parse_family(const std::string& s);

struct FamilySpec {
  Family family = Family::F_star;
  double X = 0.0;
  std::int64_t d_truncation = 0;
  const SieveTables* tables = nullptr;
  WeightFunction weight;
  Convention convention = Convention::kronecker_literal;
  double tail_certificate = 0.0;  // sum_{|d| > D} w(d/X) / W, recomputed
};

/// Chooses the smallest D with sum_{|d|>D} w(d/X) < 1e-14 W and checks the
/// sieve covers it. Throws DomainError for X < 10 or an undersized sieve.
FamilySpec make_family_spec(Family family, double X, const SieveTables& tables,
                            const WeightFunction& w = gaussian_weight(),
                            Convention convention = Convention::kronecker_literal);

struct DensityBreakdown {
  Family family = Family::F_star;
  double X = 0.0;
  double sigma = 0.0;
  double L_value = 0.0;
  double total_weight = 0.0;
  double log_conductor_average = 0.0;
  double term_log_conductor = 0.0;
  double term_gamma_constant = 0.0;
  double term_S_odd = 0.0;
  double term_S_even = 0.0;
  double term_gamma_integral = 0.0;
  double term_pole = 0.0;
  double total = 0.0;
  /// F_all only: the constant written as -(phi_hat(0)/L)(gamma + log pi +
  /// log 4 (1 - (1/W) sum*_{d>0 odd} w~(2d/X))), for comparison.
  double gamma_constant_grouped = 0.0;
  bool outside_proven_range = false;  // sigma >= 2
};

/// L = log(X / 2 pi e).
double L_of(double X);

/// The d-weight of the family at positive d (0 if d is not in the family);
/// negative d carry the same weight.
double family_weight(const FamilySpec& spec, std::int64_t d);

/// W*(X) for F_star, W(X) = sum*_{d != 0} w~(d/X) for F_all.
double total_weight(const FamilySpec& spec);

/// F_all only: sum_{0 < |d| <= D} w(d/X) summed directly over all d.
double total_weight_direct(const FamilySpec& spec);

double log_conductor_average(const FamilySpec& spec);

/// sum_d weight(d) chi_d(n) over both signs, chi_d(n) = (8d/n) or (d/n).
double family_character_sum(const FamilySpec& spec, std::int64_t n);

/// (S_odd, S_even) including -2/(L W). prime_cutoff = 0 means e^{sigma L};
/// a larger cutoff only adds exact zeros.
std::pair<double, double> prime_sums(const FamilySpec& spec, const TestFunction& phi,
                                     std::int64_t prime_cutoff = 0);

/// int_0^inf e^{-(1/2 + a) x} / (1 - e^{-2x}) (phi_hat(0) - phi_hat(x/L)) dx for a in {0, 1}.
double gamma_integral_parity(const TestFunction& phi, double L_value, int a);

/// (1/L) int_0^inf (e^{-x/2} + e^{-3x/2}) / (1 - e^{-2x}) (phi_hat(0) - phi_hat(x/L)) dx.
double gamma_integral(const TestFunction& phi, double L_value);

DensityBreakdown density(const FamilySpec& spec, const TestFunction& phi);

/// The per-character explicit formula value for chi_{8d} (F_star, d odd) or
/// chi_d (F_all, read per `convention`). Throws DomainError for d not
/// squarefree, d = 0, or even d with F_star.
double single_L_density(Family family, std::int64_t d, const TestFunction& phi, double X,
                        const SieveTables& tables,
                        Convention convention = Convention::primitive);

/// The conductor and parity a of the character single_L_density uses.
std::pair<std::int64_t, int> character_conductor(Family family, std::int64_t d,
                                                 Convention convention);

/// chi(n) for that character.
int character_value(Family family, std::int64_t d, Convention convention, std::int64_t n);

}  // namespace qdl
