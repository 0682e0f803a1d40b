// Function-field analogue: hyperelliptic curves y^2 = Q(x) over F_q with Q
// monic squarefree of odd degree n = 2g + 1, their L-polynomials and zero
// angles, the family 1-level density and Rudnick's first-order prediction.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qdl/testfn.hpp"

namespace qdl {

/// F_{q^k} with elements encoded as base-q integers (coefficient i of the
/// residue polynomial is digit i). Multiplication through log/antilog tables
/// for a primitive modulus, addition of logs through Zech logarithms.
class FiniteField {
 public:
  /// modulus_index picks the i-th primitive monic modulus in lexicographic
  /// order, so two indices give two isomorphic models of the same field.
  FiniteField(int q, int k, int modulus_index = 0);

  int q() const { return q_; }
  int degree() const { return k_; }
  std::int64_t size() const { return size_; }
  const std::vector<int>& modulus() const { return modulus_; }  // low to high, monic

  std::int64_t add(std::int64_t a, std::int64_t b) const;
  std::int64_t mul(std::int64_t a, std::int64_t b) const;
  std::int64_t exp(std::int64_t e) const { return antilog_[static_cast<std::size_t>(e % (size_ - 1))]; }
  std::int64_t log(std::int64_t a) const;  // a != 0
  /// Zech logarithm log(1 + g^m), or -1 when 1 + g^m = 0.
  std::int64_t zech(std::int64_t m) const { return zech_[static_cast<std::size_t>(m)]; }
  /// Quadratic character: 0, 1 or -1.
  int chi(std::int64_t a) const;

 private:
  int q_, k_;
  std::int64_t size_;
  std::vector<int> modulus_;
  std::vector<std::int64_t> log_, antilog_, zech_;
};

/// Polynomials over F_q as coefficient vectors, low to high.
using FqPoly = std::vector<int>;

bool is_squarefree(const FqPoly& f, int q);

/// Calls f for every monic squarefree polynomial of degree n over F_q, in
/// lexicographic order of the lower coefficients. Requires q an odd prime
/// <= 13 and 1 <= n <= 12.
void enumerate_monic_squarefree(int q, int n, const std::function<void(const FqPoly&)>& f);
std::vector<FqPoly> monic_squarefree(int q, int n);

/// Point counts on a family of curves, sharing the field tables. Frobenius
/// orbits are summed once each.
class PointCounter {
 public:
  PointCounter(int q, int g, int modulus_index = 0);
  /// #C(F_{q^k}) for k = 1..g, with one point at infinity (n odd).
  std::vector<std::int64_t> counts(const FqPoly& Q) const;
  const FiniteField& field(int k) const { return fields_[static_cast<std::size_t>(k - 1)]; }

 private:
  int q_, g_;
  std::vector<FiniteField> fields_;
  std::vector<std::vector<std::pair<std::int64_t, int>>> orbits_;  // (log, orbit size) per k
  std::vector<std::int64_t> coeff_log_;                            // log of c in F_q, per field
};

std::vector<std::int64_t> point_counts(const FqPoly& Q, int q, int g);

/// Exhaustive count of pairs (x, y) with y^2 = Q(x) over F_{q^k}, plus infinity.
std::int64_t point_count_exhaustive(const FqPoly& Q, int q, int k);

struct LPolynomial {
  int q = 0;
  int g = 0;
  std::vector<std::int64_t> coeffs;  // a_0..a_{2g}
  std::vector<double> angles;        // theta_j in [0, 2 pi), sorted, 2g entries
  double weil_deviation = 0.0;       // max | |r| sqrt(q) - 1 | over roots r of P
  double residual = 0.0;             // max |P(r)| / sum |a_k| |r|^k

  bool functional_equation_holds() const;
  std::int64_t jacobian_order() const;  // P(1)
};

/// Newton identities from #C(F_{q^k}), the functional equation for the upper
/// half, and angles from the companion matrix with a Newton polish. Throws
/// NumericalError on a non-integral coefficient or an uncertified root.
LPolynomial l_polynomial(const std::vector<std::int64_t>& counts, int q, int g);

/// sum_j alpha_j^m for m = 1..M from the integer coefficients.
std::vector<double> power_sums(const LPolynomial& P, int M);

struct FFDensity {
  int q = 0, n = 0, g = 0;
  std::int64_t curves = 0;
  double value = 0.0;          // from the zero angles
  double fourier_value = 0.0;  // from the integer traces, independent of root finding
  double max_weil_deviation = 0.0;
  bool functional_equations_hold = true;
  double mean_point_count = 0.0;  // average #C(F_q)
};

/// Average over the family of sum_j Phi(theta_j) with Phi(theta) =
/// sum_k phi(N (theta/2pi + k)), N = 2g, the angle set closed under sign.
/// Phi is evaluated through its finite Fourier series, as phi_hat has compact
/// support. When dump_path is non-empty every curve is written as
/// "q n a_0 .. a_2g theta_1 .. theta_2g" with 10 significant digits.
FFDensity ff_one_level_density(int q, int n, const TestFunction& phi, const std::string& dump_path = "");

struct RudnickPrediction {
  double main_term = 0.0;      // phi_hat(0) - (1/2) int_{-1}^{1} phi_hat
  double prime_sum = 0.0;      // sum_{deg P <= cutoff} deg P / (q^{2 deg P} - 1)
  double tail_bound = 0.0;     // bound on the omitted degrees
  double correction = 0.0;     // the 1/g term
  double value = 0.0;
};

/// Number of monic irreducibles of degree d over F_q (necklace formula).
std::int64_t irreducible_count(int q, int d);

RudnickPrediction rudnick_rhs(int q, int g, const TestFunction& phi, int prime_poly_cutoff = 40);

}  // namespace qdl
