// Zeros of L(s, chi) for real primitive characters: evaluation through
// Hurwitz-type sums, the real Z-function, sign-change scans certified by the
// argument principle, a plain-text cache, and the empirical 1-level density.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qdl/arith.hpp"
#include "qdl/explicit_formula.hpp"
#include "qdl/special.hpp"
#include "qdl/testfn.hpp"

namespace qdl {

struct ZeroOptions {
  std::int64_t max_conductor = 10000;
  double max_height = 200.0;
  double root_width = 1e-9;
  int max_refinements = 6;
};

/// L(s, chi) = q^{-s} sum_{a <= q} chi(a) zeta(s, a/q), with the residue
/// tails summed by Euler-Maclaurin. The character with D = 1 is zeta(s).
class LFunction {
 public:
  explicit LFunction(QuadraticCharacter chi, const ZeroOptions& opt = {});

  Complex operator()(Complex s) const;
  const QuadraticCharacter& character() const { return chi_; }
  std::int64_t conductor() const { return q_; }
  int parity() const { return chi_.parity(); }
  /// theta(t) = Im log Gamma((1/2 + it + a)/2) + (t/2) log(q/pi).
  double theta(double t) const;
  /// Z(t) = e^{i theta(t)} L(1/2 + it). Throws NumericalError if the
  /// imaginary part exceeds 1e-7 (root number or precision failure).
  double z(double t) const;
  /// Same, also returning the discarded imaginary part.
  Complex z_complex(double t) const;

 private:
  QuadraticCharacter chi_;
  std::int64_t q_;
  std::vector<std::int8_t> chi_table_;  // chi(a), a in [0, q)
};

/// The real primitive character attached to squarefree d (d = 1 gives zeta).
Complex dirichlet_L(Complex s, std::int64_t d);
double z_function(double t, std::int64_t d);

struct ZeroSet {
  std::int64_t d = 0;
  std::int64_t conductor = 0;
  double height_T = 0.0;
  std::vector<double> gammas;  // 0 < gamma <= T, increasing
  bool central_zero = false;
  bool complete = false;
  std::int64_t count_expected = 0;

  std::int64_t found() const { return static_cast<std::int64_t>(gammas.size()) + (central_zero ? 1 : 0); }
};

/// Zeros with 0 < gamma <= T (plus a central-zero flag), counted against the
/// argument principle on the path 2 -> 2 + iT -> 1/2 + iT.
double argument_principle_count(const LFunction& L, double T, bool central_zero);

ZeroSet find_zeros(std::int64_t d, double T, const ZeroOptions& opt = {});

/// "d conductor T complete n" followed by n ordinates, 12 significant digits.
/// A central zero is written as the ordinate 0.
void write_zero_set(const ZeroSet& z, const std::string& path);
ZeroSet read_zero_set(const std::string& path);

/// Loads <dir>/L_<d>.zeros when present and revalidated against a fresh
/// argument-principle count at height T; otherwise computes and stores it.
ZeroSet cached_zeros(std::int64_t d, double T, const std::string& dir, const ZeroOptions& opt = {});

/// sum over |gamma| > T of |phi(gamma L / 2pi)|, bounded through the decay
/// certificate of phi and an explicit upper bound for the zero count.
double zero_tail_bound(const TestFunction& phi, double L_value, std::int64_t conductor, double T,
                       std::int64_t count_to_T);

/// sum_{gamma} phi(gamma L / 2pi) over the computed zeros, both signs.
double zero_sum(const ZeroSet& z, const TestFunction& phi, double L_value);

struct EmpiricalDensity {
  double value = 0.0;
  double truncation_bound = 0.0;
  std::size_t characters = 0;
};

using ZeroProvider = std::function<ZeroSet(std::int64_t d)>;

/// The squarefree d whose primitive character realises the family member at
/// d: 2d for F_star (chi_{8d}), d itself for F_all.
std::int64_t character_index(Family family, std::int64_t d);

/// Weighted average of zero sums over the family. F_all uses the primitive
/// characters, so it matches density() with Convention::primitive. Throws
/// NumericalError if any zero set is incomplete.
EmpiricalDensity empirical_density(const FamilySpec& spec, const TestFunction& phi, double T,
                                   const ZeroProvider& provider);

}  // namespace qdl
