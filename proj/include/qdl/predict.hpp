// Closed-form predictions for the 1-level densities: the Katz-Sarnak main
// term, the first lower-order coefficient and its Moebius-kernel integrals,
// the J(X) and U(X) transition terms, the even prime-power expansion, the
// error exponents and the full right-hand sides of the asymptotic formulas.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qdl/arith.hpp"
#include "qdl/explicit_formula.hpp"
#include "qdl/testfn.hpp"
#include "qdl/weightfn.hpp"

namespace qdl {

/// Everything the predictors share: sieve, weight transforms, Moebius kernels
/// and the arithmetic constants. Built once; read-only afterwards.
struct PredictionContext {
  const SieveTables* tables = nullptr;
  WeightTransforms transforms;
  std::shared_ptr<const MobiusKernels> kernels;
  Constants constants;

  const WeightFunction& weight() const { return transforms.weight; }
};

/// s_cutoff bounds the Moebius sums (it must not exceed the sieve limit).
PredictionContext make_prediction_context(const SieveTables& tables, const WeightFunction& w = gaussian_weight(),
                                          std::int64_t s_cutoff = 1000000);

/// phi_hat(0) - (1/2) int_{-1}^{1} phi_hat(u) du.
double katz_sarnak_main(const TestFunction& phi);

/// The phi_hat(0) bracket of R_{w,1}:
/// log(16/e^{gamma+1}) - 2 sum_{p>=3} log p/(p(p^2-1)) - 2 int_2^inf (theta(t)-t)/t^2 dt
///   + (2/w_hat(0)) int_0^inf w(x) log x dx.
double r_bracket(const PredictionContext& ctx);

struct KernelIntegral {
  double value = 0.0;
  double h1_part = 0.0;  // 2 int_1^inf H_u h1(u) du
  double h2_part = 0.0;  // 2 int_1^inf floor(u)/u h2(u) du
  double error = 0.0;    // quadrature, table and truncation estimate
};

/// c_{w,1} = 2 int_1^inf (H_u h1(u) + floor(u)/u h2(u)) du. The h1 part is
/// integrated panel by panel between integers; the h2 part, whose integrand
/// decays only like u^{-3/2}, is summed over the Moebius variable s in
/// closed form (see predict.cpp). Throws NumericalError if the error
/// estimate exceeds 1e-6.
KernelIntegral c_w1(const PredictionContext& ctx);

/// 2 int_1^U floor(u)/u h2(u) du by direct integer-panel quadrature, for
/// cross-checking the closed form; the missing tail decays like 1/U.
double c_w1_h2_direct(const PredictionContext& ctx, double U);

/// phi_hat(0) r_bracket + phi_hat(1) c_{w,1}.
double R_w1(const TestFunction& phi, const PredictionContext& ctx);

struct JOptions {
  bool substitute = true;  // rho = e^{tau/2} in the h1 branch
  double panel_width = 0.5;  // tau panels of the Moebius-space h2 branch
};

struct JValue {
  double value = 0.0;
  double h1_branch = 0.0;
  double h2_branch = 0.0;
  double error = 0.0;  // bound on the Moebius truncation at s_cutoff
};

/// J(X) = (1/L) int_0^inf [phi_hat(1+tau/L) e^{tau/2} sum_n h1(n e^{tau/2})
///                          + phi_hat(1-tau/L) sum_n h2(n e^{tau/2})] dtau.
JValue J_X(const TestFunction& phi, const PredictionContext& ctx, double X, const JOptions& opt = {});

struct SEvenExpansion {
  double minus_half_phi0 = 0.0;  // -phi(0)/2 with phi(0) = int phi_hat
  double d1 = 0.0;
  double d1_term = 0.0;          // d1 phi_hat(0) / L
  double direct = 0.0;           // -(2/L) sum_{p>2, j>=1} ... summed directly
  double j2_sum = 0.0;           // sum_{p>2, j>=2} log p / p^j (1+1/p)^{-1}
  struct Reading {
    std::string name;
    double d1 = 0.0;
  };
  std::vector<Reading> literal_readings;
};

/// Expansion of the even prime-power sum over p > 2 to first order, with the
/// directly summed left-hand side at L. Needs primes up to e^{sigma L/2}.
SEvenExpansion s_even_expansion(const TestFunction& phi, const PredictionContext& ctx, double L_value);

/// -(2/L) sum_{p in P, j>=1} log p/p^j (1+1/p)^{-1} phi_hat(2j log p/L), over
/// odd primes or all primes.
double s_even_direct(const TestFunction& phi, const SieveTables& tables, double L_value, bool include_two);

/// U_1(X); requires sigma <= 1.
double U1(const TestFunction& phi, const WeightFunction& w, double X);

/// U_2(X); requires 1 <= sigma < 2.
double U2(const TestFunction& phi, const WeightTransforms& tr, double X, bool substitute = true);

struct VW1 {
  double value = 0.0;
  double mellin_part = 0.0;  // M w(1/2) / (sqrt(2 pi e) M w(1))
  double h_hat_part = 0.0;   // int_1^inf H_u h_hat(u) du
  double h_part = 0.0;       // int_1^inf floor(u)/u h(u) du
};

VW1 v_w1(const WeightTransforms& tr);

struct ErrorExponents {
  double eta = 0.0;
  std::optional<double> xi;  // only for 0 < sigma < 1
};

ErrorExponents error_exponents(double sigma);

/// The integral I_s(X) by direct quadrature and the right-hand side of its
/// Poisson-summation evaluation without the O(s X^{-1/2}) term.
double I_s_direct(int s, const TestFunction& phi, const WeightTransforms& tr, double X);
double I_s_poisson(int s, const TestFunction& phi, const WeightTransforms& tr, double X);
double I_s_identity_residual(int s, const TestFunction& phi, const WeightTransforms& tr, double X);

enum class Theorem { T1_1, T3_5, T1_2, T1_3 };
std::string theorem_name(Theorem t);
Theorem parse_theorem(const std::string& s);

enum class Branch { sigma_lt_1, sigma_in_1_2 };

struct ExpansionReport {
  struct Coefficient {
    int k = 0;
    double value = 0.0;
    std::string label;  // "closed-form" or "extracted"
  };
  struct Term {
    std::string name;
    double value = 0.0;
    std::string note;
  };
  Theorem theorem = Theorem::T1_1;
  double main_term = 0.0;
  std::vector<Coefficient> coefficients;
  double evaluated_at_X = 0.0;
  double L_value = 0.0;
  Branch branch = Branch::sigma_lt_1;
  std::vector<Term> terms;
  double total = 0.0;
};

/// Right-hand side of the chosen asymptotic formula at X. For T1_1 the
/// expansion is truncated after K powers of 1/log X; coefficients beyond the
/// first are extracted numerically from the T3_5 expression along an X-ladder
/// and only when phi_hat has the needed derivatives at 0 and 1.
ExpansionReport theorem_rhs(Theorem theorem, const TestFunction& phi, const PredictionContext& ctx, double X,
                            int K = 1);

/// Coefficients R_k, k = 2..K, extracted by fitting the T3_5 remainder on the
/// ladder in powers of 1/log X.
std::vector<double> extract_coefficients(const TestFunction& phi, const PredictionContext& ctx, int K,
                                         const std::vector<double>& ladder);

}  // namespace qdl
