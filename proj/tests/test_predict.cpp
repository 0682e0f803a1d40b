#include <cmath>
#include <vector>

#include "doctest.h"
#include "qdl/explicit_formula.hpp"
#include "qdl/numeric.hpp"
#include "qdl/predict.hpp"

using namespace qdl;

namespace {

const SieveTables& sieve() {
  static const SieveTables t = build_sieves(1000000);
  return t;
}

const PredictionContext& ctx() {
  static const PredictionContext c = make_prediction_context(sieve(), gaussian_weight(), 200000);
  return c;
}

// Quadratic extrapolation in 1/L through three samples (L_i, y_i).
double extrapolate(const std::vector<double>& L, const std::vector<double>& y) {
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) {
    double w = 1.0;
    for (int j = 0; j < 3; ++j)
      if (j != i) w *= (0.0 - 1.0 / L[j]) / (1.0 / L[i] - 1.0 / L[j]);
    acc += w * y[i];
  }
  return acc;
}

}  // namespace

TEST_CASE("Katz-Sarnak main term") {
  CHECK(katz_sarnak_main(fejer(1.0)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(katz_sarnak_main(fejer(2.0)) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(katz_sarnak_main(fejer(0.5)) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("phi_hat(0) bracket") {
  // log(16/e^{gamma+1}) - 2 sum_{p>=3} log p/(p(p^2-1)) - 2 int_2^inf (theta-t)/t^2
  // + 2 int w log x, with the pieces from mpmath and a 1e7 prime sieve.
  const double oracle = 1.19537305733824838 - 2.0 * 0.06988108764383098 + 2.0 * 1.6394350951704966 +
                        2.0 * (-0.777059977967705913);
  CHECK(std::fabs(r_bracket(ctx()) - oracle) < 1e-6);
  // phi_hat(1) = 0 isolates the bracket.
  const TestFunction phi = fejer(1.0);
  CHECK(std::fabs(R_w1(phi, ctx()) - phi.phi_hat(0.0) * r_bracket(ctx())) < 1e-12);
}

TEST_CASE("c_w1 kernel integral") {
  const auto c = c_w1(ctx());
  CHECK(c.error < 2e-6);
  CHECK(std::fabs(c.value - (c.h1_part + c.h2_part)) < 1e-14);
  // The h2 part summed over s agrees with direct u-quadrature; the truncated tail decays like 1/U.
  const double d100 = c_w1_h2_direct(ctx(), 100.0), d200 = c_w1_h2_direct(ctx(), 200.0);
  CHECK(std::fabs(2.0 * d200 - d100 - c.h2_part) < 1e-4);
  CHECK(std::fabs(d200 - c.h2_part) < std::fabs(d100 - c.h2_part));
  // Observed identity c_w1 = -bracket, so R_w1 = bracket (phi_hat(0) - phi_hat(1)).
  CHECK(std::fabs(c.value + r_bracket(ctx())) < 1e-8);
  // Moebius cutoff: a context with a five times smaller cutoff gives the same value.
  const auto small = make_prediction_context(sieve(), gaussian_weight(), 40000);
  CHECK(std::fabs(c_w1(small).value - c.value) < 1e-8);
}

TEST_CASE("R_w1 is linear in phi") {
  const TestFunction a = fejer_squared(1.5), b = fejer(0.8);
  const double ra = R_w1(a, ctx()), rb = R_w1(b, ctx());
  const TestFunction comb = 2.0 * a + (-0.5) * b;
  CHECK(std::fabs(R_w1(comb, ctx()) - (2.0 * ra - 0.5 * rb)) < 1e-12);
  const double c = c_w1(ctx()).value;
  CHECK(std::fabs(ra - (a.phi_hat(0.0) * r_bracket(ctx()) + a.phi_hat(1.0) * c)) < 1e-12);
}

TEST_CASE("J(X) transition term") {
  const TestFunction phi = fejer_squared(1.5);
  const double X = 1e6;
  const auto j = J_X(phi, ctx(), X);
  JOptions plain;
  plain.substitute = false;
  CHECK(std::fabs(J_X(phi, ctx(), X, plain).value - j.value) < 1e-9);
  JOptions wide;
  wide.panel_width = 1.0;
  CHECK(std::fabs(J_X(phi, ctx(), X, wide).value - j.value) < 1e-8);
  CHECK(j.error < 1e-5);

  // sigma <= 1: only the h2 branch survives.
  const auto j1 = J_X(fejer_squared(0.9), ctx(), X);
  CHECK(j1.h1_branch == 0.0);

  // L J(X) -> c_w1 phi_hat(1). Convergence is slow (phi_hat'(1)/phi_hat(1) is about -6);
  // the gap shrinks monotonically and the 1/L extrapolation lands within 5%.
  const double target = c_w1(ctx()).value * phi.phi_hat(1.0);
  std::vector<double> Ls, ys;
  for (double x : {1e6, 1e8, 1e10}) {
    Ls.push_back(L_of(x));
    ys.push_back(Ls.back() * J_X(phi, ctx(), x).value);
  }
  CHECK(std::fabs(ys[1] - target) < std::fabs(ys[0] - target));
  CHECK(std::fabs(ys[2] - target) < std::fabs(ys[1] - target));
  const double extrap = extrapolate(Ls, ys);
  MESSAGE("L J at 1e6/1e8/1e10: " << ys[0] << " " << ys[1] << " " << ys[2] << ", extrapolated " << extrap
                                  << ", target " << target);
  CHECK(std::fabs(extrap - target) < 0.05 * std::fabs(target));
  CHECK_THROWS_AS(J_X(phi, ctx(), 5.0), DomainError);
}

TEST_CASE("even prime-power expansion") {
  const TestFunction phi = fejer_squared(1.0);
  const auto e = s_even_expansion(phi, ctx(), 20.0);
  CHECK(std::fabs(e.minus_half_phi0 + 0.5 * phi.phi(0.0)) < 1e-10);
  // -2 sum_{p>=3} log p/(p(p^2-1)) - 2 + 3 log 2 - 2 int_2^inf (theta-t)/t^2, mpmath and a 1e7 sieve.
  CHECK(std::fabs(e.d1 - 3.218549556733169) < 1e-6);
  double j2 = 0.0;
  for (std::int64_t p : sieve().primes) {
    if (p == 2) continue;
    const double lp = std::log(static_cast<double>(p));
    j2 += lp / (static_cast<double>(p) * static_cast<double>(p) - 1.0);
  }
  CHECK(std::fabs(e.j2_sum - j2) < 1e-5);
  // The literal reading p >= 3, j >= 3 coincides with the grouped proof constant.
  bool found = false;
  for (const auto& r : e.literal_readings)
    if (r.name == "p >= 3, j >= 3") {
      found = true;
      CHECK(std::fabs(r.d1 - e.d1) < 1e-12);
    }
  CHECK(found);
  // Direct sum at L = 20 agrees with the first-order expansion within 15%.
  const double scaled = (e.direct - e.minus_half_phi0) * 20.0;
  CHECK(std::fabs(scaled - e.d1 * phi.phi_hat(0.0)) < 0.15 * std::fabs(e.d1 * phi.phi_hat(0.0)));
  // The remainder is second order: for fejer it is c phi_hat'(0+)/L^2 with a fixed c,
  // for fejer_squared (phi_hat'(0) = 0) it decays faster than 1/L^2.
  auto remainder = [&](const TestFunction& f, double L) {
    const auto x = s_even_expansion(f, ctx(), L);
    return (x.direct - x.minus_half_phi0 - x.d1_term) * L * L;
  };
  const double f20 = remainder(fejer(1.0), 20.0), f25 = remainder(fejer(1.0), 25.0);
  CHECK(std::fabs(f20 - f25) < 0.01 * std::fabs(f20));
  CHECK(std::fabs(remainder(fejer(0.8), 25.0) * 0.8 - f25) < 0.01 * std::fabs(f25));
  CHECK(std::fabs(remainder(phi, 25.0)) < std::fabs(remainder(phi, 20.0)));
}

TEST_CASE("U terms") {
  const WeightFunction& w = gaussian_weight();
  const TestFunction half = fejer_squared(0.5);
  const double u4 = U1(half, w, 1e4), u5 = U1(half, w, 1e5), u6 = U1(half, w, 1e6);
  // X^{(sigma-1)/2} gives 10^{1/4} per decade at sigma = 1/2, up to slowly varying log factors.
  // The bare rate is 10^{1/4} per decade; the 1/L^4 factor from the cubic zero of
  // phi_hat at sigma brings the observed ratio close to sqrt(10).
  for (double r : {u4 / u5, u5 / u6}) CHECK(std::fabs(r - std::sqrt(10.0)) < 0.2 * std::sqrt(10.0));
  MESSAGE("U1 decade ratios " << u4 / u5 << " " << u5 / u6);
  CHECK_THROWS_AS(U1(fejer_squared(1.2), w, 1e6), DomainError);
  CHECK_THROWS_AS(U2(half, ctx().transforms, 1e6), DomainError);

  const TestFunction phi = fejer_squared(1.2);
  CHECK(std::fabs(U2(phi, ctx().transforms, 1e8, false) - U2(phi, ctx().transforms, 1e8)) < 1e-9);

  const auto v = v_w1(ctx().transforms);
  CHECK(std::fabs(v.mellin_part - 0.658956022779978059) < 1e-10);
  CHECK(std::fabs(v.h_hat_part - 0.17051293293652477) < 1e-9);
  CHECK(v.h_part == 0.0);
  // L U2 -> v_w1 phi_hat(1), with a slowly decaying 1/L correction; extrapolate from huge X.
  std::vector<double> Ls, ys;
  for (double logx : {100.0 * std::log(10.0), 200.0 * std::log(10.0), 300.0 * std::log(10.0)}) {
    const double L = logx - std::log(2.0 * kPi * std::exp(1.0));
    Ls.push_back(L);
    ys.push_back(L * U2(phi, ctx().transforms, std::exp(logx)));
  }
  const double target = v.value * phi.phi_hat(1.0);
  const double extrap = extrapolate(Ls, ys);
  MESSAGE("L U2 at 1e100/1e200/1e300: " << ys[0] << " " << ys[1] << " " << ys[2] << ", extrapolated " << extrap
                                        << ", target " << target);
  CHECK(std::fabs(extrap - target) < 0.1 * std::fabs(target));
}

TEST_CASE("error exponents") {
  CHECK(error_exponents(0.5).eta == doctest::Approx(-0.6));
  CHECK(error_exponents(1.5).eta == doctest::Approx(-0.25));
  CHECK(error_exponents(0.4).xi.value() == doctest::Approx(-0.6));
  CHECK(error_exponents(1.0 / 3.0).xi.value() == doctest::Approx(-2.0 / 3.0));
  CHECK(error_exponents(0.2).xi.value() == doctest::Approx(-0.8));
  CHECK(!error_exponents(1.5).xi.has_value());
  CHECK_THROWS_AS(error_exponents(0.0), DomainError);
  CHECK_THROWS_AS(error_exponents(2.0), DomainError);
}

TEST_CASE("I_s Poisson evaluation") {
  const TestFunction phi = fejer_squared(1.5);
  for (int s : {1, 3, 5})
    for (double X : {1e4, 1e6}) {
      CAPTURE(s);
      CAPTURE(X);
      CHECK(I_s_identity_residual(s, phi, ctx().transforms, X) <= 5.0 * s / std::sqrt(X));
    }
}

TEST_CASE("theorem right-hand sides") {
  const TestFunction phi = fejer_squared(0.9);
  const auto t11 = theorem_rhs(Theorem::T1_1, phi, ctx(), 1e6);
  CHECK(t11.main_term == doctest::Approx(katz_sarnak_main(phi)).epsilon(1e-14));
  REQUIRE(t11.coefficients.size() == 1);
  CHECK(t11.coefficients[0].label == "closed-form");
  CHECK(std::fabs(t11.total - (t11.main_term + R_w1(phi, ctx()) / std::log(1e6))) < 1e-12);
  CHECK(parse_theorem(theorem_name(Theorem::T3_5)) == Theorem::T3_5);
  CHECK_THROWS_AS(parse_theorem("T9"), DomainError);

  // T3_5 and T1_1 differ by an O(1/L^2) amount whose constant is stable in X.
  std::vector<double> scaled;
  for (double X : {1e4, 1e6}) {
    const double L = L_of(X);
    const double d = theorem_rhs(Theorem::T3_5, phi, ctx(), X).total - theorem_rhs(Theorem::T1_1, phi, ctx(), X).total;
    scaled.push_back(d * L * L);
  }
  MESSAGE("(T3_5 - T1_1) L^2 at 1e4/1e6: " << scaled[0] << " " << scaled[1]);
  CHECK(std::fabs(scaled[0]) < 2.5);
  CHECK(std::fabs(scaled[1]) < 2.5);
  CHECK(std::fabs(scaled[1] - scaled[0]) < 0.2);

  // T1_3 against the exact explicit-formula density over all squarefree d.
  const double X = 1e4;
  const TestFunction f4 = fejer(0.4);
  const auto t13 = theorem_rhs(Theorem::T1_3, f4, ctx(), X);
  const auto spec = make_family_spec(Family::F_all, X, sieve(), gaussian_weight(), Convention::kronecker_literal);
  const double measured = density(spec, f4).total;
  CHECK(std::fabs(t13.total - measured) < std::pow(X, error_exponents(0.4).xi.value() + 0.05));

  // Branch continuity at sigma = 1.
  const auto below = theorem_rhs(Theorem::T1_2, fejer_squared(1.0 - 1e-7), ctx(), X);
  const auto at = theorem_rhs(Theorem::T1_2, fejer_squared(1.0), ctx(), X);
  CHECK(below.branch == Branch::sigma_lt_1);
  CHECK(at.branch == Branch::sigma_in_1_2);
  CHECK(std::fabs(below.total - at.total) < 3.0 / std::sqrt(X) * phi_hat_integral(fejer_squared(1.0), -1.0, 1.0));
  CHECK_THROWS_AS(theorem_rhs(Theorem::T1_2, fejer_squared(2.0), ctx(), X), DomainError);
}
