// Acceptance run: one PASS/FAIL line per criterion on standard output.
// Exit status 0 iff every criterion passes.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qdl/arith.hpp"
#include "qdl/explicit_formula.hpp"
#include "qdl/ffield.hpp"
#include "qdl/numeric.hpp"
#include "qdl/predict.hpp"
#include "qdl/report.hpp"
#include "qdl/testfn.hpp"
#include "qdl/weightfn.hpp"
#include "qdl/zeros.hpp"

using namespace qdl;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const SieveTables& sieve() {
  static const SieveTables t = build_sieves(4000000);
  return t;
}

const PredictionContext& ctx() {
  static const PredictionContext c = make_prediction_context(sieve(), gaussian_weight(), 200000);
  return c;
}

Outcome explicit_formula_identity() {
  const double X = 200.0, T = 60.0, L = L_of(X);
  const TestFunction phi = fejer_squared(0.9);
  const std::vector<std::int64_t> ds{1, -1, 2, -2, -3, 5, -7, 13, -15, -19, 21, 30, -35, 41, -67, 105, 110, 221, -287, -499};
  double worst = -1e300, worst_gap = 0.0, worst_bound = 0.0;
  std::int64_t worst_d = 0, max_conductor = 0;
  bool ok = true;
  for (std::int64_t d : ds) {
    const auto z = find_zeros(d, T);
    max_conductor = std::max(max_conductor, z.conductor);
    if (!z.complete || z.conductor > 500) ok = false;
    const double gap = std::fabs(zero_sum(z, phi, L) - single_L_density(Family::F_all, d, phi, X, sieve()));
    const double bound = 1e-3 + zero_tail_bound(phi, L, z.conductor, T, static_cast<std::int64_t>(z.gammas.size()));
    if (gap > bound) ok = false;
    if (gap - bound > worst) {
      worst = gap - bound;
      worst_gap = gap;
      worst_bound = bound;
      worst_d = d;
    }
  }
  return {ok, std::to_string(ds.size()) + " characters, conductor <= " + std::to_string(max_conductor) +
                  "; tightest d = " + std::to_string(worst_d) + ": |zeros - explicit| = " + num(worst_gap) +
                  " vs bound " + num(worst_bound)};
}

Outcome poisson_plancherel() {
  const auto w = gaussian_weight();
  bool ok = true;
  std::string d;
  for (double X : {10.0, 1e2, 1e3, 1e4}) {
    const double r = poisson_identity_check(w, X), b = std::pow(X, -5.0);
    if (!(r < b)) ok = false;
    d += "X=" + num(X) + ": " + num(r) + (r < b ? " < " : " >= ") + num(b) + "; ";
  }
  const double diff = std::fabs(integral_w_of_square(w) - integral_w_hat_of_square(w));
  if (!(diff < 1e-10)) ok = false;
  return {ok, d + "|int w(t^2) - int w_hat(t^2)| = " + num(diff)};
}

Outcome poisson_step() {
  const TestFunction phi = fejer_squared(1.5);
  const auto tr = build_transforms(gaussian_weight());
  bool ok = true;
  double worst = 0.0;
  for (int s : {1, 3, 5})
    for (double X : {1e4, 1e6}) {
      const double ratio = I_s_identity_residual(s, phi, tr, X) / (5.0 * s / std::sqrt(X));
      worst = std::max(worst, ratio);
      if (!(ratio <= 1.0)) ok = false;
    }
  return {ok, "max residual / (5 s X^{-1/2}) = " + num(worst) + " over s in {1,3,5}, X in {1e4,1e6}"};
}

Outcome first_order_coefficient() {
  const TestFunction phi = fejer_squared(1.2);
  const double main = katz_sarnak_main(phi), r1 = R_w1(phi, ctx());
  std::vector<double> res;
  std::string d;
  for (double X : {1e3, 1e4, 1e5}) {
    const double D = density(make_family_spec(Family::F_star, X, sieve()), phi).total;
    res.push_back(std::fabs(D - main));
    d += "X=" + num(X) + ": |D - main| = " + num(res.back()) + "; ";
  }
  const double L = L_of(1e5), scaled = res.back() * L;
  const bool decreasing = res[1] < res[0] && res[2] < res[1];
  const bool within = std::fabs(scaled - r1) <= 0.3 * std::fabs(r1);
  return {decreasing && within, d + "residual*L at 1e5 = " + num(scaled) + " vs R_w1 = " + num(r1) + " (" +
                                    num(100.0 * std::fabs(scaled / r1 - 1.0)) + "% off)"};
}

Outcome phase_transition() {
  const TestFunction small = fejer_squared(0.5);
  std::vector<double> res;
  std::string d;
  for (double X : {1e3, 1e4, 1e5}) {
    const double D = density(make_family_spec(Family::F_all, X, sieve()), small).total;
    res.push_back(std::fabs(D - theorem_rhs(Theorem::T1_2, small, ctx(), X).total));
    d += "X=" + num(X) + ": " + num(res.back()) + "; ";
  }
  const double s1 = res[0] / res[1], s2 = res[1] / res[2];
  const TestFunction big = fejer_squared(1.2);
  const double X = 1e8, L = L_of(X);
  const double lu2 = L * U2(big, ctx().transforms, X);
  const double target = v_w1(ctx().transforms).value * big.phi_hat(1.0);
  const bool shrink = s1 >= 2.5 && s2 >= 2.5;
  const bool u2 = std::fabs(lu2 - target) <= 0.1 * std::fabs(target);
  return {shrink && u2, d + "decade ratios " + num(s1) + ", " + num(s2) + " (need >= 2.5); L*U2(1e8) = " + num(lu2) +
                            " vs v_w1*phi_hat(1) = " + num(target)};
}

Outcome s_even() {
  const TestFunction phi = fejer_squared(1.2);
  const double L = 25.0;
  const auto e = s_even_expansion(phi, ctx(), L);
  const double gap = std::fabs(e.direct - e.minus_half_phi0 - e.d1_term);
  return {gap <= 2.0 / (L * L), "|LHS + phi(0)/2 - d1 phi_hat(0)/L| = " + num(gap) + " vs 2/L^2 = " + num(2.0 / (L * L)) +
                                    " (" + num(gap * L * L) + "/L^2)"};
}

Outcome function_field() {
  const TestFunction phi = fejer(1.0);
  bool ordered = true, fe = true, weil = true, last = false;
  std::string d;
  for (int n : {7, 9, 11}) {
    const auto dens = ff_one_level_density(3, n, phi);
    const auto r = rudnick_rhs(3, dens.g, phi);
    const double em = std::fabs(dens.value - r.main_term), ec = std::fabs(dens.value - r.value);
    if (!(em > ec)) ordered = false;
    fe = fe && dens.functional_equations_hold;
    weil = weil && dens.max_weil_deviation < 1e-8;
    if (n == 11) last = ec <= 0.5 / (dens.g * dens.g);
    d += "n=" + std::to_string(n) + ": main-only " + num(em) + ", corrected " + num(ec) + " (" +
         num(ec * dens.g * dens.g) + "/g^2); ";
  }
  d += std::string("main-only worse everywhere: ") + (ordered ? "yes" : "no") + "; n=11 within 0.5/g^2: " +
       (last ? "yes" : "no") + "; functional equations: " + (fe ? "yes" : "no") + "; Weil: " + (weil ? "yes" : "no");
  return {ordered && last && fe && weil, d};
}

Outcome character_sums() {
  const double X = 1e4;
  const auto w = gaussian_weight();
  const auto& c = ctx().constants;
  const auto star = make_family_spec(Family::F_star, X, sieve());
  const auto all = make_family_spec(Family::F_all, X, sieve());
  const double ws = total_weight(star), ws_pred = 2.0 * X / (3.0 * c.zeta_2) * w.w_hat0();
  const double wa = total_weight(all), wa_pred = X * w.w_hat0();
  const double base = std::log(X) + 2.0 / w.w_hat0() * w.w_log_moment;
  const double ls = log_conductor_average(star);
  const double secondary = -(w.mellin(0.5) / w.mellin(1.0)) * c.zeta_half / std::sqrt(X);
  const double pred = base + 2.0 * c.zeta_prime_over_zeta_at_2 + secondary;
  const double la = log_conductor_average(all);
  const double e1 = std::fabs(ws / ws_pred - 1.0), e2 = std::fabs(wa / wa_pred - 1.0);
  const double e3 = std::fabs(ls - base), e4 = std::fabs(la - pred), e4n = std::fabs(la - (pred - secondary));
  const bool ok = e1 < 0.01 && e2 < 0.01 && e3 < 0.01 && e4 < 0.01 && e4 < e4n;
  return {ok, "W* rel " + num(e1) + ", W rel " + num(e2) + ", log-conductor F* " + num(e3) + ", F " + num(e4) +
                  " (without the zeta(1/2) term " + num(e4n) + ")"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"explicit formula vs zeros", explicit_formula_identity},
      {"Poisson and Plancherel identities", poisson_plancherel},
      {"Poisson step of I_s", poisson_step},
      {"main term and first-order coefficient", first_order_coefficient},
      {"phase transition", phase_transition},
      {"even prime-power expansion", s_even},
      {"function-field comparison", function_field},
      {"character-sum main terms", character_sums},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("criterion %zu %s [%s] %s (%.1f s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
