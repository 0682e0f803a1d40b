#include "qdl/predict.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdl/numeric.hpp"
#include "qdl/special.hpp"

namespace qdl {

namespace {

const double kSqrtTwoPiE = std::sqrt(kTwoPiE);

// Symmetric knot set of phi_hat on [-sigma, sigma].
std::vector<double> u_knots(const TestFunction& phi) {
  std::vector<double> k;
  for (double b : phi.breakpoints()) {
    k.push_back(b);
    k.push_back(-b);
  }
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  return k;
}

QuadOptions tight() {
  QuadOptions o;
  o.abs_tol = 1e-15;
  o.rel_tol = 1e-12;
  o.max_intervals = 20000;
  return o;
}

// int_a^b e^{L(u-1)/2} phi_hat(u) du.
double tilted_integral(const TestFunction& phi, double L, double a, double b) {
  a = std::max(a, -phi.sigma());
  b = std::min(b, phi.sigma());
  if (b <= a) return 0.0;
  return integrate([&](double u) { return std::exp(0.5 * L * (u - 1.0)) * phi.phi_hat(u); }, a, b, u_knots(phi),
                   tight())
      .value;
}

double require_L(double X) {
  const double L = L_of(X);
  if (!(X >= 10.0) || !(L > 0.0)) throw DomainError("predictions need X > 2 pi e so that L > 0");
  return L;
}

// Smallest y beyond which |f| < thr, scanning outward from y0 in small steps.
double decay_point(const std::function<double(double)>& f, double y0, double thr) {
  double y = y0;
  while (std::fabs(f(y)) >= thr) {
    y *= 1.01;
    if (y > 1e6) throw NumericalError("weight transform does not decay");
  }
  return y;
}

// The first-branch sums: substitute rho = e^{tau/2} or integrate in tau.
// Computes (1/L) int_0^{tau_max} phi_hat(1 + tau/L) e^{tau/2} S(e^{tau/2}) dtau.
double upper_branch(const TestFunction& phi, double L, double rho_max, const std::function<double(double)>& S,
                    bool substitute) {
  const double sigma = phi.sigma();
  if (sigma <= 1.0) return 0.0;
  const double tau_end = std::min((sigma - 1.0) * L, 2.0 * std::log(rho_max));
  if (tau_end <= 0.0) return 0.0;
  std::vector<double> tk;
  for (double b : phi.breakpoints())
    if (b > 1.0) tk.push_back(L * (b - 1.0));
  if (substitute) {
    std::vector<double> rk;
    for (double t : tk) rk.push_back(std::exp(0.5 * t));
    const auto f = [&](double rho) { return 2.0 * phi.phi_hat(1.0 + 2.0 * std::log(rho) / L) * S(rho); };
    return integrate(f, 1.0, std::exp(0.5 * tau_end), rk, tight()).value / L;
  }
  const auto f = [&](double tau) {
    const double rho = std::exp(0.5 * tau);
    return phi.phi_hat(1.0 + tau / L) * rho * S(rho);
  };
  return integrate(f, 0.0, tau_end, tk, tight()).value / L;
}

// Delta(v) = sum_{n>=1} k(n e^v) - w_hat(0)/4 on a uniform grid in v. Below
// v_lo the Poisson dual of the sum is negligible (Delta = 0); above v_hi every
// k(n e^v) vanishes (Delta = -w_hat(0)/4).
class DeltaTable {
 public:
  explicit DeltaTable(const MobiusKernels& K) : quarter_(0.25 * K.transforms().weight.w_hat0()) {
    const auto& w = K.transforms().weight;
    const double y_g = decay_point([&](double y) { return g_transform(w, y); }, 0.05, 1e-22 * std::fabs(w.w_hat0()));
    y_hi_ = 2.0 * y_g;
    auto direct = [&](double y) {
      CompensatedSum s;
      for (int n = 1; n * y < y_hi_; ++n) s += K.k(n * y);
      return s.value() - quarter_;
    };
    double y = 0.05;
    int quiet = 0;
    while (quiet < 3) {
      y *= 0.97;
      quiet = std::fabs(direct(y)) < 1e-15 ? quiet + 1 : 0;
      if (y < 1e-4) throw NumericalError("DeltaTable: Poisson tail does not vanish");
    }
    v_lo_ = std::log(y);
    v_hi_ = std::log(y_hi_);
    const int n = static_cast<int>(std::ceil((v_hi_ - v_lo_) / 1e-4));
    h_ = (v_hi_ - v_lo_) / n;
    val_.resize(static_cast<std::size_t>(n) + 3);
    // Grid index i sits at v_lo + (i - 1) h, one guard node on each side.
    parallel_chunks<int>(val_.size(), 1024, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) val_[i] = direct(std::exp(v_lo_ + (static_cast<double>(i) - 1.0) * h_));
      return 0;
    });
    for (double v : val_) max_abs_ = std::max(max_abs_, std::fabs(v));
    max_abs_ = std::max(max_abs_, quarter_);
  }

  double operator()(double v) const {
    if (v <= v_lo_) return 0.0;
    if (v >= v_hi_) return -quarter_;
    const double x = (v - v_lo_) / h_ + 1.0;
    std::size_t i = static_cast<std::size_t>(x);
    i = std::clamp<std::size_t>(i, 1, val_.size() - 3);
    const double t = x - static_cast<double>(i);
    const double f0 = val_[i - 1], f1 = val_[i], f2 = val_[i + 1], f3 = val_[i + 2];
    // Cubic Lagrange through i-1, i, i+1, i+2.
    const double a = t + 1.0, b = t - 1.0, c = t - 2.0;
    return -t * b * c / 6.0 * f0 + a * b * c / 2.0 * f1 - a * t * c / 2.0 * f2 + a * t * b / 6.0 * f3;
  }
  double v_lo() const { return v_lo_; }
  double v_hi() const { return v_hi_; }
  double max_abs() const { return max_abs_; }

 private:
  double quarter_, y_hi_ = 0.0, v_lo_ = 0.0, v_hi_ = 0.0, h_ = 0.0, max_abs_ = 0.0;
  std::vector<double> val_;
};

// Cumulative int_{-sigma}^{u} phi_hat on a grid refined at the knots.
class PhiHatCumulative {
 public:
  explicit PhiHatCumulative(const TestFunction& phi) : phi_(phi) {
    const double s = phi.sigma();
    std::vector<double> knots = u_knots(phi);
    for (int i = 0; i <= 4000; ++i) knots.push_back(-s + 2.0 * s * i / 4000.0);
    std::sort(knots.begin(), knots.end());
    for (double k : knots)
      if (grid_.empty() || k - grid_.back() > 1e-12 * s) grid_.push_back(k);
    cum_.assign(grid_.size(), 0.0);
    CompensatedSum acc;
    for (std::size_t i = 1; i < grid_.size(); ++i) {
      acc += gauss_legendre([&](double u) { return phi_.phi_hat(u); }, grid_[i - 1], grid_[i], 20);
      cum_[i] = acc.value();
    }
  }
  double operator()(double u) const {
    if (u <= grid_.front()) return 0.0;
    if (u >= grid_.back()) return cum_.back();
    const std::size_t i =
        static_cast<std::size_t>(std::upper_bound(grid_.begin(), grid_.end(), u) - grid_.begin()) - 1;
    if (u == grid_[i]) return cum_[i];
    return cum_[i] + gauss_legendre([&](double x) { return phi_.phi_hat(x); }, grid_[i], u, 20);
  }

 private:
  const TestFunction& phi_;
  std::vector<double> grid_, cum_;
};

// F(s) = int_1^inf floor(u)/u k(u/s) du, panel by panel.
double floor_kernel_integral(const MobiusKernels& K, double s, double y_hi) {
  const int N = static_cast<int>(std::floor(y_hi * s));
  CompensatedSum acc;
  for (int n = 1; n <= N; ++n) {
    const auto f = [&](double u) { return K.k(u / s) / u; };
    const double v = s <= 50.0 ? integrate(f, n, n + 1.0, tight()).value : gauss_legendre(f, n, n + 1.0, 20);
    acc += n * v;
  }
  return acc.value();
}

struct H2Asymptote {
  double a = 0.0;  // F(s) ~ a + b log s
  double b = 0.0;
};

// With int_0^inf k = 0 and k(y) - k(0) = O(y^4), Euler-Maclaurin on the
// floor function gives F(s) = (w0/4) log(2 pi s) - M_k/2 + O(s^{-4}), where
// M_k = int_0^1 (k(y) - k(0))/y dy + int_1^inf k(y)/y dy.
H2Asymptote h2_asymptote(const MobiusKernels& K, double y_hi) {
  const double k0 = K.k(0.0);
  const double Mk = integrate([&](double y) { return y == 0.0 ? 0.0 : (K.k(y) - k0) / y; }, 0.0, 1.0, tight()).value +
                    (y_hi > 1.0 ? integrate([&](double y) { return K.k(y) / y; }, 1.0, y_hi, tight()).value : 0.0);
  const double w0 = K.transforms().weight.w_hat0();
  return {0.25 * w0 * std::log(2.0 * kPi) - 0.5 * Mk, 0.25 * w0};
}

// sum over n >= 1 of f(n rho) for a kernel supported in [0, t_max).
double lattice_sum(const std::function<double(double)>& f, double rho, double t_max) {
  CompensatedSum s;
  for (int n = 1; n * rho < t_max; ++n) s += f(n * rho);
  return s.value();
}

}  // namespace

PredictionContext make_prediction_context(const SieveTables& tables, const WeightFunction& w, std::int64_t s_cutoff) {
  PredictionContext ctx;
  ctx.tables = &tables;
  ctx.transforms = build_transforms(w);
  ctx.kernels = std::make_shared<const MobiusKernels>(build_mobius_kernels(ctx.transforms, tables, s_cutoff));
  ctx.constants = compute_constants(tables);
  return ctx;
}

double katz_sarnak_main(const TestFunction& phi) {
  return phi.phi_hat(0.0) - 0.5 * phi_hat_integral(phi, -1.0, 1.0);
}

double r_bracket(const PredictionContext& ctx) {
  const auto& c = ctx.constants;
  const auto& w = ctx.weight();
  return std::log(16.0) - c.euler_gamma - 1.0 - 2.0 * c.prime_constant.value - 2.0 * c.theta_integral_refined.value +
         2.0 / w.w_hat0() * w.w_log_moment;
}

KernelIntegral c_w1(const PredictionContext& ctx) {
  const MobiusKernels& K = *ctx.kernels;
  const auto& w = ctx.weight();
  KernelIntegral out;

  // h1 vanishes identically once x reaches the end of the g_hat table.
  const double t_max = K.transforms().g_hat->t_max();
  CompensatedSum h1s;
  double h1_err = 0.0, H = 0.0;
  for (int n = 1; n < static_cast<int>(std::ceil(t_max)); ++n) {
    H += 1.0 / n;
    const auto r = integrate([&](double u) { return K.h1(u); }, n, n + 1.0, tight());
    h1s += H * r.value;
    h1_err += H * r.error;
  }
  out.h1_part = 2.0 * h1s.value();

  // h2 through the Moebius variable: 2C sum_s mu(s)/s^2 F(s).
  const double y_hi = 2.0 * decay_point([&](double y) { return g_transform(w, y); }, 0.05, 1e-22 * std::fabs(w.w_hat0()));
  const H2Asymptote as = h2_asymptote(K, y_hi);
  const auto& S = K.odd_s();
  const auto& mu = K.odd_mu();
  const std::int64_t S0 = std::min<std::int64_t>(2001, K.s_cutoff());
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < S.size() && S[i] <= S0; ++i) idx.push_back(i);
  std::vector<double> F(idx.size());
  parallel_chunks<int>(idx.size(), 8, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) F[j] = floor_kernel_integral(K, static_cast<double>(S[idx[j]]), y_hi);
    return 0;
  });
  CompensatedSum body, P0, P1;
  double eps_max = 0.0;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const double s = static_cast<double>(S[idx[j]]);
    const double m = mu[idx[j]] / (s * s);
    body += m * F[j];
    P0 += m;
    P1 += m * std::log(s);
    if (s > 0.5 * static_cast<double>(S0))
      eps_max = std::max(eps_max, std::fabs(F[j] - as.a - as.b * std::log(s)));
  }
  const double zeta2 = ctx.constants.zeta_2;
  const double M = 4.0 / (3.0 * zeta2);
  const double lambda = ctx.constants.zeta_prime_over_zeta_at_2 + std::log(2.0) / 3.0;
  const double rest = as.a * (M - P0.value()) + as.b * (M * lambda - P1.value());
  const double C = K.prefactor();
  out.h2_part = 2.0 * C * (body.value() + rest);
  // eps(s) = O(s^{-4}), so the neglected part is below eps_max / S0.
  const double h2_err = 2.0 * C * eps_max / static_cast<double>(S0) + 1e-13;
  out.value = out.h1_part + out.h2_part;
  // Table interpolation error eps enters h1 at most as 2 C eps (1 + log t_max).
  double H_total = 0.0;
  H = 0.0;
  for (int n = 1; n < static_cast<int>(std::ceil(t_max)); ++n) H_total += (H += 1.0 / n);
  const double table_err = 2.0 * H_total * 2.0 * C * K.transforms().g_hat->interpolation_error() * (1.0 + std::log(t_max));
  out.error = 2.0 * h1_err + h2_err + table_err;
    // The table term is a worst-case additive bound; only the truncation and
  // quadrature parts can be tightened by the caller, so only they are gated.
  if (!(2.0 * h1_err + h2_err < 1e-6))
    throw NumericalError("c_w1: tail estimate " + std::to_string(2.0 * h1_err + h2_err) + " exceeds 1e-6");
  return out;
}

double c_w1_h2_direct(const PredictionContext& ctx, double U) {
  const MobiusKernels& K = *ctx.kernels;
  const int N = static_cast<int>(std::floor(U));
  std::vector<double> parts = parallel_chunks<double>(static_cast<std::size_t>(std::max(N - 1, 0)), 1,
                                                      [&](std::size_t b, std::size_t) {
                                                        const double n = static_cast<double>(b + 1);
                                                        return n * gauss_legendre([&](double u) { return K.h2(u) / u; },
                                                                                  n, n + 1.0, 20);
                                                      });
  CompensatedSum s;
  for (double v : parts) s += v;
  return 2.0 * s.value();
}

double R_w1(const TestFunction& phi, const PredictionContext& ctx) {
  const double f0 = phi.phi_hat(0.0), f1 = phi.phi_hat(1.0);
  double v = f0 * r_bracket(ctx);
  if (f1 != 0.0) v += f1 * c_w1(ctx).value;
  return v;
}

JValue J_X(const TestFunction& phi, const PredictionContext& ctx, double X, const JOptions& opt) {
  const double sigma = phi.sigma();
  if (!(sigma < 2.0)) throw DomainError("J_X: requires sigma < 2");
  const double L = require_L(X);
  const MobiusKernels& K = *ctx.kernels;
  JValue out;

  const double t_max = K.transforms().g_hat->t_max();
  out.h1_branch = upper_branch(
      phi, L, t_max, [&](double rho) { return lattice_sum([&](double x) { return K.h1(x); }, rho, t_max); },
      opt.substitute);

  // h2 branch: (C/L) [M I_inf + sum_{s odd} mu(s)/s^2 D(s)], with
  // D(s) = int_0^inf phi_hat(1 - tau/L) Delta(tau/2 - log s) dtau and
  // (C/L) M I_inf = (C M w0/4) int_{-sigma}^{1} phi_hat.
  const DeltaTable delta(K);
  const PhiHatCumulative cum(phi);
  const double C = K.prefactor();
  const double M = 4.0 / (3.0 * ctx.constants.zeta_2);
  const double quarter = 0.25 * ctx.weight().w_hat0();
  const double tau_end = (1.0 + sigma) * L;
  std::vector<double> tau_knots;
  for (double b : u_knots(phi)) tau_knots.push_back(L * (1.0 - b));
  std::sort(tau_knots.begin(), tau_knots.end());

  auto D = [&](double s) {
    const double ls = std::log(s);
    const double ta = std::max(0.0, 2.0 * (ls + delta.v_lo()));
    const double tb = std::min(tau_end, std::max(0.0, 2.0 * (ls + delta.v_hi())));
    CompensatedSum acc;
    if (ta < tb) {
      std::vector<double> cuts{ta};
      for (double t : tau_knots)
        if (t > ta && t < tb) cuts.push_back(t);
      cuts.push_back(tb);
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const int pieces = std::max(1, static_cast<int>(std::ceil((cuts[i + 1] - cuts[i]) / opt.panel_width)));
        const double h = (cuts[i + 1] - cuts[i]) / pieces;
        for (int p = 0; p < pieces; ++p)
          acc += gauss_legendre(
              [&](double tau) { return phi.phi_hat(1.0 - tau / L) * delta(0.5 * tau - ls); }, cuts[i] + p * h,
              cuts[i] + (p + 1) * h, 20);
      }
    }
    // Beyond tb the kernel sum has vanished and Delta is the constant -w0/4.
    if (tb < tau_end) acc += -quarter * L * cum(1.0 - tb / L);
    return acc.value();
  };

  const auto& S = K.odd_s();
  const auto& mu = K.odd_mu();
  const double s_stop = std::exp(0.5 * tau_end - delta.v_lo());  // D(s) = 0 beyond
  std::size_t n = 0;
  while (n < S.size() && static_cast<double>(S[n]) <= s_stop) ++n;
  const auto parts = parallel_chunks<double>(n, 2048, [&](std::size_t b, std::size_t e) {
    CompensatedSum acc;
    for (std::size_t i = b; i < e; ++i) {
      const double s = static_cast<double>(S[i]);
      acc += mu[i] / (s * s) * D(s);
    }
    return acc.value();
  });
  CompensatedSum sum;
  for (double v : parts) sum += v;
  const double lead = C * M * quarter * cum(std::min(1.0, sigma));
  out.h2_branch = lead + C / L * sum.value();
  if (static_cast<double>(K.s_cutoff()) < s_stop) {
    const double D_max = delta.max_abs() * L * phi_hat_integral(phi, -sigma, sigma);
    out.error = C / L * D_max / static_cast<double>(K.s_cutoff());
  }
  out.value = out.h1_branch + out.h2_branch;
  return out;
}

double s_even_direct(const TestFunction& phi, const SieveTables& tables, double L_value, bool include_two) {
  const double P = std::exp(0.5 * phi.sigma() * L_value);
  if (P >= 2.0 && static_cast<double>(tables.limit) < P)
    throw DomainError("s_even: sieve limit below e^{sigma L/2} = " + std::to_string(P));
  CompensatedSum acc;
  for (std::size_t i = 0; i < tables.primes.size(); ++i) {
    const double p = tables.primes[i];
    if (p > P) break;
    if (p == 2.0 && !include_two) continue;
    const double lp = tables.log_primes[i];
    const double damp = 1.0 / (1.0 + 1.0 / p);
    double pj = 1.0;
    for (int j = 1;; ++j) {
      const double f = phi.phi_hat(2.0 * j * lp / L_value);
      if (f == 0.0) break;
      pj *= p;
      acc += lp / pj * damp * f;
    }
  }
  return -2.0 / L_value * acc.value();
}

SEvenExpansion s_even_expansion(const TestFunction& phi, const PredictionContext& ctx, double L_value) {
  if (!(L_value > 0.0)) throw DomainError("s_even_expansion: L must be > 0");
  const auto& c = ctx.constants;
  SEvenExpansion out;
  out.minus_half_phi0 = -0.5 * phi_hat_integral(phi, -phi.sigma(), phi.sigma());
  // sum_{j>=2} p^{-j} (1+1/p)^{-1} = 1/(p^2-1), and sum_p log p/(p^2-1) = -zeta'/zeta(2).
  out.j2_sum = -c.zeta_prime_over_zeta_at_2 - std::log(2.0) / 3.0;
  const double tail = -2.0 + 3.0 * std::log(2.0) - 2.0 * c.theta_integral_refined.value;
  // Proof grouping: the j >= 2 block plus the (1+1/p)^{-1} correction of the
  // j = 1 terms collapse to -2 sum_{p>=3} log p / (p(p^2-1)).
  out.d1 = -2.0 * c.prime_constant.value + tail;
  out.d1_term = out.d1 * phi.phi_hat(0.0) / L_value;
  out.direct = s_even_direct(phi, *ctx.tables, L_value, false);

  // Literal readings of the displayed index set, summed term by term.
  CompensatedSum j3_odd;
  for (std::size_t i = 0; i < ctx.tables->primes.size(); ++i) {
    const double p = ctx.tables->primes[i];
    if (p == 2.0) continue;
    j3_odd += ctx.tables->log_primes[i] / (p * p * p) / (1.0 - 1.0 / p) / (1.0 + 1.0 / p);
  }
  const double two = std::log(2.0) / 8.0 / (1.0 - 0.5) / 1.5;
  out.literal_readings = {{"p >= 3, j >= 3", -2.0 * j3_odd.value() + tail},
                          {"all p, j >= 3", -2.0 * (j3_odd.value() + two) + tail},
                          {"p >= 3, j >= 2", -2.0 * out.j2_sum + tail}};
  return out;
}

double U1(const TestFunction& phi, const WeightFunction& w, double X) {
  if (phi.sigma() > 1.0) throw DomainError("U1: requires sigma <= 1");
  const double L = require_L(X);
  const double pre = (w.mellin(0.5) - w.w(0.0) / std::sqrt(X)) / (2.0 * kSqrtTwoPiE * w.mellin(1.0));
  return pre * tilted_integral(phi, L, -1.0, 1.0);
}

double U2(const TestFunction& phi, const WeightTransforms& tr, double X, bool substitute) {
  const double sigma = phi.sigma();
  if (sigma < 1.0 || sigma >= 2.0) throw DomainError("U2: requires 1 <= sigma < 2");
  const double L = require_L(X);
  const auto& w = tr.weight;
  const double first = 0.5 * w.mellin(0.5) / (kSqrtTwoPiE * w.mellin(1.0)) * tilted_integral(phi, L, 0.0, 1.0);
  const auto& hh = *tr.h_hat;
  const double up = upper_branch(
      phi, L, hh.t_max(), [&](double rho) { return lattice_sum([&](double x) { return hh(x); }, rho, hh.t_max()); },
      substitute);
  // h(y) = w_hat(2 pi e y^2) decays super-exponentially; sum until it underflows.
  const double y_h = decay_point([&](double y) { return h_transform(w, y); }, 0.05, 1e-300);
  double down = 0.0;
  if (y_h > 1.0) {
    const double tau_end = std::min((1.0 + sigma) * L, 2.0 * std::log(y_h));
    std::vector<double> tk;
    for (double b : u_knots(phi)) tk.push_back(L * (1.0 - b));
    down = integrate(
               [&](double tau) {
                 return phi.phi_hat(1.0 - tau / L) *
                        lattice_sum([&](double x) { return h_transform(w, x); }, std::exp(0.5 * tau), y_h);
               },
               0.0, tau_end, tk, tight())
               .value /
           L;
  }
  return first - 2.0 / w.w_hat0() * (up + down);
}

VW1 v_w1(const WeightTransforms& tr) {
  const auto& w = tr.weight;
  VW1 out;
  out.mellin_part = w.mellin(0.5) / (kSqrtTwoPiE * w.mellin(1.0));
  const auto& hh = *tr.h_hat;
  CompensatedSum a, b;
  double H = 0.0;
  for (int n = 1; n < static_cast<int>(std::ceil(hh.t_max())); ++n) {
    H += 1.0 / n;
    a += H * integrate([&](double u) { return hh(u); }, n, n + 1.0, tight()).value;
  }
  const double y_h = decay_point([&](double y) { return h_transform(w, y); }, 0.05, 1e-300);
  for (int n = 1; n < y_h; ++n)
    b += n * integrate([&](double u) { return h_transform(w, u) / u; }, n, n + 1.0, tight()).value;
  out.h_hat_part = a.value();
  out.h_part = b.value();
  out.value = out.mellin_part - 4.0 / w.w_hat0() * (out.h_hat_part + out.h_part);
  return out;
}

ErrorExponents error_exponents(double sigma) {
  if (!(sigma > 0.0) || !(sigma < 2.0)) throw DomainError("error_exponents: requires 0 < sigma < 2");
  ErrorExponents e;
  e.eta = sigma < 1.0 ? -0.6 : 0.5 * sigma - 1.0;
  if (sigma < 1.0) {
    int m = std::max(1, static_cast<int>(std::ceil((1.0 / sigma - 1.0) / 2.0)));
    while (sigma < 1.0 / (2.0 * m + 1.0)) ++m;
    while (m > 1 && sigma >= 1.0 / (2.0 * m - 1.0)) --m;
    e.xi = sigma < 1.0 / (2.0 * m + 0.5) ? -1.0 + sigma : -(4.0 * m - 1.0) / (4.0 * m + 1.0);
  }
  return e;
}

double I_s_direct(int s, const TestFunction& phi, const WeightTransforms& tr, double X) {
  if (s < 1) throw DomainError("I_s: s must be >= 1");
  const double L = require_L(X);
  const auto& w = tr.weight;
  const double s2 = static_cast<double>(s) * s;
  auto f = [&](double u) {
    const double ph = phi.phi_hat(u);
    if (ph == 0.0) return 0.0;
    // 2 m^2 X^{1-u} (2 pi e)^u / s^2 = 2 m^2 (2 pi e) e^{-L(u-1)} / s^2.
    const double base = 2.0 * kTwoPiE * std::exp(-L * (u - 1.0)) / s2;
    CompensatedSum acc;
    for (int m = 1;; ++m) {
      const double t = w.w_hat(base * m * m);
      acc += t;
      if (std::fabs(t) < 1e-18 * std::max(1.0, std::fabs(acc.value())) && base * m * m > 1.0) break;
    }
    return ph * acc.value();
  };
  std::vector<double> k = u_knots(phi);
  k.push_back(1.0);
  return integrate(f, 0.0, phi.sigma(), k, tight()).value;
}

double I_s_poisson(int s, const TestFunction& phi, const WeightTransforms& tr, double X) {
  if (s < 1) throw DomainError("I_s: s must be >= 1");
  if (!(phi.sigma() < 2.0)) throw DomainError("I_s: requires sigma < 2");
  const double L = require_L(X);
  const auto& w = tr.weight;
  const auto& gh = *tr.g_hat;
  const double sd = s;
  const double up = upper_branch(
      phi, L, gh.t_max() / sd,
      [&](double rho) { return sd * lattice_sum([&](double x) { return gh(x); }, sd * rho, gh.t_max()); }, true);
  const double y_g = decay_point([&](double y) { return g_transform(w, y); }, 0.05, 1e-300);
  double down = 0.0;
  if (y_g * sd > 1.0) {
    const double tau_end = std::min((1.0 + phi.sigma()) * L, 2.0 * std::log(y_g * sd));
    std::vector<double> tk;
    for (double b : u_knots(phi)) tk.push_back(L * (1.0 - b));
    down = integrate(
               [&](double tau) {
                 return phi.phi_hat(1.0 - tau / L) *
                        lattice_sum([&](double x) { return g_transform(w, x); }, std::exp(0.5 * tau) / sd, y_g);
               },
               0.0, tau_end, tk, tight())
               .value /
           L;
  }
  return up + down + 0.5 * sd * gh(0.0) * tilted_integral(phi, L, 1.0, phi.sigma()) -
         0.5 * w.w_hat0() * phi_hat_integral(phi, 1.0, phi.sigma());
}

double I_s_identity_residual(int s, const TestFunction& phi, const WeightTransforms& tr, double X) {
  return std::fabs(I_s_direct(s, phi, tr, X) - I_s_poisson(s, phi, tr, X));
}

std::string theorem_name(Theorem t) {
  switch (t) {
    case Theorem::T1_1: return "T1_1";
    case Theorem::T3_5: return "T3_5";
    case Theorem::T1_2: return "T1_2";
    case Theorem::T1_3: return "T1_3";
  }
  return "?";
}

Theorem parse_theorem(const std::string& s) {
  for (Theorem t : {Theorem::T1_1, Theorem::T3_5, Theorem::T1_2, Theorem::T1_3})
    if (theorem_name(t) == s) return t;
  throw DomainError("unknown theorem '" + s + "' (expected T1_1, T3_5, T1_2 or T1_3)");
}

namespace {

bool has_derivatives(const TestFunction& phi, int order) {
  try {
    taylor_at(phi, 0.0, order);
    taylor_at(phi, 1.0, order);
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

double t35_total(const TestFunction& phi, const PredictionContext& ctx, double X) {
  const double L = require_L(X);
  const auto& w = ctx.weight();
  const double f0 = phi.phi_hat(0.0);
  return f0 + phi_hat_integral(phi, 1.0, phi.sigma()) +
         f0 / L * (std::log(2.0) + 1.0 - ctx.constants.euler_gamma + 2.0 / w.w_hat0() * w.w_log_moment) +
         gamma_integral(phi, L) + s_even_direct(phi, *ctx.tables, L, false) + J_X(phi, ctx, X).value;
}

}  // namespace

std::vector<double> extract_coefficients(const TestFunction& phi, const PredictionContext& ctx, int K,
                                         const std::vector<double>& ladder) {
  if (K < 2) return {};
  const int n = static_cast<int>(ladder.size());
  if (n < K - 1) throw DomainError("extract_coefficients: ladder shorter than the number of coefficients");
  const double main = katz_sarnak_main(phi);
  const double r1 = R_w1(phi, ctx);
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(ladder[static_cast<std::size_t>(i)]);
    b(i) = t35_total(phi, ctx, ladder[static_cast<std::size_t>(i)]) - main - r1 / lx;
    for (int j = 0; j < n; ++j) A(i, j) = std::pow(lx, -(j + 2));
  }
  const Eigen::VectorXd a = A.colPivHouseholderQr().solve(b);
  return std::vector<double>(a.data(), a.data() + (K - 1));
}

ExpansionReport theorem_rhs(Theorem theorem, const TestFunction& phi, const PredictionContext& ctx, double X, int K) {
  const double sigma = phi.sigma();
  if (theorem == Theorem::T1_3 ? !(sigma < 1.0) : !(sigma < 2.0))
    throw DomainError(theorem_name(theorem) + ": support sigma = " + std::to_string(sigma) + " outside its range");
  if (K < 1) throw DomainError("theorem_rhs: K must be >= 1");
  const double L = require_L(X);
  const auto& w = ctx.weight();
  const auto& c = ctx.constants;
  const double f0 = phi.phi_hat(0.0);

  ExpansionReport r;
  r.theorem = theorem;
  r.evaluated_at_X = X;
  r.L_value = L;
  r.branch = sigma < 1.0 ? Branch::sigma_lt_1 : Branch::sigma_in_1_2;
  r.main_term = katz_sarnak_main(phi);
  const double wlog = 2.0 / w.w_hat0() * w.w_log_moment;
  auto add = [&](std::string name, double v, std::string note) { r.terms.push_back({std::move(name), v, std::move(note)}); };

  switch (theorem) {
    case Theorem::T1_1: {
      add("main", r.main_term, "phi_hat(0) - (1/2) int_{-1}^{1} phi_hat");
      const double lx = std::log(X);
      const double r1 = R_w1(phi, ctx);
      r.coefficients.push_back({1, r1, "closed-form"});
      add("R_1 / log X", r1 / lx, "closed-form");
      if (K >= 2 && has_derivatives(phi, K - 1)) {
        const auto ex = extract_coefficients(phi, ctx, K, {1e4, 1e5, 1e6, 1e7, 1e8, 1e9});
        for (int k = 2; k <= K; ++k) {
          const double v = ex[static_cast<std::size_t>(k - 2)];
          r.coefficients.push_back({k, v, "extracted"});
          add("R_" + std::to_string(k) + " / (log X)^" + std::to_string(k), v / std::pow(lx, k), "extracted");
        }
      }
      break;
    }
    case Theorem::T3_5: {
      add("phi_hat(0)", f0, "");
      add("int_1^inf phi_hat", phi_hat_integral(phi, 1.0, sigma), "");
      add("constant", f0 / L * (std::log(2.0) + 1.0 - c.euler_gamma + wlog), "log(2 e^{1-gamma}) + weight log moment");
      add("gamma integral", gamma_integral(phi, L), "");
      add("S_even (p > 2)", s_even_direct(phi, *ctx.tables, L, false), "direct prime sum");
      const JValue j = J_X(phi, ctx, X);
      add("J(X)", j.value, "Moebius truncation bound " + std::to_string(j.error));
      r.coefficients.push_back({1, R_w1(phi, ctx), "closed-form"});
      break;
    }
    case Theorem::T1_2:
    case Theorem::T1_3: {
      if (theorem == Theorem::T1_2) {
        add("phi_hat(0)", f0, "");
        add("int_1^inf phi_hat", phi_hat_integral(phi, 1.0, sigma), "");
        const double sec = w.mellin(0.5) / w.mellin(1.0) * c.zeta_half / std::sqrt(X);
        add("constant",
            f0 / L * (1.0 - c.euler_gamma - 2.0 / 3.0 * std::log(2.0) + wlog + 2.0 * c.zeta_prime_over_zeta_at_2 - sec),
            "log(e^{1-gamma}/2^{2/3}) + weight log moment + 2 zeta'/zeta(2) - secondary");
      } else {
        const auto spec = make_family_spec(Family::F_all, X, *ctx.tables, w);
        add("log |d| average", f0 / L * log_conductor_average(spec), "weighted squarefree sum");
        add("constant", -f0 / L * (std::log(kPi) + c.euler_gamma + 5.0 / 3.0 * std::log(2.0)), "log(pi e^gamma 2^{5/3})");
      }
      add("S_even (all p)", s_even_direct(phi, *ctx.tables, L, true), "direct prime sum");
      add("gamma integral", gamma_integral(phi, L), "");
      if (sigma < 1.0)
        add("U_1(X)", U1(phi, w, X), "");
      else
        add("U_2(X)", U2(phi, ctx.transforms, X), "");
      break;
    }
  }
  CompensatedSum t;
  for (const auto& term : r.terms) t += term.value;
  r.total = t.value();
  return r;
}

}  // namespace qdl
