#include "qdl/zeros.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "qdl/numeric.hpp"

namespace qdl {

namespace {

constexpr int kEmTerms = 15;

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Number of leading Hurwitz terms per residue for |s|, as in hurwitz_zeta.
int head_terms(double abs_s) { return static_cast<int>(std::ceil((abs_s + 30.0) / kPi)) + 2; }

// Euler-Maclaurin tail sum_{k >= 0} (k + y)^{-s} for y > 0 large. At s = 1
// the divergent y^{1-s}/(s-1) is replaced by its finite part -log y, which is
// exact once summed against a character of mean zero.
Complex em_tail(Complex s, double y) {
  const double ly = std::log(y);
  const Complex y_pow = std::exp(-s * ly);  // y^{-s}
  Complex tail = (s == Complex(1.0, 0.0) ? Complex(-ly) : y * y_pow / (s - 1.0)) + 0.5 * y_pow;
  Complex rising = s;
  Complex pw = y_pow / y;
  const double inv_y2 = 1.0 / (y * y);
  for (int k = 1; k <= kEmTerms; ++k) {
    tail += bernoulli_2k(k) / factorial(2 * k) * rising * pw;
    rising *= (s + static_cast<double>(2 * k - 1)) * (s + static_cast<double>(2 * k));
    pw *= inv_y2;
  }
  return tail;
}

QuadraticCharacter character_for(std::int64_t d) {
  if (d == 1) return QuadraticCharacter{1};
  return character_of_squarefree(d);
}

}  // namespace

LFunction::LFunction(QuadraticCharacter chi, const ZeroOptions& opt) : chi_(chi), q_(chi.conductor()) {
  if (q_ > opt.max_conductor)
    throw DomainError("conductor " + std::to_string(q_) + " exceeds the configured bound " +
                      std::to_string(opt.max_conductor));
  chi_table_.resize(static_cast<std::size_t>(q_));
  for (std::int64_t a = 0; a < q_; ++a) chi_table_[static_cast<std::size_t>(a)] = static_cast<std::int8_t>(chi_(a == 0 ? q_ : a));
  if (q_ == 1) chi_table_[0] = 1;
}

Complex LFunction::operator()(Complex s) const {
  if (q_ == 1 && s == Complex(1.0, 0.0)) throw DomainError("zeta has a pole at s = 1");
  const int K = head_terms(std::abs(s));
  const std::int64_t n_max = static_cast<std::int64_t>(K) * q_;
  Complex direct = 0.0;
  std::int64_t a = 1 % q_;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const int c = chi_table_[static_cast<std::size_t>(a)];
    if (c != 0) {
      const double ln = std::log(static_cast<double>(n));
      const double amp = std::exp(-s.real() * ln);
      const double ph = -s.imag() * ln;
      direct += Complex(c * amp * std::cos(ph), c * amp * std::sin(ph));
    }
    if (++a == q_) a = 0;
  }
  // Residue a contributes q^{-s} sum_{k >= K} (k + a/q)^{-s}.
  Complex tails = 0.0;
  const double qd = static_cast<double>(q_);
  for (std::int64_t r = 1; r <= q_; ++r) {
    const int c = chi_table_[static_cast<std::size_t>(r % q_)];
    if (c == 0) continue;
    tails += static_cast<double>(c) * em_tail(s, K + static_cast<double>(r) / qd);
  }
  return direct + std::exp(-s * std::log(qd)) * tails;
}

double LFunction::theta(double t) const {
  const Complex lg = log_gamma(Complex(0.25 + 0.5 * parity(), 0.5 * t));
  return lg.imag() + 0.5 * t * std::log(static_cast<double>(q_) / kPi);
}

Complex LFunction::z_complex(double t) const {
  const double th = theta(t);
  return Complex(std::cos(th), std::sin(th)) * (*this)(Complex(0.5, t));
}

double LFunction::z(double t) const {
  const Complex v = z_complex(t);
  if (std::fabs(v.imag()) > 1e-7)
    throw NumericalError("Z-function not real at t = " + std::to_string(t) + " for D = " + std::to_string(chi_.D) +
                         " (imaginary part " + std::to_string(v.imag()) + ")");
  return v.real();
}

Complex dirichlet_L(Complex s, std::int64_t d) { return LFunction(character_for(d))(s); }

double z_function(double t, std::int64_t d) { return LFunction(character_for(d)).z(t); }

double argument_principle_count(const LFunction& L, double T, bool central_zero) {
  if (T <= 0.0) return 0.0;
  // On Re s = 2 the value stays in the right half plane, so the principal
  // argument is already continuous; only the horizontal leg is tracked.
  Complex prev = L(Complex(2.0, T));
  double arg = std::arg(prev);
  double x = 2.0, h = 0.05;
  while (x > 0.5) {
    const double nx = std::max(0.5, x - h);
    const Complex cur = L(Complex(nx, T));
    const double step = std::arg(cur / prev);
    if (std::fabs(step) > 0.5 && h > 1e-9) {
      h *= 0.5;
      continue;
    }
    if (std::fabs(step) > 0.5) throw NumericalError("argument_principle_count: path passes through a zero");
    arg += step;
    prev = cur;
    x = nx;
    h = std::min(0.05, 2.0 * h);
  }
  double n = (L.theta(T) + arg) / kPi - (central_zero ? 0.5 : 0.0);
  if (L.conductor() == 1) n += 1.0;  // poles of the completed zeta at 0 and 1
  return n;
}

ZeroSet find_zeros(std::int64_t d, double T, const ZeroOptions& opt) {
  if (T > opt.max_height)
    throw DomainError("height " + std::to_string(T) + " exceeds the configured bound " + std::to_string(opt.max_height));
  const LFunction L(character_for(d), opt);
  ZeroSet out;
  out.d = d;
  out.conductor = L.conductor();
  out.height_T = std::max(T, 0.0);
  if (T <= 0.0) {
    out.complete = true;
    return out;
  }
  const double z0 = L.z(0.0);
  out.central_zero = std::fabs(z0) < 1e-10;
  const double ap = argument_principle_count(L, T, out.central_zero);
  const double ap_round = std::round(ap);
  out.count_expected = static_cast<std::int64_t>(ap_round) + (out.central_zero ? 1 : 0);
  const bool ap_ok = std::fabs(ap - ap_round) < 0.05;

  const double q = static_cast<double>(L.conductor());
  double dt = std::min(0.5, 1.0 / std::log(q * (T + 3.0)));
  for (int refine = 0; refine <= opt.max_refinements; ++refine, dt *= 0.5) {
    std::vector<double> roots;
    double t_prev = out.central_zero ? dt / 8.0 : 0.0;
    double z_prev = L.z(t_prev);
    const auto steps = static_cast<std::int64_t>(std::ceil((T - t_prev) / dt));
    for (std::int64_t k = 1; k <= steps; ++k) {
      const double t = k == steps ? T : t_prev + dt;
      const double zt = L.z(t);
      if (zt == 0.0) {
        roots.push_back(t);
      } else if ((z_prev < 0.0) != (zt < 0.0) && z_prev != 0.0) {
        const double w = opt.root_width;
        auto tol = [w](double a, double b) { return std::fabs(b - a) < w; };
        std::uintmax_t iters = 200;
        const auto [lo, hi] =
            boost::math::tools::toms748_solve([&](double x) { return L.z(x); }, t_prev, t, z_prev, zt, tol, iters);
        if (!(hi - lo < w)) throw NumericalError("find_zeros: root bracket did not shrink below the target width");
        roots.push_back(0.5 * (lo + hi));
      }
      t_prev = t;
      z_prev = zt;
    }
    out.gammas = std::move(roots);
    if (ap_ok && out.found() == out.count_expected) {
      out.complete = true;
      break;
    }
  }
  return out;
}

void write_zero_set(const ZeroSet& z, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write zero cache " + path);
  f << std::setprecision(12);
  f << z.d << ' ' << z.conductor << ' ' << z.height_T << ' ' << (z.complete ? 1 : 0) << ' ' << z.found() << '\n';
  if (z.central_zero) f << 0.0 << '\n';
  for (double g : z.gammas) f << g << '\n';
  if (!f) throw std::runtime_error("failed writing zero cache " + path);
}

ZeroSet read_zero_set(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read zero cache " + path);
  ZeroSet z;
  int complete = 0;
  std::int64_t n = 0;
  if (!(f >> z.d >> z.conductor >> z.height_T >> complete >> n) || n < 0)
    throw std::runtime_error("malformed zero cache header in " + path);
  z.complete = complete != 0;
  for (std::int64_t i = 0; i < n; ++i) {
    double g = 0.0;
    if (!(f >> g)) throw std::runtime_error("zero cache " + path + " is truncated");
    if (g == 0.0)
      z.central_zero = true;
    else
      z.gammas.push_back(g);
  }
  if (!std::is_sorted(z.gammas.begin(), z.gammas.end())) throw std::runtime_error("zero cache " + path + " is not sorted");
  z.count_expected = z.found();
  return z;
}

ZeroSet cached_zeros(std::int64_t d, double T, const std::string& dir, const ZeroOptions& opt) {
  if (dir.empty()) return find_zeros(d, T, opt);
  const std::string path = (std::filesystem::path(dir) / ("L_" + std::to_string(d) + ".zeros")).string();
  if (std::filesystem::exists(path)) {
    try {
      ZeroSet z = read_zero_set(path);
      if (z.d == d && z.complete && z.height_T >= T) {
        const LFunction L(character_for(d), opt);
        if (z.conductor == L.conductor()) {
          z.gammas.erase(std::upper_bound(z.gammas.begin(), z.gammas.end(), T), z.gammas.end());
          z.height_T = T;
          const double ap = argument_principle_count(L, T, z.central_zero);
          const auto expected = static_cast<std::int64_t>(std::round(ap)) + (z.central_zero ? 1 : 0);
          if (std::fabs(ap - std::round(ap)) < 0.05 && expected == z.found()) {
            z.count_expected = expected;
            return z;
          }
        }
      }
    } catch (const std::runtime_error&) {
      // Unreadable or stale entries are recomputed below.
    }
  }
  ZeroSet z = find_zeros(d, T, opt);
  std::filesystem::create_directories(dir);
  write_zero_set(z, path);
  return z;
}

double zero_tail_bound(const TestFunction& phi, double L_value, std::int64_t conductor, double T,
                       std::int64_t count_to_T) {
  if (!(T * L_value / (2.0 * kPi) >= 1.0))
    throw DomainError("zero_tail_bound: need T L / 2pi >= 1 for the decay certificate");
  const double a = phi.decay_exponent();
  const double C = phi.decay_constant();
  const double q = static_cast<double>(conductor);
  // Upper bound for #{0 < gamma <= t}: half of the main term for |gamma| <= t
  // plus Trudgian's explicit error 0.22737 l + 2 log(1 + l), l = log(q(t+2)/2pi);
  // for zeta, 0.112 log t + 0.278 log log t + 2.51 on top of theta/pi + 1.
  auto n_up = [&](double t) {
    if (conductor == 1) {
      const double main = t / (2.0 * kPi) * std::log(t / (2.0 * kPi * std::exp(1.0))) + 7.0 / 8.0;
      return main + 1.0 + 0.112 * std::log(t) + 0.278 * std::log(std::log(t)) + 2.51;
    }
    const double l = std::log(q * (t + 2.0) / (2.0 * kPi));
    return 0.5 * (t / kPi * std::log(q * t / (2.0 * kPi * std::exp(1.0))) + 0.22737 * l + 2.0 * std::log1p(l));
  };
  // a int_T^inf N(t) t^{-a-1} dt with t = 1/u.
  QuadOptions opt;
  opt.rel_tol = 1e-8;
  opt.abs_tol = 0.0;
  const double integral =
      integrate([&](double u) { return u <= 0.0 ? 0.0 : n_up(1.0 / u) * std::pow(u, a - 1.0); }, 0.0, 1.0 / T, opt)
          .value;
  const double stieltjes = std::max(0.0, a * integral - static_cast<double>(count_to_T) * std::pow(T, -a));
  return 2.0 * C * std::pow(2.0 * kPi / L_value, a) * stieltjes;
}

double zero_sum(const ZeroSet& z, const TestFunction& phi, double L_value) {
  CompensatedSum s;
  for (double g : z.gammas) s += 2.0 * phi.phi(g * L_value / (2.0 * kPi));
  if (z.central_zero) s += phi.phi(0.0);
  return s.value();
}

std::int64_t character_index(Family family, std::int64_t d) { return family == Family::F_star ? 2 * d : d; }

EmpiricalDensity empirical_density(const FamilySpec& spec, const TestFunction& phi, double T,
                                   const ZeroProvider& provider) {
  const double L = L_of(spec.X);
  std::vector<std::int64_t> ds;
  std::vector<double> ws;
  for (std::int64_t d = 1; d <= spec.d_truncation; ++d) {
    const double o = family_weight(spec, d);
    if (o == 0.0) continue;
    for (std::int64_t sd : {d, -d}) {
      ds.push_back(sd);
      ws.push_back(o);
    }
  }
  struct Part {
    double sum = 0.0, tail = 0.0;
    std::string incomplete;
  };
  const auto parts = parallel_chunks<Part>(ds.size(), 1, [&](std::size_t b, std::size_t e) {
    Part p;
    for (std::size_t i = b; i < e; ++i) {
      ZeroSet z = provider(character_index(spec.family, ds[i]));
      if (!z.complete || z.height_T < T) {
        p.incomplete = std::to_string(ds[i]);
        continue;
      }
      z.gammas.erase(std::upper_bound(z.gammas.begin(), z.gammas.end(), T), z.gammas.end());
      p.sum = ws[i] * zero_sum(z, phi, L);
      p.tail = ws[i] * zero_tail_bound(phi, L, z.conductor, T, static_cast<std::int64_t>(z.gammas.size()));
    }
    return p;
  });
  EmpiricalDensity out;
  CompensatedSum s, t, W;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!parts[i].incomplete.empty())
      throw NumericalError("empirical_density: zero set for d = " + parts[i].incomplete + " is incomplete");
    s += parts[i].sum;
    t += parts[i].tail;
    W += ws[i];
  }
  out.value = s.value() / W.value();
  out.truncation_bound = t.value() / W.value();
  out.characters = ds.size();
  return out;
}

}  // namespace qdl
