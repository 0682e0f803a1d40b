#include "qdl/ffield.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "qdl/numeric.hpp"

namespace qdl {

namespace {

bool is_small_odd_prime(int q) { return q == 3 || q == 5 || q == 7 || q == 11 || q == 13; }

std::int64_t ipow(std::int64_t b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

int mod_inverse(int a, int q) {
  for (int x = 1; x < q; ++x)
    if (a * x % q == 1) return x;
  throw DomainError("mod_inverse: not invertible");
}

void trim(FqPoly& f) {
  while (!f.empty() && f.back() == 0) f.pop_back();
}

FqPoly poly_mod(FqPoly a, const FqPoly& b, int q) {
  const int inv = mod_inverse(b.back(), q);
  trim(a);
  while (a.size() >= b.size()) {
    const int c = a.back() * inv % q;
    const std::size_t shift = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] = ((a[shift + i] - c * b[i]) % q + q) % q;
    trim(a);
  }
  return a;
}

int mobius_small(int n) {
  int m = 1;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    n /= p;
    if (n % p == 0) return 0;
    m = -m;
  }
  return n > 1 ? -m : m;
}

using cplx = std::complex<double>;
using lcplx = std::complex<long double>;

// Value and derivatives of the monic polynomial sum_i c_i u^{deg - i} up to `order`.
std::vector<cplx> horner_derivs(const std::vector<double>& c, cplx u, int order) {
  std::vector<cplx> d(static_cast<std::size_t>(order + 1), 0.0);
  for (double coef : c) {
    for (int j = order; j >= 1; --j) d[j] = d[j] * u + d[j - 1];
    d[0] = d[0] * u + coef;
  }
  double f = 1.0;
  for (int j = 2; j <= order; ++j) {
    f *= j;
    d[j] *= f;
  }
  return d;
}

cplx newton_polish(const std::vector<double>& c, cplx u, int order) {
  auto d = horner_derivs(c, u, order + 1);
  for (int it = 0; it < 50 && d[order + 1] != 0.0; ++it) {
    const cplx next = u - d[order] / d[order + 1];
    const auto dn = horner_derivs(c, next, order + 1);
    if (!(std::abs(dn[order]) < std::abs(d[order]))) break;
    u = next;
    d = dn;
  }
  return u;
}

}  // namespace

FiniteField::FiniteField(int q, int k, int modulus_index) : q_(q), k_(k) {
  if (!is_small_odd_prime(q)) throw DomainError("FiniteField: q must be an odd prime <= 13");
  if (k < 1) throw DomainError("FiniteField: degree must be >= 1");
  size_ = ipow(q, k);
  if (size_ > 5000000) throw DomainError("FiniteField: q^k exceeds 5e6");
  const std::int64_t top = size_ / q;
  log_.assign(static_cast<std::size_t>(size_), -1);
  antilog_.assign(static_cast<std::size_t>(size_ - 1), 0);

  int found = 0;
  std::vector<int> digits(static_cast<std::size_t>(k));
  for (std::int64_t cand = 1; cand < size_; ++cand) {
    std::int64_t t = cand;
    for (int i = 0; i < k; ++i, t /= q) digits[i] = static_cast<int>(t % q);
    if (digits[0] == 0) continue;
    // Powers of x modulo x^k + sum digits_i x^i; primitive iff the period is q^k - 1.
    std::fill(log_.begin(), log_.end(), -1);
    std::int64_t e = 1;
    bool primitive = true;
    for (std::int64_t m = 0; m < size_ - 1; ++m) {
      if (log_[static_cast<std::size_t>(e)] >= 0) {
        primitive = false;
        break;
      }
      log_[static_cast<std::size_t>(e)] = m;
      antilog_[static_cast<std::size_t>(m)] = e;
      const int hi = static_cast<int>(e / top);
      std::int64_t shifted = (e % top) * q, out = 0, place = 1;
      for (int i = 0; i < k; ++i, place *= q) {
        const int di = static_cast<int>(shifted / place % q);
        out += static_cast<std::int64_t>(((di - hi * digits[i]) % q + q) % q) * place;
      }
      e = out;
    }
    if (!primitive || e != 1) continue;
    if (found++ < modulus_index) continue;
    modulus_.assign(digits.begin(), digits.end());
    modulus_.push_back(1);
    break;
  }
  if (modulus_.empty()) throw DomainError("FiniteField: modulus_index out of range");
  zech_.resize(static_cast<std::size_t>(size_ - 1));
  for (std::int64_t m = 0; m < size_ - 1; ++m) {
    const std::int64_t s = add(antilog_[static_cast<std::size_t>(m)], 1);
    zech_[static_cast<std::size_t>(m)] = s == 0 ? -1 : log_[static_cast<std::size_t>(s)];
  }
}

std::int64_t FiniteField::add(std::int64_t a, std::int64_t b) const {
  std::int64_t out = 0, place = 1;
  for (int i = 0; i < k_; ++i, place *= q_, a /= q_, b /= q_) out += ((a % q_ + b % q_) % q_) * place;
  return out;
}

std::int64_t FiniteField::mul(std::int64_t a, std::int64_t b) const {
  if (a == 0 || b == 0) return 0;
  return exp(log(a) + log(b));
}

std::int64_t FiniteField::log(std::int64_t a) const {
  if (a <= 0 || a >= size_) throw DomainError("FiniteField::log: zero or out of range");
  return log_[static_cast<std::size_t>(a)];
}

int FiniteField::chi(std::int64_t a) const {
  if (a == 0) return 0;
  return log(a) % 2 == 0 ? 1 : -1;
}

bool is_squarefree(const FqPoly& f_in, int q) {
  FqPoly f = f_in;
  for (int& c : f) c = ((c % q) + q) % q;
  trim(f);
  if (f.size() <= 1) return !f.empty();
  FqPoly d(f.size() - 1);
  for (std::size_t i = 1; i < f.size(); ++i) d[i - 1] = static_cast<int>(i % q) * f[i] % q;
  trim(d);
  if (d.empty()) return false;
  FqPoly a = f, b = d;
  while (!b.empty()) {
    FqPoly r = poly_mod(a, b, q);
    a = std::move(b);
    b = std::move(r);
  }
  return a.size() == 1;
}

namespace {

void check_caps(int q, int n) {
  if (!is_small_odd_prime(q)) throw DomainError("ffield: q must be an odd prime <= 13");
  if (n < 1 || n > 12) throw DomainError("ffield: degree n must lie in [1, 12]");
}

FqPoly poly_from_index(std::int64_t idx, int q, int n) {
  FqPoly f(static_cast<std::size_t>(n + 1));
  for (int i = 0; i < n; ++i, idx /= q) f[i] = static_cast<int>(idx % q);
  f[n] = 1;
  return f;
}

}  // namespace

void enumerate_monic_squarefree(int q, int n, const std::function<void(const FqPoly&)>& f) {
  check_caps(q, n);
  const std::int64_t total = ipow(q, n);
  for (std::int64_t idx = 0; idx < total; ++idx) {
    const FqPoly Q = poly_from_index(idx, q, n);
    if (is_squarefree(Q, q)) f(Q);
  }
}

std::vector<FqPoly> monic_squarefree(int q, int n) {
  std::vector<FqPoly> out;
  enumerate_monic_squarefree(q, n, [&](const FqPoly& Q) { out.push_back(Q); });
  return out;
}

PointCounter::PointCounter(int q, int g, int modulus_index) : q_(q), g_(g) {
  if (!is_small_odd_prime(q)) throw DomainError("PointCounter: q must be an odd prime <= 13");
  if (g < 0) throw DomainError("PointCounter: genus must be >= 0");
  for (int k = 1; k <= g; ++k) {
    // The prime field has a single model up to the choice of generator.
    fields_.emplace_back(q, k, k == 1 ? 0 : modulus_index);
    const auto& F = fields_.back();
    const std::int64_t order = F.size() - 1;
    std::vector<char> seen(static_cast<std::size_t>(order), 0);
    std::vector<std::pair<std::int64_t, int>> reps;
    for (std::int64_t m = 0; m < order; ++m) {
      if (seen[static_cast<std::size_t>(m)]) continue;
      int len = 0;
      std::int64_t x = m;
      do {
        seen[static_cast<std::size_t>(x)] = 1;
        ++len;
        x = x * q % order;
      } while (x != m);
      reps.emplace_back(m, len);
    }
    orbits_.push_back(std::move(reps));
    for (int c = 0; c < q; ++c) coeff_log_.push_back(c == 0 ? -1 : F.log(c));
  }
}

std::vector<std::int64_t> PointCounter::counts(const FqPoly& Q) const {
  const int n = static_cast<int>(Q.size()) - 1;
  if (n < 1 || Q.back() != 1) throw DomainError("PointCounter::counts: Q must be monic of degree >= 1");
  if (n % 2 == 0) throw DomainError("PointCounter::counts: even degree is not supported");
  std::vector<std::int64_t> out;
  for (int k = 1; k <= g_; ++k) {
    const auto& F = fields_[static_cast<std::size_t>(k - 1)];
    const std::int64_t order = F.size() - 1;
    const std::int64_t* clog = coeff_log_.data() + static_cast<std::size_t>((k - 1) * q_);
    std::int64_t sum = Q[0] == 0 ? 0 : F.chi(Q[0]);
    for (const auto& [m, len] : orbits_[static_cast<std::size_t>(k - 1)]) {
      bool zero = false;
      std::int64_t acc = 0;  // log of the leading coefficient 1
      for (int i = n - 1; i >= 0; --i) {
        if (!zero) {
          acc += m;
          if (acc >= order) acc -= order;
        }
        const int c = Q[static_cast<std::size_t>(i)];
        if (c == 0) continue;
        const std::int64_t lc = clog[c];
        if (zero) {
          acc = lc;
          zero = false;
          continue;
        }
        std::int64_t d = acc - lc;
        if (d < 0) d += order;
        const std::int64_t z = F.zech(d);
        if (z < 0) {
          zero = true;
        } else {
          acc = lc + z;
          if (acc >= order) acc -= order;
        }
      }
      if (!zero) sum += (acc % 2 == 0 ? 1 : -1) * len;
    }
    out.push_back(F.size() + 1 + sum);
  }
  return out;
}

std::vector<std::int64_t> point_counts(const FqPoly& Q, int q, int g) { return PointCounter(q, g).counts(Q); }

std::int64_t point_count_exhaustive(const FqPoly& Q, int q, int k) {
  const FiniteField F(q, k);
  std::vector<std::int64_t> roots(static_cast<std::size_t>(F.size()), 0);
  for (std::int64_t y = 0; y < F.size(); ++y) ++roots[static_cast<std::size_t>(F.mul(y, y))];
  std::int64_t total = 1;
  for (std::int64_t x = 0; x < F.size(); ++x) {
    std::int64_t v = 0;
    for (auto it = Q.rbegin(); it != Q.rend(); ++it) v = F.add(F.mul(v, x), *it);
    total += roots[static_cast<std::size_t>(v)];
  }
  return total;
}

bool LPolynomial::functional_equation_holds() const {
  if (coeffs.size() != static_cast<std::size_t>(2 * g + 1) || coeffs[0] != 1) return false;
  for (int k = 0; k <= g; ++k)
    if (coeffs[static_cast<std::size_t>(2 * g - k)] != ipow(q, g - k) * coeffs[static_cast<std::size_t>(k)])
      return false;
  return true;
}

std::int64_t LPolynomial::jacobian_order() const { return std::accumulate(coeffs.begin(), coeffs.end(), std::int64_t{0}); }

LPolynomial l_polynomial(const std::vector<std::int64_t>& counts, int q, int g) {
  if (g < 0 || counts.size() != static_cast<std::size_t>(g)) throw DomainError("l_polynomial: need g point counts");
  LPolynomial P;
  P.q = q;
  P.g = g;
  P.coeffs.assign(static_cast<std::size_t>(2 * g + 1), 0);
  P.coeffs[0] = 1;
  std::vector<__int128> S(static_cast<std::size_t>(g + 1), 0);
  for (int k = 1; k <= g; ++k) S[k] = static_cast<__int128>(ipow(q, k)) + 1 - counts[static_cast<std::size_t>(k - 1)];
  for (int k = 1; k <= g; ++k) {
    __int128 acc = 0;
    for (int i = 1; i <= k; ++i) acc += S[i] * P.coeffs[static_cast<std::size_t>(k - i)];
    if (acc % k != 0) throw NumericalError("l_polynomial: non-integral coefficient (inconsistent point counts)");
    P.coeffs[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(-acc / k);
  }
  for (int k = 0; k < g; ++k) P.coeffs[static_cast<std::size_t>(2 * g - k)] = ipow(q, g - k) * P.coeffs[static_cast<std::size_t>(k)];
  if (g == 0) return P;

  // Roots u_j = alpha_j / sqrt(q) of sum_k a_k q^{-k/2} u^{2g-k}, which lie on the unit circle.
  const int N = 2 * g;
  const double sq = std::sqrt(static_cast<double>(q));
  std::vector<double> b(static_cast<std::size_t>(N + 1));
  for (int k = 0; k <= N; ++k) b[k] = static_cast<double>(P.coeffs[k]) / std::pow(sq, k);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(N, N);
  for (int i = 1; i < N; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < N; ++i) C(i, N - 1) = -b[static_cast<std::size_t>(N - i)];
  Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
  if (es.info() != Eigen::Success) throw NumericalError("l_polynomial: eigenvalue solver failed");
  std::vector<cplx> u(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) u[i] = newton_polish(b, es.eigenvalues()[i], 0);

  // Multiple roots: the centroid of a cluster is accurate, then polish on the
  // (m-1)-th derivative where the root is simple.
  std::vector<int> group(static_cast<std::size_t>(N), -1);
  for (int i = 0; i < N; ++i) {
    if (group[i] >= 0) continue;
    group[i] = i;
    std::vector<int> members{i};
    for (int j = i + 1; j < N; ++j)
      if (group[j] < 0 && std::abs(u[i] - u[j]) < 1e-4) {
        group[j] = i;
        members.push_back(j);
      }
    if (members.size() == 1) continue;
    cplx c = 0.0;
    for (int j : members) c += u[j];
    c /= static_cast<double>(members.size());
    c = newton_polish(b, c, static_cast<int>(members.size()) - 1);
    for (int j : members) u[j] = c;
  }

  for (int i = 0; i < N; ++i) {
    double th = std::arg(u[i]);
    if (th < 0.0) th += 2.0 * kPi;
    P.angles.push_back(th);
    P.weil_deviation = std::max(P.weil_deviation, std::fabs(1.0 / std::abs(u[i]) - 1.0));
    // P at r = 1 / alpha_j, relative to the size of its terms.
    const lcplx r = 1.0L / (static_cast<long double>(sq) * lcplx(u[i].real(), u[i].imag()));
    lcplx val = 0.0L;
    long double scale = 0.0L;
    lcplx pw = 1.0L;
    for (int k = 0; k <= N; ++k) {
      val += static_cast<long double>(P.coeffs[k]) * pw;
      scale += std::fabs(static_cast<long double>(P.coeffs[k])) * std::abs(pw);
      pw *= r;
    }
    P.residual = std::max(P.residual, static_cast<double>(std::abs(val) / scale));
  }
  std::sort(P.angles.begin(), P.angles.end());
  if (P.residual > 1e-8) throw NumericalError("l_polynomial: root residual above 1e-8");
  return P;
}

std::vector<double> power_sums(const LPolynomial& P, int M) {
  const int N = 2 * P.g;
  std::vector<__int128> S(static_cast<std::size_t>(M + 1), 0);
  for (int m = 1; m <= M; ++m) {
    __int128 acc = m <= N ? -static_cast<__int128>(m) * P.coeffs[static_cast<std::size_t>(m)] : 0;
    for (int i = 1; i <= std::min(m - 1, N); ++i) acc -= static_cast<__int128>(P.coeffs[i]) * S[m - i];
    S[m] = acc;
  }
  std::vector<double> out(static_cast<std::size_t>(M));
  for (int m = 1; m <= M; ++m) out[m - 1] = static_cast<double>(S[m]);
  return out;
}

namespace {

struct ChunkResult {
  std::int64_t curves = 0;
  CompensatedSum zero_side, fourier_side, point_count;
  double weil = 0.0;
  bool fe = true;
  std::string dump;
};

}  // namespace

FFDensity ff_one_level_density(int q, int n, const TestFunction& phi, const std::string& dump_path) {
  check_caps(q, n);
  if (n % 2 == 0) throw DomainError("ff_one_level_density: n must be odd");
  if (!(phi.sigma() < 2.0)) throw DomainError("ff_one_level_density: requires sigma < 2");
  const int g = (n - 1) / 2;
  const int N = 2 * g;
  FFDensity out;
  out.q = q;
  out.n = n;
  out.g = g;
  if (g == 0) throw DomainError("ff_one_level_density: genus 0 has no zeros");
  // Fourier modes 1..M of Phi, weights phi_hat(m/N)/N.
  std::vector<double> fw;
  for (int m = 1; m < N * phi.sigma(); ++m) fw.push_back(phi.phi_hat(static_cast<double>(m) / N) / N);
  const double f0 = phi.phi_hat(0.0) / N;
  const int M = static_cast<int>(fw.size());
  const PointCounter counter(q, g);
  const bool dumping = !dump_path.empty();
  const std::int64_t total = ipow(q, n);

  auto chunks = parallel_chunks<ChunkResult>(static_cast<std::size_t>(total), 4096, [&](std::size_t lo, std::size_t hi) {
    ChunkResult r;
    std::ostringstream os;
    os << std::setprecision(10);
    for (std::size_t idx = lo; idx < hi; ++idx) {
      const FqPoly Q = poly_from_index(static_cast<std::int64_t>(idx), q, n);
      if (!is_squarefree(Q, q)) continue;
      const auto counts = counter.counts(Q);
      const LPolynomial P = l_polynomial(counts, q, g);
      ++r.curves;
      r.point_count += static_cast<double>(counts[0]);
      r.weil = std::max(r.weil, P.weil_deviation);
      r.fe = r.fe && P.functional_equation_holds();
      double z = 0.0;
      for (double th : P.angles) {
        double s = f0;
        for (int m = 1; m <= M; ++m) s += 2.0 * fw[m - 1] * std::cos(m * th);
        z += s;
      }
      r.zero_side += z;
      double f = N * f0;
      if (M > 0) {
        const auto S = power_sums(P, M);
        for (int m = 1; m <= M; ++m) f += 2.0 * fw[m - 1] * S[m - 1] / std::pow(static_cast<double>(q), 0.5 * m);
      }
      r.fourier_side += f;
      if (dumping) {
        os << q << ' ' << n;
        for (auto a : P.coeffs) os << ' ' << a;
        for (double th : P.angles) os << ' ' << th;
        os << '\n';
      }
    }
    r.dump = os.str();
    return r;
  });

  CompensatedSum zs, fs, pc;
  for (const auto& c : chunks) {
    out.curves += c.curves;
    zs += c.zero_side.value();
    fs += c.fourier_side.value();
    pc += c.point_count.value();
    out.max_weil_deviation = std::max(out.max_weil_deviation, c.weil);
    out.functional_equations_hold = out.functional_equations_hold && c.fe;
  }
  const double cnt = static_cast<double>(out.curves);
  out.value = zs.value() / cnt;
  out.fourier_value = fs.value() / cnt;
  out.mean_point_count = pc.value() / cnt;
  if (dumping) {
    std::ofstream f(dump_path);
    if (!f) throw DomainError("ff_one_level_density: cannot write " + dump_path);
    for (const auto& c : chunks) f << c.dump;
  }
  return out;
}

std::int64_t irreducible_count(int q, int d) {
  if (d < 1) throw DomainError("irreducible_count: degree must be >= 1");
  if (d * std::log2(static_cast<double>(q)) > 62.0) throw DomainError("irreducible_count: q^d overflows");
  std::int64_t acc = 0;
  for (int e = 1; e <= d; ++e)
    if (d % e == 0) acc += mobius_small(e) * ipow(q, d / e);
  return acc / d;
}

RudnickPrediction rudnick_rhs(int q, int g, const TestFunction& phi, int prime_poly_cutoff) {
  if (prime_poly_cutoff < 1) throw DomainError("rudnick_rhs: cutoff must be >= 1");
  if (g < 1) throw DomainError("rudnick_rhs: genus must be >= 1");
  if (q < 3) throw DomainError("rudnick_rhs: q must be an odd prime");
  RudnickPrediction r;
  r.main_term = phi.phi_hat(0.0) - 0.5 * phi_hat_integral(phi, -1.0, 1.0);
  const double qd = static_cast<double>(q);
  CompensatedSum s;
  for (int d = 1; d <= prime_poly_cutoff; ++d) {
    // N(d) d = sum_{e | d} mu(e) q^{d/e}, divided by q^{2d} - 1 term by term.
    const double denom = std::expm1(2.0 * d * std::log(qd));
    for (int e = 1; e <= d; ++e)
      if (d % e == 0 && mobius_small(e) != 0) s += mobius_small(e) * std::pow(qd, d / e) / denom;
  }
  r.prime_sum = s.value();
  const double c = prime_poly_cutoff;
  r.tail_bound = std::pow(qd, -c) / (qd - 1.0) / (1.0 - std::pow(qd, -2.0 * (c + 1.0)));
  r.correction = (phi.phi_hat(0.0) * (r.prime_sum + 0.5) - phi.phi_hat(1.0) * (qd + 1.0) / (2.0 * (qd - 1.0))) / g;
  r.value = r.main_term + r.correction;
  return r;
}

}  // namespace qdl
