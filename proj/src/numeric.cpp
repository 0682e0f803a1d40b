#include "qdl/numeric.hpp"

#include <algorithm>
#include <atomic>
#include <queue>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace qdl {

namespace {

struct Piece {
  double a, b, value, error, l1;
  bool operator<(const Piece& o) const { return error < o.error; }
};

// Kronrod 21 / Gauss 10 pair from Boost's node tables; returns the absolute
// difference |K - G| as the error, plus the L1 norm for the rounding floor.
struct Gk21Rule {
  std::vector<double> x, wk, wg;  // wg = 0 where x is not a Gauss node
  Gk21Rule() {
    using K = boost::math::quadrature::gauss_kronrod<double, 21>;
    using G = boost::math::quadrature::gauss<double, 10>;
    const auto& ka = K::abscissa();
    const auto& kw = K::weights();
    const auto& ga = G::abscissa();
    const auto& gw = G::weights();
    for (std::size_t i = 0; i < ka.size(); ++i) {
      x.push_back(ka[i]);
      wk.push_back(kw[i]);
      double g = 0.0;
      for (std::size_t j = 0; j < ga.size(); ++j)
        if (std::fabs(ga[j] - ka[i]) < 1e-14) g = gw[j];
      wg.push_back(g);
    }
  }
};

Piece gk21(const RealFn& f, double a, double b) {
  static const Gk21Rule rule;
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double k = 0.0, g = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    if (rule.x[i] == 0.0) {
      const double v = f(mid);
      k += rule.wk[i] * v;
      g += rule.wg[i] * v;
      l1 += rule.wk[i] * std::fabs(v);
      continue;
    }
    const double v1 = f(mid - half * rule.x[i]);
    const double v2 = f(mid + half * rule.x[i]);
    k += rule.wk[i] * (v1 + v2);
    g += rule.wg[i] * (v1 + v2);
    l1 += rule.wk[i] * (std::fabs(v1) + std::fabs(v2));
  }
  return {a, b, k * half, std::fabs((k - g) * half), l1 * std::fabs(half)};
}

std::atomic<int> g_threads{1};

template <int N>
void fill_rule(std::vector<double>& x, std::vector<double>& w) {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& ab = G::abscissa();
  const auto& wt = G::weights();
  x.clear();
  w.clear();
  for (std::size_t i = 0; i < ab.size(); ++i) {
    if (ab[i] == 0.0) {
      x.push_back(0.0);
      w.push_back(wt[i]);
    } else {
      x.push_back(ab[i]);
      w.push_back(wt[i]);
      x.push_back(-ab[i]);
      w.push_back(wt[i]);
    }
  }
}

}  // namespace

QuadResult integrate(const RealFn& f, double a, double b, const QuadOptions& opt) {
  if (a == b) return {};
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::priority_queue<Piece> heap;
  Piece first = gk21(f, a, b);
  heap.push(first);
  CompensatedSum total(first.value);
  double err = first.error;
  CompensatedSum l1(first.l1);
  int intervals = 1;
  // Error estimates cannot drop below rounding in the sum of |f|.
  auto target = [&] {
    return std::max({opt.abs_tol, opt.rel_tol * std::fabs(total.value()), 64.0 * 2.2e-16 * l1.value()});
  };
  while (err > target()) {
    if (intervals >= opt.max_intervals) {
      throw NumericalError("integrate: subdivision cap reached on [" + std::to_string(a) + ", " +
                           std::to_string(b) + "], error estimate " + std::to_string(err));
    }
    Piece worst = heap.top();
    // The worst panel is already at rounding level: nothing left to gain.
    if (worst.error <= 64.0 * 2.2e-16 * worst.l1) break;
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw NumericalError("integrate: interval collapsed below machine resolution near " +
                           std::to_string(worst.a));
    }
    Piece l = gk21(f, worst.a, mid);
    Piece r = gk21(f, mid, worst.b);
    total += -worst.value;
    total += l.value;
    total += r.value;
    l1 += l.l1 + r.l1 - worst.l1;
    err += l.error + r.error - worst.error;
    heap.push(l);
    heap.push(r);
    ++intervals;
    if (err < 0 || intervals % 64 == 0) {
      // Recompute from scratch to shed accumulated cancellation.
      std::priority_queue<Piece> copy = heap;
      err = 0.0;
      while (!copy.empty()) {
        err += copy.top().error;
        copy.pop();
      }
    }
  }
  return {sign * total.value(), err, intervals};
}

QuadResult integrate(const RealFn& f, double a, double b, std::vector<double> breakpoints,
                     const QuadOptions& opt) {
  if (a == b) return {};
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::vector<double> pts{a};
  std::sort(breakpoints.begin(), breakpoints.end());
  for (double p : breakpoints)
    if (p > pts.back() && p < b) pts.push_back(p);
  pts.push_back(b);
  QuadResult out;
  CompensatedSum total;
  QuadOptions piece_opt = opt;
  piece_opt.abs_tol = opt.abs_tol / static_cast<double>(pts.size() - 1);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    QuadResult r = integrate(f, pts[i], pts[i + 1], piece_opt);
    total += r.value;
    out.error += r.error;
    out.intervals += r.intervals;
  }
  out.value = sign * total.value();
  return out;
}

void gauss_legendre_rule(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  switch (n) {
    case 20: fill_rule<20>(nodes, weights); break;
    case 30: fill_rule<30>(nodes, weights); break;
    case 64: fill_rule<64>(nodes, weights); break;
    default: throw DomainError("gauss_legendre_rule: unsupported order " + std::to_string(n));
  }
}

double gauss_legendre(const RealFn& f, double a, double b, int n) {
  std::vector<double> x, w;
  gauss_legendre_rule(n, x, w);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  CompensatedSum s;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * f(mid + half * x[i]);
  return half * s.value();
}

void set_thread_count(int n) {
  if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  g_threads = n;
}

int thread_count() { return g_threads.load(); }

}  // namespace qdl
