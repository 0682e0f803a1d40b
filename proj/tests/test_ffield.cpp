#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "qdl/ffield.hpp"
#include "qdl/numeric.hpp"

using namespace qdl;

namespace {

FqPoly poly_mul(const FqPoly& a, const FqPoly& b, int q) {
  FqPoly c(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] = (c[i + j] + a[i] * b[j]) % q;
  return c;
}

bool divides(const FqPoly& d, FqPoly f, int q) {
  // d monic.
  while (f.size() >= d.size()) {
    const int c = f.back();
    const std::size_t s = f.size() - d.size();
    for (std::size_t i = 0; i < d.size(); ++i) f[s + i] = ((f[s + i] - c * d[i]) % q + q) % q;
    f.pop_back();
  }
  for (int c : f)
    if (c != 0) return false;
  return true;
}

// Squarefree by brute force: no monic h of positive degree with h^2 | f.
bool squarefree_brute(const FqPoly& f, int q) {
  const int n = static_cast<int>(f.size()) - 1;
  for (int d = 1; 2 * d <= n; ++d) {
    std::int64_t total = 1;
    for (int i = 0; i < d; ++i) total *= q;
    for (std::int64_t idx = 0; idx < total; ++idx) {
      FqPoly h(static_cast<std::size_t>(d + 1));
      std::int64_t t = idx;
      for (int i = 0; i < d; ++i, t /= q) h[i] = static_cast<int>(t % q);
      h[d] = 1;
      if (divides(poly_mul(h, h, q), f, q)) return false;
    }
  }
  return true;
}

FqPoly random_squarefree(std::mt19937_64& rng, int q, int n) {
  std::uniform_int_distribution<int> c(0, q - 1);
  for (;;) {
    FqPoly f(static_cast<std::size_t>(n + 1));
    for (int i = 0; i < n; ++i) f[i] = c(rng);
    f[n] = 1;
    if (is_squarefree(f, q)) return f;
  }
}

}  // namespace

TEST_CASE("monic squarefree enumeration") {
  CHECK(monic_squarefree(3, 2).size() == 6);
  CHECK(monic_squarefree(3, 5).size() == 162);
  CHECK(monic_squarefree(3, 1).size() == 3);
  CHECK(monic_squarefree(5, 1).size() == 5);
  for (auto [q, n] : {std::pair{3, 3}, {3, 4}, {3, 6}, {5, 2}, {5, 3}, {7, 3}, {11, 2}}) {
    std::int64_t expect = 1;
    for (int i = 0; i < n - 1; ++i) expect *= q;
    CHECK(static_cast<std::int64_t>(monic_squarefree(q, n).size()) == expect * (q - 1));
  }
  for (auto [q, n] : {std::pair{3, 4}, {5, 3}, {3, 5}}) {
    std::int64_t brute = 0;
    std::int64_t total = 1;
    for (int i = 0; i < n; ++i) total *= q;
    for (std::int64_t idx = 0; idx < total; ++idx) {
      FqPoly f(static_cast<std::size_t>(n + 1));
      std::int64_t t = idx;
      for (int i = 0; i < n; ++i, t /= q) f[i] = static_cast<int>(t % q);
      f[n] = 1;
      const bool b = squarefree_brute(f, q);
      CHECK(b == is_squarefree(f, q));
      brute += b;
    }
    CHECK(brute == static_cast<std::int64_t>(monic_squarefree(q, n).size()));
  }
  CHECK_THROWS_AS(monic_squarefree(2, 3), DomainError);
  CHECK_THROWS_AS(monic_squarefree(17, 3), DomainError);
  CHECK_THROWS_AS(monic_squarefree(9, 3), DomainError);
  CHECK_THROWS_AS(monic_squarefree(3, 13), DomainError);
}

TEST_CASE("finite field tables") {
  for (auto [q, k] : {std::pair{3, 1}, {3, 4}, {5, 2}, {7, 3}, {13, 2}}) {
    const FiniteField F(q, k);
    CAPTURE(q);
    CAPTURE(k);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::int64_t> e(0, F.size() - 1);
    for (int i = 0; i < 200; ++i) {
      const auto a = e(rng), b = e(rng), c = e(rng);
      CHECK(F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c)));
      CHECK(F.add(a, b) == F.add(b, a));
    }
    int squares = 0;
    for (std::int64_t a = 1; a < F.size(); ++a) squares += F.chi(a) == 1;
    CHECK(squares == (F.size() - 1) / 2);
    CHECK(F.modulus().back() == 1);
    CHECK(static_cast<int>(F.modulus().size()) == k + 1);
  }
  const FiniteField A(3, 3, 0), B(3, 3, 1);
  CHECK(A.modulus() != B.modulus());
}

TEST_CASE("point counts") {
  // y^2 = x over F_3: (0, 0), (1, 1), (1, 2) and infinity.
  CHECK(point_counts({0, 1}, 3, 1)[0] == 4);
  CHECK(point_count_exhaustive({0, 1}, 3, 1) == 4);
  std::mt19937_64 rng(11);
  for (auto [q, n] : {std::pair{3, 5}, {3, 7}, {5, 3}, {5, 5}, {7, 3}, {11, 3}}) {
    const int g = (n - 1) / 2;
    const PointCounter pc(q, g), pc2(q, g, 1);
    for (int trial = 0; trial < 5; ++trial) {
      const FqPoly Q = random_squarefree(rng, q, n);
      const auto c = pc.counts(Q);
      CHECK(c == pc2.counts(Q));  // independent of the field model
      for (int k = 1; k <= std::min(g, 3); ++k) {
        CAPTURE(k);
        CHECK(c[k - 1] == point_count_exhaustive(Q, q, k));
        const double qk = std::pow(static_cast<double>(q), k);
        CHECK(std::fabs(static_cast<double>(c[k - 1]) - qk - 1.0) <= 2.0 * g * std::sqrt(qk));
      }
    }
  }
  CHECK_THROWS_AS(PointCounter(3, 2).counts({1, 0, 1}), DomainError);
}

TEST_CASE("L-polynomials") {
  const auto p0 = l_polynomial({}, 3, 0);
  CHECK(p0.coeffs == std::vector<std::int64_t>{1});
  CHECK(p0.angles.empty());

  const auto e = l_polynomial({6}, 5, 1);
  CHECK(e.coeffs == std::vector<std::int64_t>{1, 6 - 5 - 1, 5});

  // Point counts inconsistent with any L-polynomial.
  CHECK_THROWS_AS(l_polynomial({4, 11}, 3, 2), NumericalError);

  // Repeated roots: (1 + 3T^2)^2 and (1 + T + 3T^2)^2.
  const auto ss = l_polynomial({4, 22}, 3, 2);
  CHECK(ss.coeffs == std::vector<std::int64_t>{1, 0, 6, 0, 9});
  CHECK(ss.weil_deviation < 1e-9);
  CHECK(ss.angles[0] == doctest::Approx(kPi / 2).epsilon(1e-9));
  CHECK(ss.angles[3] == doctest::Approx(3 * kPi / 2).epsilon(1e-9));
  const auto dbl = l_polynomial({6, 20}, 3, 2);
  CHECK(dbl.coeffs == std::vector<std::int64_t>{1, 2, 7, 6, 9});
  CHECK(dbl.weil_deviation < 1e-9);

  std::mt19937_64 rng(3);
  for (auto [q, n] : {std::pair{3, 9}, {3, 11}, {5, 7}, {7, 5}, {13, 5}}) {
    const int g = (n - 1) / 2;
    for (int trial = 0; trial < 5; ++trial) {
      const FqPoly Q = random_squarefree(rng, q, n);
      const auto counts = point_counts(Q, q, g);
      const auto P = l_polynomial(counts, q, g);
      CHECK(P.functional_equation_holds());
      CHECK(P.weil_deviation < 1e-9);
      CHECK(P.residual < 1e-8);
      CHECK(P.jacobian_order() > 0);
      const auto S = power_sums(P, g);
      for (int k = 1; k <= g; ++k)
        CHECK(S[k - 1] == doctest::Approx(std::pow(q, k) + 1 - static_cast<double>(counts[k - 1])));
      // Angles come in conjugate pairs.
      REQUIRE(P.angles.size() == static_cast<std::size_t>(2 * g));
      for (int j = 0; j < 2 * g; ++j)
        CHECK(std::fabs(P.angles[j] + P.angles[2 * g - 1 - j] - 2 * kPi) < 1e-9);
    }
  }
}

TEST_CASE("irreducible counts and the prime-polynomial sum") {
  CHECK(irreducible_count(3, 1) == 3);
  CHECK(irreducible_count(3, 2) == 3);
  CHECK(irreducible_count(3, 3) == 8);
  CHECK(irreducible_count(3, 4) == 18);
  for (int n = 1; n <= 10; ++n) {
    std::int64_t acc = 0;
    for (int d = 1; d <= n; ++d)
      if (n % d == 0) acc += d * irreducible_count(5, d);
    CHECK(acc == static_cast<std::int64_t>(std::llround(std::pow(5.0, n))));
  }
  const TestFunction phi = fejer(1.0);
  CHECK(rudnick_rhs(3, 4, phi, 1).prime_sum == doctest::Approx(3.0 / 8.0));
  // phi_hat(1) coefficient (q+1)/(2(q-1)) = 4/4 = 1 at q = 3; fejer(2) has phi_hat(1) = 1/2.
  const TestFunction two = fejer(2.0);
  const auto r = rudnick_rhs(3, 4, two, 30);
  CHECK(r.correction * 4 == doctest::Approx((r.prime_sum + 0.5) - 0.5 * 1.0).epsilon(1e-14));
  double spec_tail = 0.0;
  for (int d = 11; d < 200; ++d) spec_tail += d * std::pow(3.0, -d);
  const auto c10 = rudnick_rhs(3, 4, phi, 10), c20 = rudnick_rhs(3, 4, phi, 20);
  CHECK(std::fabs(c10.prime_sum - c20.prime_sum) < spec_tail);
  CHECK(std::fabs(c10.prime_sum - c20.prime_sum) <= c10.tail_bound);
  CHECK(c10.main_term == doctest::Approx(0.5));
}

TEST_CASE("function-field one-level density") {
  const TestFunction phi = fejer(1.0);
  const auto d5 = ff_one_level_density(3, 5, phi);
  const auto d7 = ff_one_level_density(3, 7, phi);
  const auto d9 = ff_one_level_density(3, 9, phi);
  for (const auto* d : {&d5, &d7, &d9}) {
    CHECK(std::fabs(d->value - d->fourier_value) < 1e-10);
    CHECK(d->functional_equations_hold);
    CHECK(d->max_weil_deviation < 1e-8);
  }
  CHECK(d5.curves == 162);
  CHECK(std::fabs(d9.value - rudnick_rhs(3, 4, phi).value) < 0.15);
  const double e5 = std::fabs(d5.value - rudnick_rhs(3, 2, phi).value);
  const double e7 = std::fabs(d7.value - rudnick_rhs(3, 3, phi).value);
  const double e9 = std::fabs(d9.value - rudnick_rhs(3, 4, phi).value);
  CHECK(e7 < e5);
  CHECK(e9 < e7);

  // Only the zeroth Fourier mode survives when sigma <= 1/(2g).
  const auto narrow = ff_one_level_density(3, 7, fejer(1.0 / 6.0));
  CHECK(std::fabs(narrow.value - fejer(1.0 / 6.0).phi_hat(0.0)) < 1e-10);
  // Up to 1/g the first mode enters, but the family average of the trace vanishes.
  const auto wider = ff_one_level_density(3, 7, fejer(0.99 / 3.0));
  CHECK(std::fabs(wider.value - fejer(0.99 / 3.0).phi_hat(0.0)) < 1e-10);

  // Mean #C(F_q) against the exhaustive pair count.
  std::int64_t total = 0, curves = 0;
  enumerate_monic_squarefree(3, 5, [&](const FqPoly& Q) {
    total += point_count_exhaustive(Q, 3, 1);
    ++curves;
  });
  CHECK(d5.mean_point_count == doctest::Approx(static_cast<double>(total) / curves).epsilon(1e-14));

  const auto sq = ff_one_level_density(3, 7, fejer_squared(1.5));
  CHECK(std::fabs(sq.value - sq.fourier_value) < 1e-10);
  CHECK_THROWS_AS(ff_one_level_density(3, 6, phi), DomainError);
  CHECK_THROWS_AS(ff_one_level_density(3, 7, fejer(2.0)), DomainError);
}

TEST_CASE("density is deterministic across thread counts and dumps every curve") {
  const TestFunction phi = fejer_squared(1.2);
  set_thread_count(1);
  const auto a = ff_one_level_density(3, 9, phi);
  set_thread_count(4);
  const auto b = ff_one_level_density(3, 9, phi);
  set_thread_count(0);
  CHECK(a.value == b.value);
  CHECK(a.fourier_value == b.fourier_value);

  const auto path = (std::filesystem::temp_directory_path() / "qdl_test_ffdump.txt").string();
  const auto d = ff_one_level_density(3, 5, phi, path);
  std::ifstream f(path);
  std::string line;
  std::int64_t lines = 0;
  while (std::getline(f, line)) {
    std::istringstream is(line);
    std::vector<std::string> tok;
    for (std::string t; is >> t;) tok.push_back(t);
    CHECK(tok.size() == 2 + 5 + 4);
    CHECK(tok[0] == "3");
    CHECK(tok[1] == "5");
    CHECK(tok[2] == "1");
    ++lines;
  }
  CHECK(lines == d.curves);
  std::filesystem::remove(path);
}
