#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "qdl/explicit_formula.hpp"
#include "qdl/numeric.hpp"
#include "qdl/zeros.hpp"

using namespace qdl;

namespace {

const SieveTables& sieve() {
  static const SieveTables t = build_sieves(100000);
  return t;
}

const std::string& cache_dir() {
  static const std::string dir = [] {
    const auto p = std::filesystem::temp_directory_path() / "qdl_test_family_zeros";
    std::filesystem::remove_all(p);
    return p.string();
  }();
  return dir;
}

ZeroProvider provider(double T) {
  return [T](std::int64_t d) { return cached_zeros(d, T, cache_dir()); };
}

}  // namespace

TEST_CASE("empirical density matches the explicit formula at X = 50") {
  const TestFunction phi = fejer_squared(0.8);
  for (Family fam : {Family::F_star, Family::F_all}) {
    const auto spec = make_family_spec(fam, 50.0, sieve(), gaussian_weight(), Convention::primitive);
    const auto e = empirical_density(spec, phi, 60.0, provider(60.0));
    const auto br = density(spec, phi);
    CAPTURE(family_name(fam));
    CHECK(std::fabs(e.value - br.total) <= e.truncation_bound + 1e-3);
    // Zeros above T only add (phi >= 0), so the empirical value sits below.
    CHECK(e.value <= br.total);
  }
}

TEST_CASE("empirical density is linear and stable in T") {
  const TestFunction phi = fejer_squared(0.8);
  const auto spec = make_family_spec(Family::F_all, 50.0, sieve(), gaussian_weight(), Convention::primitive);
  const auto a = empirical_density(spec, phi, 60.0, provider(60.0));
  const auto b = empirical_density(spec, 2.5 * phi, 60.0, provider(60.0));
  CHECK(b.value == doctest::Approx(2.5 * a.value).epsilon(1e-13));
  const auto c = empirical_density(spec, phi, 120.0, provider(120.0));
  CHECK(std::fabs(c.value - a.value) < a.truncation_bound);
  CHECK(c.truncation_bound < a.truncation_bound);
}

TEST_CASE("empirical density refuses incomplete zero sets") {
  const auto spec = make_family_spec(Family::F_star, 20.0, sieve());
  auto broken = [](std::int64_t d) {
    ZeroSet z = find_zeros(d, 60.0);
    if (d == 2) z.complete = false;
    return z;
  };
  CHECK_THROWS_AS(empirical_density(spec, fejer_squared(0.8), 60.0, broken), NumericalError);
}
