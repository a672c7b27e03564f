#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lmfrail/poly_roots.hpp"

using lmfrail::poly::eval;
using lmfrail::poly::real_roots;
using lmfrail::poly::solve_cubic;
using lmfrail::poly::solve_quadratic;

namespace {

std::vector<double> from_roots(const std::vector<double>& roots) {
  std::vector<double> c{1.0};
  for (double r : roots) {
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k] -= r * c[k];
      next[k + 1] += c[k];
    }
    c = next;
  }
  return c;
}

}  // namespace

TEST_SUITE("poly_roots") {

TEST_CASE("quadratic roots") {
  auto r = solve_quadratic(1.0, -3.0, 2.0);
  REQUIRE(r.size() == 2);
  CHECK(r[0] == doctest::Approx(1.0));
  CHECK(r[1] == doctest::Approx(2.0));

  CHECK(solve_quadratic(1.0, 0.0, 1.0).empty());

  r = solve_quadratic(0.0, 2.0, -4.0);  // linear fallback
  REQUIRE(r.size() == 1);
  CHECK(r[0] == doctest::Approx(2.0));
}

TEST_CASE("cubic roots: three real, one real, tiny leading") {
  auto r = solve_cubic(1.0, -6.0, 11.0, -6.0);  // 1, 2, 3
  REQUIRE(r.size() == 3);
  CHECK(r[0] == doctest::Approx(1.0));
  CHECK(r[1] == doctest::Approx(2.0));
  CHECK(r[2] == doctest::Approx(3.0));

  r = solve_cubic(1.0, 0.0, 0.0, -8.0);  // single real root 2
  REQUIRE(r.size() == 1);
  CHECK(r[0] == doctest::Approx(2.0));

  // Tiny leading coefficient: two moderate roots plus one at ~ -b/a.
  r = solve_cubic(1e-13, 1.0, -3.0, 2.0);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == doctest::Approx(-1e13).epsilon(1e-3));
  CHECK(r[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r[2] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("cubic with double root") {
  // (x-1)^2 (x-4) = x^3 - 6x^2 + 9x - 4
  auto r = solve_cubic(1.0, -6.0, 9.0, -4.0);
  REQUIRE(r.size() >= 2);
  CHECK(std::abs(eval({-4.0, 9.0, -6.0, 1.0}, r.front())) < 1e-8);
  CHECK(r.back() == doctest::Approx(4.0));
}

TEST_CASE("degree-5 roots via companion matrix") {
  const std::vector<double> roots{-2.0, -0.5, 0.25, 1.5, 3.0};
  auto c = from_roots(roots);
  auto found = real_roots(c);
  REQUIRE(found.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(found[i] == doctest::Approx(roots[i]).epsilon(1e-9));
  }
}

TEST_CASE("leading zeros are stripped") {
  // 1 - 2x as a degree-5 coefficient vector.
  auto r = real_roots({1.0, -2.0, 0.0, 0.0, 0.0, 0.0});
  REQUIRE(r.size() == 1);
  CHECK(r[0] == doctest::Approx(0.5));
}

TEST_CASE("random quintics: every reported root has small residual") {
  std::uint64_t state = 12345;
  auto next = [&state]() {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) / 9007199254740992.0;
  };
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> c(6);
    for (auto& v : c) v = 4.0 * next() - 2.0;
    if (std::abs(c[5]) < 1e-3) c[5] = 1e-3;
    double scale = 0.0;
    for (double v : c) scale = std::max(scale, std::abs(v));
    for (double r : real_roots(c)) {
      const double denom = scale * (1.0 + std::pow(std::abs(r), 5));
      CHECK(std::abs(eval(c, r)) <= 1e-8 * denom);
    }
  }
}

}  // TEST_SUITE
