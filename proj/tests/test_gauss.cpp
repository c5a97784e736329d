#include <doctest.h>

#include <set>

#include "test_util.hpp"

using namespace hecke;
using namespace hecke::testing;

namespace {
const SplitPrime kP5 = SplitPrime::above(5);
const SplitPrime kP13 = SplitPrime::above(13);
}  // namespace

TEST_CASE("canonical associates and units") {
  CHECK(gi(-2, -1).canonical() == gi(2, 1));
  CHECK(gi(0, 3).canonical() == gi(3, 0));
  CHECK(gi(1, -2).canonical() == gi(2, 1));
  for (auto u : {gi(1), gi(-1), gi(0, 1), gi(0, -1)}) CHECK(u.is_unit());
  CHECK_FALSE(gi(1, 1).is_unit());
}

TEST_CASE("gaussian_gcd examples") {
  CHECK(gaussian_gcd(gi(5), gi(2, 1)) == gi(2, 1));
  CHECK(gaussian_gcd(gi(-3, 7), gi(0)) == gi(-3, 7).canonical());
  CHECK(gaussian_gcd(gi(3, 4), gi(2, 1)) == gi(2, 1));
  CHECK_THROWS_AS(gaussian_gcd(gi(0), gi(0)), Error);
}

TEST_CASE("gcd divides both and absorbs common divisors") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 300; ++t) {
    GaussInt c = random_gauss(rng, 4);
    if (c.is_zero()) continue;
    GaussInt a = c * random_gauss(rng, 6), b = c * random_gauss(rng, 6);
    if (a.is_zero() && b.is_zero()) continue;
    GaussInt g = gaussian_gcd(a, b);
    CHECK(g.divides(a));
    CHECK(g.divides(b));
    CHECK(c.divides(g));
    CHECK(g == g.canonical());
  }
}

TEST_CASE("norm is multiplicative") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 1000; ++t) {
    GaussInt z = random_gauss(rng, 1000), w = random_gauss(rng, 1000);
    CHECK((z * w).norm() == z.norm() * w.norm());
  }
}

TEST_CASE("GaussianRational canonical form") {
  GaussRational a(gi(2, 4), 6);
  CHECK(a.num() == gi(1, 2));
  CHECK(a.den() == 3);
  CHECK(GaussRational(gi(1, 1), -2) == GaussRational(gi(-1, -1), 2));
  CHECK(gr("(2+4i)/6") == a);
  CHECK(to_string(a) == "(1+2i)/3");
  CHECK(to_string(gi(3, -1)) == "3-1i");
  CHECK(gr("i") == GaussRational(gi(0, 1)));
  CHECK(gr("-i/2") == GaussRational(gi(0, -1), 2));
  CHECK((a * a.inverse()) == GaussRational(1));
  CHECK_THROWS_AS(gr("1+x"), Error);
}

TEST_CASE("split primes") {
  CHECK(kP5.pi() == gi(2, 1));
  CHECK(kP13.pi() == gi(3, 2));
  CHECK(SplitPrime::above(17).pi() == gi(4, 1));
  CHECK_THROWS_AS(SplitPrime::above(7), Error);
  CHECK_THROWS_AS(SplitPrime::above(9), Error);

  auto w = split_primes_in_window(2, 10);
  REQUIRE(w.size() == 1);
  CHECK(w[0].pi() == gi(2, 1));
  auto w2 = split_primes_in_window(10, 20);
  REQUIRE(w2.size() == 2);
  CHECK(w2[0].pi() == gi(3, 2));
  CHECK(w2[1].pi() == gi(4, 1));
  CHECK(split_primes_in_window(5, 5).empty());
  CHECK_THROWS_AS(split_primes_in_window(1, 5), Error);
}

TEST_CASE("split prime windows are additive") {
  for (int c1 : {2, 5, 13}) {
    for (int c2 : {c1, c1 + 7, 40}) {
      for (int c3 : {c2, c2 + 11, 90}) {
        if (!(c1 <= c2 && c2 <= c3)) continue;
        std::set<Integer> lhs, rhs;
        for (auto& p : split_primes_in_window(c1, c2)) lhs.insert(p.p());
        for (auto& p : split_primes_in_window(c2, c3)) lhs.insert(p.p());
        for (auto& p : split_primes_in_window(c1, c3)) rhs.insert(p.p());
        CHECK(lhs == rhs);
      }
    }
  }
  for (auto& p : split_primes_in_window(2, 200)) {
    CHECK(p.is_canonical());
    CHECK(p.pi().norm() == p.p());
  }
}

TEST_CASE("valuation examples") {
  CHECK(valuation(gi(5), kP5) == 1);
  CHECK(valuation(gi(1), kP5) == 0);
  CHECK(valuation(GaussVector{gi(5), gi(2, 1)}, kP5) == 1);
  CHECK(valuation(GaussRational(gi(1), 25), kP5) == -2);
  CHECK(valuation(gi(3, 4), kP5) == 2);
  CHECK(valuation(gi(3, -4), kP5) == 0);
  CHECK_THROWS_AS(valuation(gi(0), kP5), Error);
  CHECK_THROWS_AS(valuation(GaussVector{gi(0), gi(0)}, kP5), Error);
}

TEST_CASE("integer_residue examples") {
  CHECK(integer_residue(gi(0, 1), kP5, 1) == 3);
  CHECK(integer_residue(gi(5), kP5, 1) == 0);
  CHECK(integer_residue(gi(0, 1), kP5, 2) == 18);
  // (18 - i) / (3 + 4i) = 2 - 3i
  CHECK(gi(18, -1).exact_div(gi(3, 4)) == gi(2, -3));
}

TEST_CASE("integer_residue is a ring map, exhaustively for p = 5") {
  for (unsigned rho : {1u, 2u}) {
    const Integer mod = pow(Integer(5), rho);
    const GaussInt pr = pow(kP5.pi(), rho);
    for (int a = -6; a <= 6; ++a)
      for (int b = -6; b <= 6; ++b) {
        GaussInt z(a, b);
        Integer rz = integer_residue(z, kP5, rho);
        // Independent check: pi^rho divides z - t.
        CHECK(pr.divides(z - GaussInt(rz)));
        for (int c = -3; c <= 3; ++c)
          for (int d = -3; d <= 3; ++d) {
            GaussInt w(c, d);
            Integer rw = integer_residue(w, kP5, rho);
            CHECK(integer_residue(z + w, kP5, rho) == mod_floor(rz + rw, mod));
            CHECK(integer_residue(z * w, kP5, rho) == mod_floor(rz * rw, mod));
          }
      }
  }
}

TEST_CASE("residue and valuation agree") {
  const unsigned rho = 3;
  for (int a = -30; a <= 30; ++a)
    for (int b = -30; b <= 30; ++b) {
      GaussInt z(a, b);
      if (z.is_zero()) continue;
      const Integer r = integer_residue(z, kP5, rho);
      const int v = valuation(z, kP5);
      for (unsigned e = 1; e <= rho; ++e) CHECK(((r % pow(Integer(5), e)) == 0) == (v >= static_cast<int>(e)));
    }
}

TEST_CASE("is_locally_integral") {
  CHECK(is_locally_integral(GaussRational(gi(1), 3), kP5, kP13));
  CHECK_FALSE(is_locally_integral(GaussRational(gi(1), 5), kP5, kP13));
  CHECK(is_locally_integral(GaussRational(0), kP5, kP13));
  CHECK_FALSE(is_locally_integral(GaussRational(gi(2), 13), kP5, kP13));
  // (2 - i) / 5 = 1 / (2 + i): pole at pi only.
  CHECK_FALSE(is_locally_integral(GaussRational(gi(2, -1), 5), kP5, kP13));
  CHECK(is_locally_integral(GaussRational(gi(2, 1), 5), kP5, kP13));
}

TEST_CASE("p-power divisibility needs both conjugates") {
  CHECK(divisible_by_p_power(GaussRational(5), kP5, 1));
  CHECK_FALSE(divisible_by_p_power(GaussRational(gi(2, 1)), kP5, 1));
  CHECK(divisible_by_p_power(GaussRational(0), kP5, 4));
}
