#include <doctest.h>

#include <cmath>
#include <functional>

#include "hecke/hecke_set.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace hecke;
using namespace hecke::testing;

namespace {

const SplitPrime kP5 = SplitPrime::above(5);
const SplitPrime kP13 = SplitPrime::above(13);

HeckeCosetSpec spec(const SplitPrime& a, const SplitPrime& b, unsigned nu, std::size_t n = 2) {
  return HeckeCosetSpec{a, b, nu, n};
}

GaussRatMatrix grm(std::initializer_list<std::initializer_list<const char*>> rows) {
  std::vector<std::vector<GaussRational>> r;
  for (auto row : rows) {
    std::vector<GaussRational> v;
    for (auto e : row) v.push_back(gr(e));
    r.push_back(v);
  }
  return GaussRatMatrix::from_rows(r);
}

}  // namespace

TEST_CASE("det_power examples") {
  auto d1 = det_power(spec(kP5, kP5, 1));
  CHECK(d1.rational);
  CHECK(d1.value == 5);
  CHECK(d1.abs_det_sq == 25);
  auto d2 = det_power(spec(kP5, kP13, 1));
  CHECK_FALSE(d2.rational);
  CHECK(d2.abs_det_sq == 65);
  CHECK(d2.exp_pi == q(1, 2));
  auto d3 = det_power(spec(kP5, kP13, 2));
  CHECK(d3.rational);
  CHECK(d3.value == 65);
  auto d4 = det_power(spec(kP5, kP5, 1, 3));
  CHECK(d4.rational);
  CHECK(d4.value == 5);
  CHECK_FALSE(det_power(spec(kP5, kP13, 1, 3)).rational);
  CHECK_FALSE(det_power(spec(kP5, kP13, 2, 3)).rational);
  CHECK(det_power(spec(kP5, kP13, 3, 3)).value == 5 * 5 * 13);
  CHECK_THROWS_AS(det_power(spec(kP5, kP5, 3)), Error);
  CHECK_THROWS_AS(det_power(spec(kP5, kP5, 0)), Error);
}

TEST_CASE("tolerance materialization") {
  auto t = Tolerance::make(spec(kP5, kP13, 1), 3);
  REQUIRE(t.value);
  CHECK(*t.value == q(1, 125));
  CHECK(t.upper_bound() == q(1, 125));
  auto big = Tolerance::make(spec(kP5, kP13, 1), 40961);
  CHECK_FALSE(big.value);
  CHECK(big.upper_bound() > 0);
  CHECK(big.upper_bound() < q(1, 1000000));
}

TEST_CASE("membership examples") {
  const auto id = SelfAdjointMatrix::identity(2);
  const auto d15 = SelfAdjointMatrix::diagonal({q(1), q(5)});
  CountQuery a{id, spec(kP5, kP5, 1), std::nullopt, 1};
  CHECK_FALSE(membership_test(grm({{"2+i", "0"}, {"0", "2+i"}}), a));
  CountQuery b{d15, spec(kP5, kP5, 1), std::nullopt, 1};
  CHECK(membership_test(grm({{"0", "-3-4i"}, {"1", "0"}}), b));
  CHECK_FALSE(membership_test(grm({{"1", "0"}, {"0", "3+4i"}}), a));
  CHECK(in_double_coset(grm({{"1", "0"}, {"0", "3+4i"}}), a.spec));
  CHECK_FALSE(in_double_coset(grm({{"2+i", "0"}, {"0", "2+i"}}), a.spec));
  CHECK_THROWS_AS(membership_test(grm({{"1", "1"}, {"1", "1"}}), a), Error);
  CHECK_FALSE(membership_test(grm({{"1/2", "0"}, {"0", "3+4i"}}), a));
}

TEST_CASE("exact counts of the small examples") {
  const auto d15 = SelfAdjointMatrix::diagonal({q(1), q(5)});
  auto r = enumerate_S(CountQuery{d15, spec(kP5, kP5, 1), std::nullopt, 1});
  CHECK(r.members.size() == 4);
  for (const auto& g : r.members) {
    CHECK(g(0, 0).is_zero());
    CHECK(g(1, 1).is_zero());
  }
  CHECK(enumerate_S(CountQuery{SelfAdjointMatrix::identity(2), spec(kP5, kP5, 1), std::nullopt, 1}).members.empty());
  auto irr = enumerate_S(CountQuery{d15, spec(kP5, kP13, 1), std::nullopt, 1});
  CHECK(irr.members.empty());
  CHECK(irr.reason == "irrational_det_power");
}

TEST_CASE("exact enumeration agrees with the box oracle") {
  const std::vector<SelfAdjointMatrix> forms{
      SelfAdjointMatrix::identity(2), SelfAdjointMatrix::diagonal({q(1), q(5)}), SelfAdjointMatrix::diagonal({q(2), q(3)}),
      sa({{"2", "i"}, {"-i", "3"}}), sa({{"1", "1/2"}, {"1/2", "2"}})};
  const std::vector<HeckeCosetSpec> specs{spec(kP5, kP5, 1), spec(kP5, kP5, 2), spec(kP13, kP13, 1),
                                          spec(kP5, kP13, 2), spec(kP13, kP5, 2), spec(kP5, kP5.conjugate(), 1)};
  std::size_t nonempty = 0;
  for (const auto& f : forms)
    for (const auto& sp : specs) {
      CAPTURE(to_json(f).dump());
      CAPTURE(to_string(sp.pi.pi()) + " " + to_string(sp.pi2.pi()) + " " + std::to_string(sp.nu));
      auto got = enumerate_S_serial(CountQuery{f, sp, std::nullopt, 1});
      auto want = naive_exact(f, sp);
      CHECK(got.members == want);
      nonempty += !want.empty();
    }
  CHECK(nonempty > 0);
}

TEST_CASE("exact enumeration with m != 1") {
  const auto d15 = SelfAdjointMatrix::diagonal({q(1), q(5)});
  for (const GaussInt& m : {gi(3), gi(1, 1), gi(2)}) {
    CAPTURE(to_string(m));
    auto got = enumerate_S(CountQuery{d15, spec(kP5, kP5, 1), std::nullopt, m});
    CHECK(got.members == naive_exact(d15, spec(kP5, kP5, 1), m));
    CHECK(got.members.size() >= 4);
  }
  CHECK_THROWS_AS(enumerate_S(CountQuery{d15, spec(kP5, kP5, 1), std::nullopt, gi(2, 1)}), Error);
}

TEST_CASE("exact counts are invariant under scaling the form") {
  const auto base = sa({{"2", "i"}, {"-i", "3"}});
  for (const auto& sp : {spec(kP5, kP5, 1), spec(kP5, kP13, 2)}) {
    auto r0 = enumerate_S(CountQuery{base, sp, std::nullopt, 1});
    for (const Rational& c : {q(3), q(1, 2), q(7, 5)}) {
      auto r1 = enumerate_S(CountQuery{base.scaled(c), sp, std::nullopt, 1});
      CHECK(r1.members == r0.members);
    }
  }
}

TEST_CASE("finite M enumeration agrees with the oracle") {
  const std::vector<SelfAdjointMatrix> forms{SelfAdjointMatrix::identity(2), SelfAdjointMatrix::diagonal({q(1), q(5)}),
                                             sa({{"2", "i"}, {"-i", "3"}})};
  for (const auto& f : forms)
    for (const auto& sp : {spec(kP5, kP5, 1), spec(kP5, kP13, 1), spec(kP5, kP13, 2)})
      for (unsigned long long M : {2ull, 3ull}) {
        if (sp.nu == 2 && M == 2) continue;
        CAPTURE(to_json(f).dump());
        CAPTURE(M);
        auto got = enumerate_S_serial(CountQuery{f, sp, M, 1});
        CHECK(got.members == naive_finite(f, sp, M));
        auto exact = enumerate_S_serial(CountQuery{f, sp, std::nullopt, 1});
        for (const auto& g : exact.members)
          CHECK(std::find(got.members.begin(), got.members.end(), g) != got.members.end());
      }
}

TEST_CASE("finite M with a huge exponent reduces to the exact form condition") {
  const auto d15 = SelfAdjointMatrix::diagonal({q(1), q(5)});
  auto r = enumerate_S(CountQuery{d15, spec(kP5, kP5, 1), 40961ull, 1});
  CHECK(r.members == enumerate_S(CountQuery{d15, spec(kP5, kP5, 1), std::nullopt, 1}).members);
  auto irr = enumerate_S(CountQuery{SelfAdjointMatrix::identity(2), spec(kP5, kP13, 1), 40961ull, 1});
  CHECK(irr.members.empty());
  CHECK_THROWS_AS(enumerate_S(CountQuery{d15, spec(kP5, kP5, 1), 3ull, gi(3)}), Error);
}

TEST_CASE("serial and parallel enumeration agree") {
  const auto f = sa({{"2", "i"}, {"-i", "3"}});
  for (const auto& query : {CountQuery{f, spec(kP5, kP13, 2), std::nullopt, 1}, CountQuery{f, spec(kP5, kP5, 1), 2ull, 1},
                            CountQuery{SelfAdjointMatrix::identity(3), spec(kP5, kP5, 1, 3), std::nullopt, 1}}) {
    auto s = enumerate_S_serial(query);
    auto p = enumerate_S(query, 3);
    CHECK(s.members == p.members);
    CHECK(s.leaves == p.leaves);
  }
}

TEST_CASE("q_angle examples") {
  const auto id = SelfAdjointMatrix::identity(2);
  const double pi = std::acos(-1.0);
  CHECK(q_angle({gi(1), gi(0)}, {gi(0), gi(1)}, id) == doctest::Approx(pi / 2));
  CHECK(q_angle({gi(1), gi(2)}, {gi(1), gi(2)}, id) == doctest::Approx(0.0));
  CHECK(q_angle({gi(1), gi(0)}, {gi(-1), gi(0)}, id) == doctest::Approx(pi));
  CHECK(q_angle({gi(1), gi(1)}, {gi(1), gi(0)}, SelfAdjointMatrix::diagonal({q(1), q(3)})) == doctest::Approx(pi / 3));
  CHECK(q_angle({gi(1), gi(0)}, {gi(0, 1), gi(0)}, id) == doctest::Approx(pi / 2));
  CHECK_THROWS_AS(q_angle({gi(0), gi(0)}, {gi(1), gi(0)}, id), Error);
}

TEST_CASE("one-prime verification") {
  auto rep = verify_one_prime_bound(SelfAdjointMatrix::diagonal({q(1), q(5)}), kP5, 1, 1);
  CHECK(rep.count == 4);
  REQUIRE(rep.bound);
  CHECK(*rep.bound == doctest::Approx(10 * std::pow(5.0, 1.5)));
  CHECK(rep.pass);
  for (const auto& c : rep.checks) CHECK_MESSAGE(c.pass, std::string(c.name + ": " + c.details));

  const auto id = SelfAdjointMatrix::identity(2);
  auto rep2 = verify_one_prime_bound(id, kP13, 2, 1);
  CHECK(rep2.count == naive_exact(id, spec(kP13, kP13, 2)).size());
  CHECK(rep2.pass);

  auto rep3 = verify_one_prime_bound(SelfAdjointMatrix::diagonal({q(1), q(2)}), kP5, 2, gi(3));
  CHECK(rep3.pass);
  auto j = rep3.to_json();
  CHECK(j["checks"].size() == rep3.checks.size());
  CHECK_THROWS_AS(verify_one_prime_bound(sa({{"2", "i"}, {"-i", "3"}}), kP5, 1, 1), Error);
}

TEST_CASE("two-prime emptiness grid") {
  const SplitPrime kP17 = SplitPrime::above(17);
  for (const auto& f : {SelfAdjointMatrix::identity(2), SelfAdjointMatrix::diagonal({q(1), q(2)}),
                        SelfAdjointMatrix::diagonal({q(1), q(3)}), SelfAdjointMatrix::diagonal({q(2), q(3)})})
    for (const auto& pr : {std::pair{kP5, kP13}, std::pair{kP13, kP5}, std::pair{kP5, kP17}})
      for (unsigned nu : {1u, 2u}) {
        auto rep = verify_two_primes_empty(f, pr.first, pr.second, nu, 1);
        CHECK(rep.count == 0);
        CHECK(rep.pass);
        CHECK(rep.count == naive_exact(f, spec(pr.first, pr.second, nu)).size());
      }
  CHECK_THROWS_AS(verify_two_primes_empty(SelfAdjointMatrix::diagonal({q(1), q(5)}), kP5, kP13, 2, 1), Error);
  CHECK_THROWS_AS(verify_two_primes_empty(SelfAdjointMatrix::identity(2), kP5, kP5.conjugate(), 2, 1), Error);
}

TEST_CASE("two-prime congruence on a one-prime member") {
  // gamma = [[0, -(3+4i)], [1, 0]]: anchor column 0, mu = v_pi(-(3+4i)) = 2 = n, not applicable.
  auto c = two_prime_congruence(grm({{"0", "-3-4i"}, {"1", "0"}}), SelfAdjointMatrix::diagonal({q(1), q(5)}), kP5,
                                kP13, 1);
  CHECK_FALSE(c.applicable);
  CHECK(c.mu == 2);
  // Columns (1, 0) and (1, 25): mu = 0, minor 25 divisible by pi^2.
  auto d = two_prime_congruence(grm({{"1", "1"}, {"0", "25"}}), SelfAdjointMatrix::identity(2), kP5, kP13, 1);
  CHECK(d.applicable);
  CHECK(d.mu == 0);
  CHECK(d.congruent);
}
