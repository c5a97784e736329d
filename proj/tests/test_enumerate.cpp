#include <doctest.h>

#include <map>

#include "oracles.hpp"

using namespace hecke;
using namespace hecke::testing;

namespace {

std::vector<SelfAdjointMatrix> fixture_forms() {
  return {
      SelfAdjointMatrix::identity(2),
      SelfAdjointMatrix::diagonal({q(1), q(2)}),
      SelfAdjointMatrix::diagonal({q(1), q(5)}),
      sa({{"2", "i"}, {"-i", "1"}}),
      sa({{"3", "1+i"}, {"1-i", "2"}}),
      sa({{"2", "1/2"}, {"1/2", "1"}}),
      sa({{"3", "1", "0"}, {"1", "2", "i"}, {"0", "-i", "2"}}),
      SelfAdjointMatrix::diagonal({q(1), q(1), q(3)}),
  };
}

}  // namespace

TEST_CASE("enumerate_shell examples") {
  auto id = SelfAdjointMatrix::identity(2);
  CHECK(enumerate_shell(ShellQuery::exact(id, 5)).size() == 48);
  auto c = enumerate_shell(ShellQuery::exact(id, 1, {{gi(1), gi(0)}}));
  REQUIRE(c.size() == 4);
  for (const auto& y : c) {
    CHECK(y[0] == gi(0));
    CHECK(y[1].is_unit());
  }
  CHECK(enumerate_shell(ShellQuery::exact(id, -1)).empty());
  CHECK(enumerate_shell(ShellQuery::exact(id, 3)).size() == 32);
}

TEST_CASE("enumerate_interval examples") {
  auto id = SelfAdjointMatrix::identity(2);
  auto z = enumerate_interval(ShellQuery::interval(id, 0, 0));
  REQUIRE(z.size() == 1);
  CHECK(z[0] == GaussVector{gi(0), gi(0)});
  auto band = enumerate_interval(ShellQuery::interval(id, q(9, 2), q(11, 2)));
  CHECK(band == enumerate_shell(ShellQuery::exact(id, 5)));

  auto d15 = enumerate_interval(ShellQuery::interval(SelfAdjointMatrix::diagonal({q(1), q(5)}), 5, 5));
  CHECK(d15.size() == 12);
  int first = 0, second = 0;
  for (const auto& y : d15) {
    if (y[1].is_zero() && y[0].norm() == 5) ++first;
    if (y[0].is_zero() && y[1].is_unit()) ++second;
  }
  CHECK(first == 8);
  CHECK(second == 4);
  CHECK_THROWS_AS(enumerate_interval(ShellQuery::interval(id, 2, 1)), Error);
}

TEST_CASE("enumeration errors") {
  CHECK_THROWS_AS(enumerate_shell(ShellQuery::exact(sa({{"1", "2"}, {"2", "1"}}), 3)), Error);
  try {
    enumerate_shell(ShellQuery::exact(SelfAdjointMatrix::identity(2), 5, {{gi(1), gi(1)}, {gi(2), gi(2)}}));
    FAIL("expected dependent constraints");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDependentConstraints);
  }
  CHECK(constraints_independent({{gi(1), gi(0)}, {gi(0), gi(1)}}));
  CHECK_FALSE(constraints_independent({{gi(1), gi(1, 1)}, {gi(0, 1), gi(-1, 1)}}));
}

TEST_CASE("shell enumeration matches box enumeration for small diagonal forms") {
  for (auto d : {std::vector<Rational>{1, 1}, {1, 2}, {1, 5}}) {
    auto a = SelfAdjointMatrix::diagonal(d);
    for (int t = 0; t <= 60; ++t) {
      auto query = ShellQuery::exact(a, t);
      CHECK(enumerate_shell(query) == naive_shell(query));
    }
  }
}

TEST_CASE("interval enumeration matches box enumeration on the fixture forms") {
  for (const auto& a : fixture_forms()) {
    const int top = a.n() == 3 ? 14 : 40;
    for (int t = 0; t <= top; t += 3) {
      auto query = ShellQuery::interval(a, t, t + q(5, 2));
      CHECK(enumerate_interval(query) == naive_shell(query));
    }
  }
}

TEST_CASE("constrained enumeration matches filtered box enumeration") {
  std::mt19937_64 rng(41);
  for (const auto& a : fixture_forms()) {
    for (int trial = 0; trial < 4; ++trial) {
      GaussVector x(a.n());
      for (auto& e : x) e = random_gauss(rng, 2);
      if (std::all_of(x.begin(), x.end(), [](const GaussInt& e) { return e.is_zero(); })) continue;
      auto query = ShellQuery::interval(a, 0, a.n() == 3 ? 12 : 30, {x});
      CHECK(enumerate_interval(query) == naive_shell(query));

      // Affine right-hand side taken from an actual vector, so the fibre is non-empty.
      GaussVector y0(a.n());
      for (auto& e : y0) e = random_gauss(rng, 1);
      query.values = {a.form(x, y0)};
      query.hi = std::max(query.hi, a.value(y0));
      auto got = enumerate_interval(query);
      CHECK(got == naive_shell(query));
      CHECK(std::find(got.begin(), got.end(), y0) != got.end());
    }
  }
}

TEST_CASE("every returned vector satisfies its constraints") {
  auto a = sa({{"3", "1", "0"}, {"1", "2", "i"}, {"0", "-i", "2"}});
  std::vector<GaussVector> xs{{gi(1), gi(0, 1), gi(2)}, {gi(0), gi(1), gi(-1, 1)}};
  auto got = enumerate_interval(ShellQuery::interval(a, 0, 200, xs));
  CHECK_FALSE(got.empty());
  for (const auto& y : got)
    for (const auto& x : xs) CHECK(a.form(x, y).is_zero());
}

TEST_CASE("interval output is the union of the attained shells") {
  for (const auto& a : {SelfAdjointMatrix::identity(2), SelfAdjointMatrix::diagonal({q(1), q(5)}),
                        sa({{"3", "1+i"}, {"1-i", "2"}})}) {
    auto band = enumerate_interval(ShellQuery::interval(a, 3, 25));
    std::map<Rational, int> by_value;
    for (const auto& y : band) ++by_value[a.value(y)];
    std::size_t total = 0;
    for (int t = 3; t <= 25; ++t) {
      auto shell = enumerate_shell(ShellQuery::exact(a, t));
      CHECK(shell.size() == static_cast<std::size_t>(by_value[Rational(t)]));
      total += shell.size();
    }
    CHECK(total == band.size());
  }
}

TEST_CASE("parallel and serial enumeration agree") {
  for (const auto& a : fixture_forms()) {
    auto query = ShellQuery::interval(a, 1, a.n() == 3 ? 20 : 50);
    auto serial = enumerate_serial(query);
    CHECK(serial == enumerate_parallel(query, 4));
    CHECK(serial == enumerate_parallel(query, 1));
    CHECK(std::is_sorted(serial.begin(), serial.end(), interleaved_less));
  }
}

TEST_CASE("large scales take the exact search and agree with small scales") {
  const Rational big = Rational(Integer(1) << 48);
  for (const auto& a : fixture_forms()) {
    for (long long t = 1; t <= 12; ++t) {
      const auto small = enumerate_interval(ShellQuery::interval(a, q(t), q(t + 2)));
      const auto large = enumerate_interval(ShellQuery::interval(a.scaled(big), q(t) * big, q(t + 2) * big));
      CHECK(small == large);
      const auto tiny = enumerate_interval(ShellQuery::interval(a.scaled(1 / big), q(t) / big, q(t + 2) / big));
      CHECK(small == tiny);
    }
  }
}
