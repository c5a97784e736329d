// One pass/fail line per acceptance criterion, each with a pinned runtime limit.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "hecke/experiments.hpp"
#include "hecke/polarization.hpp"
#include "oracles.hpp"

using namespace hecke;
using namespace hecke::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string details;

  void require(bool cond, const std::string& what) {
    if (!cond && pass) {
      pass = false;
      details = "failed: " + what;
    }
  }
};

bool check_passed(const std::vector<Check>& checks, const std::string& name) {
  for (const auto& c : checks)
    if (c.name == name) return c.pass;
  return false;
}

const Check* find_check(const std::vector<Check>& checks, const std::string& name) {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

Outcome polarization_suite() {
  Outcome out;
  const SplitPrime pi = SplitPrime::from_gaussian(GaussInt(2, 1));
  std::size_t pairs = 0, checks = 0;
  for (std::size_t n : {2u, 3u})
    for (unsigned rho : {1u, 2u}) {
      const auto forms = polarization_fixtures(n);
      out.require(forms.size() == 10, "ten fixture matrices for n = " + std::to_string(n));
      const PolarizationSweep s = polarization_sweep_parallel(forms, pi, n, rho);
      out.require(s.pairs > 0, "non-empty sweep");
      out.require(s.violations == 0, "violation at n = " + std::to_string(n) + ", rho = " + std::to_string(rho) +
                                         (s.failures.empty() ? "" : ": " + s.failures.front()));
      pairs += s.pairs;
      checks += s.checks;
    }
  if (out.pass)
    out.details = "n in {2,3}, rho in {1,2}: " + std::to_string(pairs) + " pairs, " + std::to_string(checks) +
                  " assertions, 0 violations";
  return out;
}

Outcome shell_oracle() {
  Outcome out;
  const std::vector<SelfAdjointMatrix> forms{SelfAdjointMatrix::identity(2),
                                             SelfAdjointMatrix::diagonal({Rational(1), Rational(2)}),
                                             SelfAdjointMatrix::diagonal({Rational(1), Rational(5)})};
  std::size_t vectors = 0;
  for (const auto& a : forms)
    for (long long t = 0; t <= 60; ++t) {
      const ShellQuery sq = ShellQuery::exact(a, Rational(t));
      const auto got = enumerate_shell(sq);
      out.require(got == naive_shell(sq), "shell t = " + std::to_string(t));
      vectors += got.size();
    }
  const auto spot = enumerate_shell(ShellQuery::exact(SelfAdjointMatrix::identity(2), Rational(5)));
  out.require(spot.size() == 48, "identity t = 5 gives 48 vectors");
  if (out.pass) out.details = "3 forms x t = 0..60 equal to box search (" + std::to_string(vectors) + " vectors); identity t=5 -> 48";
  return out;
}

Outcome two_prime_grid() {
  Outcome out;
  const SplitPrime pi = SplitPrime::from_gaussian(GaussInt(2, 1));
  const std::vector<SplitPrime> others{SplitPrime::from_gaussian(GaussInt(3, 2)), SplitPrime::from_gaussian(GaussInt(4, 1))};
  const std::vector<SelfAdjointMatrix> forms{SelfAdjointMatrix::identity(2),
                                             SelfAdjointMatrix::diagonal({Rational(1), Rational(2)}),
                                             SelfAdjointMatrix::diagonal({Rational(2), Rational(3)})};
  std::size_t symbolic = 0, enumerated = 0;
  for (const auto& q3 : forms)
    for (const auto& pi2 : others)
      for (unsigned nu : {1u, 2u})
        for (const GaussInt& m : {GaussInt(1), GaussInt(3)}) {
          const VerificationReport rep = verify_two_primes_empty(q3, pi, pi2, nu, m);
          const std::string cell = rep.query;
          out.require(rep.pass && rep.count == 0, "nonzero or failing cell " + cell);
          const Check* empty = find_check(rep.checks, "empty");
          const bool is_symbolic = empty && empty->details.rfind("decided symbolically", 0) == 0;
          out.require(is_symbolic == (nu == 1), "nu = 1 symbolic, nu = 2 enumerated at " + cell);
          (is_symbolic ? symbolic : enumerated) += 1;
        }
  if (out.pass)
    out.details = "24 cells, all empty: " + std::to_string(symbolic) + " symbolic (nu=1), " +
                  std::to_string(enumerated) + " by enumeration (nu=2)";
  return out;
}

Outcome one_prime_counts() {
  Outcome out;
  const SplitPrime pi = SplitPrime::from_gaussian(GaussInt(2, 1));
  const HeckeCosetSpec spec{pi, pi, 1, 2};
  struct Fixture {
    SelfAdjointMatrix q;
    std::size_t want;
    const char* name;
  };
  const std::vector<Fixture> fixtures{{SelfAdjointMatrix::diagonal({Rational(1), Rational(5)}), 4, "diag(1,5)"},
                                      {SelfAdjointMatrix::identity(2), 0, "identity"}};
  for (const auto& f : fixtures) {
    const VerificationReport rep = verify_one_prime_bound(f.q, pi, 1, GaussInt(1));
    out.require(rep.count == f.want, std::string(f.name) + " count");
    out.require(rep.pass, std::string(f.name) + " hard checks");
    for (const char* name : {"determinant_exact", "column_shells", "unit_column", "polarized_divisibility",
                             "angle_separation"})
      out.require(check_passed(rep.checks, name), std::string(f.name) + " " + name);
    const auto oracle = naive_exact(f.q, spec);
    out.require(oracle.size() == f.want, std::string(f.name) + " box oracle");
    out.require(enumerate_S(CountQuery{f.q, spec, std::nullopt, GaussInt(1)}).members == oracle,
                std::string(f.name) + " member list equals box oracle");
  }
  if (out.pass) out.details = "diag(1,5) -> 4, identity -> 0; box oracle agrees; divisibility and angle checks pass";
  return out;
}

Outcome gram_schmidt_exactness() {
  Outcome out;
  std::mt19937_64 rng(20261016);
  std::size_t steps = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 4);
    const SelfAdjointMatrix q2 = random_positive_definite(rng, n, 20);
    const GramSchmidtResult gs = gram_schmidt_diagonalize(q2);
    out.require(adjoint(gs.u) * q2.matrix() * gs.u == gs.q3.matrix(), "U^* Q2 U == Q3");
    out.require(gs.q3.is_diagonal(), "Q3 diagonal");
    out.require(gs.q3.det() == q2.det(), "determinant preserved");
    for (std::size_t k = 0; k < n; ++k) out.require(gs.q3.diag(k) > 0, "positive pivots");
    for (const auto& st : gs.steps) {
      out.require(st.pivot_after > 0 && (st.pivot_after < st.pivot_before || st.factor.is_zero()),
                  "pivot decrease 0 < c - |b|^2/a < c");
      ++steps;
    }
  }
  const SelfAdjointMatrix spot(GaussRatMatrix::from_rows(
      {{GaussRational(2), GaussRational(GaussInt(0, 1))}, {GaussRational(GaussInt(0, -1)), GaussRational(1)}}));
  const GramSchmidtResult gs = gram_schmidt_diagonalize(spot);
  const Integer m = denominator_lcm(*inverse(gs.u)) * denominator_lcm(gs.u);
  out.require(gs.q3 == SelfAdjointMatrix::diagonal({Rational(2), Rational(1, 2)}), "[[2,i],[-i,1]] -> diag(2,1/2)");
  out.require(m == 4, "m = 4");
  if (out.pass)
    out.details = "100 random forms (n = 1..4, den <= 20, " + std::to_string(steps) +
                  " steps) exact; [[2,i],[-i,1]] -> diag(2,1/2), m = 4";
  return out;
}

Outcome pipeline_chain() {
  Outcome out;
  const std::vector<SplitPrime> primes{SplitPrime::from_gaussian(GaussInt(2, 1)), SplitPrime::from_gaussian(GaussInt(3, 2))};
  const std::vector<std::pair<const char*, SelfAdjointMatrix>> forms{
      {"identity", SelfAdjointMatrix::identity(2)},
      {"diag(1,5)", SelfAdjointMatrix::diagonal({Rational(1), Rational(5)})},
      {"[[2,i],[-i,1]]", SelfAdjointMatrix(GaussRatMatrix::from_rows({{GaussRational(2), GaussRational(GaussInt(0, 1))},
                                                                      {GaussRational(GaussInt(0, -1)), GaussRational(1)}}))}};
  std::string summary;
  for (const auto& [name, q] : forms) {
    const PipelineTrace tr = run_pipeline(q, EndgameConfig{}, primes);
    const std::string tag = name;
    out.require(tr.pass, tag + " hard checks");
    out.require(tr.j >= 1 && tr.k >= 1, tag + " stabilized chains");
    out.require(tr.q3.is_diagonal(), tag + " diagonal Q3");
    out.require(!tr.chain.empty(), tag + " chain cells");
    for (const char* c : {"harvest_in_q2", "conjugation_injection", "chain_counts", "q3_congruence", "u_unimodular"})
      out.require(check_passed(tr.checks, c), tag + " " + c);
    std::size_t verified = 0;
    for (const auto& rec : tr.chain) verified += rec.skipped ? 0 : 1;
    summary += (summary.empty() ? "" : "; ") + tag + ": j=" + std::to_string(tr.j) + " k=" + std::to_string(tr.k) +
               " m=" + to_string(tr.m) + " cells=" + std::to_string(tr.chain.size()) + "/" + std::to_string(verified) +
               " conj-checked";
  }
  if (out.pass) out.details = summary;
  return out;
}

Outcome diagnostics() {
  Outcome out;
  out.require(d_lambda_exact({Rational(1), Rational(-1)}) == 9, "d_lambda((1,-1)) = 9");
  out.require(d_lambda_exact({Rational(1), Rational(0), Rational(-1)}) == 144, "d_lambda((1,0,-1)) = 144");
  out.require(d_lambda({1, -1}) == 9 && d_lambda({1, 0, -1}) == 144, "float d_lambda");
  EndgameConfig cfg;
  cfg.T = 10;
  cfg.D = 2;
  cfg.E = 2;
  out.require(m_threshold(cfg, 2) == 40961, "threshold 40961");
  cfg.M = 40961;
  out.require(validate_M(cfg, 2), "M = 40961 accepted");
  cfg.M = 40960;
  out.require(!validate_M(cfg, 2), "M = 40960 rejected");
  if (out.pass) out.details = "d_lambda: 9, 144 exact; threshold 40961 (40961 ok, 40960 rejected)";
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"polarization exhaustive suite", 60, polarization_suite},
      {"shell enumeration oracle equivalence", 30, shell_oracle},
      {"two-prime emptiness grid", 300, two_prime_grid},
      {"one-prime exact counts", 120, one_prime_counts},
      {"Gram-Schmidt exactness", 30, gram_schmidt_exactness},
      {"pipeline chain on toy windows", 300, pipeline_chain},
      {"diagnostics", 1, diagnostics},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.details = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < criteria[k].limit_s;
    const bool ok = o.pass && in_time;
    failed += ok ? 0 : 1;
    std::printf("[%s] %zu %s: %s (%.2f s, limit %.0f s%s)\n", ok ? "PASS" : "FAIL", k + 1, criteria[k].name,
                o.details.c_str(), secs, criteria[k].limit_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
