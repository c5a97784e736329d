#pragma once

// Hecke sets S(Q, pi^nu, pi'^nu, M) and S_m(Q, pi^nu, pi'^nu, oo): membership,
// complete enumeration, and the one-prime / two-prime verification drivers.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hecke/enumerate.hpp"

namespace hecke {

struct HeckeCosetSpec {
  SplitPrime pi;
  SplitPrime pi2;
  unsigned nu = 1;
  std::size_t n = 2;

  /// Throws kInvalidArgument unless 1 <= nu <= n and n >= 2.
  void validate() const;
  /// pi^{nu(n-1)} pi2^nu.
  GaussInt determinant() const;
  /// Expected v_pi (resp. v_pi2) of the elementary divisors, in divisibility order.
  std::vector<int> target_valuations(const SplitPrime& prime) const;
};

/// |det gamma|^{2/n} for gamma in the coset.
struct DetPower {
  bool rational = false;
  Rational value;       // valid when rational
  Integer abs_det_sq;   // |det gamma|^2 = N(pi)^{nu(n-1)} N(pi2)^nu
  Rational exp_pi;      // nu(n-1)/n on N(pi)
  Rational exp_pi2;     // nu/n on N(pi2)
  std::size_t n = 2;
};

DetPower det_power(const HeckeCosetSpec& spec);

/// max(N(pi)^-M, N(pi2)^-M) = base^-M, materialized only when it fits in a modest number of bits.
struct Tolerance {
  Integer base;
  unsigned long long M = 0;
  std::optional<Rational> value;

  static Tolerance make(const HeckeCosetSpec& spec, unsigned long long M);
  /// A rational >= base^-M.
  Rational upper_bound() const;
};

struct CountQuery {
  SelfAdjointMatrix q;
  HeckeCosetSpec spec;
  std::optional<unsigned long long> M;  // nullopt: EXACT
  GaussInt m = 1;

  bool exact() const { return !M.has_value(); }
};

/// Coset condition and form condition for gamma (denominators allowed when m != 1).
/// Throws kSingularMatrix for singular g.
bool membership_test(const GaussRatMatrix& g, const CountQuery& query);
/// The coset part alone: m g integral, det exact, elementary divisor valuations.
bool in_double_coset(const GaussRatMatrix& g, const HeckeCosetSpec& spec, const GaussInt& m = 1);
/// The form part alone: |det|^{-2/n} g^*Qg == Q, or within the tolerance for finite M.
bool form_condition(const GaussRatMatrix& g, const CountQuery& query);

struct EnumerationResult {
  std::vector<GaussRatMatrix> members;  // sorted by interleaved columns
  std::string reason;                    // non-empty when decided without search
  std::size_t leaves = 0;                // complete candidates tested
};

/// Complete member list; parallel over first-column candidates.
EnumerationResult enumerate_S(const CountQuery& query, int jobs = 0);
/// Single-threaded reference with identical output.
EnumerationResult enumerate_S_serial(const CountQuery& query);

bool matrix_less(const GaussRatMatrix& a, const GaussRatMatrix& b);

/// arccos(Re(x^*Qy) / sqrt(x^*Qx y^*Qy)) in [0, pi]. Throws kZeroInput.
double q_angle(const GaussVector& x, const GaussVector& y, const SelfAdjointMatrix& q);

struct Check {
  std::string name;
  bool pass = true;
  bool hard = true;
  std::string details;
};

struct VerificationReport {
  std::string query;
  std::size_t count = 0;
  std::optional<double> bound;
  bool pass = true;  // all hard checks
  std::vector<Check> checks;
  std::vector<GaussRatMatrix> witnesses;

  void add(Check c);
  nlohmann::json to_json() const;
};

struct OnePrimeOptions {
  double C = 10;
  double eps = 0.5;
  double kappa = 1;
  int jobs = 0;
};

/// Counts S_m(q3, pi^nu, pi^nu, oo) and checks the bound (soft) and the internal
/// divisibility and angle-separation claims (hard) on the enumerated set.
VerificationReport verify_one_prime_bound(const SelfAdjointMatrix& q3, const SplitPrime& pi, unsigned nu,
                                          const GaussInt& m, const OnePrimeOptions& opt = {});

/// Decides emptiness of S_m(q3, pi^nu, pi2^nu, oo): symbolically when the determinant
/// power is irrational, by enumeration otherwise.
VerificationReport verify_two_primes_empty(const SelfAdjointMatrix& q3, const SplitPrime& pi, const SplitPrime& pi2,
                                           unsigned nu, const GaussInt& m, int jobs = 0);

/// The two sides of gamma_1^* Q gamma_2' == (a - bi) p^{n-1} N(pi2) q_1 + (a' - b'i) p^{n-1-mu} N(pi2) q_2
/// mod p^{n-mu} for a candidate with nu = n, where gamma_2' = gamma_2 / pi^mu.
struct TwoPrimeCongruence {
  bool applicable = false;  // a column with v_pi = 0 and the polarization preconditions hold
  int mu = 0;
  GaussRational lhs;
  GaussRational rhs;
  bool congruent = false;   // lhs == rhs mod p^{n-mu}
  bool contradiction = false;
};

TwoPrimeCongruence two_prime_congruence(const GaussRatMatrix& gamma, const SelfAdjointMatrix& q3,
                                        const SplitPrime& pi, const SplitPrime& pi2, const GaussInt& m);

nlohmann::json to_json(const EnumerationResult& r);

}  // namespace hecke
