#pragma once

// Exchange of forms: B_gamma operators on self-adjoint matrices, kernel chains,
// rational points in eigenvalue envelopes, and the toy-scale endgame chain
//   #S(Q, ..., M) <= #S(Q2, ..., oo) <= #S_m(Q3, ..., oo).

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hecke/hecke_set.hpp"

namespace hecke {

/// Coordinates of a self-adjoint n x n matrix in the basis
/// E_jj (j = 1..n), then E_jk + E_kj, then i(E_jk - E_kj) (j < k, row-major).
std::vector<Rational> form_coordinates(const SelfAdjointMatrix& a);
SelfAdjointMatrix form_from_coordinates(const std::vector<Rational>& x, std::size_t n);
/// Re tr(A B).
Rational frobenius(const SelfAdjointMatrix& a, const SelfAdjointMatrix& b);

struct FormOperator {
  std::size_t n = 0;
  RationalMatrix m;  // n^2 x n^2, acting on form_coordinates

  SelfAdjointMatrix apply(const SelfAdjointMatrix& a) const;
  bool is_zero() const;
};

/// A -> g^* A g - det_power A. Throws kIrrationalDetPower for an irrational power.
FormOperator b_gamma_operator(const GaussRatMatrix& g, const Rational& det_power);
FormOperator b_gamma_operator(const GaussRatMatrix& g, const DetPower& det_power);

struct SubspaceBasis {
  std::size_t n = 0;
  std::vector<SelfAdjointMatrix> basis;

  static SubspaceBasis full(std::size_t n);
  std::size_t dim() const { return basis.size(); }
  bool contains(const SelfAdjointMatrix& a) const;
  nlohmann::json to_json() const;
};

/// Exact basis of the common kernel; the full space for an empty list.
SubspaceBasis kernel_intersection(const std::vector<FormOperator>& ops, std::size_t n);

struct Distance {
  Rational squared;        // Frobenius, exact
  double frobenius = 0;
  double entrywise_max = 0;
  SelfAdjointMatrix projection;
};

/// Orthogonal projection onto span(h) in the Frobenius inner product.
Distance distance_to_subspace(const SelfAdjointMatrix& q, const SubspaceBasis& h);

struct Envelope {
  Rational lo;
  Rational hi;
  std::size_t n = 0;

  void validate() const;
  /// lo < every eigenvalue < hi, certified by leading minors of A - lo I and hi I - A.
  bool contains_strictly(const SelfAdjointMatrix& a) const;
  /// lo <= every eigenvalue <= hi for a diagonal matrix.
  bool contains_diagonal(const SelfAdjointMatrix& a) const;
  nlohmann::json to_json() const;
};

/// Rational bounds strictly enclosing the spectrum of a positive definite q.
Envelope envelope_of(const SelfAdjointMatrix& q);

/// Omega_1 = [a/2, 2b] and Omega_2 = [Delta / lambda^{n-1}, lambda], lambda = 2b, Delta = (a/2)^n.
std::pair<Envelope, Envelope> envelopes(const Envelope& omega_prime);

/// Best rational approximation of x with denominator <= bound.
Rational best_approximation(const Rational& x, const Integer& bound);

/// Projection of seed onto span(h), coordinates rounded to denominators <= denom_bound,
/// certified inside env. Throws kNoPointFound.
SelfAdjointMatrix rational_point_in_envelope(const SubspaceBasis& h, const Envelope& env, const Integer& denom_bound,
                                             const SelfAdjointMatrix& seed);

/// |det g|^{2/n} (g^*)^{-1} g^{-1}. Throws kSingularMatrix, and kIrrationalDetPower when |det g|^{2/n} is irrational.
SelfAdjointMatrix q_from_point(const GaussRatMatrix& g);

struct EndgameConfig {
  Integer D = 2;
  Integer E = 33;
  Integer T = 10;
  Integer L0 = 2;
  unsigned long long M = 3;
  bool toy_override = true;              // accept M below the threshold
  std::vector<std::vector<SplitPrime>> windows;    // H_j windows; empty: one window per prime norm
  std::vector<std::vector<SplitPrime>> k_windows;  // H'_k windows; empty: same as windows
  Integer denom_bound = 16;
  Integer denom_ceiling = Integer(1) << 20;
  std::optional<Envelope> omega_prime;
  bool inject_fault = false;
  int jobs = 0;

  /// Throws kInvalidArgument with a field-level message.
  void validate(std::size_t n) const;
};

/// T (DE)^{n^2+2} + 1.
Integer m_threshold(const EndgameConfig& cfg, std::size_t n);
bool validate_M(const EndgameConfig& cfg, std::size_t n);

struct ChainRecord {
  SplitPrime pi;
  SplitPrime pi2;
  unsigned nu = 1;
  std::size_t count_m = 0;   // #S(Q, ..., M)
  std::size_t count_q2 = 0;  // #S(Q2, ..., oo)
  std::size_t count_q3 = 0;  // #S_m(Q3, ..., oo)
  bool skipped = false;      // pi or pi2 divides m
  bool pass = true;
  std::string note;
};

struct PipelineTrace {
  SelfAdjointMatrix q;
  EndgameConfig cfg;
  Envelope omega_prime, omega1, omega2;
  std::vector<std::vector<SplitPrime>> windows, k_windows;
  std::vector<std::size_t> h_dims;       // dim H_1, H_2, ...
  std::size_t j = 0;
  std::vector<std::size_t> hprime_dims;  // dim H'_0, H'_1, ...
  std::size_t k = 0;
  SubspaceBasis h_j, h_prime_k;
  std::size_t excluded_irrational = 0;   // harvested gamma without a rational B_gamma
  std::optional<SelfAdjointMatrix> q1;
  SelfAdjointMatrix q2;
  GaussRatMatrix u;
  SelfAdjointMatrix q3;
  GaussInt m = 1;
  std::vector<std::pair<std::string, Complexity>> complexity;
  std::vector<ChainRecord> chain;
  std::vector<Check> checks;
  bool pass = true;

  void add(Check c);
  nlohmann::json to_json() const;
};

/// Runs the H_j loop, the H'_k loop, the Gram-Schmidt hand-off and the chain verification.
/// Throws kWindowExhausted or kNoPointFound.
PipelineTrace run_pipeline(const SelfAdjointMatrix& q, const EndgameConfig& cfg, const std::vector<SplitPrime>& primes);

}  // namespace hecke
