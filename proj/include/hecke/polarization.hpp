#pragma once

// Scalar witnesses y = a x mod pi^rho for projectively close vectors and the
// polarization congruence
//   2 x^*Ay = (a - bi) x^*Ax + (a' - b'i) y^*Ay  mod p^rho.

#include <string>
#include <vector>

#include "hecke/linalg.hpp"

namespace hecke {

struct PolarizationWitness {
  Integer a;
  Integer b;      // b = a * i mod pi^rho
  Integer a_inv;  // a'
  Integer b_inv;  // b'
  Integer modulus;
};

/// The a in [0, p^rho) with pi^rho | y - a x.
/// Throws kValuationFailure when v_pi(x) or v_pi(y) is not 0, and
/// kMinorDivisibilityFailure when some 2x2 minor of (x, y) is not divisible by pi^rho.
Integer scalar_witness(const GaussVector& x, const GaussVector& y, const SplitPrime& pi, unsigned rho);

/// b, a', b' for a given a coprime to p.
PolarizationWitness witness_from_scalar(const Integer& a, const SplitPrime& pi, unsigned rho);

/// Witness with the congruence and the divisibilities pi^rho | a' - b'i,
/// conj(pi)^rho | a - bi checked; a failed check throws kInvariantViolation.
PolarizationWitness polarize(const SelfAdjointMatrix& a_mat, const GaussVector& x, const GaussVector& y,
                             const SplitPrime& pi, unsigned rho);

/// Whether the congruence holds for the given witness (A needs v_pi(A) >= 0).
bool polarization_congruence_holds(const SelfAdjointMatrix& a_mat, const GaussVector& x, const GaussVector& y,
                                   const PolarizationWitness& w, const SplitPrime& pi, unsigned rho);

/// Representative of z mod pi^rho closest to the origin.
GaussInt reduce_mod(const GaussInt& z, const GaussInt& modulus);

/// Ten fixed integral self-adjoint n x n matrices.
std::vector<SelfAdjointMatrix> polarization_fixtures(std::size_t n);

struct PolarizationSweep {
  std::size_t n = 0;
  unsigned rho = 0;
  Integer p;
  std::size_t vectors = 0;     // x with v_pi(x) = 0
  std::size_t pairs = 0;       // valid (x, y)
  std::size_t checks = 0;      // individual assertions evaluated
  std::size_t violations = 0;
  std::vector<std::string> failures;  // first few, for reporting
};

/// All x over residue representatives mod pi^rho with v_pi(x) = 0, all y = a x
/// (reduced entrywise) for a coprime to p, every matrix in `forms`.
PolarizationSweep polarization_sweep_serial(const std::vector<SelfAdjointMatrix>& forms, const SplitPrime& pi,
                                            std::size_t n, unsigned rho);
PolarizationSweep polarization_sweep_parallel(const std::vector<SelfAdjointMatrix>& forms, const SplitPrime& pi,
                                              std::size_t n, unsigned rho, int jobs = 0);

}  // namespace hecke
