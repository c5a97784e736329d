#pragma once

// Gaussian-integer vectors on shells of positive definite self-adjoint forms,
// optionally restricted by affine constraints x_j^* A y = v_j.

#include <vector>

#include "hecke/linalg.hpp"

namespace hecke {

struct ShellQuery {
  SelfAdjointMatrix a;
  Rational lo;
  Rational hi;
  std::vector<GaussVector> constraints;
  /// Right-hand sides v_j; empty means all zero.
  std::vector<GaussRational> values;

  static ShellQuery exact(SelfAdjointMatrix a, Rational target, std::vector<GaussVector> constraints = {});
  static ShellQuery interval(SelfAdjointMatrix a, Rational lo, Rational hi,
                             std::vector<GaussVector> constraints = {});
};

/// Lexicographic order on (re y1, im y1, re y2, im y2, ...).
bool interleaved_less(const GaussVector& a, const GaussVector& b);

/// All y with y^*Ay == target satisfying the constraints, sorted by interleaved_less.
/// Throws kNotPositiveDefinite, kDependentConstraints.
std::vector<GaussVector> enumerate_shell(const ShellQuery& q);
/// All y with lo <= y^*Ay <= hi satisfying the constraints. Throws kInvalidArgument if hi < lo.
std::vector<GaussVector> enumerate_interval(const ShellQuery& q);

/// Single-threaded reference search; same output as enumerate_interval.
std::vector<GaussVector> enumerate_serial(const ShellQuery& q);
/// Splits the outermost search coordinate across threads (jobs <= 0: OpenMP default).
std::vector<GaussVector> enumerate_parallel(const ShellQuery& q, int jobs = 0);

/// True when the constraint vectors are linearly independent over Q(i).
bool constraints_independent(const std::vector<GaussVector>& xs);

}  // namespace hecke
