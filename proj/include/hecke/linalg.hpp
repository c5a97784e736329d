#pragma once

// Self-adjoint forms over Q(i), Smith normal form over Z[i], Gram-Schmidt
// diagonalization, denominators and the complexity height.

#include <vector>

#include "hecke/matrix.hpp"

namespace hecke {

/// n x n matrix over Q(i) with entries(j,k) == conj(entries(k,j)).
class SelfAdjointMatrix {
 public:
  SelfAdjointMatrix() = default;
  /// Throws kInvalidArgument unless square and self-adjoint.
  explicit SelfAdjointMatrix(GaussRatMatrix entries);

  static SelfAdjointMatrix identity(std::size_t n) { return SelfAdjointMatrix(GaussRatMatrix::identity(n)); }
  static SelfAdjointMatrix diagonal(const std::vector<Rational>& d);

  std::size_t n() const { return m_.rows(); }
  const GaussRatMatrix& matrix() const { return m_; }
  const GaussRational& operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

  bool is_diagonal() const;
  /// Real diagonal entry.
  Rational diag(std::size_t k) const { return m_(k, k).re(); }

  /// Leading principal minors, all real.
  std::vector<Rational> leading_minors() const;
  /// Certified by leading principal minors > 0.
  bool is_positive_definite() const;
  Rational det() const;

  /// x^* A y for integral vectors.
  GaussRational form(const GaussVector& x, const GaussVector& y) const { return sesquilinear(x, m_, y); }
  Rational value(const GaussVector& y) const { return sesquilinear(y, m_, y).re(); }

  /// U^* A U (stays self-adjoint).
  SelfAdjointMatrix congruence(const GaussRatMatrix& u) const;
  SelfAdjointMatrix scaled(const Rational& c) const;
  SelfAdjointMatrix shifted(const Rational& c) const;  // A + c I

  friend SelfAdjointMatrix operator+(const SelfAdjointMatrix& a, const SelfAdjointMatrix& b) {
    return SelfAdjointMatrix(a.m_ + b.m_);
  }
  friend SelfAdjointMatrix operator-(const SelfAdjointMatrix& a, const SelfAdjointMatrix& b) {
    return SelfAdjointMatrix(a.m_ - b.m_);
  }
  friend bool operator==(const SelfAdjointMatrix&, const SelfAdjointMatrix&) = default;

 private:
  GaussRatMatrix m_;
};

/// 2n x 2n symmetric rational matrix R with y^*Ay == Y^T R Y, Y = (re y1, im y1, re y2, ...).
RationalMatrix realify(const SelfAdjointMatrix& a);
/// Real 2n x 2m matrix of a complex n x m matrix acting on interleaved coordinates.
RationalMatrix realify_linear(const GaussRatMatrix& b);
RationalVector realify_vector(const GaussRatVector& v);

struct SmithForm {
  GaussIntMatrix u;               // invertible over Z[i]
  std::vector<GaussInt> divisors; // canonical, d1 | d2 | ..., zeros last
  GaussIntMatrix v;               // invertible over Z[i]
  std::size_t rank = 0;
};

/// U g V == diag(divisors) for any rectangular g over Z[i].
SmithForm smith_decompose(const GaussIntMatrix& g);
/// Square nonsingular variant; throws kSingularMatrix.
SmithForm smith_normal_form(const GaussIntMatrix& g);
GaussInt determinant(const GaussIntMatrix& g);

struct GramSchmidtStep {
  std::size_t row = 0;     // eliminated position (row, col), row < col
  std::size_t col = 0;
  GaussRational factor;    // U_step = I + factor * E(row, col)
  Rational pivot_before;   // c
  Rational pivot_after;    // c - |b|^2 / a
};

struct GramSchmidtResult {
  GaussRatMatrix u;
  SelfAdjointMatrix q3;
  std::vector<GramSchmidtStep> steps;
};

/// Row-major elimination order (1,2),(1,3),...,(n-1,n); q3 == U^* q2 U diagonal.
/// Throws kNotPositiveDefinite when a pivot <= 0 is met.
GramSchmidtResult gram_schmidt_diagonalize(const SelfAdjointMatrix& q2);

Integer denominator_lcm(const GaussRatMatrix& m);
Integer denominator_lcm(const SelfAdjointMatrix& m);
Integer denominator_lcm(const GaussRatVector& v);

/// |b0| + |c0| + 1 for the reduced fraction a = b0 / c0 over Z[i]; stored as squared moduli.
struct Complexity {
  Integer num_norm;  // |b0|^2
  Integer den_norm;  // |c0|^2

  double value() const;
  /// Exact comparison of sqrt(n1)+sqrt(d1) against sqrt(n2)+sqrt(d2).
  friend std::strong_ordering operator<=>(const Complexity& a, const Complexity& b);
  friend bool operator==(const Complexity& a, const Complexity& b) { return (a <=> b) == 0; }
};

Complexity complexity(const GaussRational& a);
/// Complexity of the (possibly non-reduced) representation b / c.
Complexity complexity_of_representation(const GaussInt& b, const GaussInt& c);
/// Maximum entry complexity of a matrix.
Complexity max_complexity(const GaussRatMatrix& m);

/// Sign of a + b * sqrt(c) for integers a, b and c >= 0.
int sign_of_surd(const Integer& a, const Integer& b, const Integer& c);

}  // namespace hecke
