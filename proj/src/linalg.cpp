#include "hecke/linalg.hpp"

#include <cmath>

namespace hecke {

GaussRatMatrix to_rational(const GaussIntMatrix& m) {
  GaussRatMatrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = GaussRational(m(i, j));
  return r;
}

bool is_integral(const GaussRatMatrix& m) {
  for (const auto& e : m.data())
    if (!e.is_integral()) return false;
  return true;
}

GaussIntMatrix to_integral(const GaussRatMatrix& m) {
  GaussIntMatrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (!m(i, j).is_integral()) throw Error(ErrorCode::kInvalidArgument, "matrix entry is not integral");
      r(i, j) = m(i, j).num();
    }
  return r;
}

GaussRatVector to_rational(const GaussVector& v) { return GaussRatVector(v.begin(), v.end()); }

GaussRational sesquilinear(const GaussRatVector& x, const GaussRatMatrix& a, const GaussRatVector& y) {
  GaussRational s;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    if (x[r].is_zero()) continue;
    GaussRational row;
    for (std::size_t c = 0; c < a.cols(); ++c) {
      if (y[c].is_zero() || a(r, c).is_zero()) continue;
      row += a(r, c) * y[c];
    }
    s += x[r].conj() * row;
  }
  return s;
}

GaussRational sesquilinear(const GaussVector& x, const GaussRatMatrix& a, const GaussVector& y) {
  // Accumulate with a common denominator: entries of a share den D.
  const Integer d = denominator_lcm(a);
  GaussInt s = 0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    if (x[r].is_zero()) continue;
    GaussInt row = 0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
      const auto& e = a(r, c);
      if (y[c].is_zero() || e.is_zero()) continue;
      row += e.num() * GaussInt(d / e.den()) * y[c];
    }
    s += x[r].conj() * row;
  }
  return GaussRational(s, d);
}

// ------------------------------------------------------- SelfAdjointMatrix

SelfAdjointMatrix::SelfAdjointMatrix(GaussRatMatrix entries) : m_(std::move(entries)) {
  if (!m_.is_square()) throw Error(ErrorCode::kInvalidArgument, "self-adjoint matrix must be square");
  for (std::size_t r = 0; r < m_.rows(); ++r)
    for (std::size_t c = r; c < m_.cols(); ++c)
      if (m_(r, c) != m_(c, r).conj()) throw Error(ErrorCode::kInvalidArgument, "matrix is not self-adjoint");
}

SelfAdjointMatrix SelfAdjointMatrix::diagonal(const std::vector<Rational>& d) {
  std::vector<GaussRational> g(d.begin(), d.end());
  return SelfAdjointMatrix(GaussRatMatrix::diagonal(g));
}

bool SelfAdjointMatrix::is_diagonal() const {
  for (std::size_t r = 0; r < n(); ++r)
    for (std::size_t c = 0; c < n(); ++c)
      if (r != c && !m_(r, c).is_zero()) return false;
  return true;
}

std::vector<Rational> SelfAdjointMatrix::leading_minors() const {
  std::vector<Rational> minors;
  for (std::size_t k = 1; k <= n(); ++k) {
    GaussRatMatrix sub(k, k);
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < k; ++c) sub(r, c) = m_(r, c);
    minors.push_back(determinant(sub).re());
  }
  return minors;
}

bool SelfAdjointMatrix::is_positive_definite() const {
  if (n() == 0) return false;
  for (const auto& m : leading_minors())
    if (m <= 0) return false;
  return true;
}

Rational SelfAdjointMatrix::det() const { return determinant(m_).re(); }

SelfAdjointMatrix SelfAdjointMatrix::congruence(const GaussRatMatrix& u) const {
  return SelfAdjointMatrix(adjoint(u) * m_ * u);
}

SelfAdjointMatrix SelfAdjointMatrix::scaled(const Rational& c) const {
  return SelfAdjointMatrix(GaussRational(c) * m_);
}

SelfAdjointMatrix SelfAdjointMatrix::shifted(const Rational& c) const {
  GaussRatMatrix m = m_;
  for (std::size_t k = 0; k < n(); ++k) m(k, k) += GaussRational(c);
  return SelfAdjointMatrix(std::move(m));
}

// ------------------------------------------------------------ realification

RationalMatrix realify_linear(const GaussRatMatrix& b) {
  RationalMatrix r(2 * b.rows(), 2 * b.cols());
  for (std::size_t j = 0; j < b.rows(); ++j)
    for (std::size_t k = 0; k < b.cols(); ++k) {
      const Rational al = b(j, k).re(), be = b(j, k).im();
      r(2 * j, 2 * k) = al;
      r(2 * j, 2 * k + 1) = -be;
      r(2 * j + 1, 2 * k) = be;
      r(2 * j + 1, 2 * k + 1) = al;
    }
  return r;
}

RationalMatrix realify(const SelfAdjointMatrix& a) { return realify_linear(a.matrix()); }

RationalVector realify_vector(const GaussRatVector& v) {
  RationalVector r;
  r.reserve(2 * v.size());
  for (const auto& z : v) {
    r.push_back(z.re());
    r.push_back(z.im());
  }
  return r;
}

// ------------------------------------------------------------------ Smith

SmithForm smith_decompose(const GaussIntMatrix& g) {
  const std::size_t m = g.rows(), n = g.cols();
  GaussIntMatrix a = g;
  SmithForm out{GaussIntMatrix::identity(m), {}, GaussIntMatrix::identity(n), 0};
  const std::size_t steps = std::min(m, n);
  std::size_t t = 0;
  for (; t < steps; ++t) {
    bool exhausted = false;
    for (;;) {
      // Pivot: nonzero entry of least norm in the trailing block.
      std::size_t pi = m, pj = n;
      Integer best;
      for (std::size_t i = t; i < m; ++i)
        for (std::size_t j = t; j < n; ++j) {
          if (a(i, j).is_zero()) continue;
          Integer nn = a(i, j).norm();
          if (pi == m || nn < best) {
            best = nn;
            pi = i;
            pj = j;
          }
        }
      if (pi == m) {
        exhausted = true;
        break;
      }
      if (pi != t) {
        a.swap_rows(pi, t);
        out.u.swap_rows(pi, t);
      }
      if (pj != t) {
        a.swap_cols(pj, t);
        out.v.swap_cols(pj, t);
      }
      bool clean = true;
      for (std::size_t i = t + 1; i < m; ++i) {
        if (a(i, t).is_zero()) continue;
        const GaussInt q = -a(i, t).round_quotient(a(t, t));
        a.add_row(i, t, q);
        out.u.add_row(i, t, q);
        if (!a(i, t).is_zero()) clean = false;
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (a(t, j).is_zero()) continue;
        const GaussInt q = -a(t, j).round_quotient(a(t, t));
        a.add_col(j, t, q);
        out.v.add_col(j, t, q);
        if (!a(t, j).is_zero()) clean = false;
      }
      if (!clean) continue;
      bool divisible = true;
      for (std::size_t i = t + 1; i < m && divisible; ++i)
        for (std::size_t j = t + 1; j < n; ++j)
          if (!a(t, t).divides(a(i, j))) {
            a.add_row(t, i, GaussInt(1));
            out.u.add_row(t, i, GaussInt(1));
            divisible = false;
            break;
          }
      if (divisible) break;
    }
    if (exhausted) break;
    const GaussInt unit = a(t, t).canonical_unit();
    if (unit != GaussInt(1)) {
      a.scale_row(t, unit);
      out.u.scale_row(t, unit);
    }
  }
  out.rank = t;
  out.divisors.resize(steps, GaussInt(0));
  for (std::size_t k = 0; k < t; ++k) out.divisors[k] = a(k, k);
  return out;
}

SmithForm smith_normal_form(const GaussIntMatrix& g) {
  if (!g.is_square()) throw Error(ErrorCode::kInvalidArgument, "smith_normal_form expects a square matrix");
  SmithForm s = smith_decompose(g);
  if (s.rank != g.rows()) throw Error(ErrorCode::kSingularMatrix, "singular input to smith_normal_form");
  return s;
}

GaussInt determinant(const GaussIntMatrix& g) {
  GaussRational d = determinant(to_rational(g));
  return d.num();
}

// ----------------------------------------------------------- Gram-Schmidt

GramSchmidtResult gram_schmidt_diagonalize(const SelfAdjointMatrix& q2) {
  const std::size_t n = q2.n();
  GaussRatMatrix q = q2.matrix();
  GaussRatMatrix u = GaussRatMatrix::identity(n);
  std::vector<GramSchmidtStep> steps;
  for (std::size_t j = 0; j < n; ++j) {
    const Rational a = q(j, j).re();
    if (a <= 0) throw Error(ErrorCode::kNotPositiveDefinite, "non-positive pivot in Gram-Schmidt");
    for (std::size_t k = j + 1; k < n; ++k) {
      const GaussRational b = q(j, k);
      const Rational c = q(k, k).re();
      if (b.is_zero()) {
        steps.push_back({j, k, GaussRational(0), c, c});
        continue;
      }
      const GaussRational f = -b / GaussRational(a);
      q.add_col(k, j, f);
      q.add_row(k, j, f.conj());
      u.add_col(k, j, f);
      const Rational after = q(k, k).re();
      if (after <= 0) throw Error(ErrorCode::kNotPositiveDefinite, "non-positive pivot in Gram-Schmidt");
      steps.push_back({j, k, f, c, after});
    }
  }
  return {std::move(u), SelfAdjointMatrix(std::move(q)), std::move(steps)};
}

// ------------------------------------------------------------ denominators

Integer denominator_lcm(const GaussRatMatrix& m) {
  Integer d = 1;
  for (const auto& e : m.data()) d = lcm(d, e.den());
  return d;
}

Integer denominator_lcm(const SelfAdjointMatrix& m) { return denominator_lcm(m.matrix()); }

Integer denominator_lcm(const GaussRatVector& v) {
  Integer d = 1;
  for (const auto& e : v) d = lcm(d, e.den());
  return d;
}

// -------------------------------------------------------------- complexity

int sign_of_surd(const Integer& a, const Integer& b, const Integer& c) {
  const int sa = a > 0 ? 1 : (a < 0 ? -1 : 0);
  if (b == 0 || c == 0) return sa;
  const int sb = b > 0 ? 1 : -1;
  if (sa == 0 || sa == sb) return sb;
  const Integer lhs = a * a, rhs = b * b * c;
  if (lhs > rhs) return sa;
  if (lhs < rhs) return sb;
  return 0;
}

namespace {
// sign(s + 2 sqrt(p) - 2 sqrt(r)), p, r >= 0.
int sign_two_surds(const Integer& s, const Integer& p, const Integer& r) {
  const int su = sign_of_surd(s, 2, p);
  if (r == 0) return su;
  if (su <= 0) return -1;
  return sign_of_surd(s * s + 4 * p - 4 * r, 4 * s, p);
}
}  // namespace

double Complexity::value() const {
  return std::sqrt(static_cast<double>(num_norm)) + std::sqrt(static_cast<double>(den_norm)) + 1.0;
}

std::strong_ordering operator<=>(const Complexity& a, const Complexity& b) {
  const Integer s = a.num_norm + a.den_norm - b.num_norm - b.den_norm;
  const int sign = sign_two_surds(s, a.num_norm * a.den_norm, b.num_norm * b.den_norm);
  if (sign < 0) return std::strong_ordering::less;
  if (sign > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Complexity complexity_of_representation(const GaussInt& b, const GaussInt& c) {
  if (c.is_zero()) throw Error(ErrorCode::kZeroInput, "zero denominator");
  return {b.norm(), c.norm()};
}

Complexity complexity(const GaussRational& a) {
  if (a.is_zero()) return {0, 1};
  const GaussInt den(a.den());
  const GaussInt g = gaussian_gcd(a.num(), den);
  return {a.num().exact_div(g).norm(), den.exact_div(g).norm()};
}

Complexity max_complexity(const GaussRatMatrix& m) {
  Complexity best{0, 1};
  for (const auto& e : m.data()) {
    Complexity c = complexity(e);
    if (c > best) best = c;
  }
  return best;
}

}  // namespace hecke
