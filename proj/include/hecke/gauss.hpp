#pragma once

// Exact arithmetic in Z[i] and Q(i).

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hecke/error.hpp"

namespace hecke {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

Integer floor_div(const Integer& a, const Integer& b);
Integer mod_floor(const Integer& a, const Integer& m);
/// Nearest integer to a/b (ties toward +infinity), b != 0.
Integer round_div(const Integer& a, const Integer& b);
Integer gcd(const Integer& a, const Integer& b);
Integer lcm(const Integer& a, const Integer& b);
Integer pow(const Integer& base, unsigned exp);
Integer floor(const Rational& r);
Integer ceil(const Rational& r);
bool is_probable_prime(const Integer& n);
/// Largest r with r^k <= n, n >= 0.
Integer iroot(const Integer& n, unsigned k);

class GaussInt {
 public:
  GaussInt() = default;
  GaussInt(Integer re, Integer im = 0) : re_(std::move(re)), im_(std::move(im)) {}
  GaussInt(long long re, long long im = 0) : re_(re), im_(im) {}
  GaussInt(int re) : re_(re), im_(0) {}

  static GaussInt i() { return {0, 1}; }

  const Integer& re() const { return re_; }
  const Integer& im() const { return im_; }

  bool is_zero() const { return re_ == 0 && im_ == 0; }
  bool is_unit() const { return norm() == 1; }
  Integer norm() const { return re_ * re_ + im_ * im_; }
  GaussInt conj() const { return {re_, -im_}; }
  /// The associate with re > 0 and im >= 0 (zero maps to zero).
  GaussInt canonical() const;
  /// Unit u with u * (*this) == canonical().
  GaussInt canonical_unit() const;

  GaussInt& operator+=(const GaussInt& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
  }
  GaussInt& operator-=(const GaussInt& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
  }
  GaussInt& operator*=(const GaussInt& o);

  friend GaussInt operator+(GaussInt a, const GaussInt& b) { return a += b; }
  friend GaussInt operator-(GaussInt a, const GaussInt& b) { return a -= b; }
  friend GaussInt operator*(GaussInt a, const GaussInt& b) { return a *= b; }
  friend GaussInt operator-(const GaussInt& a) { return {-a.re_, -a.im_}; }
  friend bool operator==(const GaussInt&, const GaussInt&) = default;

  /// Lexicographic on (re, im); used only for deterministic ordering.
  friend std::strong_ordering operator<=>(const GaussInt& a, const GaussInt& b);

  bool divides(const GaussInt& other) const;
  /// Exact quotient; throws if not divisible.
  GaussInt exact_div(const GaussInt& d) const;
  /// Euclidean quotient with N(remainder) <= N(d)/2.
  GaussInt round_quotient(const GaussInt& d) const;

 private:
  Integer re_;
  Integer im_;
};

GaussInt pow(GaussInt base, unsigned exp);
/// Canonical greatest common divisor; rejects (0, 0).
GaussInt gaussian_gcd(const GaussInt& a, const GaussInt& b);

/// Element of Q(i) in canonical form num/den with den > 0 and
/// gcd(num.re, num.im, den) == 1.
class GaussRational {
 public:
  GaussRational() : den_(1) {}
  GaussRational(GaussInt num, Integer den = 1);
  GaussRational(const Rational& r);
  GaussRational(const Rational& re, const Rational& im);
  GaussRational(int v) : num_(v), den_(1) {}
  GaussRational(long long v) : num_(v), den_(1) {}

  const GaussInt& num() const { return num_; }
  const Integer& den() const { return den_; }

  Rational re() const { return Rational(num_.re(), den_); }
  Rational im() const { return Rational(num_.im(), den_); }
  Rational norm() const { return Rational(num_.norm(), den_ * den_); }

  bool is_zero() const { return num_.is_zero(); }
  bool is_integral() const { return den_ == 1; }
  bool is_real() const { return num_.im() == 0; }
  GaussRational conj() const { return {num_.conj(), den_}; }
  GaussRational inverse() const;

  GaussRational& operator+=(const GaussRational& o);
  GaussRational& operator-=(const GaussRational& o);
  GaussRational& operator*=(const GaussRational& o);
  GaussRational& operator/=(const GaussRational& o);

  friend GaussRational operator+(GaussRational a, const GaussRational& b) { return a += b; }
  friend GaussRational operator-(GaussRational a, const GaussRational& b) { return a -= b; }
  friend GaussRational operator*(GaussRational a, const GaussRational& b) { return a *= b; }
  friend GaussRational operator/(GaussRational a, const GaussRational& b) { return a /= b; }
  friend GaussRational operator-(const GaussRational& a) { return {-a.num_, a.den_}; }
  friend bool operator==(const GaussRational&, const GaussRational&) = default;

 private:
  void normalize();

  GaussInt num_;
  Integer den_;
};

/// Gaussian prime above a split rational prime p = 1 mod 4, normalized re > im > 0.
class SplitPrime {
 public:
  /// The canonical prime above the rational prime p; throws unless p is prime, p = 1 mod 4.
  static SplitPrime above(const Integer& p);
  /// Accepts any associate/conjugate choice given explicitly; only checks N(pi) prime = 1 mod 4.
  static SplitPrime from_gaussian(const GaussInt& pi);

  const GaussInt& pi() const { return pi_; }
  const Integer& p() const { return p_; }
  bool is_canonical() const { return pi_.re() > pi_.im() && pi_.im() > 0; }
  SplitPrime conjugate() const;

  friend bool operator==(const SplitPrime& a, const SplitPrime& b) { return a.pi_ == b.pi_; }

 private:
  SplitPrime(GaussInt pi, Integer p) : pi_(std::move(pi)), p_(std::move(p)) {}

  GaussInt pi_;
  Integer p_;
};

using GaussVector = std::vector<GaussInt>;
using GaussRatVector = std::vector<GaussRational>;

// Valuations. Zero input throws kZeroInput; aggregates take the minimum over nonzero entries.
int valuation(const GaussInt& x, const SplitPrime& pi);
int valuation(const GaussRational& x, const SplitPrime& pi);
int valuation(const GaussVector& x, const SplitPrime& pi);
int valuation(const GaussRatVector& x, const SplitPrime& pi);
int valuation(const Integer& x, const SplitPrime& pi);

/// Canonical split primes with c1 <= p < c2, sorted by p.
std::vector<SplitPrime> split_primes_in_window(const Integer& c1, const Integer& c2);

/// Root r of x^2 + 1 mod p^rho with pi^rho | (r - i).
Integer sqrt_minus_one(const SplitPrime& pi, unsigned rho);
/// The t in [0, p^rho) with pi^rho | (z - t).
Integer integer_residue(const GaussInt& z, const SplitPrime& pi, unsigned rho);
/// Inverse of a mod m; throws if not invertible.
Integer mod_inverse(const Integer& a, const Integer& m);

/// v_pi(x) >= 0 and v_pi2(x) >= 0 (true for zero).
bool is_locally_integral(const GaussRational& x, const SplitPrime& pi, const SplitPrime& pi2);
/// p^rho | x in the ring of p-integral elements (true for zero).
bool divisible_by_p_power(const GaussRational& x, const SplitPrime& pi, unsigned rho);

}  // namespace hecke
