#include "hecke/gauss.hpp"

#include <algorithm>

namespace hecke {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kZeroInput: return "zero_input";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kSingularMatrix: return "singular_matrix";
    case ErrorCode::kNotPositiveDefinite: return "not_positive_definite";
    case ErrorCode::kDependentConstraints: return "dependent_constraints";
    case ErrorCode::kValuationFailure: return "valuation_failure";
    case ErrorCode::kMinorDivisibilityFailure: return "minor_divisibility_failure";
    case ErrorCode::kIrrationalDetPower: return "irrational_det_power";
    case ErrorCode::kNoPointFound: return "no_point_found";
    case ErrorCode::kWindowExhausted: return "window_exhausted";
    case ErrorCode::kInvariantViolation: return "invariant_violation";
    case ErrorCode::kParse: return "parse_error";
  }
  return "unknown";
}

Integer floor_div(const Integer& a, const Integer& b) {
  Integer q = a / b;
  Integer r = a - q * b;
  if (r != 0 && ((r < 0) != (b < 0))) --q;
  return q;
}

Integer mod_floor(const Integer& a, const Integer& m) { return a - floor_div(a, m) * m; }

Integer round_div(const Integer& a, const Integer& b) {
  // floor((2a + b) / 2b)
  return floor_div(2 * a + b, 2 * b);
}

Integer gcd(const Integer& a, const Integer& b) {
  Integer x = abs(a), y = abs(b);
  while (y != 0) {
    Integer t = x % y;
    x = std::move(y);
    y = std::move(t);
  }
  return x;
}

Integer lcm(const Integer& a, const Integer& b) {
  if (a == 0 || b == 0) return 0;
  return abs(a / gcd(a, b) * b);
}

Integer pow(const Integer& base, unsigned exp) {
  Integer result = 1, b = base;
  while (exp) {
    if (exp & 1u) result *= b;
    exp >>= 1u;
    if (exp) b *= b;
  }
  return result;
}

Integer floor(const Rational& r) { return floor_div(numerator(r), denominator(r)); }
Integer ceil(const Rational& r) { return -floor_div(-numerator(r), denominator(r)); }

bool is_probable_prime(const Integer& n) {
  if (n < 2) return false;
  if (n < 4) return true;
  if (n % 2 == 0) return false;
  // Desk-scale windows only: trial division is adequate.
  for (Integer d = 3; d * d <= n; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

Integer iroot(const Integer& n, unsigned k) {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "iroot of negative");
  if (n < 2 || k == 1) return n;
  Integer lo = 0, hi = 1;
  while (pow(hi, k) <= n) hi *= 2;
  while (hi - lo > 1) {
    Integer mid = (lo + hi) / 2;
    if (pow(mid, k) <= n) lo = mid; else hi = mid;
  }
  return lo;
}

// ---------------------------------------------------------------- GaussInt

GaussInt& GaussInt::operator*=(const GaussInt& o) {
  Integer r = re_ * o.re_ - im_ * o.im_;
  Integer i = re_ * o.im_ + im_ * o.re_;
  re_ = std::move(r);
  im_ = std::move(i);
  return *this;
}

std::strong_ordering operator<=>(const GaussInt& a, const GaussInt& b) {
  if (a.re_ != b.re_) return a.re_ < b.re_ ? std::strong_ordering::less : std::strong_ordering::greater;
  if (a.im_ != b.im_) return a.im_ < b.im_ ? std::strong_ordering::less : std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

GaussInt GaussInt::canonical_unit() const {
  if (is_zero()) return 1;
  GaussInt u = 1;
  GaussInt z = *this;
  for (int k = 0; k < 4; ++k) {
    if (z.re_ > 0 && z.im_ >= 0) return u;
    z *= GaussInt::i();
    u *= GaussInt::i();
  }
  throw Error(ErrorCode::kInvariantViolation, "no canonical associate");
}

GaussInt GaussInt::canonical() const { return canonical_unit() * *this; }

bool GaussInt::divides(const GaussInt& other) const {
  if (is_zero()) return other.is_zero();
  GaussInt t = other * conj();
  Integer n = norm();
  return t.re_ % n == 0 && t.im_ % n == 0;
}

GaussInt GaussInt::exact_div(const GaussInt& d) const {
  if (d.is_zero()) throw Error(ErrorCode::kZeroInput, "division by zero");
  GaussInt t = *this * d.conj();
  Integer n = d.norm();
  if (t.re_ % n != 0 || t.im_ % n != 0) throw Error(ErrorCode::kInvalidArgument, "inexact Gaussian division");
  return {t.re_ / n, t.im_ / n};
}

GaussInt GaussInt::round_quotient(const GaussInt& d) const {
  if (d.is_zero()) throw Error(ErrorCode::kZeroInput, "division by zero");
  GaussInt t = *this * d.conj();
  Integer n = d.norm();
  return {round_div(t.re_, n), round_div(t.im_, n)};
}

GaussInt pow(GaussInt base, unsigned exp) {
  GaussInt result = 1;
  while (exp) {
    if (exp & 1u) result *= base;
    exp >>= 1u;
    if (exp) base *= base;
  }
  return result;
}

GaussInt gaussian_gcd(const GaussInt& a, const GaussInt& b) {
  if (a.is_zero() && b.is_zero()) throw Error(ErrorCode::kZeroInput, "gcd(0, 0)");
  GaussInt x = a, y = b;
  while (!y.is_zero()) {
    GaussInt r = x - x.round_quotient(y) * y;
    x = std::move(y);
    y = std::move(r);
  }
  return x.canonical();
}

// ----------------------------------------------------------- GaussRational

GaussRational::GaussRational(GaussInt num, Integer den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_ == 0) throw Error(ErrorCode::kZeroInput, "zero denominator");
  normalize();
}

GaussRational::GaussRational(const Rational& r) : num_(numerator(r)), den_(denominator(r)) { normalize(); }

GaussRational::GaussRational(const Rational& re, const Rational& im) {
  den_ = lcm(denominator(re), denominator(im));
  num_ = GaussInt(numerator(re) * (den_ / denominator(re)), numerator(im) * (den_ / denominator(im)));
  normalize();
}

void GaussRational::normalize() {
  if (den_ < 0) {
    den_ = -den_;
    num_ = -num_;
  }
  if (num_.is_zero()) {
    den_ = 1;
    return;
  }
  Integer g = gcd(gcd(num_.re(), num_.im()), den_);
  if (g != 1) {
    num_ = GaussInt(num_.re() / g, num_.im() / g);
    den_ /= g;
  }
}

GaussRational GaussRational::inverse() const {
  if (is_zero()) throw Error(ErrorCode::kZeroInput, "inverse of zero");
  // den / num = den * conj(num) / N(num)
  return {num_.conj() * GaussInt(den_), num_.norm()};
}

GaussRational& GaussRational::operator+=(const GaussRational& o) {
  if (den_ == o.den_) {
    num_ += o.num_;
  } else {
    num_ = num_ * GaussInt(o.den_) + o.num_ * GaussInt(den_);
    den_ *= o.den_;
  }
  normalize();
  return *this;
}

GaussRational& GaussRational::operator-=(const GaussRational& o) { return *this += -o; }

GaussRational& GaussRational::operator*=(const GaussRational& o) {
  num_ *= o.num_;
  den_ *= o.den_;
  normalize();
  return *this;
}

GaussRational& GaussRational::operator/=(const GaussRational& o) { return *this *= o.inverse(); }

// -------------------------------------------------------------- SplitPrime

SplitPrime SplitPrime::above(const Integer& p) {
  if (!is_probable_prime(p) || p % 4 != 1) throw Error(ErrorCode::kInvalidArgument, "not a split prime");
  for (Integer b = 1; 2 * b * b < p; ++b) {
    Integer rest = p - b * b;
    Integer a = iroot(rest, 2);
    if (a * a == rest) return SplitPrime(GaussInt(a, b), p);
  }
  throw Error(ErrorCode::kInvariantViolation, "p = 1 mod 4 without two-square representation");
}

SplitPrime SplitPrime::from_gaussian(const GaussInt& pi) {
  Integer p = pi.norm();
  if (!is_probable_prime(p) || p % 4 != 1) throw Error(ErrorCode::kInvalidArgument, "norm is not a split prime");
  return SplitPrime(pi, p);
}

SplitPrime SplitPrime::conjugate() const { return SplitPrime(pi_.conj(), p_); }

// ------------------------------------------------------------- valuations

int valuation(const GaussInt& x, const SplitPrime& pi) {
  if (x.is_zero()) throw Error(ErrorCode::kZeroInput, "valuation of zero");
  int v = 0;
  GaussInt y = x;
  while (pi.pi().divides(y)) {
    y = y.exact_div(pi.pi());
    ++v;
  }
  return v;
}

int valuation(const Integer& x, const SplitPrime& pi) {
  if (x == 0) throw Error(ErrorCode::kZeroInput, "valuation of zero");
  int v = 0;
  Integer y = abs(x);
  while (y % pi.p() == 0) {
    y /= pi.p();
    ++v;
  }
  return v;
}

int valuation(const GaussRational& x, const SplitPrime& pi) {
  return valuation(x.num(), pi) - valuation(x.den(), pi);
}

namespace {
template <class Vec>
int min_valuation(const Vec& x, const SplitPrime& pi) {
  bool found = false;
  int best = 0;
  for (const auto& e : x) {
    if (e.is_zero()) continue;
    int v = valuation(e, pi);
    if (!found || v < best) best = v;
    found = true;
  }
  if (!found) throw Error(ErrorCode::kZeroInput, "valuation of zero vector");
  return best;
}
}  // namespace

int valuation(const GaussVector& x, const SplitPrime& pi) { return min_valuation(x, pi); }
int valuation(const GaussRatVector& x, const SplitPrime& pi) { return min_valuation(x, pi); }

std::vector<SplitPrime> split_primes_in_window(const Integer& c1, const Integer& c2) {
  if (c1 < 2 || c2 < c1) throw Error(ErrorCode::kInvalidArgument, "window requires 2 <= c1 <= c2");
  std::vector<SplitPrime> out;
  for (Integer p = c1; p < c2; ++p) {
    if (p % 4 == 1 && is_probable_prime(p)) out.push_back(SplitPrime::above(p));
  }
  return out;
}

// ---------------------------------------------------------------- residues

Integer mod_inverse(const Integer& a, const Integer& m) {
  Integer old_r = mod_floor(a, m), r = m, old_s = 1, s = 0;
  while (r != 0) {
    Integer q = old_r / r;
    Integer t = old_r - q * r;
    old_r = std::move(r);
    r = std::move(t);
    t = old_s - q * s;
    old_s = std::move(s);
    s = std::move(t);
  }
  if (old_r != 1) throw Error(ErrorCode::kInvalidArgument, "not invertible modulo m");
  return mod_floor(old_s, m);
}

Integer sqrt_minus_one(const SplitPrime& pi, unsigned rho) {
  if (rho == 0) throw Error(ErrorCode::kInvalidArgument, "rho must be positive");
  const Integer& p = pi.p();
  // a + b i = 0 mod pi gives i = -a / b mod pi.
  Integer r = mod_floor(-pi.pi().re() * mod_inverse(pi.pi().im(), p), p);
  Integer modulus = p;
  for (unsigned k = 1; k < rho; ++k) {
    modulus *= p;
    Integer f = mod_floor(r * r + 1, modulus);
    r = mod_floor(r - f * mod_inverse(2 * r, modulus), modulus);
  }
  GaussInt diff(r, -1);
  if (!pow(pi.pi(), rho).divides(diff)) throw Error(ErrorCode::kInvariantViolation, "Hensel lift lost the root");
  return r;
}

Integer integer_residue(const GaussInt& z, const SplitPrime& pi, unsigned rho) {
  Integer modulus = pow(pi.p(), rho);
  Integer r = sqrt_minus_one(pi, rho);
  return mod_floor(z.re() + z.im() * r, modulus);
}

bool is_locally_integral(const GaussRational& x, const SplitPrime& pi, const SplitPrime& pi2) {
  if (x.is_zero()) return true;
  return valuation(x, pi) >= 0 && valuation(x, pi2) >= 0;
}

bool divisible_by_p_power(const GaussRational& x, const SplitPrime& pi, unsigned rho) {
  if (x.is_zero()) return true;
  const int r = static_cast<int>(rho);
  return valuation(x, pi) >= r && valuation(x, pi.conjugate()) >= r;
}

}  // namespace hecke
