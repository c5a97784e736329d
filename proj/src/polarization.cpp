#include "hecke/polarization.hpp"

#include <exception>

#include <omp.h>

namespace hecke {

namespace {

bool divisible_by_pi_power(const GaussInt& z, const SplitPrime& pi, unsigned rho) {
  return z.is_zero() || valuation(z, pi) >= static_cast<int>(rho);
}

bool has_unit_valuation(const GaussVector& v, const SplitPrime& pi) {
  for (const auto& z : v)
    if (!z.is_zero() && !pi.pi().divides(z)) return true;
  return false;
}

}  // namespace

Integer scalar_witness(const GaussVector& x, const GaussVector& y, const SplitPrime& pi, unsigned rho) {
  if (x.size() != y.size() || x.empty()) throw Error(ErrorCode::kInvalidArgument, "vector size mismatch");
  if (rho == 0) throw Error(ErrorCode::kInvalidArgument, "rho must be positive");
  if (!has_unit_valuation(x, pi) || !has_unit_valuation(y, pi))
    throw Error(ErrorCode::kValuationFailure, "v_pi(x) and v_pi(y) must both be 0");
  const std::size_t n = x.size();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j + 1; k < n; ++k)
      if (!divisible_by_pi_power(x[j] * y[k] - x[k] * y[j], pi, rho))
        throw Error(ErrorCode::kMinorDivisibilityFailure, "2x2 minor of (x, y) not divisible by pi^rho");

  const Integer mod = pow(pi.p(), rho);
  std::size_t j = 0;
  while (pi.pi().divides(x[j])) ++j;
  const Integer a =
      mod_floor(integer_residue(y[j], pi, rho) * mod_inverse(integer_residue(x[j], pi, rho), mod), mod);
  for (std::size_t k = 0; k < n; ++k)
    if (!divisible_by_pi_power(y[k] - GaussInt(a) * x[k], pi, rho))
      throw Error(ErrorCode::kInvariantViolation, "scalar witness fails y = a x mod pi^rho");
  return a;
}

PolarizationWitness witness_from_scalar(const Integer& a, const SplitPrime& pi, unsigned rho) {
  PolarizationWitness w;
  w.modulus = pow(pi.p(), rho);
  w.a = mod_floor(a, w.modulus);
  w.b = mod_floor(w.a * sqrt_minus_one(pi, rho), w.modulus);
  w.a_inv = mod_inverse(w.a, w.modulus);
  w.b_inv = mod_inverse(w.b, w.modulus);
  return w;
}

bool polarization_congruence_holds(const SelfAdjointMatrix& a_mat, const GaussVector& x, const GaussVector& y,
                                   const PolarizationWitness& w, const SplitPrime& pi, unsigned rho) {
  const GaussRational xax = a_mat.form(x, x), yay = a_mat.form(y, y), xay = a_mat.form(x, y);
  const GaussRational lhs = GaussRational(2) * xay;
  const GaussRational rhs = GaussRational(GaussInt(w.a, -w.b)) * xax + GaussRational(GaussInt(w.a_inv, -w.b_inv)) * yay;
  return divisible_by_p_power(lhs - rhs, pi, rho);
}

PolarizationWitness polarize(const SelfAdjointMatrix& a_mat, const GaussVector& x, const GaussVector& y,
                             const SplitPrime& pi, unsigned rho) {
  if (a_mat.n() != x.size()) throw Error(ErrorCode::kInvalidArgument, "matrix and vector sizes differ");
  for (std::size_t r = 0; r < a_mat.n(); ++r)
    for (std::size_t c = 0; c < a_mat.n(); ++c)
      if (!a_mat(r, c).is_zero() && valuation(a_mat(r, c), pi) < 0)
        throw Error(ErrorCode::kValuationFailure, "matrix entries must be pi-integral");
  const PolarizationWitness w = witness_from_scalar(scalar_witness(x, y, pi, rho), pi, rho);
  if (!polarization_congruence_holds(a_mat, x, y, w, pi, rho))
    throw Error(ErrorCode::kInvariantViolation, "polarization congruence failed");
  const GaussInt pr = pow(pi.pi(), rho);
  if (!pr.divides(GaussInt(w.a_inv, -w.b_inv)) || !pr.conj().divides(GaussInt(w.a, -w.b)))
    throw Error(ErrorCode::kInvariantViolation, "conjugate divisibility failed");
  return w;
}

GaussInt reduce_mod(const GaussInt& z, const GaussInt& modulus) { return z - modulus * z.round_quotient(modulus); }

std::vector<SelfAdjointMatrix> polarization_fixtures(std::size_t n) {
  // Diagonal entries and upper off-diagonal entries; includes multiples of 2+i and 5.
  const std::vector<std::vector<long long>> diag = {{1, 1, 1}, {2, 3, 7},  {5, 1, 2},  {0, 4, 1}, {1, 0, 0},
                                                    {3, 3, 3}, {-2, 6, 1}, {10, 1, 5}, {1, 2, 3}, {4, -1, 9}};
  const std::vector<std::vector<GaussInt>> off = {
      {0, 0, 0},
      {0, 0, 0},
      {GaussInt(1, 1), 0, GaussInt(0, 1)},
      {GaussInt(2, 1), GaussInt(1, -2), 0},
      {GaussInt(0, 3), 1, GaussInt(2, -1)},
      {GaussInt(1, -1), GaussInt(1, 1), GaussInt(-1, 1)},
      {5, GaussInt(0, -2), GaussInt(3, 4)},
      {GaussInt(-1, 2), GaussInt(2, 2), 1},
      {GaussInt(3, -1), GaussInt(0, 1), GaussInt(4, 1)},
      {GaussInt(1, 2), GaussInt(-3, 0), GaussInt(2, -3)},
  };
  std::vector<SelfAdjointMatrix> out;
  for (std::size_t f = 0; f < diag.size(); ++f) {
    GaussRatMatrix m(n, n);
    std::size_t t = 0;
    for (std::size_t r = 0; r < n; ++r) {
      m(r, r) = GaussRational(diag[f][r % 3]);
      for (std::size_t c = r + 1; c < n; ++c, ++t) {
        m(r, c) = GaussRational(off[f][t % 3]);
        m(c, r) = m(r, c).conj();
      }
    }
    out.emplace_back(m);
  }
  return out;
}

namespace {

struct SmallGauss {
  long long re = 0, im = 0;
};

// Forms with integral entries, evaluated in machine integers.
struct SmallForm {
  std::size_t n = 0;
  std::vector<SmallGauss> e;

  SmallGauss form(const std::vector<SmallGauss>& x, const std::vector<SmallGauss>& y) const {
    SmallGauss s;
    for (std::size_t r = 0; r < n; ++r) {
      const long long xr = x[r].re, xi = -x[r].im;
      for (std::size_t c = 0; c < n; ++c) {
        const SmallGauss& a = e[r * n + c];
        const long long pr = xr * a.re - xi * a.im, pi = xr * a.im + xi * a.re;
        s.re += pr * y[c].re - pi * y[c].im;
        s.im += pr * y[c].im + pi * y[c].re;
      }
    }
    return s;
  }
};

SmallForm small_form(const SelfAdjointMatrix& a) {
  SmallForm f;
  f.n = a.n();
  for (std::size_t r = 0; r < a.n(); ++r)
    for (std::size_t c = 0; c < a.n(); ++c) {
      if (!a(r, c).is_integral()) throw Error(ErrorCode::kInvalidArgument, "sweep forms must be integral");
      f.e.push_back({static_cast<long long>(a(r, c).num().re()), static_cast<long long>(a(r, c).num().im())});
    }
  return f;
}

struct SweepContext {
  const std::vector<SelfAdjointMatrix>& forms;
  std::vector<SmallForm> small;
  const SplitPrime& pi;
  std::size_t n;
  unsigned rho;
  long long p = 0;
  long long mod = 0;
  std::vector<GaussInt> reps;  // reps[t] == t mod pi^rho
  std::size_t count = 1;       // mod^n
};

SweepContext make_context(const std::vector<SelfAdjointMatrix>& forms, const SplitPrime& pi, std::size_t n,
                          unsigned rho) {
  if (forms.empty()) throw Error(ErrorCode::kInvalidArgument, "no forms given");
  if (n < 2 || rho == 0) throw Error(ErrorCode::kInvalidArgument, "need n >= 2 and rho >= 1");
  SweepContext ctx{.forms = forms, .small = {}, .pi = pi, .n = n, .rho = rho, .reps = {}};
  for (const auto& f : forms) {
    if (f.n() != n) throw Error(ErrorCode::kInvalidArgument, "form dimension mismatch");
    ctx.small.push_back(small_form(f));
  }
  ctx.p = static_cast<long long>(pi.p());
  ctx.mod = static_cast<long long>(pow(pi.p(), rho));
  const GaussInt pr = pow(pi.pi(), rho);
  for (long long t = 0; t < ctx.mod; ++t) ctx.reps.push_back(reduce_mod(GaussInt(t), pr));
  for (std::size_t k = 0; k < n; ++k) ctx.count *= static_cast<std::size_t>(ctx.mod);
  return ctx;
}

void record(PolarizationSweep& s, bool ok, const std::string& what) {
  ++s.checks;
  if (ok) return;
  ++s.violations;
  if (s.failures.size() < 20) s.failures.push_back(what);
}

std::string describe(const GaussVector& x, long long a) {
  std::string out = "x=(";
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (k) out += ",";
    out += x[k].re().str() + (x[k].im() < 0 ? "" : "+") + x[k].im().str() + "i";
  }
  return out + ") a=" + std::to_string(a);
}

long long mod_ll(long long v, long long m) {
  v %= m;
  return v < 0 ? v + m : v;
}

// All pairs (x, a x) for one residue vector index.
void sweep_one(const SweepContext& ctx, std::size_t index, PolarizationSweep& s) {
  std::vector<long long> t(ctx.n);
  bool valid = false;
  for (std::size_t k = 0; k < ctx.n; ++k) {
    t[k] = static_cast<long long>(index % static_cast<std::size_t>(ctx.mod));
    index /= static_cast<std::size_t>(ctx.mod);
    if (t[k] % ctx.p != 0) valid = true;
  }
  if (!valid) return;
  ++s.vectors;
  GaussVector x(ctx.n);
  std::vector<SmallGauss> xs(ctx.n);
  for (std::size_t k = 0; k < ctx.n; ++k) {
    x[k] = ctx.reps[t[k]];
    xs[k] = {static_cast<long long>(x[k].re()), static_cast<long long>(x[k].im())};
  }
  const GaussInt pr = pow(ctx.pi.pi(), ctx.rho);
  std::vector<SmallGauss> xax;
  for (const auto& f : ctx.small) xax.push_back(f.form(xs, xs));

  for (long long a = 1; a < ctx.mod; ++a) {
    if (a % ctx.p == 0) continue;
    ++s.pairs;
    GaussVector y(ctx.n);
    std::vector<SmallGauss> ys(ctx.n);
    for (std::size_t k = 0; k < ctx.n; ++k) {
      y[k] = ctx.reps[(a * t[k]) % ctx.mod];
      ys[k] = {static_cast<long long>(y[k].re()), static_cast<long long>(y[k].im())};
    }
    try {
      const Integer got = scalar_witness(x, y, ctx.pi, ctx.rho);
      record(s, got == a, "part (a): witness differs " + describe(x, a));
      const PolarizationWitness w = witness_from_scalar(got, ctx.pi, ctx.rho);
      record(s, scalar_witness(y, x, ctx.pi, ctx.rho) == w.a_inv, "symmetry " + describe(x, a));
      record(s, pr.divides(GaussInt(w.a_inv, -w.b_inv)), "part (c): pi^rho | a'-b'i " + describe(x, a));
      record(s, pr.conj().divides(GaussInt(w.a, -w.b)), "part (c): conj(pi)^rho | a-bi " + describe(x, a));
      polarize(ctx.forms[0], x, y, ctx.pi, ctx.rho);
      ++s.checks;

      const long long wa = static_cast<long long>(w.a), wb = static_cast<long long>(w.b);
      const long long wa2 = static_cast<long long>(w.a_inv), wb2 = static_cast<long long>(w.b_inv);
      for (std::size_t f = 0; f < ctx.small.size(); ++f) {
        const SmallGauss u = xax[f], v = ctx.small[f].form(ys, ys), c = ctx.small[f].form(xs, ys);
        // (a - bi)(u) + (a' - b'i)(v)
        const long long rre = wa * u.re + wb * u.im + wa2 * v.re + wb2 * v.im;
        const long long rim = wa * u.im - wb * u.re + wa2 * v.im - wb2 * v.re;
        const bool ok = mod_ll(2 * c.re - rre, ctx.mod) == 0 && mod_ll(2 * c.im - rim, ctx.mod) == 0;
        record(s, ok, "part (b): congruence, form " + std::to_string(f) + " " + describe(x, a));
      }
    } catch (const Error& e) {
      record(s, false, std::string("exception: ") + e.what() + " " + describe(x, a));
    }
  }
}

void merge(PolarizationSweep& into, const PolarizationSweep& from) {
  into.vectors += from.vectors;
  into.pairs += from.pairs;
  into.checks += from.checks;
  into.violations += from.violations;
  for (const auto& f : from.failures)
    if (into.failures.size() < 20) into.failures.push_back(f);
}

PolarizationSweep header(const SweepContext& ctx) {
  PolarizationSweep s;
  s.n = ctx.n;
  s.rho = ctx.rho;
  s.p = ctx.pi.p();
  return s;
}

}  // namespace

PolarizationSweep polarization_sweep_serial(const std::vector<SelfAdjointMatrix>& forms, const SplitPrime& pi,
                                            std::size_t n, unsigned rho) {
  const SweepContext ctx = make_context(forms, pi, n, rho);
  PolarizationSweep s = header(ctx);
  for (std::size_t index = 0; index < ctx.count; ++index) sweep_one(ctx, index, s);
  return s;
}

PolarizationSweep polarization_sweep_parallel(const std::vector<SelfAdjointMatrix>& forms, const SplitPrime& pi,
                                              std::size_t n, unsigned rho, int jobs) {
  const SweepContext ctx = make_context(forms, pi, n, rho);
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  // Fixed-size chunks merged in index order keep the failure list deterministic.
  const std::size_t chunk = 256;
  const std::size_t chunks = (ctx.count + chunk - 1) / chunk;
  std::vector<PolarizationSweep> parts(chunks);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t end = std::min(ctx.count, (c + 1) * chunk);
    for (std::size_t index = c * chunk; index < end; ++index) sweep_one(ctx, index, parts[c]);
  }
  PolarizationSweep s = header(ctx);
  for (const auto& part : parts) merge(s, part);
  return s;
}

}  // namespace hecke
