#include "hecke/enumerate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include <omp.h>

namespace hecke {

ShellQuery ShellQuery::exact(SelfAdjointMatrix a, Rational target, std::vector<GaussVector> constraints) {
  return ShellQuery{std::move(a), target, target, std::move(constraints), {}};
}

ShellQuery ShellQuery::interval(SelfAdjointMatrix a, Rational lo, Rational hi, std::vector<GaussVector> constraints) {
  return ShellQuery{std::move(a), std::move(lo), std::move(hi), std::move(constraints), {}};
}

bool interleaved_less(const GaussVector& a, const GaussVector& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t k = 0; k < n; ++k) {
    if (a[k].re() != b[k].re()) return a[k].re() < b[k].re();
    if (a[k].im() != b[k].im()) return a[k].im() < b[k].im();
  }
  return a.size() < b.size();
}

bool constraints_independent(const std::vector<GaussVector>& xs) {
  if (xs.empty()) return true;
  GaussIntMatrix m = GaussIntMatrix::from_rows(xs);
  return smith_decompose(m).rank == xs.size();
}

namespace {

// Search plan: y = y0 + B t, t in Z[i]^m, T = interleaved t in Z^{2m},
// y^*Ay = sum_i q_ii (u_i + sum_{j>i} q_ij u_j)^2 + offset with u = T + c.
struct Plan {
  std::size_t n = 0;
  std::size_t dim = 0;  // 2m
  GaussIntMatrix basis;
  GaussVector y0;
  RationalMatrix q;     // Fincke-Pohst coefficients
  RationalVector c;
  Rational budget;      // upper bound on the completed square
  Rational budget_lo;   // lower bound on the completed square
  bool empty = false;
};

// Integers k with (k - center)^2 <= rad2, as [kmin, kmax].
std::pair<Integer, Integer> integer_range(const Rational& center, const Rational& rad2) {
  const Integer a = numerator(center), b = denominator(center);
  const Integer p = numerator(rad2), qd = denominator(rad2);
  const Integer s = iroot(b * b * p * qd, 2);
  const Integer aq = a * qd, bq = b * qd;
  return {-floor_div(s - aq, bq), floor_div(aq + s, bq)};
}

Plan make_plan(const ShellQuery& query) {
  const SelfAdjointMatrix& a = query.a;
  if (query.hi < query.lo) throw Error(ErrorCode::kInvalidArgument, "empty target interval");
  if (!a.is_positive_definite()) throw Error(ErrorCode::kNotPositiveDefinite, "form is not positive definite");
  if (!query.values.empty() && query.values.size() != query.constraints.size())
    throw Error(ErrorCode::kInvalidArgument, "constraint values size mismatch");
  const std::size_t n = a.n();
  for (const auto& x : query.constraints)
    if (x.size() != n) throw Error(ErrorCode::kInvalidArgument, "constraint dimension mismatch");

  Plan plan;
  plan.n = n;
  plan.basis = GaussIntMatrix::identity(n);
  plan.y0 = GaussVector(n, GaussInt(0));

  const std::size_t k = query.constraints.size();
  if (k > 0) {
    // Integral rows D_j x_j^* A with right-hand sides D_j v_j.
    GaussIntMatrix rows(k, n);
    GaussRatVector rhs(k);
    for (std::size_t j = 0; j < k; ++j) {
      GaussRatVector row(n, GaussRational(0));
      for (std::size_t col = 0; col < n; ++col)
        for (std::size_t l = 0; l < n; ++l)
          row[col] = row[col] + GaussRational(query.constraints[j][l].conj()) * a(l, col);
      const Integer d = denominator_lcm(row);
      for (std::size_t col = 0; col < n; ++col) rows(j, col) = (row[col] * GaussRational(GaussInt(d))).num();
      rhs[j] = query.values.empty() ? GaussRational(0) : query.values[j] * GaussRational(GaussInt(d));
    }
    SmithForm s = smith_decompose(rows);
    if (s.rank < k) throw Error(ErrorCode::kDependentConstraints, "constraint vectors are linearly dependent");
    GaussVector z(n, GaussInt(0));
    for (std::size_t r = 0; r < k; ++r) {
      GaussRational uw(0);
      for (std::size_t l = 0; l < k; ++l) uw = uw + GaussRational(s.u(r, l)) * rhs[l];
      GaussRational zr = uw / GaussRational(s.divisors[r]);
      if (!zr.is_integral()) {
        plan.empty = true;
        return plan;
      }
      z[r] = zr.num();
    }
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t l = 0; l < k; ++l) plan.y0[r] = plan.y0[r] + s.v(r, l) * z[l];
    GaussIntMatrix basis(n, n - k);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t l = k; l < n; ++l) basis(r, l - k) = s.v(r, l);
    plan.basis = basis;
  }

  const std::size_t m = plan.basis.cols();
  plan.dim = 2 * m;
  const GaussRatMatrix br = to_rational(plan.basis);
  const GaussRatVector y0r = to_rational(plan.y0);
  const Rational k0 = sesquilinear(y0r, a.matrix(), y0r).re();
  if (m == 0) {
    plan.budget = 0;
    plan.empty = !(query.lo <= k0 && k0 <= query.hi);
    return plan;
  }

  const SelfAdjointMatrix restricted = a.congruence(br);
  const RationalMatrix r = realify(restricted);
  // g = realified B^* A y0.
  GaussRatVector ay0(n, GaussRational(0));
  for (std::size_t row = 0; row < n; ++row)
    for (std::size_t l = 0; l < n; ++l) ay0[row] = ay0[row] + a(row, l) * y0r[l];
  GaussRatVector bay0(m, GaussRational(0));
  for (std::size_t col = 0; col < m; ++col)
    for (std::size_t l = 0; l < n; ++l) bay0[col] = bay0[col] + br(l, col).conj() * ay0[l];
  const RationalVector g = realify_vector(bay0);
  plan.c = solve(r, g);
  Rational cg = 0;
  for (std::size_t t = 0; t < plan.dim; ++t) cg += plan.c[t] * g[t];
  plan.budget = query.hi - k0 + cg;
  plan.budget_lo = query.lo - k0 + cg;
  if (plan.budget < 0) {
    plan.empty = true;
    return plan;
  }

  RationalMatrix q = r;
  const std::size_t d = plan.dim;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      q(j, i) = q(i, j);
      q(i, j) /= q(i, i);
    }
    for (std::size_t kk = i + 1; kk < d; ++kk)
      for (std::size_t l = kk; l < d; ++l) q(kk, l) -= q(kk, i) * q(i, l);
  }
  plan.q = q;
  return plan;
}

struct Search {
  const Plan& plan;
  const ShellQuery& query;
  std::vector<Integer> coords;
  std::vector<Rational> u;
  std::vector<GaussVector> out;

  Search(const Plan& p, const ShellQuery& qq) : plan(p), query(qq), coords(p.dim), u(p.dim) {}

  std::pair<Integer, Integer> range(std::size_t i, const Rational& used) const {
    Rational s = 0;
    for (std::size_t j = i + 1; j < plan.dim; ++j) s += plan.q(i, j) * u[j];
    return integer_range(-plan.c[i] - s, (plan.budget - used) / plan.q(i, i));
  }

  void set(std::size_t i, const Integer& v, Rational& used_next, const Rational& used) {
    coords[i] = v;
    u[i] = Rational(v) + plan.c[i];
    Rational s = u[i];
    for (std::size_t j = i + 1; j < plan.dim; ++j) s += plan.q(i, j) * u[j];
    used_next = used + plan.q(i, i) * s * s;
  }

  // At the last level, integers strictly inside the inner radius miss the band; a and b are kept.
  std::pair<Integer, Integer> inner(const Rational& used) const {
    const Rational r2 = (plan.budget_lo - used) / plan.q(0, 0);
    if (r2 <= 0) return {1, 0};
    Rational s = 0;
    for (std::size_t j = 1; j < plan.dim; ++j) s += plan.q(0, j) * u[j];
    return integer_range(-plan.c[0] - s, r2);
  }

  void descend(std::size_t i, const Rational& used) {
    auto [lo, hi] = range(i, used);
    auto [a, b] = i == 0 ? inner(used) : std::pair<Integer, Integer>{1, 0};
    for (Integer v = lo; v <= hi; ++v) {
      if (v > a && v < b) v = b;
      Rational next;
      set(i, v, next, used);
      if (next > plan.budget) continue;
      if (i == 0 && next < plan.budget_lo) continue;
      if (i == 0) {
        leaf();
      } else {
        descend(i - 1, next);
      }
    }
  }

  void leaf() {
    const std::size_t m = plan.dim / 2;
    GaussVector y = plan.y0;
    for (std::size_t l = 0; l < m; ++l) {
      GaussInt t(coords[2 * l], coords[2 * l + 1]);
      if (t.is_zero()) continue;
      for (std::size_t r = 0; r < plan.n; ++r) y[r] = y[r] + plan.basis(r, l) * t;
    }
    accept(y);
  }

  void accept(const GaussVector& y) {
    const Rational v = query.a.value(y);
    if (v < query.lo || v > query.hi) return;
    for (std::size_t j = 0; j < query.constraints.size(); ++j) {
      const GaussRational want = query.values.empty() ? GaussRational(0) : query.values[j];
      if (!(query.a.form(query.constraints[j], y) == want))
        throw Error(ErrorCode::kInvariantViolation, "enumerated vector violates a constraint");
    }
    out.push_back(y);
  }
};

// Floating pruning with a safety margin: visits a superset of the exact search tree,
// every leaf is then checked exactly.
struct FloatSearch {
  static constexpr long double kSlack = 1e-6L;

  const Plan& plan;
  std::vector<long double> q, c;
  long double budget = 0;
  long double budget_lo = 0;
  std::vector<long long> coords;
  std::vector<long double> u;
  Search exact;

  FloatSearch(const Plan& p, const ShellQuery& qq)
      : plan(p), q(p.dim * p.dim), c(p.dim), coords(p.dim), u(p.dim), exact(p, qq) {
    for (std::size_t i = 0; i < p.dim; ++i) {
      c[i] = static_cast<long double>(p.c[i]);
      for (std::size_t j = i; j < p.dim; ++j) q[i * p.dim + j] = static_cast<long double>(p.q(i, j));
    }
    budget = static_cast<long double>(p.budget) * (1 + 1e-12L) + kSlack;
    budget_lo = static_cast<long double>(p.budget_lo) * (1 - 1e-12L) - kSlack;
  }

  static bool applicable(const Plan& p) {
    const Rational limit = Rational(Integer(1) << 30);
    if (p.budget > limit || p.budget_lo < -limit) return false;
    for (std::size_t i = 0; i < p.dim; ++i) {
      if (p.q(i, i) * limit < 1 || abs(p.c[i]) > limit) return false;
      for (std::size_t j = i; j < p.dim; ++j)
        if (abs(p.q(i, j)) > limit) return false;
    }
    return true;
  }

  // Rounding stays far below the slack while every term is below 2^34; past that the caller reruns exactly.
  static constexpr long double kLimit = 17179869184.0L;
  bool overflow = false;

  long double guard(long double v) {
    if (std::fabs(v) > kLimit) overflow = true;
    return v;
  }

  std::pair<long long, long long> range(std::size_t i, long double used) {
    long double s = 0;
    for (std::size_t j = i + 1; j < plan.dim; ++j) s += guard(q[i * plan.dim + j] * u[j]);
    const long double center = -c[i] - s;
    const long double rad2 = (budget - used) / q[i * plan.dim + i];
    if (rad2 < 0) return {1, 0};
    const long double rad = guard(std::sqrt(rad2) + kSlack);
    if (overflow) return {1, 0};
    return {static_cast<long long>(std::ceil(center - rad)), static_cast<long long>(std::floor(center + rad))};
  }

  long double set(std::size_t i, long long v, long double used) {
    coords[i] = v;
    u[i] = guard(static_cast<long double>(v) + c[i]);
    long double s = u[i];
    for (std::size_t j = i + 1; j < plan.dim; ++j) s += guard(q[i * plan.dim + j] * u[j]);
    return used + guard(q[i * plan.dim + i] * s * s);
  }

  std::pair<long long, long long> inner(long double used) {
    const long double r2 = (budget_lo - used) / q[0];
    if (r2 <= 0) return {1, 0};
    long double s = 0;
    for (std::size_t j = 1; j < plan.dim; ++j) s += guard(q[j] * u[j]);
    const long double center = -c[0] - s;
    const long double rad = std::sqrt(r2) - kSlack;
    if (rad <= 0) return {1, 0};
    return {static_cast<long long>(std::ceil(center - rad)), static_cast<long long>(std::floor(center + rad))};
  }

  void descend(std::size_t i, long double used) {
    if (overflow) return;
    auto [lo, hi] = range(i, used);
    auto [a, b] = i == 0 ? inner(used) : std::pair<long long, long long>{1, 0};
    for (long long v = lo; v <= hi; ++v) {
      if (v > a && v < b) v = b;
      const long double next = set(i, v, used);
      if (next > budget) continue;
      if (i == 0 && next < budget_lo) continue;
      if (i == 0) {
        leaf();
      } else {
        descend(i - 1, next);
      }
    }
  }

  void leaf() {
    for (std::size_t t = 0; t < plan.dim; ++t) exact.coords[t] = Integer(coords[t]);
    exact.leaf();
  }
};

// Depth-first search below an optional fixed top coordinate.
std::vector<GaussVector> search_from(const Plan& plan, const ShellQuery& query, const Integer* top_value) {
  const std::size_t top = plan.dim - 1;
  if (FloatSearch::applicable(plan)) {
    FloatSearch s(plan, query);
    if (!top_value) {
      s.descend(top, 0);
    } else {
      const long double used = s.set(top, static_cast<long long>(*top_value), 0);
      if (used <= s.budget) {
        if (top == 0) {
          s.leaf();
        } else {
          s.descend(top - 1, used);
        }
      }
    }
    if (!s.overflow) return std::move(s.exact.out);
  }
  Search s(plan, query);
  if (!top_value) {
    s.descend(top, Rational(0));
  } else {
    Rational used;
    s.set(top, *top_value, used, Rational(0));
    if (used <= plan.budget) {
      if (top == 0) {
        s.leaf();
      } else {
        s.descend(top - 1, used);
      }
    }
  }
  return std::move(s.out);
}

std::vector<GaussVector> finish(std::vector<GaussVector> out) {
  std::sort(out.begin(), out.end(), interleaved_less);
  return out;
}

}  // namespace

std::vector<GaussVector> enumerate_serial(const ShellQuery& query) {
  const Plan plan = make_plan(query);
  if (plan.empty) return {};
  if (plan.dim == 0) {
    Search s(plan, query);
    s.accept(plan.y0);
    return s.out;
  }
  return finish(search_from(plan, query, nullptr));
}

std::vector<GaussVector> enumerate_parallel(const ShellQuery& query, int jobs) {
  const Plan plan = make_plan(query);
  if (plan.empty) return {};
  if (plan.dim == 0) {
    Search s(plan, query);
    s.accept(plan.y0);
    return s.out;
  }
  const std::size_t top = plan.dim - 1;
  std::vector<Integer> values;
  {
    Search s(plan, query);
    auto [lo, hi] = s.range(top, Rational(0));
    for (Integer v = lo; v <= hi; ++v) values.push_back(v);
  }
  std::vector<std::vector<GaussVector>> parts(values.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t k = 0; k < values.size(); ++k) {
    try {
      parts[k] = search_from(plan, query, &values[k]);
    } catch (...) {
#pragma omp critical(hecke_enumerate_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<GaussVector> out;
  for (auto& p : parts) out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  return finish(std::move(out));
}

std::vector<GaussVector> enumerate_interval(const ShellQuery& q) {
  if (omp_in_parallel()) return enumerate_serial(q);
  return enumerate_parallel(q);
}

std::vector<GaussVector> enumerate_shell(const ShellQuery& q) {
  if (q.lo != q.hi) throw Error(ErrorCode::kInvalidArgument, "enumerate_shell needs an exact target");
  return enumerate_interval(q);
}

}  // namespace hecke
