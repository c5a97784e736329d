#include "hecke/hecke_set.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>

#include <omp.h>

#include "hecke/polarization.hpp"
#include "hecke/serialize.hpp"

namespace hecke {

void HeckeCosetSpec::validate() const {
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "n must be at least 2");
  if (nu < 1 || nu > n) throw Error(ErrorCode::kInvalidArgument, "nu must lie in [1, n]");
}

GaussInt HeckeCosetSpec::determinant() const {
  return pow(pi.pi(), nu * static_cast<unsigned>(n - 1)) * pow(pi2.pi(), nu);
}

std::vector<int> HeckeCosetSpec::target_valuations(const SplitPrime& prime) const {
  std::vector<int> t(n, 0);
  const int v = static_cast<int>(nu);
  if (prime == pi)
    for (std::size_t k = 1; k < n; ++k) t[k] += v;
  if (prime == pi2) t[n - 1] += v;
  return t;
}

DetPower det_power(const HeckeCosetSpec& spec) {
  spec.validate();
  DetPower d;
  d.n = spec.n;
  const auto n = static_cast<long long>(spec.n);
  const long long e1 = static_cast<long long>(spec.nu) * (n - 1), e2 = spec.nu;
  d.exp_pi = Rational(e1, n);
  d.exp_pi2 = Rational(e2, n);
  d.abs_det_sq = pow(spec.pi.p(), static_cast<unsigned>(e1)) * pow(spec.pi2.p(), static_cast<unsigned>(e2));
  // Exponents per rational prime; rational iff each is divisible by n.
  std::map<Integer, long long> exps;
  exps[spec.pi.p()] += e1;
  exps[spec.pi2.p()] += e2;
  d.rational = std::all_of(exps.begin(), exps.end(), [&](const auto& kv) { return kv.second % n == 0; });
  if (d.rational) {
    Integer v = 1;
    for (const auto& [p, e] : exps) v *= pow(p, static_cast<unsigned>(e / n));
    d.value = Rational(v);
  }
  return d;
}

namespace {

constexpr unsigned kMaterializeBits = 32768;

}  // namespace

Tolerance Tolerance::make(const HeckeCosetSpec& spec, unsigned long long M) {
  Tolerance t;
  t.base = std::min(spec.pi.p(), spec.pi2.p());
  t.M = M;
  const double bits = static_cast<double>(M) * std::log2(static_cast<double>(t.base));
  if (bits <= kMaterializeBits) t.value = Rational(Integer(1), pow(t.base, static_cast<unsigned>(M)));
  return t;
}

Rational Tolerance::upper_bound() const {
  if (value) return *value;
  return Rational(Integer(1), pow(Integer(2), 64));
}

namespace {

// s = X^{1/n} for a positive integer X.
struct RootScale {
  Integer x;
  unsigned n = 2;
  std::optional<Rational> exact;
  std::optional<Rational> square;

  RootScale(const Integer& xx, unsigned nn) : x(xx), n(nn) {
    const Integer r = iroot(x, n);
    if (pow(r, n) == x) exact = Rational(r);
    const Integer r2 = iroot(x * x, n);
    if (pow(r2, n) == x * x) square = Rational(r2);
  }

  std::pair<Rational, Rational> bracket(unsigned bits) const {
    if (exact) return {*exact, *exact};
    const Integer scale = pow(Integer(2), bits);
    const Integer lo = iroot(x * pow(scale, n), n);
    return {Rational(lo, scale), Rational(lo + 1, scale)};
  }

  // Sign of a s^2 + b s + c.
  int sign(const Rational& a, const Rational& b, const Rational& c) const {
    auto sgn = [](const Rational& v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); };
    if (exact) return sgn(a * *exact * *exact + b * *exact + c);
    bool zero;
    if (square) {
      zero = b == 0 && a * *square + c == 0;
    } else {
      zero = a == 0 && b == 0 && c == 0;
    }
    if (zero) return 0;
    for (unsigned bits = 32; bits <= (1u << 16); bits *= 2) {
      auto [lo, hi] = bracket(bits);
      Rational a1 = a * lo * lo, a2 = a * hi * hi, b1 = b * lo, b2 = b * hi;
      Rational mn = std::min(a1, a2) + std::min(b1, b2) + c;
      Rational mx = std::max(a1, a2) + std::max(b1, b2) + c;
      if (mn > 0) return 1;
      if (mx < 0) return -1;
    }
    throw Error(ErrorCode::kInvariantViolation, "sign at algebraic scale undecided");
  }
};

// |ge / s - qe| <= eps, certified.
bool entry_within(const GaussRational& ge, const GaussRational& qe, const RootScale& s, const Tolerance& tol) {
  const Rational qq = qe.norm();
  const Rational b = -2 * (ge * qe.conj()).re();
  const Rational c = ge.norm();
  if (tol.value) return s.sign(qq - *tol.value * *tol.value, b, c) <= 0;
  if (s.sign(qq, b, c) == 0) return true;
  const Rational threshold(Integer(1), pow(Integer(2), 2 * kMaterializeBits));
  if (s.sign(qq - threshold, b, c) > 0) return false;
  throw Error(ErrorCode::kInvariantViolation, "tolerance comparison below symbolic threshold");
}

GaussRatMatrix scaled(const GaussRatMatrix& g, const GaussRational& f) {
  GaussRatMatrix out = g;
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) out(r, c) = g(r, c) * f;
  return out;
}


void check_query(const CountQuery& query) {
  query.spec.validate();
  if (query.q.n() != query.spec.n) throw Error(ErrorCode::kInvalidArgument, "form dimension differs from n");
  if (query.m.is_zero()) throw Error(ErrorCode::kInvalidArgument, "m must be nonzero");
  if (valuation(query.m, query.spec.pi) != 0 || valuation(query.m, query.spec.pi2) != 0)
    throw Error(ErrorCode::kInvalidArgument, "m must be coprime to pi and pi2");
  if (!query.exact() && query.m != GaussInt(1))
    throw Error(ErrorCode::kInvalidArgument, "finite M counts are defined for m = 1 only");
}

}  // namespace

bool in_double_coset(const GaussRatMatrix& g, const HeckeCosetSpec& spec, const GaussInt& m) {
  spec.validate();
  if (g.rows() != spec.n || g.cols() != spec.n) throw Error(ErrorCode::kInvalidArgument, "matrix size differs from n");
  const GaussRational d = determinant(g);
  if (d.is_zero()) throw Error(ErrorCode::kSingularMatrix, "singular matrix");
  const GaussRatMatrix mg = scaled(g, GaussRational(m));
  if (!is_integral(mg)) return false;
  if (!(d == GaussRational(spec.determinant()))) return false;
  const SmithForm s = smith_normal_form(to_integral(mg));
  for (const SplitPrime* prime : {&spec.pi, &spec.pi2}) {
    const std::vector<int> want = spec.target_valuations(*prime);
    for (std::size_t k = 0; k < spec.n; ++k)
      if (valuation(s.divisors[k], *prime) != want[k]) return false;
  }
  return true;
}

bool form_condition(const GaussRatMatrix& g, const CountQuery& query) {
  const DetPower dp = det_power(query.spec);
  const GaussRatMatrix gqg = adjoint(g) * query.q.matrix() * g;
  const std::size_t n = query.spec.n;
  if (query.exact()) {
    if (!dp.rational) return false;
    return gqg == scaled(query.q.matrix(), GaussRational(dp.value));
  }
  const RootScale s(dp.abs_det_sq, static_cast<unsigned>(n));
  const Tolerance tol = Tolerance::make(query.spec, *query.M);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r; c < n; ++c)
      if (!entry_within(gqg(r, c), query.q(r, c), s, tol)) return false;
  return true;
}

bool membership_test(const GaussRatMatrix& g, const CountQuery& query) {
  check_query(query);
  return in_double_coset(g, query.spec, query.m) && form_condition(g, query);
}

bool matrix_less(const GaussRatMatrix& a, const GaussRatMatrix& b) {
  for (std::size_t c = 0; c < a.cols(); ++c)
    for (std::size_t r = 0; r < a.rows(); ++r) {
      if (a(r, c).re() != b(r, c).re()) return a(r, c).re() < b(r, c).re();
      if (a(r, c).im() != b(r, c).im()) return a(r, c).im() < b(r, c).im();
    }
  return false;
}

namespace {

// Column-by-column search for G = m gamma.
class SetSearch {
 public:
  explicit SetSearch(const CountQuery& query)
      : query_(query),
        n_(query.spec.n),
        dp_(det_power(query.spec)),
        scale_(dp_.abs_det_sq, static_cast<unsigned>(query.spec.n)),
        mm_(query.m.norm()),
        den_(denominator_lcm(query.q)) {
    if (!query.exact()) {
      tol_ = Tolerance::make(query.spec, *query.M);
      eps_up_ = tol_.upper_bound();
      std::tie(s_lo_, s_hi_) = scale_.bracket(64);
    }
  }

  std::vector<GaussVector> column_candidates(const std::vector<GaussVector>& prev) const {
    const std::size_t j = prev.size();
    if (!constraints_independent(prev)) return {};
    const Rational qjj = query_.q.diag(j);
    if (query_.exact()) {
      const Rational factor = Rational(mm_) * dp_.value;
      if (j + 1 == n_) return last_column(prev, factor);
      ShellQuery sq = ShellQuery::exact(query_.q, factor * qjj, prev);
      for (std::size_t l = 0; l < j; ++l) sq.values.push_back(GaussRational(factor) * query_.q(l, j));
      return enumerate_serial(sq);
    }
    Rational lo = s_lo_ * (qjj - eps_up_), hi = s_hi_ * (qjj + eps_up_);
    if (lo < 0) lo = 0;
    std::vector<GaussVector> raw;
    // Candidate Gram values per earlier column, on the lattice (1/den) Z[i].
    std::vector<std::vector<GaussRational>> values(j);
    std::size_t combos = 1;
    for (std::size_t l = 0; l < j && combos <= kMaxCombos; ++l) {
      values[l] = gram_candidates(query_.q(l, j));
      combos *= std::max<std::size_t>(values[l].size(), 1);
      if (values[l].empty()) return {};
    }
    if (j > 0 && combos <= kMaxCombos) {
      std::vector<std::size_t> idx(j, 0);
      for (;;) {
        ShellQuery sq = ShellQuery::interval(query_.q, lo, hi, prev);
        for (std::size_t l = 0; l < j; ++l) sq.values.push_back(values[l][idx[l]]);
        auto part = enumerate_serial(sq);
        raw.insert(raw.end(), part.begin(), part.end());
        std::size_t k = 0;
        while (k < j && ++idx[k] == values[k].size()) idx[k++] = 0;
        if (k == j) break;
      }
      std::sort(raw.begin(), raw.end(), interleaved_less);
    } else {
      raw = enumerate_serial(ShellQuery::interval(query_.q, lo, hi));
    }
    std::vector<GaussVector> out;
    for (const auto& y : raw)
      if (column_ok(prev, y)) out.push_back(y);
    return out;
  }

  void descend(std::vector<GaussVector>& cols, EnumerationResult& out) const {
    if (cols.size() == n_) {
      ++out.leaves;
      GaussRatMatrix g = scaled(to_rational(GaussIntMatrix::from_columns(cols)), GaussRational(query_.m).inverse());
      if (determinant(g).is_zero()) return;
      if (membership_test(g, query_)) out.members.push_back(std::move(g));
      return;
    }
    for (auto& y : column_candidates(cols)) {
      cols.push_back(std::move(y));
      descend(cols, out);
      cols.pop_back();
    }
  }

 private:
  static constexpr std::size_t kMaxCombos = 4096;

  // Exact mode: the Gram constraints and det G = m^n det(spec) fix the last column.
  std::vector<GaussVector> last_column(const std::vector<GaussVector>& prev, const Rational& factor) const {
    const std::size_t j = prev.size();
    GaussRatMatrix a(n_, n_);
    std::vector<GaussRational> b(n_);
    for (std::size_t l = 0; l < j; ++l) {
      for (std::size_t c = 0; c < n_; ++c) {
        GaussRational acc(0);
        for (std::size_t r = 0; r < n_; ++r) acc = acc + GaussRational(prev[l][r].conj()) * query_.q(r, c);
        a(l, c) = acc;
      }
      b[l] = GaussRational(factor) * query_.q(l, j);
    }
    for (std::size_t r = 0; r < n_; ++r) {
      GaussRatMatrix minor(j, j);
      for (std::size_t rr = 0, k = 0; rr < n_; ++rr) {
        if (rr == r) continue;
        for (std::size_t c = 0; c < j; ++c) minor(k, c) = GaussRational(prev[c][rr]);
        ++k;
      }
      const GaussRational cof = j == 0 ? GaussRational(1) : determinant(minor);
      a(j, r) = (r + j) % 2 == 0 ? cof : GaussRational(0) - cof;
    }
    GaussInt target = query_.spec.determinant();
    for (std::size_t k = 0; k < n_; ++k) target = target * query_.m;
    b[j] = GaussRational(target);
    const auto inv = inverse(a);
    if (!inv) return {};
    GaussVector y(n_);
    for (std::size_t r = 0; r < n_; ++r) {
      GaussRational v(0);
      for (std::size_t c = 0; c < n_; ++c) v = v + (*inv)(r, c) * b[c];
      if (v.den() != 1) return {};
      y[r] = v.num();
    }
    if (query_.q.value(y) != factor * query_.q.diag(j)) return {};
    return {y};
  }

  // Finite M: certified checks of the new diagonal and off-diagonal Gram entries.
  bool column_ok(const std::vector<GaussVector>& prev, const GaussVector& y) const {
    const std::size_t j = prev.size();
    if (!entry_within(query_.q.form(y, y), query_.q(j, j), scale_, tol_)) return false;
    for (std::size_t l = 0; l < j; ++l)
      if (!entry_within(query_.q.form(prev[l], y), query_.q(l, j), scale_, tol_)) return false;
    return true;
  }

  std::vector<GaussRational> gram_candidates(const GaussRational& qe) const {
    const Rational r = s_hi_ * eps_up_;
    auto axis = [&](const Rational& v) {
      const Rational a = s_lo_ * v, b = s_hi_ * v;
      return std::pair<Integer, Integer>{ceil((std::min(a, b) - r) * den_), floor((std::max(a, b) + r) * den_)};
    };
    auto [re_lo, re_hi] = axis(qe.re());
    auto [im_lo, im_hi] = axis(qe.im());
    std::vector<GaussRational> out;
    if ((re_hi - re_lo + 1) * (im_hi - im_lo + 1) > 1000000) return out;
    for (Integer a = re_lo; a <= re_hi; ++a)
      for (Integer b = im_lo; b <= im_hi; ++b) {
        GaussRational v(GaussInt(a, b), den_);
        if (entry_within(v, qe, scale_, tol_)) out.push_back(v);
      }
    return out;
  }

  const CountQuery& query_;
  std::size_t n_;
  DetPower dp_;
  RootScale scale_;
  Integer mm_;
  Integer den_;
  Tolerance tol_;
  Rational eps_up_;
  Rational s_lo_, s_hi_;
};

EnumerationResult run_enumeration(const CountQuery& query, bool parallel, int jobs) {
  check_query(query);
  if (!query.q.is_positive_definite()) throw Error(ErrorCode::kNotPositiveDefinite, "form is not positive definite");
  EnumerationResult result;
  const DetPower dp = det_power(query.spec);
  if (query.exact() && !dp.rational) {
    result.reason = "irrational_det_power";
    return result;
  }
  const SetSearch search(query);
  const std::vector<GaussVector> first = search.column_candidates({});
  std::vector<EnumerationResult> parts(first.size());
  std::exception_ptr failure;
  const int threads = parallel ? (jobs > 0 ? jobs : omp_get_max_threads()) : 1;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t k = 0; k < first.size(); ++k) {
    try {
      std::vector<GaussVector> cols{first[k]};
      search.descend(cols, parts[k]);
    } catch (...) {
#pragma omp critical(hecke_set_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  for (auto& p : parts) {
    result.leaves += p.leaves;
    for (auto& g : p.members) result.members.push_back(std::move(g));
  }
  std::sort(result.members.begin(), result.members.end(), matrix_less);
  return result;
}

}  // namespace

EnumerationResult enumerate_S(const CountQuery& query, int jobs) { return run_enumeration(query, true, jobs); }

EnumerationResult enumerate_S_serial(const CountQuery& query) { return run_enumeration(query, false, 1); }

double q_angle(const GaussVector& x, const GaussVector& y, const SelfAdjointMatrix& q) {
  auto zero = [](const GaussVector& v) {
    return std::all_of(v.begin(), v.end(), [](const GaussInt& z) { return z.is_zero(); });
  };
  if (zero(x) || zero(y)) throw Error(ErrorCode::kZeroInput, "q_angle of a zero vector");
  const Rational num = q.form(x, y).re();
  const Rational den2 = q.value(x) * q.value(y);
  // cos^2 exactly; sign from num.
  const Rational cos2 = num * num / den2;
  if (cos2 >= 1) return num > 0 ? 0.0 : std::acos(-1.0);
  const double c = std::sqrt(static_cast<double>(cos2));
  return std::acos(num >= 0 ? c : -c);
}

void VerificationReport::add(Check c) {
  if (c.hard && !c.pass) pass = false;
  checks.push_back(std::move(c));
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json j;
  j["query"] = query;
  j["count"] = count;
  if (bound) j["bound"] = *bound;
  j["pass"] = pass;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks)
    j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"hard", c.hard}, {"details", c.details}});
  if (!witnesses.empty()) {
    j["witnesses"] = nlohmann::json::array();
    for (const auto& w : witnesses) j["witnesses"].push_back(hecke::to_json(w));
  }
  return j;
}

nlohmann::json to_json(const EnumerationResult& r) {
  nlohmann::json j;
  j["count"] = r.members.size();
  j["leaves"] = r.leaves;
  if (!r.reason.empty()) j["reason"] = r.reason;
  j["members"] = nlohmann::json::array();
  for (const auto& g : r.members) j["members"].push_back(hecke::to_json(g));
  return j;
}

namespace {

void require_diagonal_form(const SelfAdjointMatrix& q3) {
  if (!q3.is_diagonal()) throw Error(ErrorCode::kInvalidArgument, "expected a diagonal form");
  if (!q3.is_positive_definite()) throw Error(ErrorCode::kNotPositiveDefinite, "form is not positive definite");
}

GaussVector column_of(const GaussRatMatrix& g, std::size_t c, const GaussInt& m) {
  GaussVector v(g.rows());
  for (std::size_t r = 0; r < g.rows(); ++r) {
    GaussRational e = g(r, c) * GaussRational(m);
    if (!e.is_integral()) throw Error(ErrorCode::kInvariantViolation, "m gamma is not integral");
    v[r] = e.num();
  }
  return v;
}

bool is_zero_vector(const GaussVector& v) {
  return std::all_of(v.begin(), v.end(), [](const GaussInt& z) { return z.is_zero(); });
}

GaussVector divide_by(const GaussVector& v, const GaussInt& d) {
  GaussVector out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k].exact_div(d);
  return out;
}

std::string spec_text(const SplitPrime& pi, const SplitPrime& pi2, unsigned nu, const GaussInt& m,
                      const SelfAdjointMatrix& q) {
  return "q=" + to_json(q).dump() + " pi=" + to_string(pi.pi()) + " pi2=" + to_string(pi2.pi()) +
         " nu=" + std::to_string(nu) + " m=" + to_string(m);
}

}  // namespace

VerificationReport verify_one_prime_bound(const SelfAdjointMatrix& q3, const SplitPrime& pi, unsigned nu,
                                          const GaussInt& m, const OnePrimeOptions& opt) {
  require_diagonal_form(q3);
  const std::size_t n = q3.n();
  CountQuery query{q3, HeckeCosetSpec{pi, pi, nu, n}, std::nullopt, m};
  check_query(query);
  VerificationReport rep;
  rep.query = spec_text(pi, pi, nu, m, q3);
  const EnumerationResult res = enumerate_S(query, opt.jobs);
  rep.count = res.members.size();

  const Integer den = denominator_lcm(q3);
  const double dn = static_cast<double>(n);
  const double mabs = std::sqrt(static_cast<double>(m.norm()));
  const double bound = opt.C * std::pow(mabs, 2 * dn * dn - 2 + opt.eps) *
                       std::pow(static_cast<double>(den), (2 * dn - 1) * (dn - 1) / 2) *
                       std::pow(static_cast<double>(pi.p()), nu * (dn - 1) + opt.eps);
  rep.bound = bound;
  rep.add({"count_bound", static_cast<double>(rep.count) <= bound, false,
           std::to_string(rep.count) + " <= " + std::to_string(bound)});

  const DetPower dp = det_power(query.spec);
  const GaussInt det = query.spec.determinant();
  const Integer mm = m.norm();
  const Integer p = pi.p();
  Rational max_q = 0;
  for (std::size_t k = 0; k < n; ++k) max_q = std::max(max_q, q3.diag(k));
  const SelfAdjointMatrix qprime = q3.scaled(Rational(den));
  const double angle_floor = opt.kappa / mabs / std::sqrt(static_cast<double>(den)) /
                             std::sqrt(static_cast<double>(max_q));

  bool det_ok = true, shells_ok = true, anchor_ok = true;
  // (anchor column, anchor index, column index, mu) -> reduced columns x' = m x / pi^mu.
  std::map<std::tuple<std::vector<std::pair<Integer, Integer>>, std::size_t, std::size_t, int>,
           std::vector<GaussVector>>
      groups;
  auto key_of = [](const GaussVector& v) {
    std::vector<std::pair<Integer, Integer>> k;
    for (const auto& z : v) k.emplace_back(z.re(), z.im());
    return k;
  };
  for (const auto& g : res.members) {
    if (!(determinant(g) == GaussRational(det))) det_ok = false;
    std::vector<GaussVector> cols;
    for (std::size_t c = 0; c < n; ++c) {
      cols.push_back(column_of(g, c, m));
      if (!(q3.value(cols[c]) == Rational(mm) * dp.value * q3.diag(c))) shells_ok = false;
    }
    std::size_t anchor = n;
    for (std::size_t c = 0; c < n && anchor == n; ++c)
      if (valuation(cols[c], pi) == 0) anchor = c;
    if (anchor == n) {
      anchor_ok = false;
      continue;
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (c == anchor) continue;
      const int mu = valuation(cols[c], pi);
      if (mu >= static_cast<int>(nu)) continue;
      auto& grp = groups[{key_of(cols[anchor]), anchor, c, mu}];
      GaussVector xr = divide_by(cols[c], pow(pi.pi(), static_cast<unsigned>(mu)));
      if (std::find(grp.begin(), grp.end(), xr) == grp.end()) grp.push_back(std::move(xr));
    }
  }
  rep.add({"determinant_exact", det_ok, true, "det gamma == " + to_string(det)});
  rep.add({"column_shells", shells_ok, true, "(m g_j)^* Q (m g_j) == |m|^2 |det|^{2/n} q_j"});
  rep.add({"unit_column", anchor_ok, true, "every member has a column with v_pi = 0"});

  std::size_t div_checked = 0, div_failed = 0, angle_checked = 0, angle_failed = 0;
  double min_angle = std::acos(-1.0);
  for (const auto& [key, xs] : groups) {
    const std::size_t col = std::get<2>(key);
    const int mu = std::get<3>(key);
    const Integer npow = pow(p, static_cast<unsigned>(static_cast<int>(nu) - mu));
    const Integer kq = mm * numerator(q3.diag(col) * Rational(den));
    for (std::size_t a = 0; a < xs.size(); ++a)
      for (std::size_t b = a; b < xs.size(); ++b) {
        const GaussRational v = qprime.form(xs[a], xs[b]);
        ++div_checked;
        const bool divisible = v.is_integral() && v.num().re() % npow == 0 && v.num().im() % npow == 0;
        if (!divisible) {
          ++div_failed;
          continue;
        }
        if (a == b) continue;
        ++angle_checked;
        const Integer ell = (kq * npow - v.num().re()) / npow;
        const double ang = q_angle(xs[a], xs[b], q3);
        min_angle = std::min(min_angle, ang);
        if (ell < 1 || ang < angle_floor * (1 - 1e-12)) ++angle_failed;
      }
  }
  rep.add({"polarized_divisibility", div_failed == 0, true,
           std::to_string(div_checked) + " pairs, " + std::to_string(div_failed) + " failures"});
  rep.add({"angle_separation", angle_failed == 0, true,
           std::to_string(angle_checked) + " pairs, min angle " + std::to_string(min_angle) + " >= " +
               std::to_string(angle_floor) + ", " + std::to_string(angle_failed) + " failures"});
  if (!rep.pass) rep.witnesses = res.members;
  return rep;
}

TwoPrimeCongruence two_prime_congruence(const GaussRatMatrix& gamma, const SelfAdjointMatrix& q3,
                                        const SplitPrime& pi, const SplitPrime& pi2, const GaussInt& m) {
  TwoPrimeCongruence out;
  const std::size_t n = q3.n();
  std::vector<GaussVector> cols;
  for (std::size_t c = 0; c < n; ++c) cols.push_back(column_of(gamma, c, m));
  std::size_t anchor = n;
  for (std::size_t c = 0; c < n && anchor == n; ++c)
    if (!is_zero_vector(cols[c]) && valuation(cols[c], pi) == 0) anchor = c;
  if (anchor == n) return out;
  const std::size_t other = anchor == 0 ? 1 : 0;
  if (is_zero_vector(cols[other])) return out;
  out.mu = valuation(cols[other], pi);
  if (out.mu >= static_cast<int>(n)) return out;
  const unsigned rho = static_cast<unsigned>(static_cast<int>(n) - out.mu);
  const GaussVector x = cols[anchor];
  const GaussVector y = divide_by(cols[other], pow(pi.pi(), static_cast<unsigned>(out.mu)));
  Integer a;
  try {
    a = scalar_witness(x, y, pi, rho);
  } catch (const Error&) {
    return out;
  }
  out.applicable = true;
  const PolarizationWitness w = witness_from_scalar(a, pi, rho);
  out.lhs = GaussRational(2) * q3.form(x, y);
  out.rhs = GaussRational(GaussInt(w.a, -w.b)) * GaussRational(q3.value(x)) +
            GaussRational(GaussInt(w.a_inv, -w.b_inv)) * GaussRational(q3.value(y));
  (void)pi2;
  out.congruent = divisible_by_p_power(out.lhs - out.rhs, pi, rho);
  out.contradiction = out.lhs.is_zero() && !divisible_by_p_power(out.rhs, pi, rho);
  return out;
}

VerificationReport verify_two_primes_empty(const SelfAdjointMatrix& q3, const SplitPrime& pi, const SplitPrime& pi2,
                                           unsigned nu, const GaussInt& m, int jobs) {
  require_diagonal_form(q3);
  if (pi.p() == pi2.p()) throw Error(ErrorCode::kInvalidArgument, "primes must lie above distinct rational primes");
  for (std::size_t k = 0; k < q3.n(); ++k)
    if (valuation(q3(k, k), pi) != 0 || valuation(q3(k, k), pi2) != 0)
      throw Error(ErrorCode::kInvalidArgument, "diagonal entries must be coprime to pi and pi2");
  const std::size_t n = q3.n();
  CountQuery query{q3, HeckeCosetSpec{pi, pi2, nu, n}, std::nullopt, m};
  check_query(query);
  VerificationReport rep;
  rep.query = spec_text(pi, pi2, nu, m, q3);
  const DetPower dp = det_power(query.spec);
  if (!dp.rational) {
    rep.count = 0;
    rep.add({"empty", true, true, "decided symbolically: |det|^{2/n} = N(pi)^" + to_string(dp.exp_pi) +
                                      " N(pi2)^" + to_string(dp.exp_pi2) + " is irrational"});
    return rep;
  }
  const EnumerationResult res = enumerate_S(query, jobs);
  rep.count = res.members.size();
  rep.add({"empty", res.members.empty(), true,
           "decided by enumeration over " + std::to_string(res.leaves) + " complete candidates"});
  for (const auto& g : res.members) {
    const TwoPrimeCongruence c = two_prime_congruence(g, q3, pi, pi2, m);
    rep.add({"distinct_primes_congruence", false, true,
             "counterexample: applicable=" + std::to_string(c.applicable) + " mu=" + std::to_string(c.mu) +
                 " congruent=" + std::to_string(c.congruent) + " contradiction=" + std::to_string(c.contradiction)});
  }
  rep.witnesses = res.members;
  return rep;
}

}  // namespace hecke
