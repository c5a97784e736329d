#include "hecke/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <set>

#include <omp.h>

#include "hecke/serialize.hpp"

namespace hecke {

namespace {

std::vector<std::pair<std::size_t, std::size_t>> off_diagonal(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j + 1; k < n; ++k) out.emplace_back(j, k);
  return out;
}

Rational coordinate_weight(std::size_t t, std::size_t n) { return t < n ? Rational(1) : Rational(2); }

GaussRatMatrix times(const GaussRatMatrix& a, const GaussRational& f) {
  GaussRatMatrix out = a;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) * f;
  return out;
}

}  // namespace

std::vector<Rational> form_coordinates(const SelfAdjointMatrix& a) {
  const std::size_t n = a.n();
  const auto pairs = off_diagonal(n);
  std::vector<Rational> x;
  x.reserve(n * n);
  for (std::size_t j = 0; j < n; ++j) x.push_back(a.diag(j));
  for (auto [j, k] : pairs) x.push_back(a(j, k).re());
  for (auto [j, k] : pairs) x.push_back(a(j, k).im());
  return x;
}

SelfAdjointMatrix form_from_coordinates(const std::vector<Rational>& x, std::size_t n) {
  if (x.size() != n * n) throw Error(ErrorCode::kInvalidArgument, "coordinate vector has the wrong length");
  const auto pairs = off_diagonal(n);
  GaussRatMatrix m(n, n);
  for (std::size_t j = 0; j < n; ++j) m(j, j) = GaussRational(x[j]);
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    const auto [j, k] = pairs[t];
    const GaussRational z(x[n + t], x[n + pairs.size() + t]);
    m(j, k) = z;
    m(k, j) = z.conj();
  }
  return SelfAdjointMatrix(m);
}

Rational frobenius(const SelfAdjointMatrix& a, const SelfAdjointMatrix& b) {
  const auto x = form_coordinates(a), y = form_coordinates(b);
  Rational s = 0;
  for (std::size_t t = 0; t < x.size(); ++t) s += coordinate_weight(t, a.n()) * x[t] * y[t];
  return s;
}

SelfAdjointMatrix FormOperator::apply(const SelfAdjointMatrix& a) const {
  const auto x = form_coordinates(a);
  std::vector<Rational> y(x.size(), Rational(0));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) y[r] += m(r, c) * x[c];
  return form_from_coordinates(y, n);
}

bool FormOperator::is_zero() const {
  return std::all_of(m.data().begin(), m.data().end(), [](const Rational& v) { return v == 0; });
}

FormOperator b_gamma_operator(const GaussRatMatrix& g, const Rational& det_power) {
  if (!g.is_square()) throw Error(ErrorCode::kInvalidArgument, "gamma must be square");
  const std::size_t n = g.rows(), d = n * n;
  FormOperator op{n, RationalMatrix(d, d)};
  const GaussRatMatrix gs = adjoint(g);
  for (std::size_t t = 0; t < d; ++t) {
    std::vector<Rational> e(d, Rational(0));
    e[t] = 1;
    const SelfAdjointMatrix a = form_from_coordinates(e, n);
    const SelfAdjointMatrix b(gs * a.matrix() * g - times(a.matrix(), GaussRational(det_power)));
    const auto col = form_coordinates(b);
    for (std::size_t r = 0; r < d; ++r) op.m(r, t) = col[r];
  }
  return op;
}

FormOperator b_gamma_operator(const GaussRatMatrix& g, const DetPower& det_power) {
  if (!det_power.rational)
    throw Error(ErrorCode::kIrrationalDetPower, "|det|^{2/n} is irrational; B_gamma is not defined over Q(i)");
  return b_gamma_operator(g, det_power.value);
}

SubspaceBasis SubspaceBasis::full(std::size_t n) {
  SubspaceBasis h{n, {}};
  for (std::size_t t = 0; t < n * n; ++t) {
    std::vector<Rational> e(n * n, Rational(0));
    e[t] = 1;
    h.basis.push_back(form_from_coordinates(e, n));
  }
  return h;
}

bool SubspaceBasis::contains(const SelfAdjointMatrix& a) const {
  if (a.n() != n) throw Error(ErrorCode::kInvalidArgument, "dimension mismatch");
  RationalMatrix rows(basis.size() + 1, n * n);
  for (std::size_t b = 0; b <= basis.size(); ++b) {
    const auto x = form_coordinates(b < basis.size() ? basis[b] : a);
    for (std::size_t t = 0; t < x.size(); ++t) rows(b, t) = x[t];
  }
  return rank(rows) == basis.size();
}

nlohmann::json SubspaceBasis::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& b : basis) j.push_back(hecke::to_json(b));
  return j;
}

SubspaceBasis kernel_intersection(const std::vector<FormOperator>& ops, std::size_t n) {
  if (ops.empty()) return SubspaceBasis::full(n);
  const std::size_t d = n * n;
  RationalMatrix stacked(ops.size() * d, d);
  for (std::size_t o = 0; o < ops.size(); ++o) {
    if (ops[o].n != n) throw Error(ErrorCode::kInvalidArgument, "operator dimension mismatch");
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) stacked(o * d + r, c) = ops[o].m(r, c);
  }
  SubspaceBasis h{n, {}};
  for (const auto& v : nullspace(stacked)) h.basis.push_back(form_from_coordinates(v, n));
  return h;
}

namespace {

std::vector<Rational> projection_coefficients(const SelfAdjointMatrix& q, const SubspaceBasis& h) {
  const std::size_t k = h.dim();
  RationalMatrix gram(k, k);
  std::vector<Rational> rhs(k);
  for (std::size_t a = 0; a < k; ++a) {
    rhs[a] = frobenius(h.basis[a], q);
    for (std::size_t b = 0; b < k; ++b) gram(a, b) = frobenius(h.basis[a], h.basis[b]);
  }
  return solve(gram, rhs);
}

SelfAdjointMatrix combine(const SubspaceBasis& h, const std::vector<Rational>& c) {
  std::vector<Rational> x(h.n * h.n, Rational(0));
  for (std::size_t a = 0; a < c.size(); ++a) {
    const auto y = form_coordinates(h.basis[a]);
    for (std::size_t t = 0; t < x.size(); ++t) x[t] += c[a] * y[t];
  }
  return form_from_coordinates(x, h.n);
}

}  // namespace

Distance distance_to_subspace(const SelfAdjointMatrix& q, const SubspaceBasis& h) {
  if (q.n() != h.n) throw Error(ErrorCode::kInvalidArgument, "dimension mismatch");
  Distance d;
  d.projection = h.dim() == 0 ? SelfAdjointMatrix(GaussRatMatrix(h.n, h.n)) : combine(h, projection_coefficients(q, h));
  const SelfAdjointMatrix r = q - d.projection;
  d.squared = frobenius(r, r);
  d.frobenius = std::sqrt(static_cast<double>(d.squared));
  for (std::size_t a = 0; a < r.n(); ++a)
    for (std::size_t b = 0; b < r.n(); ++b)
      d.entrywise_max = std::max(d.entrywise_max, std::sqrt(static_cast<double>(r(a, b).norm())));
  return d;
}

void Envelope::validate() const {
  if (!(lo > 0) || hi < lo) throw Error(ErrorCode::kInvalidArgument, "envelope must satisfy 0 < lo <= hi");
}

bool Envelope::contains_strictly(const SelfAdjointMatrix& a) const {
  return a.shifted(-lo).is_positive_definite() && a.scaled(Rational(-1)).shifted(hi).is_positive_definite();
}

bool Envelope::contains_diagonal(const SelfAdjointMatrix& a) const {
  if (!a.is_diagonal()) return false;
  for (std::size_t k = 0; k < a.n(); ++k)
    if (a.diag(k) < lo || a.diag(k) > hi) return false;
  return true;
}

nlohmann::json Envelope::to_json() const { return {{"lo", to_string(lo)}, {"hi", to_string(hi)}, {"n", n}}; }

Envelope envelope_of(const SelfAdjointMatrix& q) {
  if (!q.is_positive_definite()) throw Error(ErrorCode::kNotPositiveDefinite, "form is not positive definite");
  Rational lo = q.diag(0), hi = q.diag(0);
  for (std::size_t k = 1; k < q.n(); ++k) {
    lo = std::min(lo, q.diag(k));
    hi = std::max(hi, q.diag(k));
  }
  while (!q.shifted(-lo).is_positive_definite()) lo /= 2;
  while (!q.scaled(Rational(-1)).shifted(hi).is_positive_definite()) hi *= 2;
  return Envelope{lo, hi, q.n()};
}

std::pair<Envelope, Envelope> envelopes(const Envelope& omega_prime) {
  omega_prime.validate();
  const std::size_t n = omega_prime.n;
  const Envelope omega1{omega_prime.lo / 2, omega_prime.hi * 2, n};
  const Rational lambda = omega1.hi;
  Rational delta = 1, lam_pow = 1;
  for (std::size_t k = 0; k < n; ++k) delta *= omega1.lo;
  for (std::size_t k = 0; k + 1 < n; ++k) lam_pow *= lambda;
  return {omega1, Envelope{delta / lam_pow, lambda, n}};
}

Rational best_approximation(const Rational& x, const Integer& bound) {
  if (bound < 1) throw Error(ErrorCode::kInvalidArgument, "denominator bound must be positive");
  Integer p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  Rational r = x;
  for (;;) {
    const Integer a = floor(r);
    const Integer p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > bound) {
      const Integer t = (bound - q0) / q1;
      const Rational c1(p1, q1), c2(p0 + t * p1, q0 + t * q1);
      return abs(c2 - x) < abs(c1 - x) ? c2 : c1;
    }
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    if (r == Rational(a)) return Rational(p1, q1);
    r = 1 / (r - Rational(a));
  }
}

SelfAdjointMatrix rational_point_in_envelope(const SubspaceBasis& h, const Envelope& env, const Integer& denom_bound,
                                             const SelfAdjointMatrix& seed) {
  env.validate();
  if (h.dim() == 0) throw Error(ErrorCode::kNoPointFound, "subspace is zero");
  const std::vector<Rational> c = projection_coefficients(seed, h);
  const bool small = std::all_of(c.begin(), c.end(), [&](const Rational& v) { return denominator(v) <= denom_bound; });
  if (small) {
    SelfAdjointMatrix p = combine(h, c);
    if (env.contains_strictly(p)) return p;
  }
  for (Integer d = 1;; d = std::min<Integer>(d * 2, denom_bound)) {
    std::vector<Rational> r;
    for (const auto& v : c) r.push_back(best_approximation(v, d));
    SelfAdjointMatrix p = combine(h, r);
    if (env.contains_strictly(p)) return p;
    if (d == denom_bound) break;
  }
  throw Error(ErrorCode::kNoPointFound,
              "no certified point with denominators <= " + to_string(denom_bound) + " in the envelope");
}

SelfAdjointMatrix q_from_point(const GaussRatMatrix& g) {
  if (!g.is_square()) throw Error(ErrorCode::kInvalidArgument, "point must be square");
  const std::size_t n = g.rows();
  const GaussRational det = determinant(g);
  if (det.is_zero()) throw Error(ErrorCode::kSingularMatrix, "singular point");
  const Rational d2 = det.norm();
  const auto un = static_cast<unsigned>(n);
  const Integer a = iroot(numerator(d2), un), b = iroot(denominator(d2), un);
  if (pow(a, un) != numerator(d2) || pow(b, un) != denominator(d2))
    throw Error(ErrorCode::kIrrationalDetPower, "|det g|^{2/n} is irrational");
  const GaussRatMatrix inv = *inverse(g);
  return SelfAdjointMatrix(times(adjoint(inv) * inv, GaussRational(Rational(a, b))));
}

void EndgameConfig::validate(std::size_t n) const {
  auto fail = [](const std::string& field, const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, "endgame." + field + ": " + msg);
  };
  if (D < 2) fail("D", "must be at least 2");
  if (E < 2) fail("E", "must be at least 2");
  if (T < 1) fail("T", "must be at least 1");
  if (L0 < 2) fail("L0", "must be at least 2");
  if (M < 1) fail("M", "must be at least 1");
  if (E <= pow(D, static_cast<unsigned>(n * n + 1))) fail("E", "must exceed D^(n^2+1)");
  if (!toy_override && !validate_M(*this, n)) fail("M", "below T (DE)^(n^2+2) + 1 without toy_override");
  if (denom_bound < 1) fail("denom_bound", "must be positive");
  if (denom_ceiling < denom_bound) fail("denom_ceiling", "must be at least denom_bound");
  if (omega_prime) {
    if (omega_prime->n != n) fail("omega_prime", "dimension differs from n");
    omega_prime->validate();
  }
}

Integer m_threshold(const EndgameConfig& cfg, std::size_t n) {
  return cfg.T * pow(cfg.D * cfg.E, static_cast<unsigned>(n * n + 2)) + 1;
}

bool validate_M(const EndgameConfig& cfg, std::size_t n) { return Integer(cfg.M) >= m_threshold(cfg, n); }

void PipelineTrace::add(Check c) {
  if (c.hard && !c.pass) pass = false;
  checks.push_back(std::move(c));
}

namespace {

nlohmann::json primes_json(const std::vector<std::vector<SplitPrime>>& ws) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& w : ws) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : w) a.push_back(to_string(p.pi()));
    j.push_back(a);
  }
  return j;
}

}  // namespace

nlohmann::json PipelineTrace::to_json() const {
  nlohmann::json j;
  j["inputs"] = {{"Q", hecke::to_json(q)},
                 {"D", to_string(cfg.D)},
                 {"E", to_string(cfg.E)},
                 {"T", to_string(cfg.T)},
                 {"L0", to_string(cfg.L0)},
                 {"M", cfg.M},
                 {"toy_override", cfg.toy_override},
                 {"M_threshold", to_string(m_threshold(cfg, q.n()))}};
  j["omega_prime"] = omega_prime.to_json();
  j["omega1"] = omega1.to_json();
  j["omega2"] = omega2.to_json();
  j["windows"] = primes_json(windows);
  j["k_windows"] = primes_json(k_windows);
  j["h_dims"] = h_dims;
  j["j"] = this->j;
  j["H_j"] = h_j.to_json();
  j["hprime_dims"] = hprime_dims;
  j["k"] = k;
  j["H_prime_k"] = h_prime_k.to_json();
  j["excluded_irrational"] = excluded_irrational;
  j["Q1"] = q1 ? hecke::to_json(*q1) : nlohmann::json(nullptr);
  j["Q2"] = hecke::to_json(q2);
  j["U"] = hecke::to_json(u);
  j["Q3"] = hecke::to_json(q3);
  j["m"] = to_string(m);
  nlohmann::json comp = nlohmann::json::object();
  for (const auto& [name, c] : complexity) comp[name] = c.value();
  j["complexity"] = comp;
  j["chain"] = nlohmann::json::array();
  for (const auto& r : chain)
    j["chain"].push_back({{"pi", to_string(r.pi.pi())},
                          {"pi2", to_string(r.pi2.pi())},
                          {"nu", r.nu},
                          {"count_M", r.count_m},
                          {"count_Q2", r.count_q2},
                          {"count_Q3", r.count_q3},
                          {"skipped", r.skipped},
                          {"pass", r.pass},
                          {"note", r.note}});
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks)
    j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"hard", c.hard}, {"details", c.details}});
  j["pass"] = pass;
  return j;
}

namespace {

struct Cell {
  SplitPrime pi;
  SplitPrime pi2;
  unsigned nu;
};

std::string cell_key(const SplitPrime& a, const SplitPrime& b, unsigned nu) {
  return to_string(a.pi()) + "|" + to_string(b.pi()) + "|" + std::to_string(nu);
}

std::vector<SplitPrime> union_of(const std::vector<std::vector<SplitPrime>>& ws, std::size_t upto) {
  std::vector<SplitPrime> out;
  for (std::size_t w = 0; w < std::min(upto, ws.size()); ++w)
    for (const auto& p : ws[w])
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  return out;
}

std::vector<Cell> cells_of(const std::vector<SplitPrime>& primes, std::size_t n) {
  std::vector<Cell> out;
  for (const auto& a : primes)
    for (const auto& b : primes)
      for (unsigned nu = 1; nu <= n; ++nu) out.push_back({a, b, nu});
  return out;
}

std::vector<std::vector<SplitPrime>> default_windows(std::vector<SplitPrime> primes) {
  std::sort(primes.begin(), primes.end(),
            [](const SplitPrime& a, const SplitPrime& b) { return a.p() != b.p() ? a.p() < b.p() : a.pi() < b.pi(); });
  std::vector<std::vector<SplitPrime>> out;
  for (const auto& p : primes) {
    if (!out.empty() && out.back().front().p() == p.p()) {
      if (std::find(out.back().begin(), out.back().end(), p) == out.back().end()) out.back().push_back(p);
    } else {
      out.push_back({p});
    }
  }
  return out;
}

template <class F>
void parallel_cells(std::size_t count, int jobs, F&& body) {
  std::exception_ptr failure;
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t c = 0; c < count; ++c) {
    try {
      body(c);
    } catch (...) {
#pragma omp critical(pipeline_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

class Harvest {
 public:
  Harvest(const SelfAdjointMatrix& q, const EndgameConfig& cfg) : q_(q), cfg_(cfg) {}

  void prefetch(const std::vector<Cell>& cells) {
    std::vector<Cell> todo;
    for (const auto& c : cells)
      if (!cache_.count(cell_key(c.pi, c.pi2, c.nu))) todo.push_back(c);
    std::vector<EnumerationResult> res(todo.size());
    parallel_cells(todo.size(), cfg_.jobs, [&](std::size_t t) {
      res[t] = enumerate_S(CountQuery{q_, HeckeCosetSpec{todo[t].pi, todo[t].pi2, todo[t].nu, q_.n()}, cfg_.M, 1}, 1);
    });
    for (std::size_t t = 0; t < todo.size(); ++t)
      cache_.emplace(cell_key(todo[t].pi, todo[t].pi2, todo[t].nu), std::move(res[t]));
  }

  const EnumerationResult& get(const Cell& c) {
    prefetch({c});
    return cache_.at(cell_key(c.pi, c.pi2, c.nu));
  }

  /// Common kernel over every cell with both primes in the set; counts members without a rational B_gamma.
  SubspaceBasis kernel(const std::vector<SplitPrime>& primes, std::size_t& excluded) {
    const std::size_t n = q_.n();
    const auto cells = cells_of(primes, n);
    prefetch(cells);
    std::vector<FormOperator> ops;
    excluded = 0;
    for (const auto& c : cells) {
      const DetPower dp = det_power(HeckeCosetSpec{c.pi, c.pi2, c.nu, n});
      const auto& members = get(c).members;
      if (!dp.rational) {
        excluded += members.size();
        continue;
      }
      for (const auto& g : members) ops.push_back(b_gamma_operator(g, dp));
    }
    return kernel_intersection(ops, n);
  }

 private:
  const SelfAdjointMatrix& q_;
  const EndgameConfig& cfg_;
  std::map<std::string, EnumerationResult> cache_;
};

SelfAdjointMatrix escalate_point(const SubspaceBasis& h, const Envelope& env, const EndgameConfig& cfg,
                                 const SelfAdjointMatrix& seed) {
  for (Integer bound = cfg.denom_bound;; bound *= 2) {
    try {
      return rational_point_in_envelope(h, env, std::min(bound, cfg.denom_ceiling), seed);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoPointFound || bound >= cfg.denom_ceiling) throw;
    }
  }
}

std::string cell_text(const Cell& c) {
  return "(" + to_string(c.pi.pi()) + ", " + to_string(c.pi2.pi()) + ", nu=" + std::to_string(c.nu) + ")";
}

}  // namespace

PipelineTrace run_pipeline(const SelfAdjointMatrix& q, const EndgameConfig& cfg, const std::vector<SplitPrime>& primes) {
  const std::size_t n = q.n();
  cfg.validate(n);
  if (!q.is_positive_definite()) throw Error(ErrorCode::kNotPositiveDefinite, "form is not positive definite");
  if (primes.empty() && cfg.windows.empty()) throw Error(ErrorCode::kInvalidArgument, "no primes given");

  PipelineTrace tr;
  tr.q = q;
  tr.cfg = cfg;
  tr.omega_prime = cfg.omega_prime ? *cfg.omega_prime : envelope_of(q);
  std::tie(tr.omega1, tr.omega2) = envelopes(tr.omega_prime);
  tr.add({"q_in_omega_prime", tr.omega_prime.contains_strictly(q), true, "eigenvalues strictly inside Omega'"});
  tr.add({"M_condition", validate_M(cfg, n), false,
          "M = " + std::to_string(cfg.M) + " against T (DE)^(n^2+2) + 1 = " + to_string(m_threshold(cfg, n))});
  tr.windows = cfg.windows.empty() ? default_windows(primes) : cfg.windows;
  tr.k_windows = cfg.k_windows.empty() ? tr.windows : cfg.k_windows;

  Harvest harvest(q, cfg);
  const std::size_t max_steps = n * n + 1;

  // H_j = common kernel over windows 1..j; stop at the smallest j with H_j = H_{j+1}.
  std::size_t excluded = 0;
  SubspaceBasis hj = harvest.kernel(union_of(tr.windows, 1), excluded);
  tr.h_dims.push_back(hj.dim());
  for (std::size_t j = 1;; ++j) {
    if (j > max_steps) throw Error(ErrorCode::kWindowExhausted, "H_j did not stabilize within n^2 + 1 windows");
    std::size_t excluded_next = 0;
    SubspaceBasis next = harvest.kernel(union_of(tr.windows, j + 1), excluded_next);
    tr.h_dims.push_back(next.dim());
    if (next.dim() > hj.dim()) throw Error(ErrorCode::kInvariantViolation, "H_j chain increased");
    if (next.dim() == hj.dim()) {
      tr.j = j;
      tr.h_j = hj;
      tr.excluded_irrational = excluded;
      break;
    }
    hj = std::move(next);
    excluded = excluded_next;
  }
  tr.add({"h_stabilized_on_configured_window", tr.j + 1 <= tr.windows.size(), false,
          "j = " + std::to_string(tr.j) + " with " + std::to_string(tr.windows.size()) + " configured windows"});
  if (tr.excluded_irrational == 0 && tr.h_j.dim() > 0) {
    try {
      tr.q1 = escalate_point(tr.h_j, tr.omega1, cfg, q);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoPointFound) throw;
    }
  }
  tr.add({"q1_materialized", tr.q1.has_value(), false,
          tr.excluded_irrational ? std::to_string(tr.excluded_irrational) + " members with irrational det power"
                                 : "rational point of H_j in Omega_1"});

  // H'_k over cumulative k-windows; smallest k >= 1 with H'_k = H'_{k+1}.
  std::vector<SubspaceBasis> hk;
  for (std::size_t k = 0; k <= 1; ++k) {
    hk.push_back(harvest.kernel(union_of(tr.k_windows, k + 1), excluded));
    tr.hprime_dims.push_back(hk.back().dim());
  }
  for (std::size_t k = 1;; ++k) {
    if (k > n * n) throw Error(ErrorCode::kWindowExhausted, "H'_k did not stabilize for k <= n^2");
    hk.push_back(harvest.kernel(union_of(tr.k_windows, k + 2), excluded));
    tr.hprime_dims.push_back(hk.back().dim());
    if (hk[k + 1].dim() == hk[k].dim()) {
      tr.k = k;
      tr.h_prime_k = hk[k];
      break;
    }
  }
  bool monotone = true;
  for (std::size_t t = 1; t < tr.h_dims.size(); ++t) monotone = monotone && tr.h_dims[t] <= tr.h_dims[t - 1];
  for (std::size_t t = 1; t < tr.hprime_dims.size(); ++t)
    monotone = monotone && tr.hprime_dims[t] <= tr.hprime_dims[t - 1];
  tr.add({"kernel_chains_monotone", monotone, true, "dim H_1 >= dim H_2 >= ... and likewise for H'_k"});

  tr.q2 = escalate_point(tr.h_prime_k, tr.omega1, cfg, q);
  tr.add({"q2_in_h_prime", tr.h_prime_k.contains(tr.q2), true, "Q2 lies in H'_k"});
  tr.add({"q2_in_omega1", tr.omega1.contains_strictly(tr.q2), true, "Q2 inside int Omega_1"});

  const GramSchmidtResult gs = gram_schmidt_diagonalize(tr.q2);
  tr.u = gs.u;
  tr.q3 = gs.q3;
  const GaussRatMatrix u_inv = *inverse(tr.u);
  tr.m = GaussInt(denominator_lcm(u_inv) * denominator_lcm(tr.u));
  tr.add({"q3_congruence", adjoint(tr.u) * tr.q2.matrix() * tr.u == tr.q3.matrix() && tr.q3.is_diagonal(), true,
          "U^* Q2 U == Q3 diagonal"});
  tr.add({"u_unimodular", determinant(tr.u) == GaussRational(1), true, "det U == 1"});
  tr.add({"q3_in_omega2", tr.omega2.contains_diagonal(tr.q3), true, "diagonal of Q3 inside Omega_2"});

  tr.complexity.emplace_back("Q", max_complexity(q.matrix()));
  if (tr.q1) tr.complexity.emplace_back("Q1", max_complexity(tr.q1->matrix()));
  tr.complexity.emplace_back("Q2", max_complexity(tr.q2.matrix()));
  tr.complexity.emplace_back("U", max_complexity(tr.u));
  tr.complexity.emplace_back("U_inv", max_complexity(u_inv));
  tr.complexity.emplace_back("Q3", max_complexity(tr.q3.matrix()));
  tr.complexity.emplace_back("m", complexity(GaussRational(tr.m)));

  // Chain verification on every cell of the stabilized k-windows.
  const auto cells = cells_of(union_of(tr.k_windows, tr.k + 1), n);
  harvest.prefetch(cells);
  std::vector<std::vector<GaussRatMatrix>> harvested(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) harvested[c] = harvest.get(cells[c]).members;
  if (cfg.inject_fault && !cells.empty()) harvested[0].push_back(GaussRatMatrix::identity(n));

  std::vector<std::optional<ChainRecord>> records(cells.size());
  std::vector<std::string> harvest_fail(cells.size()), inject_fail(cells.size());
  parallel_cells(cells.size(), cfg.jobs, [&](std::size_t c) {
    const Cell& cell = cells[c];
    const HeckeCosetSpec spec{cell.pi, cell.pi2, cell.nu, n};
    ChainRecord rec{.pi = cell.pi, .pi2 = cell.pi2, .nu = cell.nu, .note = ""};
    rec.count_m = harvested[c].size();
    const CountQuery q2_query{tr.q2, spec, std::nullopt, 1};
    for (const auto& g : harvested[c])
      if (!membership_test(g, q2_query)) harvest_fail[c] = "harvested member outside S(Q2, oo) at " + cell_text(cell);
    const EnumerationResult s2 = enumerate_S(q2_query, 1);
    rec.count_q2 = s2.members.size();
    if (valuation(tr.m, cell.pi) > 0 || valuation(tr.m, cell.pi2) > 0) {
      rec.skipped = true;
      rec.note = "prime divides m";
      rec.pass = harvest_fail[c].empty() && rec.count_m <= rec.count_q2;
      records[c] = std::move(rec);
      return;
    }
    const CountQuery q3_query{tr.q3, spec, std::nullopt, tr.m};
    const EnumerationResult s3 = enumerate_S(q3_query, 1);
    rec.count_q3 = s3.members.size();
    std::vector<GaussRatMatrix> images;
    for (const auto& g : s2.members) {
      GaussRatMatrix d = u_inv * g * tr.u;
      if (!membership_test(d, q3_query) ||
          !std::binary_search(s3.members.begin(), s3.members.end(), d, matrix_less))
        inject_fail[c] = "U^-1 gamma U outside S_m(Q3, oo) at " + cell_text(cell);
      images.push_back(std::move(d));
    }
    std::sort(images.begin(), images.end(), matrix_less);
    if (std::adjacent_find(images.begin(), images.end()) != images.end())
      inject_fail[c] = "conjugation not injective at " + cell_text(cell);
    rec.pass = harvest_fail[c].empty() && inject_fail[c].empty() && rec.count_m <= rec.count_q2 &&
               rec.count_q2 <= rec.count_q3;
    records[c] = std::move(rec);
  });
  for (auto& r : records) tr.chain.push_back(std::move(*r));

  auto summarize = [&](const std::vector<std::string>& fails, const std::string& ok) {
    std::string first;
    std::size_t bad = 0;
    for (const auto& f : fails)
      if (!f.empty()) {
        if (first.empty()) first = f;
        ++bad;
      }
    return std::pair{bad == 0, bad == 0 ? ok : std::to_string(bad) + " cells; first: " + first};
  };
  auto [h_ok, h_msg] = summarize(harvest_fail, "every harvested member lies in S(Q2, oo)");
  tr.add({"harvest_in_q2", h_ok, true, h_msg});
  auto [i_ok, i_msg] = summarize(inject_fail, "U-conjugation maps S(Q2, oo) injectively into S_m(Q3, oo)");
  tr.add({"conjugation_injection", i_ok, true, i_msg});
  std::size_t chain_bad = 0, excluded_bad = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& r = tr.chain[c];
    if (r.count_m > r.count_q2 || (!r.skipped && r.count_q2 > r.count_q3)) ++chain_bad;
    if (!(r.pi == r.pi2) && r.nu < n && r.count_m > 0) ++excluded_bad;
  }
  tr.add({"chain_counts", chain_bad == 0, true,
          std::to_string(cells.size()) + " cells, " + std::to_string(chain_bad) +
              " with #S(Q,M) <= #S(Q2,oo) <= #S_m(Q3,oo) violated"});
  tr.add({"distinct_primes_excluded", excluded_bad == 0, false,
          std::to_string(excluded_bad) + " cells with pi != pi2, nu < n and a finite-M member"});
  return tr;
}

}  // namespace hecke
