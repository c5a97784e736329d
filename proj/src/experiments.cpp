#include "hecke/experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>

#include "hecke/polarization.hpp"
#include "hecke/serialize.hpp"

namespace hecke {

using nlohmann::json;

double d_lambda(const std::vector<double>& mu, double tol) {
  double sum = 0;
  for (double v : mu) sum += v;
  if (std::abs(sum) > tol) throw Error(ErrorCode::kInvalidArgument, "d_lambda: entries must sum to 0");
  double out = 1;
  for (std::size_t j = 0; j < mu.size(); ++j)
    for (std::size_t k = j + 1; k < mu.size(); ++k) {
      const double f = 1 + std::abs(mu[j] - mu[k]);
      out *= f * f;
    }
  return out;
}

Rational d_lambda_exact(const std::vector<Rational>& mu) {
  Rational sum = 0;
  for (const auto& v : mu) sum += v;
  if (sum != 0) throw Error(ErrorCode::kInvalidArgument, "d_lambda: entries must sum to 0");
  Rational out = 1;
  for (std::size_t j = 0; j < mu.size(); ++j)
    for (std::size_t k = j + 1; k < mu.size(); ++k) {
      const Rational d = mu[j] - mu[k];
      const Rational f = 1 + (d < 0 ? Rational(-d) : d);
      out *= f * f;
    }
  return out;
}

double amplification_diagnostic(const AmplificationInput& in) {
  if (!(in.P_size >= 1)) throw Error(ErrorCode::kInvalidArgument, "amplification: P_size must be >= 1");
  if (!(in.L >= 2)) throw Error(ErrorCode::kInvalidArgument, "amplification: L must be >= 2");
  double third = 0;
  for (const auto& c : in.counts)
    third += c.count / std::pow(in.L, static_cast<double>(c.nu) * static_cast<double>(in.n - 1));
  return 1 / in.P_size + std::pow(in.d_mu_star, -in.kappa) * std::pow(in.L, in.K_amp) +
         third / (in.P_size * in.P_size);
}

std::string form_hash(const SelfAdjointMatrix& q) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : to_json(q).dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Subcommand parse_subcommand(const std::string& name) {
  if (name == "count") return Subcommand::kCount;
  if (name == "verify") return Subcommand::kVerify;
  if (name == "pipeline") return Subcommand::kPipeline;
  if (name == "diag") return Subcommand::kDiag;
  throw Error(ErrorCode::kInvalidArgument, "unknown subcommand '" + name + "'");
}

const char* to_string(Subcommand s) {
  switch (s) {
    case Subcommand::kCount: return "count";
    case Subcommand::kVerify: return "verify";
    case Subcommand::kPipeline: return "pipeline";
    case Subcommand::kDiag: return "diag";
  }
  return "?";
}

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::kInvalidArgument, path + ": " + msg);
}

const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) config_error(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) config_error(path + "." + key, "missing");
  return *it;
}

std::string text_of(const json& j, const std::string& path) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return j.dump();
  config_error(path, "expected an integer or a string");
}

Integer integer_of(const json& j, const std::string& path) {
  try {
    const Rational r = parse_rational(text_of(j, path));
    if (denominator(r) != 1) config_error(path, "expected an integer");
    return numerator(r);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) throw;
    config_error(path, e.what());
  }
}

Rational rational_of(const json& j, const std::string& path) {
  try {
    return parse_rational(text_of(j, path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) throw;
    config_error(path, e.what());
  }
}

double real_of(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  return static_cast<double>(rational_of(j, path));
}

unsigned long long positive_of(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() <= 0) config_error(path, "expected a positive integer");
  return j.get<unsigned long long>();
}

SplitPrime prime_of(const json& j, const std::string& path) {
  try {
    if (j.is_number_integer()) return SplitPrime::above(Integer(j.get<long long>()));
    return SplitPrime::from_gaussian(parse_gauss_int(text_of(j, path)));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument && std::string(e.what()).find(path) != std::string::npos) throw;
    config_error(path, std::string("not a split prime: ") + e.what());
  }
}

template <class T, class F>
std::vector<T> list_of(const json& j, const std::string& path, F&& item) {
  if (!j.is_array() || j.empty()) config_error(path, "expected a non-empty list");
  std::vector<T> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(item(j[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

std::vector<SplitPrime> primes_of(const json& j, const std::string& path) {
  return list_of<SplitPrime>(j, path, prime_of);
}

std::vector<unsigned> nus_of(const json& j, const std::string& path, std::size_t n) {
  return list_of<unsigned>(j, path, [n](const json& v, const std::string& p) {
    const auto nu = positive_of(v, p);
    if (nu > n) config_error(p, "nu must lie in [1, n]");
    return static_cast<unsigned>(nu);
  });
}

std::vector<GaussInt> ms_of(const json& task, const std::string& path) {
  if (!task.contains("m")) return {GaussInt(1)};
  return list_of<GaussInt>(task["m"], path + ".m", [](const json& v, const std::string& p) {
    try {
      const GaussInt m = parse_gauss_int(text_of(v, p));
      if (m == GaussInt(0)) config_error(p, "m must be nonzero");
      return m;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kInvalidArgument) throw;
      config_error(p, e.what());
    }
  });
}

SelfAdjointMatrix sample_in_envelope(const json& env, const std::string& path, std::uint64_t seed) {
  const std::size_t n = positive_of(need(env, "n", path), path + ".n");
  const Rational lo = rational_of(need(env, "lo", path), path + ".lo");
  const Rational hi = rational_of(need(env, "hi", path), path + ".hi");
  const Integer den = env.contains("denominator") ? integer_of(env["denominator"], path + ".denominator") : Integer(8);
  if (!(lo > 0) || !(lo < hi)) config_error(path, "need 0 < lo < hi");
  if (den < 1) config_error(path + ".denominator", "must be positive");
  const Integer steps = numerator(Rational((hi - lo) * den));
  std::mt19937_64 rng(seed);
  std::vector<Rational> diag;
  for (std::size_t k = 0; k < n; ++k) {
    const Integer t = Integer(rng() % static_cast<std::uint64_t>(steps + 1));
    diag.push_back(lo + Rational(t, den));
  }
  return SelfAdjointMatrix::diagonal(diag);
}

SelfAdjointMatrix form_of(const json& task, const std::string& path, std::uint64_t seed) {
  const json& q = need(task, "q", path);
  const std::string qp = path + ".q";
  try {
    if (q.is_array()) return self_adjoint_from_json(q);
    if (q.contains("matrix")) return self_adjoint_from_json(q["matrix"]);
    if (q.contains("point")) return q_from_point(gauss_matrix_from_json(q["point"]));
    if (q.contains("envelope")) return sample_in_envelope(q["envelope"], qp + ".envelope", seed);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument && std::string(e.what()).find(qp) != std::string::npos) throw;
    config_error(qp, e.what());
  }
  config_error(qp, "expected a matrix or an object with 'matrix', 'point' or 'envelope'");
}

void check_form(const SelfAdjointMatrix& q, const std::string& path) {
  if (q.n() < 2) config_error(path + ".q", "n must be at least 2");
  if (!q.is_positive_definite()) config_error(path + ".q", "form is not positive definite");
}

EndgameConfig endgame_of(const json& task, const std::string& path, std::size_t n, bool validate = true) {
  EndgameConfig cfg;
  auto opt_int = [&](const char* key, Integer& field) {
    if (task.contains(key)) field = integer_of(task[key], path + "." + key);
  };
  opt_int("D", cfg.D);
  opt_int("E", cfg.E);
  opt_int("T", cfg.T);
  opt_int("L0", cfg.L0);
  opt_int("denom_bound", cfg.denom_bound);
  opt_int("denom_ceiling", cfg.denom_ceiling);
  if (task.contains("M")) cfg.M = positive_of(task["M"], path + ".M");
  if (task.contains("toy_override")) {
    if (!task["toy_override"].is_boolean()) config_error(path + ".toy_override", "expected a boolean");
    cfg.toy_override = task["toy_override"].get<bool>();
  }
  auto windows = [&](const char* key) {
    std::vector<std::vector<SplitPrime>> out;
    if (task.contains(key))
      out = list_of<std::vector<SplitPrime>>(task[key], path + "." + key, primes_of);
    return out;
  };
  cfg.windows = windows("windows");
  cfg.k_windows = windows("k_windows");
  if (task.contains("omega_prime")) {
    const json& w = task["omega_prime"];
    const std::string wp = path + ".omega_prime";
    cfg.omega_prime = Envelope{rational_of(need(w, "lo", wp), wp + ".lo"), rational_of(need(w, "hi", wp), wp + ".hi"), n};
  }
  if (!validate) return cfg;
  try {
    cfg.validate(n);
  } catch (const Error& e) {
    config_error(path, e.what());
  }
  return cfg;
}

AmplificationInput amplification_of(const json& a, const std::string& path) {
  AmplificationInput in;
  in.L = real_of(need(a, "L", path), path + ".L");
  in.P_size = real_of(need(a, "P_size", path), path + ".P_size");
  if (a.contains("d_mu_star")) in.d_mu_star = real_of(a["d_mu_star"], path + ".d_mu_star");
  if (a.contains("kappa")) in.kappa = real_of(a["kappa"], path + ".kappa");
  if (a.contains("K_amp")) in.K_amp = real_of(a["K_amp"], path + ".K_amp");
  if (a.contains("n")) in.n = positive_of(a["n"], path + ".n");
  if (a.contains("counts")) {
    const json& cs = a["counts"];
    if (!cs.is_array()) config_error(path + ".counts", "expected a list");
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const std::string cp = path + ".counts[" + std::to_string(k) + "]";
      in.counts.push_back(CountCell{prime_of(need(cs[k], "pi", cp), cp + ".pi"),
                                    prime_of(need(cs[k], "pi2", cp), cp + ".pi2"),
                                    static_cast<unsigned>(positive_of(need(cs[k], "nu", cp), cp + ".nu")),
                                    real_of(need(cs[k], "count", cp), cp + ".count")});
    }
  }
  if (!(in.P_size >= 1)) config_error(path + ".P_size", "must be >= 1");
  if (!(in.L >= 2)) config_error(path + ".L", "must be >= 2");
  return in;
}

ExperimentTask task_of(const json& t, const std::string& path, std::uint64_t seed) {
  ExperimentTask task;
  const json& id = need(t, "id", path);
  if (!id.is_string() || id.get<std::string>().empty()) config_error(path + ".id", "expected a non-empty string");
  task.id = id.get<std::string>();
  const json& type = need(t, "type", path);
  if (!type.is_string()) config_error(path + ".type", "expected a string");
  task.type = type.get<std::string>();
  if (task.type == "count") {
    CountTask c;
    c.q = form_of(t, path, seed);
    check_form(c.q, path);
    c.pis = primes_of(need(t, "pi", path), path + ".pi");
    c.pi2s = t.contains("pi2") ? primes_of(t["pi2"], path + ".pi2") : c.pis;
    c.nus = nus_of(need(t, "nu", path), path + ".nu", c.q.n());
    if (t.contains("M") && !(t["M"].is_string() && t["M"].get<std::string>() == "EXACT"))
      c.M = positive_of(t["M"], path + ".M");
    c.ms = ms_of(t, path);
    if (c.M)
      for (const auto& m : c.ms)
        if (m != GaussInt(1)) config_error(path + ".m", "finite M requires m = 1");
    if (t.contains("expect")) {
      if (!t["expect"].is_number_integer() || t["expect"].get<long long>() < 0) config_error(path + ".expect", "expected a non-negative integer");
      c.expect = t["expect"].get<std::size_t>();
    }
    task.body = std::move(c);
  } else if (task.type == "one_prime") {
    OnePrimeTask c;
    c.q = form_of(t, path, seed);
    check_form(c.q, path);
    c.pis = primes_of(need(t, "pi", path), path + ".pi");
    c.nus = nus_of(need(t, "nu", path), path + ".nu", c.q.n());
    c.ms = ms_of(t, path);
    if (t.contains("C")) {
      c.opt.C = real_of(t["C"], path + ".C");
      c.bound_configured = true;
    }
    if (t.contains("eps")) c.opt.eps = real_of(t["eps"], path + ".eps");
    if (t.contains("kappa")) c.opt.kappa = real_of(t["kappa"], path + ".kappa");
    task.body = std::move(c);
  } else if (task.type == "two_primes") {
    TwoPrimesTask c;
    c.q = form_of(t, path, seed);
    check_form(c.q, path);
    if (!c.q.is_diagonal()) config_error(path + ".q", "two_primes needs a diagonal form");
    c.pis = primes_of(need(t, "pi", path), path + ".pi");
    c.pi2s = primes_of(need(t, "pi2", path), path + ".pi2");
    c.nus = nus_of(need(t, "nu", path), path + ".nu", c.q.n());
    c.ms = ms_of(t, path);
    task.body = std::move(c);
  } else if (task.type == "polarization") {
    PolarizationTask c{prime_of(need(t, "pi", path), path + ".pi"), {}, {}};
    c.ns = list_of<std::size_t>(need(t, "n", path), path + ".n", [](const json& v, const std::string& p) {
      const auto n = positive_of(v, p);
      if (n < 2 || n > 4) config_error(p, "n must lie in [2, 4]");
      return static_cast<std::size_t>(n);
    });
    c.rhos = list_of<unsigned>(need(t, "rho", path), path + ".rho", [](const json& v, const std::string& p) {
      return static_cast<unsigned>(positive_of(v, p));
    });
    task.body = std::move(c);
  } else if (task.type == "pipeline") {
    PipelineTask c;
    c.q = form_of(t, path, seed);
    check_form(c.q, path);
    c.primes = primes_of(need(t, "primes", path), path + ".primes");
    c.cfg = endgame_of(t, path, c.q.n());
    task.body = std::move(c);
  } else if (task.type == "diag") {
    DiagTask c;
    if (t.contains("d_lambda"))
      c.d_lambda_inputs = list_of<std::vector<Rational>>(t["d_lambda"], path + ".d_lambda",
                                                         [](const json& v, const std::string& p) {
                                                           auto mu = list_of<Rational>(v, p, rational_of);
                                                           Rational s = 0;
                                                           for (const auto& x : mu) s += x;
                                                           if (s != 0) config_error(p, "entries must sum to 0");
                                                           return mu;
                                                         });
    if (t.contains("amplification")) c.amplification = amplification_of(t["amplification"], path + ".amplification");
    if (t.contains("threshold")) {
      const json& th = t["threshold"];
      const std::string tp = path + ".threshold";
      c.threshold_n = th.contains("n") ? positive_of(th["n"], tp + ".n") : 2;
      c.threshold = endgame_of(th, tp, c.threshold_n, false);
    }
    task.body = std::move(c);
  } else {
    config_error(path + ".type", "unknown task type '" + task.type + "'");
  }
  return task;
}

}  // namespace

ExperimentConfig parse_config(const json& j, std::uint64_t seed) {
  ExperimentConfig cfg;
  if (!j.is_object()) config_error("config", "expected an object");
  const json& sv = need(j, "schema_version", "config");
  if (!sv.is_number_integer() || sv.get<int>() != 1) config_error("config.schema_version", "only version 1 is supported");
  if (j.contains("inject_fault")) {
    if (!j["inject_fault"].is_boolean()) config_error("config.inject_fault", "expected a boolean");
    cfg.inject_fault = j["inject_fault"].get<bool>();
  }
  if (j.contains("jobs")) {
    if (!j["jobs"].is_number_integer() || j["jobs"].get<long long>() < 0) config_error("config.jobs", "expected a non-negative integer");
    cfg.jobs = j["jobs"].get<int>();
  }
  const json& tasks = need(j, "tasks", "config");
  if (!tasks.is_array() || tasks.empty()) config_error("config.tasks", "expected a non-empty list");
  std::set<std::string> ids;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    cfg.tasks.push_back(task_of(tasks[k], "config.tasks[" + std::to_string(k) + "]", seed + k));
    if (!ids.insert(cfg.tasks.back().id).second)
      config_error("config.tasks[" + std::to_string(k) + "].id", "duplicate id '" + cfg.tasks.back().id + "'");
  }
  return cfg;
}

namespace {

struct CellResult {
  ResultRow row;
  json details;
  std::size_t soft_failures = 0;
};

struct Cell {
  std::string task_id;
  std::function<CellResult()> run;
};

std::string number_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string m_text(const std::optional<unsigned long long>& M) { return M ? std::to_string(*M) : "EXACT"; }

std::size_t soft_failures_of(const std::vector<Check>& checks) {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const Check& c) { return !c.hard && !c.pass; }));
}

bool wanted(const std::string& type, Subcommand s) {
  switch (s) {
    case Subcommand::kCount: return type == "count";
    case Subcommand::kVerify: return type == "one_prime" || type == "two_primes" || type == "polarization";
    case Subcommand::kPipeline: return type == "pipeline";
    case Subcommand::kDiag: return type == "diag";
  }
  return false;
}

std::string cell_id(const std::string& task, std::size_t k) { return task + "#" + std::to_string(k); }

void add_cells(const ExperimentTask& task, const ExperimentConfig& cfg, std::vector<Cell>& cells) {
  const std::string& id = task.id;
  std::size_t k = 0;
  if (const auto* c = std::get_if<CountTask>(&task.body)) {
    for (const auto& pi : c->pis)
      for (const auto& pi2 : c->pi2s)
        for (unsigned nu : c->nus)
          for (const auto& m : c->ms)
            cells.push_back({id, [c, pi, pi2, nu, m, qid = cell_id(id, k++)] {
                               CountQuery query{c->q, HeckeCosetSpec{pi, pi2, nu, c->q.n()}, c->M, m};
                               const EnumerationResult res = enumerate_S(query, 1);
                               CellResult out;
                               out.row = {qid, c->q.n(), form_hash(c->q), to_string(pi.pi()), to_string(pi2.pi()),
                                          std::to_string(nu), m_text(c->M), std::to_string(res.members.size()), "",
                                          true, std::nullopt};
                               out.details = to_json(res);
                               out.details["m"] = to_string(m);
                               if (c->expect) {
                                 out.row.pass = res.members.size() == *c->expect;
                                 out.details["expect"] = *c->expect;
                               }
                               return out;
                             }});
  } else if (const auto* c = std::get_if<OnePrimeTask>(&task.body)) {
    for (const auto& pi : c->pis)
      for (unsigned nu : c->nus)
        for (const auto& m : c->ms)
          cells.push_back({id, [c, pi, nu, m, qid = cell_id(id, k++)] {
                             OnePrimeOptions opt = c->opt;
                             opt.jobs = 1;
                             const VerificationReport rep = verify_one_prime_bound(c->q, pi, nu, m, opt);
                             CellResult out;
                             out.row = {qid, c->q.n(), form_hash(c->q), to_string(pi.pi()), to_string(pi.pi()),
                                        std::to_string(nu), "EXACT", std::to_string(rep.count),
                                        c->bound_configured && rep.bound ? number_text(*rep.bound) : "", rep.pass,
                                        std::nullopt};
                             out.details = rep.to_json();
                             out.soft_failures = soft_failures_of(rep.checks);
                             return out;
                           }});
  } else if (const auto* c = std::get_if<TwoPrimesTask>(&task.body)) {
    for (const auto& pi : c->pis)
      for (const auto& pi2 : c->pi2s)
        for (unsigned nu : c->nus)
          for (const auto& m : c->ms)
            cells.push_back({id, [c, pi, pi2, nu, m, qid = cell_id(id, k++)] {
                               const VerificationReport rep = verify_two_primes_empty(c->q, pi, pi2, nu, m, 1);
                               CellResult out;
                               out.row = {qid, c->q.n(), form_hash(c->q), to_string(pi.pi()), to_string(pi2.pi()),
                                          std::to_string(nu), "EXACT", std::to_string(rep.count), "", rep.pass,
                                          std::nullopt};
                               out.details = rep.to_json();
                               out.soft_failures = soft_failures_of(rep.checks);
                               return out;
                             }});
  } else if (const auto* c = std::get_if<PolarizationTask>(&task.body)) {
    for (std::size_t n : c->ns)
      for (unsigned rho : c->rhos)
        cells.push_back({id, [c, n, rho, qid = cell_id(id, k++)] {
                           const auto forms = polarization_fixtures(n);
                           const PolarizationSweep s = polarization_sweep_parallel(forms, c->pi, n, rho, 1);
                           CellResult out;
                           out.row = {qid, n, "", to_string(c->pi.pi()), "", std::to_string(rho), "",
                                      std::to_string(s.pairs), "", s.violations == 0, std::nullopt};
                           out.details = {{"n", n},           {"rho", rho},         {"p", to_string(s.p)},
                                          {"forms", forms.size()}, {"vectors", s.vectors}, {"pairs", s.pairs},
                                          {"checks", s.checks},    {"violations", s.violations},
                                          {"failures", s.failures}};
                           return out;
                         }});
  } else if (const auto* c = std::get_if<PipelineTask>(&task.body)) {
    const bool fault = cfg.inject_fault;
    cells.push_back({id, [c, fault, qid = cell_id(id, 0)] {
                       EndgameConfig ec = c->cfg;
                       ec.inject_fault = ec.inject_fault || fault;
                       ec.jobs = 1;
                       const PipelineTrace tr = run_pipeline(c->q, ec, c->primes);
                       std::size_t q3 = 0, qm = 0;
                       for (const auto& rec : tr.chain) {
                         qm += rec.count_m;
                         q3 += rec.count_q3;
                       }
                       CellResult out;
                       out.row = {qid, c->q.n(), form_hash(c->q), "", "", "", std::to_string(ec.M), std::to_string(qm),
                                  std::to_string(q3), tr.pass, std::nullopt};
                       out.details = tr.to_json();
                       out.soft_failures = soft_failures_of(tr.checks);
                       return out;
                     }});
  } else if (const auto* c = std::get_if<DiagTask>(&task.body)) {
    for (const auto& mu : c->d_lambda_inputs)
      cells.push_back({id, [mu, qid = cell_id(id, k++)] {
                         std::vector<double> mu_f;
                         json entries = json::array();
                         for (const auto& x : mu) {
                           mu_f.push_back(static_cast<double>(x));
                           entries.push_back(to_string(x));
                         }
                         const Rational exact = d_lambda_exact(mu);
                         const double approx = d_lambda(mu_f);
                         CellResult out;
                         out.row = {qid, mu.size(), "", "", "", "", "", to_string(exact), "", true, std::nullopt};
                         out.details = {{"kind", "d_lambda"}, {"mu", entries}, {"exact", to_string(exact)},
                                        {"float", approx}};
                         return out;
                       }});
    if (c->amplification)
      cells.push_back({id, [in = *c->amplification, qid = cell_id(id, k++)] {
                         const double v = amplification_diagnostic(in);
                         CellResult out;
                         out.row = {qid, in.n, "", "", "", "", "", number_text(v), "", true, std::nullopt};
                         out.details = {{"kind", "amplification"}, {"value", v}, {"L", in.L}, {"P_size", in.P_size},
                                        {"d_mu_star", in.d_mu_star}, {"kappa", in.kappa}, {"K_amp", in.K_amp},
                                        {"cells", in.counts.size()}};
                         return out;
                       }});
    if (c->threshold)
      cells.push_back({id, [ec = *c->threshold, n = c->threshold_n, qid = cell_id(id, k++)] {
                         const Integer t = m_threshold(ec, n);
                         CellResult out;
                         out.row = {qid, n, "", "", "", "", std::to_string(ec.M), to_string(t), "", true, std::nullopt};
                         out.details = {{"kind", "threshold"}, {"threshold", to_string(t)}, {"M", ec.M},
                                        {"valid", validate_M(ec, n)}};
                         return out;
                       }});
  }
}

}  // namespace

RunOutcome run_experiments(const ExperimentConfig& cfg, const RunOptions& opt) {
  std::vector<Cell> cells;
  json skipped = json::array();
  for (const auto& task : cfg.tasks) {
    if (wanted(task.type, opt.subcommand))
      add_cells(task, cfg, cells);
    else
      skipped.push_back(task.id);
  }
  std::vector<CellResult> results(cells.size());
  const int threads = opt.jobs > 0 ? opt.jobs : (cfg.jobs > 0 ? cfg.jobs : omp_get_max_threads());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    try {
      results[k] = cells[k].run();
    } catch (const std::exception& e) {
      results[k].row.query_id = cell_id(cells[k].task_id, k);
      results[k].row.pass = false;
      results[k].details = {{"error", e.what()}};
    }
    if (opt.timing)
      results[k].row.millis =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }

  RunOutcome out;
  json tasks = json::array();
  for (std::size_t k = 0; k < cells.size(); ++k) {
    CellResult& r = results[k];
    if (!r.row.pass) ++out.hard_failures;
    out.soft_failures += r.soft_failures;
    if (tasks.empty() || tasks.back()["id"] != cells[k].task_id)
      tasks.push_back({{"id", cells[k].task_id}, {"cells", json::array()}});
    r.details["query_id"] = r.row.query_id;
    r.details["pass"] = r.row.pass;
    tasks.back()["cells"].push_back(std::move(r.details));
    out.rows.push_back(std::move(r.row));
  }
  out.summary = {{"schema_version", 1},
                 {"subcommand", to_string(opt.subcommand)},
                 {"seed", opt.seed},
                 {"inject_fault", cfg.inject_fault},
                 {"rows", out.rows.size()},
                 {"hard_failures", out.hard_failures},
                 {"soft_failures", out.soft_failures},
                 {"pass", out.pass()},
                 {"skipped_tasks", skipped},
                 {"tasks", tasks}};
  return out;
}

std::string csv_header() { return "query_id,n,Q_hash,pi,pi2,nu,M,count,bound,pass,millis"; }

std::string to_csv(const ResultRow& r) {
  std::string out = r.query_id + "," + std::to_string(r.n) + "," + r.q_hash + "," + r.pi + "," + r.pi2 + "," + r.nu +
                    "," + r.M + "," + r.count + "," + r.bound + "," + (r.pass ? "true" : "false") + ",";
  if (r.millis) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *r.millis);
    out += buf;
  }
  return out;
}

void write_artifacts(const RunOutcome& outcome, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
  const fs::path base(dir);
  {
    std::ofstream csv(base / "results.csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + (base / "results.csv").string());
    csv << csv_header() << "\n";
    for (const auto& row : outcome.rows) csv << to_csv(row) << "\n";
    if (!csv) throw std::runtime_error("write failed: " + (base / "results.csv").string());
  }
  std::ofstream js(base / "summary.json", std::ios::binary);
  if (!js) throw std::runtime_error("cannot write " + (base / "summary.json").string());
  js << outcome.summary.dump(2) << "\n";
  if (!js) throw std::runtime_error("write failed: " + (base / "summary.json").string());
}

}  // namespace hecke
