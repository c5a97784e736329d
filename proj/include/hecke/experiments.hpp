#pragma once

// Configuration-driven experiment runner: counting tables, verification suites,
// pipeline runs and the diagnostic formulas, emitted as CSV rows plus a JSON summary.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hecke/pipeline.hpp"

namespace hecke {

/// prod_{j<k} (1 + |mu_j - mu_k|)^2. Throws kInvalidArgument unless the entries sum to 0 within tol.
double d_lambda(const std::vector<double>& mu, double tol = 1e-9);
/// Exact version; the sum must be exactly 0.
Rational d_lambda_exact(const std::vector<Rational>& mu);

struct CountCell {
  SplitPrime pi;
  SplitPrime pi2;
  unsigned nu = 1;
  double count = 0;
};

struct AmplificationInput {
  std::vector<CountCell> counts;
  double L = 2;
  double P_size = 1;
  double d_mu_star = 1;
  double kappa = 1;
  double K_amp = 0;
  std::size_t n = 2;
};

/// 1/P + d^{-kappa} L^{K} + sum_nu (1/P^2) sum_{pi,pi2} count / L^{nu(n-1)}.
/// Throws kInvalidArgument unless P_size >= 1 and L >= 2.
double amplification_diagnostic(const AmplificationInput& in);

/// 64-bit FNV-1a of the compact JSON form of q, as 16 hex digits.
std::string form_hash(const SelfAdjointMatrix& q);

enum class Subcommand { kCount, kVerify, kPipeline, kDiag };
Subcommand parse_subcommand(const std::string& name);
const char* to_string(Subcommand s);

struct CountTask {
  SelfAdjointMatrix q;
  std::vector<SplitPrime> pis, pi2s;
  std::vector<unsigned> nus;
  std::optional<unsigned long long> M;
  std::vector<GaussInt> ms;
  std::optional<std::size_t> expect;
};

struct OnePrimeTask {
  SelfAdjointMatrix q;
  std::vector<SplitPrime> pis;
  std::vector<unsigned> nus;
  std::vector<GaussInt> ms;
  OnePrimeOptions opt;
  bool bound_configured = false;
};

struct TwoPrimesTask {
  SelfAdjointMatrix q;
  std::vector<SplitPrime> pis, pi2s;
  std::vector<unsigned> nus;
  std::vector<GaussInt> ms;
};

struct PolarizationTask {
  SplitPrime pi;
  std::vector<std::size_t> ns;
  std::vector<unsigned> rhos;
};

struct PipelineTask {
  SelfAdjointMatrix q;
  std::vector<SplitPrime> primes;
  EndgameConfig cfg;
};

struct DiagTask {
  std::vector<std::vector<Rational>> d_lambda_inputs;
  std::optional<AmplificationInput> amplification;
  std::optional<EndgameConfig> threshold;  // T, D, E, M
  std::size_t threshold_n = 2;
};

struct ExperimentTask {
  std::string id;
  std::string type;
  std::variant<CountTask, OnePrimeTask, TwoPrimesTask, PolarizationTask, PipelineTask, DiagTask> body;
};

struct ExperimentConfig {
  int schema_version = 1;
  std::vector<ExperimentTask> tasks;
  bool inject_fault = false;
  int jobs = 0;
};

/// Parses and validates; throws kParse or kInvalidArgument with the offending field path.
/// The seed drives envelope-sampled forms.
ExperimentConfig parse_config(const nlohmann::json& j, std::uint64_t seed = 0);

struct ResultRow {
  std::string query_id;
  std::size_t n = 0;
  std::string q_hash;
  std::string pi, pi2;
  std::string nu;
  std::string M;
  std::string count;
  std::string bound;  // empty unless constants are configured
  bool pass = true;
  std::optional<double> millis;
};

struct RunOptions {
  Subcommand subcommand = Subcommand::kCount;
  int jobs = 0;
  bool timing = false;
  std::uint64_t seed = 0;
};

struct RunOutcome {
  std::vector<ResultRow> rows;
  nlohmann::json summary;
  std::size_t hard_failures = 0;
  std::size_t soft_failures = 0;

  bool pass() const { return hard_failures == 0; }
};

RunOutcome run_experiments(const ExperimentConfig& cfg, const RunOptions& opt);

std::string csv_header();
std::string to_csv(const ResultRow& row);
/// Writes results.csv and summary.json under dir (created if missing). Throws std::runtime_error on I/O failure.
void write_artifacts(const RunOutcome& outcome, const std::string& dir);

}  // namespace hecke
