#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "hecke/experiments.hpp"
#include "test_util.hpp"

using namespace hecke;
using namespace hecke::testing;
using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hecke_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

json mat(const char* a, const char* b, const char* c, const char* d) {
  return json::array({json::array({a, b}), json::array({c, d})});
}

json config_with(json task) { return {{"schema_version", 1}, {"tasks", json::array({std::move(task)})}}; }

}  // namespace

TEST_CASE("d_lambda examples") {
  CHECK(d_lambda({0, 0}) == 1);
  CHECK(d_lambda({1, -1}) == 9);
  CHECK(d_lambda({1, 0, -1}) == 144);
  CHECK(d_lambda_exact({q(1), q(-1)}) == 9);
  CHECK(d_lambda_exact({q(1), q(0), q(-1)}) == 144);
  CHECK(d_lambda_exact({q(1, 2), q(-1, 2)}) == 4);
  CHECK_THROWS_AS(d_lambda({1, 1}), Error);
  CHECK_THROWS_AS(d_lambda_exact({q(1), q(0)}), Error);
}

TEST_CASE("d_lambda is invariant under permutations") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> num(-20, 20), den(1, 6);
  for (std::size_t n = 2; n <= 4; ++n)
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Rational> mu;
      Rational sum = 0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        mu.push_back(q(num(rng), den(rng)));
        sum += mu.back();
      }
      mu.push_back(-sum);
      const Rational base = d_lambda_exact(mu);
      std::vector<double> mu_f;
      for (const auto& x : mu) mu_f.push_back(static_cast<double>(x));
      const double base_f = d_lambda(mu_f);
      CHECK(base_f == doctest::Approx(static_cast<double>(base)).epsilon(1e-12));
      std::vector<std::size_t> perm(n);
      for (std::size_t k = 0; k < n; ++k) perm[k] = k;
      while (std::next_permutation(perm.begin(), perm.end())) {
        std::vector<Rational> p;
        for (auto k : perm) p.push_back(mu[k]);
        CHECK(d_lambda_exact(p) == base);
      }
    }
}

TEST_CASE("amplification diagnostic") {
  AmplificationInput zero;
  zero.P_size = 10;
  zero.L = 5;
  zero.counts = {{SplitPrime::above(5), SplitPrime::above(13), 1, 0}};
  CHECK(amplification_diagnostic(zero) == doctest::Approx(1.1));

  AmplificationInput one;
  one.P_size = 1;
  one.L = 5;
  one.d_mu_star = 1e300;
  one.counts = {{SplitPrime::above(5), SplitPrime::above(5), 1, 4}};
  CHECK(amplification_diagnostic(one) == doctest::Approx(1.8));

  AmplificationInput doubled = one;
  for (auto& c : doubled.counts) c.count *= 2;
  const double third = amplification_diagnostic(one) - 1;
  CHECK(amplification_diagnostic(doubled) - 1 == doctest::Approx(2 * third));

  AmplificationInput bad = one;
  bad.P_size = 0.5;
  CHECK_THROWS_AS(amplification_diagnostic(bad), Error);
  bad = one;
  bad.L = 1;
  CHECK_THROWS_AS(amplification_diagnostic(bad), Error);
}

TEST_CASE("form hash is stable and distinguishes forms") {
  const auto a = self_adjoint_from_json(mat("1", "0", "0", "5"));
  CHECK(form_hash(a) == form_hash(self_adjoint_from_json(mat("1", "0", "0", "5"))));
  CHECK(form_hash(a) != form_hash(SelfAdjointMatrix::identity(2)));
  CHECK(form_hash(a).size() == 16);
}

TEST_CASE("config validation reports the field") {
  auto message = [](const json& j) {
    try {
      parse_config(j);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(json::object()).find("schema_version") != std::string::npos);
  CHECK(message({{"schema_version", 2}, {"tasks", json::array()}}).find("schema_version") != std::string::npos);
  CHECK(message({{"schema_version", 1}, {"tasks", json::array()}}).find("config.tasks") != std::string::npos);
  json count = {{"id", "c"}, {"type", "count"}, {"q", mat("1", "0", "0", "1")}, {"pi", {"2+i"}}, {"nu", {1}}};
  CHECK(message(config_with(count)).empty());
  json bad = count;
  bad["pi"] = {"3+i"};
  CHECK(message(config_with(bad)).find("config.tasks[0].pi[0]") != std::string::npos);
  bad = count;
  bad["nu"] = {3};
  CHECK(message(config_with(bad)).find("config.tasks[0].nu[0]") != std::string::npos);
  bad = count;
  bad["q"] = mat("1", "2", "0", "1");
  CHECK(message(config_with(bad)).find("config.tasks[0].q") != std::string::npos);
  bad = count;
  bad["q"] = mat("-1", "0", "0", "1");
  CHECK(message(config_with(bad)).find("positive definite") != std::string::npos);
  bad = count;
  bad["type"] = "nope";
  CHECK(message(config_with(bad)).find("config.tasks[0].type") != std::string::npos);
  bad = count;
  bad["M"] = 3;
  bad["m"] = {"3"};
  CHECK(message(config_with(bad)).find("config.tasks[0].m") != std::string::npos);
  json pipe = {{"id", "p"}, {"type", "pipeline"}, {"q", mat("1", "0", "0", "1")}, {"primes", {"2+i"}}, {"E", 32}};
  CHECK(message(config_with(pipe)).find("endgame.E") != std::string::npos);
  json dup = {{"schema_version", 1}, {"tasks", {count, count}}};
  CHECK(message(dup).find("duplicate") != std::string::npos);
}

TEST_CASE("q specification by point and by envelope sample") {
  json point = {{"id", "p"},
                {"type", "count"},
                {"q", {{"point", mat("2", "0", "0", "1")}}},
                {"pi", {"2+i"}},
                {"nu", {1}}};
  const auto cfg = parse_config(config_with(point));
  const auto& c = std::get<CountTask>(cfg.tasks[0].body);
  CHECK(c.q == SelfAdjointMatrix::diagonal({q(1, 2), q(2)}));

  json env = point;
  env["q"] = {{"envelope", {{"n", 3}, {"lo", "1"}, {"hi", "3"}, {"denominator", 4}}}};
  const auto a = std::get<CountTask>(parse_config(config_with(env), 7).tasks[0].body).q;
  const auto b = std::get<CountTask>(parse_config(config_with(env), 7).tasks[0].body).q;
  CHECK(a == b);
  CHECK(a.n() == 3);
  CHECK(a.is_diagonal());
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(a.diag(k) >= 1);
    CHECK(a.diag(k) <= 3);
    CHECK(denominator(Rational(a.diag(k) * 4)) == 1);
  }
}

TEST_CASE("count run: fixtures and deterministic CSV") {
  json cfg_json = {{"schema_version", 1},
                   {"tasks",
                    {{{"id", "d15"},
                      {"type", "count"},
                      {"q", mat("1", "0", "0", "5")},
                      {"pi", {"2+i"}},
                      {"nu", {1}},
                      {"expect", 4}},
                     {{"id", "id"},
                      {"type", "count"},
                      {"q", mat("1", "0", "0", "1")},
                      {"pi", {"2+i"}},
                      {"nu", {1}},
                      {"expect", 0}}}}};
  const auto cfg = parse_config(cfg_json);
  RunOptions opt;
  opt.subcommand = Subcommand::kCount;
  const auto a = run_experiments(cfg, opt);
  REQUIRE(a.rows.size() == 2);
  CHECK(a.pass());
  CHECK(a.rows[0].count == "4");
  CHECK(a.rows[1].count == "0");
  CHECK(a.rows[0].bound.empty());
  CHECK(to_csv(a.rows[0]) == "d15#0,2," + form_hash(self_adjoint_from_json(mat("1", "0", "0", "5"))) + ",2+1i,2+1i,1,EXACT,4,,true,");
  opt.jobs = 1;
  const auto b = run_experiments(cfg, opt);
  const auto da = scratch("count_a"), db = scratch("count_b");
  write_artifacts(a, da.string());
  write_artifacts(b, db.string());
  CHECK(read_file(da / "results.csv") == read_file(db / "results.csv"));
  CHECK(read_file(da / "summary.json") == read_file(db / "summary.json"));
  CHECK(read_file(da / "results.csv").rfind(csv_header() + "\n", 0) == 0);

  json wrong = cfg_json;
  wrong["tasks"][1]["expect"] = 1;
  const auto c = run_experiments(parse_config(wrong), opt);
  CHECK(!c.pass());
  CHECK(c.hard_failures == 1);

  opt.subcommand = Subcommand::kDiag;
  const auto d = run_experiments(cfg, opt);
  CHECK(d.rows.empty());
  CHECK(d.summary["skipped_tasks"].size() == 2);
}

TEST_CASE("verify run: one prime bound is reported only when configured") {
  json t = {{"id", "d15"}, {"type", "one_prime"}, {"q", mat("1", "0", "0", "5")}, {"pi", {"2+i"}}, {"nu", {1}}};
  RunOptions opt;
  opt.subcommand = Subcommand::kVerify;
  const auto plain = run_experiments(parse_config(config_with(t)), opt);
  REQUIRE(plain.rows.size() == 1);
  CHECK(plain.rows[0].count == "4");
  CHECK(plain.rows[0].bound.empty());
  CHECK(plain.pass());
  t["C"] = 10;
  const auto bounded = run_experiments(parse_config(config_with(t)), opt);
  CHECK(!bounded.rows[0].bound.empty());
  CHECK(std::stod(bounded.rows[0].bound) == doctest::Approx(10 * std::pow(5.0, 1.5)));
}

TEST_CASE("verify run: two primes and polarization") {
  json two = {{"id", "t"},   {"type", "two_primes"}, {"q", mat("1", "0", "0", "2")},
              {"pi", {"2+i"}}, {"pi2", {"3+2i"}},    {"nu", {1, 2}}, {"m", {"1", "3"}}};
  json pol = {{"id", "p"}, {"type", "polarization"}, {"pi", "2+i"}, {"n", {2}}, {"rho", {1}}};
  json cfg = {{"schema_version", 1}, {"tasks", {two, pol}}};
  RunOptions opt;
  opt.subcommand = Subcommand::kVerify;
  const auto out = run_experiments(parse_config(cfg), opt);
  REQUIRE(out.rows.size() == 5);
  for (std::size_t k = 0; k < 4; ++k) CHECK(out.rows[k].count == "0");
  CHECK(out.rows[4].query_id == "p#0");
  CHECK(out.rows[4].pass);
  CHECK(out.pass());
  CHECK(out.summary["tasks"][1]["cells"][0]["violations"] == 0);
}

TEST_CASE("diag run") {
  json t = {{"id", "d"},
            {"type", "diag"},
            {"d_lambda", {{"1", "-1"}, {"1", "0", "-1"}}},
            {"threshold", {{"T", 10}, {"D", 2}, {"E", 2}, {"M", 40960}}}};
  RunOptions opt;
  opt.subcommand = Subcommand::kDiag;
  const auto out = run_experiments(parse_config(config_with(t)), opt);
  REQUIRE(out.rows.size() == 3);
  CHECK(out.rows[0].count == "9");
  CHECK(out.rows[1].count == "144");
  CHECK(out.rows[2].count == "40961");
  CHECK(out.summary["tasks"][0]["cells"][2]["valid"] == false);
}

TEST_CASE("pipeline run: fault injection flips the outcome") {
  json t = {{"id", "p"}, {"type", "pipeline"}, {"q", mat("1", "0", "0", "1")}, {"primes", {"2+i"}}};
  RunOptions opt;
  opt.subcommand = Subcommand::kPipeline;
  json cfg = config_with(t);
  const auto good = run_experiments(parse_config(cfg), opt);
  REQUIRE(good.rows.size() == 1);
  CHECK(good.pass());
  cfg["inject_fault"] = true;
  const auto bad = run_experiments(parse_config(cfg), opt);
  CHECK(!bad.pass());
  CHECK(bad.summary["inject_fault"] == true);
}

TEST_CASE("write_artifacts reports I/O failure") {
  const auto blocker = scratch("blocker");
  std::ofstream(blocker.string()) << "x";
  RunOutcome empty;
  CHECK_THROWS(write_artifacts(empty, (blocker / "sub").string()));
  std::filesystem::remove(blocker);
}
