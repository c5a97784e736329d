#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hecke/experiments.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kHardFailure = 1;
constexpr int kConfigError = 2;
constexpr int kIoError = 3;

struct Args {
  std::string config;
  std::string out;
  int jobs = -1;
  std::uint64_t seed = 0;
  bool timing = false;
};

void add_common(CLI::App* sub, Args& args) {
  sub->add_option("--config", args.config, "JSON experiment config")->required();
  sub->add_option("--out", args.out, "output directory for results.csv and summary.json")->required();
  sub->add_option("--jobs", args.jobs, "worker threads (0: all cores; default from HECKE_JOBS)");
  sub->add_option("--seed", args.seed, "seed for sampled forms");
  sub->add_flag("--timing", args.timing, "fill the millis column");
}

int run(const std::string& name, const Args& args) {
  std::ifstream in(args.config);
  if (!in) {
    std::cerr << "error: cannot read " << args.config << "\n";
    return kIoError;
  }
  std::stringstream text;
  text << in.rdbuf();
  hecke::ExperimentConfig cfg;
  try {
    cfg = hecke::parse_config(nlohmann::json::parse(text.str()), args.seed);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const hecke::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  hecke::RunOptions opt;
  opt.subcommand = hecke::parse_subcommand(name);
  opt.seed = args.seed;
  opt.timing = args.timing;
  opt.jobs = args.jobs;
  if (opt.jobs < 0) {
    opt.jobs = 0;
    if (const char* env = std::getenv("HECKE_JOBS")) {
      try {
        opt.jobs = std::stoi(env);
      } catch (const std::exception&) {
        std::cerr << "config error: HECKE_JOBS must be an integer\n";
        return kConfigError;
      }
      if (opt.jobs < 0) {
        std::cerr << "config error: HECKE_JOBS must be non-negative\n";
        return kConfigError;
      }
    }
  }

  const hecke::RunOutcome outcome = hecke::run_experiments(cfg, opt);
  try {
    hecke::write_artifacts(outcome, args.out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  }
  std::cout << name << ": " << outcome.rows.size() << " rows, " << outcome.hard_failures << " hard failures, "
            << outcome.soft_failures << " soft failures\n";
  return outcome.pass() ? kOk : kHardFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hecke set counting, verification and pipeline experiments"};
  app.require_subcommand(1);
  Args args;
  for (const char* name : {"count", "verify", "pipeline", "diag"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " tasks of a config");
    add_common(sub, args);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  return run(app.get_subcommands().front()->get_name(), args);
}
