// dampdyn: run, verify and list damped-dynamics scenarios.
//
// Exit codes: 0 success, 1 diagnostic failure, 2 config error, 3 divergence.

#include "dampdyn/catalog.hpp"
#include "dampdyn/config.hpp"
#include "dampdyn/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kConfigError = 2;

void print_result(const dampdyn::RunResult& res, bool wrote_files) {
  for (const auto& r : res.runs) {
    const char* verdict = r.diverged ? "DIVERGED" : r.passed() ? "PASS" : "FAIL";
    std::cout << r.label << ": " << verdict << "\n";
    for (const auto& o : r.observations) std::cout << "  " << o << "\n";
    for (const auto& c : r.checks)
      std::cout << "  " << c.name << ": " << (c.passed ? "PASS" : "FAIL") << " (" << c.detail << ")\n";
    if (!r.error.empty()) std::cout << "  error: " << r.error << "\n";
    if (wrote_files) std::cout << "  csv: " << r.csv.string() << "\n";
  }
  if (wrote_files) {
    std::cout << "summary: " << res.summary.string() << "\n";
    if (res.plot_script) std::cout << "plot script: " << res.plot_script->string() << "\n";
  }
}

void print_catalog() {
  for (const auto& e : dampdyn::catalog()) {
    std::cout << e.id << "  dim=" << e.objective.dim;
    if (e.objective.mu) std::cout << "  mu=" << *e.objective.mu;
    std::cout << "  minimizers=";
    if (const auto* iv = std::get_if<dampdyn::Interval>(&e.minimizers)) {
      std::cout << "[" << iv->lo << ", " << iv->hi << "]";
    } else {
      std::cout << "{0}";
    }
    std::cout << "  hessian=" << (e.objective.has_hvp() ? "yes" : "no") << "\n";
  }
  std::cout << "parametric: pow(c,gamma)  strongquad(mu[,dim])  avd_family(alpha,gamma)  "
               "adige_v_family(gamma,r)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate and certify damped inertial gradient dynamics"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  int jobs = 1;
  auto* seed_opt = app.add_option("--seed", seed, "Seed for randomized diagnostics");
  app.add_option("--jobs", jobs, "Worker threads for sweep points")->check(CLI::PositiveNumber);

  std::string config_path;
  std::string out_dir;
  auto* sim = app.add_subcommand("simulate", "Integrate a dynamics scenario");
  auto* alg = app.add_subcommand("algorithm", "Run a discrete algorithm scenario");
  auto* ver = app.add_subcommand("verify", "Re-check diagnostics from written CSVs");
  app.add_subcommand("catalog", "List the problem catalog");
  for (auto* sub : {sim, alg, ver}) {
    sub->add_option("config", config_path, "Scenario config file")->required();
    sub->add_option("-o,--out", out_dir, "Output directory (default runs/<name>)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  if (app.got_subcommand("catalog")) {
    print_catalog();
    return 0;
  }

  dampdyn::ScenarioConfig cfg;
  try {
    cfg = dampdyn::load_config(config_path);
  } catch (const dampdyn::ConfigError& e) {
    for (const auto& m : e.errors) std::cerr << config_path << ": " << m << "\n";
    return kConfigError;
  }
  const bool algo = dampdyn::is_algorithm(cfg.system);
  if (sim->parsed() && algo) {
    std::cerr << config_path << ": system " << dampdyn::system_name(cfg.system)
              << " is an algorithm; use 'algorithm'\n";
    return kConfigError;
  }
  if (alg->parsed() && !algo) {
    std::cerr << config_path << ": system " << dampdyn::system_name(cfg.system)
              << " is a dynamics system; use 'simulate'\n";
    return kConfigError;
  }

  dampdyn::RunOptions opts;
  opts.jobs = jobs;
  if (seed_opt->count() > 0) opts.seed = seed;
  const dampdyn::fs::path dir = out_dir.empty() ? dampdyn::fs::path("runs") / cfg.name : dampdyn::fs::path(out_dir);
  try {
    if (ver->parsed()) {
      const auto res = dampdyn::verify(cfg, dir, opts);
      print_result(res, false);
      return res.exit_code();
    }
    const auto res = dampdyn::run(cfg, dir, opts);
    print_result(res, true);
    return res.exit_code();
  } catch (const dampdyn::ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
