// Command-line driver: simulate (Monte Carlo suites), bounds (closed-form
// reports and figure data), check (re-run property checks on a trace file).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "backbone/config.hpp"
#include "backbone/metrics.hpp"
#include "backbone/suite.hpp"
#include "backbone/version.hpp"

namespace fs = std::filesystem;

namespace {

std::ifstream open_or_die(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw backbone::config_error("cannot open file: " + path);
  return in;
}

int cmd_simulate(const std::string& spec_file, std::optional<std::uint64_t> seed_base,
                 std::optional<int> trials, std::optional<std::string> out, int jobs,
                 const std::string& format) {
  auto in = open_or_die(spec_file);
  backbone::ExperimentSpec spec = backbone::parse_experiment(in);
  if (seed_base) spec.seed_base = *seed_base;
  if (trials) spec.trials = *trials;
  if (out) spec.outputs = *out;
  auto summary = backbone::run_suite(spec, jobs);
  if (format == "json")
    std::cout << backbone::summary_json(summary).dump(2) << '\n';
  else
    std::cout << spec.name << ": " << (summary.pass ? "pass" : "fail") << " ("
              << spec.trials << " trials, " << spec.config.rounds << " rounds)\n";
  return summary.pass ? 0 : 1;
}

int cmd_bounds(const std::string& grid_file, std::optional<std::string> out) {
  auto in = open_or_die(grid_file);
  backbone::GridSpec grid = backbone::parse_grid(in);
  backbone::emit_bounds(grid, out.value_or("."));
  return 0;
}

int cmd_check(const std::string& trace_file, const std::string& checks_file,
              std::optional<std::string> out, const std::string& format) {
  auto tin = open_or_die(trace_file);
  backbone::ExecutionView view = backbone::read_trace(tin);
  auto cin_ = open_or_die(checks_file);
  backbone::ChecksSpec checks = backbone::parse_checks_file(cin_);

  auto ind = backbone::extract_indicators(view);
  auto trial = backbone::evaluate_trial(view, ind, checks);

  backbone::ExperimentSpec pseudo;
  pseudo.name = fs::path(trace_file).stem().string();
  pseudo.config.params = view.params;
  pseudo.config.rounds = view.rounds;
  pseudo.checks = checks;
  backbone::SuiteSummary s;
  s.spec = pseudo;
  s.cfg_hash = backbone::config_hash(pseudo);
  s.trials = {trial};
  s.pass = backbone::suite_pass(s);

  if (format == "csv") {
    if (out) {
      std::ofstream os(*out, std::ios::binary);
      backbone::write_indicators_csv(ind, os, backbone::file_header(s.cfg_hash));
    } else {
      backbone::write_indicators_csv(ind, std::cout, backbone::file_header(s.cfg_hash));
    }
  } else {
    auto j = backbone::summary_json(s);
    if (out) {
      std::ofstream os(*out, std::ios::binary);
      os << j.dump(2) << '\n';
    } else {
      std::cout << j.dump(2) << '\n';
    }
  }
  return s.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(backbone::kToolName) + " " + backbone::kVersion};
  app.require_subcommand(1);

  std::string spec_file, grid_file, trace_file, checks_file, format = "json";
  std::optional<std::uint64_t> seed_base;
  std::optional<int> trials;
  std::optional<std::string> out;
  int jobs = 1;

  auto* sim = app.add_subcommand("simulate", "run a Monte Carlo experiment spec");
  sim->add_option("spec-file", spec_file)->required();
  sim->add_option("--seed-base", seed_base, "override seed base");
  sim->add_option("--trials", trials, "override trial count");
  sim->add_option("--out", out, "output directory");
  sim->add_option("--jobs", jobs, "worker threads");
  sim->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

  auto* bnd = app.add_subcommand("bounds", "emit closed-form bounds and figure data");
  bnd->add_option("grid-file", grid_file)->required();
  bnd->add_option("--out", out, "output directory");

  auto* chk = app.add_subcommand("check", "run property checks on a trace file");
  chk->add_option("trace-file", trace_file)->required();
  chk->add_option("checks-file", checks_file)->required();
  chk->add_option("--out", out, "output file");
  chk->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

  CLI11_PARSE(app, argc, argv);
  try {
    if (sim->parsed()) return cmd_simulate(spec_file, seed_base, trials, out, jobs, format);
    if (bnd->parsed()) return cmd_bounds(grid_file, out);
    if (chk->parsed()) return cmd_check(trace_file, checks_file, out, format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
