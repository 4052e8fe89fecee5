// effreg: run, verify and sweep expert-combination experiments.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "effreg/effreg.hpp"

namespace {

struct RunFlags {
  std::optional<std::string> config, scenario, algorithm, out;
  std::optional<std::size_t> steps;
  std::optional<double> beta, eta, bias_sqrt, lambda, drift, w11, C;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> favored, dimension;
  bool svg = false;
  bool log_log = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool with_output) {
  cmd->add_option("--config", f.config, "key = value config file (flags override it)");
  cmd->add_option("--scenario", f.scenario, "registry name or stream file path");
  cmd->add_option("--algorithm", f.algorithm, "combiner name");
  cmd->add_option("--steps", f.steps, "horizon")->check(CLI::PositiveNumber);
  cmd->add_option("--beta", f.beta, "bias log coefficient");
  cmd->add_option("--eta", f.eta, "step-size scale or multiplicative eta");
  cmd->add_option("--bias-sqrt", f.bias_sqrt, "bias sqrt coefficient");
  cmd->add_option("--seed", f.seed, "random scenario seed");
  cmd->add_option("--dimension", f.dimension, "random scenario expert count");
  cmd->add_option("--drift", f.drift, "random scenario drift on experts 2..d");
  cmd->add_option("--lambda", f.lambda, "random scenario loss-difference premise");
  cmd->add_option("--w11", f.w11, "initial weight of expert 1");
  cmd->add_option("--C", f.C, "ab_prod variance bound");
  cmd->add_option("--favored", f.favored, "expert the bias favours (1-based)");
  if (with_output) {
    cmd->add_option("--out", f.out, "CSV output path");
    cmd->add_flag("--svg", f.svg, "also write an SVG next to the CSV");
    cmd->add_flag("--log-log", f.log_log, "log-log regret panel in the SVG");
  }
}

effreg::RunConfig build_config(const RunFlags& f) {
  effreg::RunConfig c;
  if (f.config) c = effreg::load_config_file(*f.config);
  auto set = [&](const char* key, const auto& v) {
    if (!v) return;
    if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, std::string>) {
      effreg::set_config_value(c, key, *v);
    } else {
      effreg::set_config_value(c, key, std::to_string(*v));
    }
  };
  set("scenario", f.scenario);
  set("algorithm", f.algorithm);
  set("steps", f.steps);
  set("seed", f.seed);
  set("dimension", f.dimension);
  set("favored", f.favored);
  set("output", f.out);
  // Reals go through the struct directly to keep every digit.
  if (f.beta) c.beta = *f.beta;
  if (f.eta) c.eta = *f.eta;
  if (f.bias_sqrt) c.bias_sqrt = *f.bias_sqrt;
  if (f.lambda) c.lambda = *f.lambda;
  if (f.drift) c.drift = *f.drift;
  if (f.w11) c.w11 = *f.w11;
  if (f.C) c.C = *f.C;
  if (f.svg) c.emit_svg = true;
  if (f.log_log) c.log_log = true;
  return c;
}

int cmd_run(const RunFlags& f) {
  effreg::RunConfig c = build_config(f);
  if (c.emit_svg && !c.output) c.output = "run.csv";
  const effreg::RunRecord rec = effreg::run(c);
  const auto fin = rec.final_regrets();
  std::cout << "scenario=" << rec.scenario_name << " algorithm=" << effreg::to_string(c.algorithm)
            << " steps=" << rec.rows() << " R=" << effreg::format_number(fin.R);
  for (std::size_t k = 0; k < fin.expert.size(); ++k) {
    std::cout << " R_" << k + 1 << '=' << effreg::format_number(fin.expert[k]);
  }
  std::cout << " Rtilde=" << effreg::format_number(fin.Rtilde);
  if (auto s = rec.settled_from()) std::cout << " settled_from=" << *s;
  std::cout << '\n';
  if (c.output) std::cout << "wrote " << *c.output << '\n';
  if (c.emit_svg) std::cout << "wrote " << effreg::svg_path_for(c).string() << '\n';
  return 0;
}

int cmd_verify(const std::optional<std::string>& catalog, std::size_t threads) {
  const auto checks = catalog ? effreg::parse_verify_catalog(effreg::detail::read_file(*catalog))
                              : effreg::default_verify_catalog();
  const auto results = effreg::verify(checks, threads);
  effreg::print_verify(results, std::cout);
  const int code = effreg::verify_exit_code(results);
  std::cout << (code == 0 ? "verify: ok" : "verify: FAILED") << '\n';
  return code;
}

int cmd_sweep(const RunFlags& f, const std::vector<std::string>& grid_axes, std::size_t threads) {
  effreg::RunConfig base = build_config(f);
  const auto grid = effreg::parse_grid(grid_axes);
  const auto rows = effreg::sweep(base, grid, threads);
  if (base.output) {
    std::ofstream out(*base.output, std::ios::binary);
    if (!out) throw effreg::ConfigError("cannot write '" + *base.output + "'");
    effreg::write_sweep_csv(rows, out);
    std::cout << "wrote " << *base.output << '\n';
  } else {
    effreg::write_sweep_csv(rows, std::cout);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"effreg: combine online learners and check their regret bounds"};
  app.require_subcommand(1);

  RunFlags run_flags, sweep_flags;
  auto* run = app.add_subcommand("run", "run one scenario under one combiner");
  add_run_flags(run, run_flags, true);

  std::optional<std::string> catalog;
  std::size_t threads = 0;
  auto* verify = app.add_subcommand("verify", "check the bound catalog; exit 2 on any failure");
  verify->add_option("--catalog", catalog, "catalog file ([label] sections of key = value)");
  verify->add_option("--threads", threads, "worker threads (0 = hardware)");

  std::vector<std::string> grid;
  auto* sweep = app.add_subcommand("sweep", "run a parameter grid and aggregate final regrets");
  add_run_flags(sweep, sweep_flags, false);
  sweep->add_option("--grid", grid, "axis key=v1,v2,... (repeatable)")->required();
  sweep->add_option("--out", sweep_flags.out, "aggregated CSV path (default stdout)");
  sweep->add_option("--threads", threads, "worker threads (0 = hardware)");

  auto* list = app.add_subcommand("list-scenarios", "print the scenario registry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*verify) return cmd_verify(catalog, threads);
    if (*sweep) return cmd_sweep(sweep_flags, grid, threads);
    if (*list) {
      for (const auto& s : effreg::kScenarioCatalog) std::cout << s.name << "\t" << s.description << '\n';
      std::cout << "<path>\tCSV stream file with header b_1,...,b_d,comparator\n";
      return 0;
    }
  } catch (const effreg::InvariantViolation& e) {
    std::cerr << "invariant violation at step " << e.step() << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
