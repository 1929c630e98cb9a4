// Command-line front end: parse one experiment config, dispatch a subcommand,
// write artifacts. Exit codes: 0 ok, 1 config/schema error, 2 divergence under
// require_stable, 3 size cap exceeded.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "diffnet/config.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool no_theory = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("config", opts.config_path, "experiment config (JSON)")
      ->required();
  cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", opts.seed, "master seed (overrides config)");
  cmd->add_option("--threads", opts.threads, "worker threads for trials");
  cmd->add_flag("--no-theory", opts.no_theory, "skip theory overlays");
}

diffnet::RunConfig load(const CommonOpts& opts) {
  diffnet::RunConfig cfg = diffnet::RunConfig::from_file(opts.config_path);
  if (opts.out_dir) cfg.out_dir = *opts.out_dir;
  if (opts.seed) cfg.experiment.seed = *opts.seed;
  if (opts.threads) cfg.experiment.threads = *opts.threads;
  if (opts.no_theory) cfg.experiment.with_theory = false;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clustered multitask diffusion LMS experiments"};
  app.require_subcommand(1);

  CommonOpts run_opts, validate_opts, theory_opts, oracle_opts;
  CLI::App* run_cmd = app.add_subcommand("run", "simulate and write curves");
  add_common(run_cmd, run_opts);
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "check config, network, and combiners");
  add_common(validate_cmd, validate_opts);
  CLI::App* theory_cmd = app.add_subcommand(
      "theory", "closed-form curves only, no simulation or RNG");
  add_common(theory_cmd, theory_opts);
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle", "centralized steepest-descent equilibrium per cluster");
  add_common(oracle_cmd, oracle_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      diffnet::cmd_run(load(run_opts));
    } else if (validate_cmd->parsed()) {
      diffnet::cmd_validate(load(validate_opts));
    } else if (theory_cmd->parsed()) {
      diffnet::cmd_theory(load(theory_opts));
    } else if (oracle_cmd->parsed()) {
      diffnet::cmd_oracle(load(oracle_opts));
    }
  } catch (const diffnet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const diffnet::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 2;
  } catch (const diffnet::SizeCapError& e) {
    std::cerr << "size cap: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
