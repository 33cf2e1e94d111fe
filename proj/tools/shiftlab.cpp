#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "shiftlab/error.hpp"
#include "shiftlab/runner.hpp"

using namespace shiftlab;

namespace {

int report(const RunOutcome& outcome) {
  (outcome.exit_code == exit_ok ? std::cout : std::cerr) << outcome.summary << "\n";
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shiftlab: Monte Carlo checks of normal approximation for dependent sums"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  unsigned workers = 1;
  std::string seed;

  auto* run_cmd = app.add_subcommand("run", "run the experiment described by a config file");
  run_cmd->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
  run_cmd->add_option("--workers", workers, "worker threads")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
  run_cmd->add_option("--seed", seed, "override the config seed");

  auto* validate_cmd = app.add_subcommand("validate", "check a config without running it");
  validate_cmd->add_option("config", config_path, "config file")
      ->required()
      ->check(CLI::ExistingFile);

  auto* oracle_cmd = app.add_subcommand("oracle-check", "Rademacher oracle at n = 4, 16, 36");
  oracle_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
  oracle_cmd->add_option("--workers", workers, "worker threads")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();

  auto* version_cmd = app.add_subcommand("version", "print the version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*version_cmd) {
      std::cout << "shiftlab " << kVersion << "\n";
      return exit_ok;
    }
    if (*oracle_cmd) return report(run(oracle_config(), {out_dir, workers}));

    Config config = Config::load(config_path);
    if (*validate_cmd) {
      const auto violations = validate(config);
      bool gate_only = true;
      for (const auto& v : violations) {
        gate_only = gate_only && is_gate_rule(v.rule);
        std::cerr << v.rule << ": " << v.path << ": " << v.message << "\n";
      }
      if (violations.empty()) {
        std::cout << "ok\n";
        return exit_ok;
      }
      return gate_only ? exit_gate : exit_validation;
    }
    if (!seed.empty()) config.set("seed", seed);
    return report(run(config, {out_dir, workers}));
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return exit_validation;
  } catch (const GateError& e) {
    std::cerr << e.what() << "\n";
    return exit_gate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_failed_check;
  }
}
