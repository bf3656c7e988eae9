// Command-line front end: one subcommand per experiment kind.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "chemo/config.hpp"
#include "chemo/errors.hpp"
#include "chemo/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pattern-formation experiments for the nonlocal chemotaxis model"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::string convention;

  for (const char* name : {"linear", "reduce", "ode", "simulate", "simulate-full", "sweep",
                           "verify-theorem1", "verify-theorem2"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", config_path, "experiment configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_option("--coefficient-convention", convention, "cubic coefficient pair")
        ->check(CLI::IsMember({"paper", "formula"}));
  }
  CLI11_PARSE(app, argc, argv);

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    chemo::ConfigOverrides overrides;
    overrides.seed = seed;
    overrides.output_dir = out_dir;
    if (convention == "paper") overrides.convention = chemo::CoefficientConvention::kPaper;
    if (convention == "formula") overrides.convention = chemo::CoefficientConvention::kFormula;
    const chemo::ExperimentConfig cfg = chemo::load_config(config_path, overrides);
    if (chemo::to_string(cfg.kind) != sub) {
      std::cerr << "error: config declares kind " << chemo::to_string(cfg.kind)
                << " but the subcommand is " << sub << "\n";
      return 2;
    }
    return chemo::run_experiment(cfg, std::cout);
  } catch (const chemo::ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
