// aorta-mc: run, explore and model-check organization-aware agent systems.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "aortamc/cli.hpp"

int main(int argc, char** argv) {
  using namespace aortamc;

  CLI::App app{"Explicit-state model checker for organization-aware agents"};
  app.require_subcommand(1);
  cli::Options opt;
  std::string config, properties, model, out;

  auto common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", config, "MAS configuration (JSON)");
    if (config_required) c->required();
    sub->add_option("--state-cap", opt.state_cap, "Maximum number of states")->check(CLI::PositiveNumber);
  };

  auto* run = app.add_subcommand("run", "Execute one seeded interleaving and print its trace");
  common(run, true);
  run->add_option("--seed", opt.seed, "Scheduler seed");
  run->add_option("--out", out, "Write the final state here");

  auto* check = app.add_subcommand("check", "Check properties on the fly");
  common(check, true);
  check->add_option("--properties", properties, "Property file");
  check->add_option("--out", out, "Directory for counterexample files");

  auto* explore = app.add_subcommand("explore", "Explore the full state space into a model file");
  common(explore, true);
  explore->add_option("--out", out, "Model file to write")->required();
  explore->add_option("--workers", opt.workers, "Exploration threads")->check(CLI::PositiveNumber);

  auto* check_model = app.add_subcommand("check-model", "Check properties against a model file");
  common(check_model, false);
  check_model->add_option("--model", model, "Model file")->required();
  check_model->add_option("--properties", properties, "Property file");
  check_model->add_option("--out", out, "Directory for counterexample files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kInputError;
  }

  opt.config = config;
  if (!properties.empty()) opt.properties = properties;
  if (!model.empty()) opt.model = model;
  if (!out.empty()) opt.out = out;

  if (*run) return cli::cmd_run(opt, std::cout, std::cerr);
  if (*check) return cli::cmd_check(opt, std::cout, std::cerr);
  if (*explore) return cli::cmd_explore(opt, std::cout, std::cerr);
  return cli::cmd_check_model(opt, std::cout, std::cerr);
}
