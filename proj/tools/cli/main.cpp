#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace viscoctl::cli;
  CLI::App app{"Controllability toolkit for viscoelastic equations with moving control"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config, mode = "hum", out;
  unsigned long long seed = 0;

  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory (overrides the config)");
    sub->add_option("--seed", seed, "Random seed (overrides the config)");
    return sub;
  };
  add("check-geometry", "Classify the moving control region");
  add("build-weights", "Construct and verify the Carleman weight functions");
  add("simulate", "Run the forward solver without control");
  add("control", "Compute a control driving the state to rest")
      ->add_option("--mode", mode, "Control strategy")
      ->check(CLI::IsMember({"cascade", "hum"}));
  add("verify-carleman", "Evaluate the Carleman inequality terms on an ensemble");
  add("estimate-observability", "Estimate the observability constant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const CLI::App* sub = app.get_subcommands().front();
  std::optional<std::filesystem::path> out_dir;
  if (sub->count("--out")) out_dir = out;
  std::optional<unsigned long long> seed_opt;
  if (sub->count("--seed")) seed_opt = seed;
  return run_command_file(sub->get_name(), config, sub->get_name() == "control" ? mode : "", out_dir, seed_opt,
                          std::cerr);
}
