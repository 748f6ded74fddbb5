#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "heavywalk/harness.hpp"

namespace {

int execute(const heavywalk::ExperimentConfig& config) {
  heavywalk::RunReport report = heavywalk::run(config);
  std::cout << report.to_json().dump(2) << '\n';
  return report.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-tailed walk experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run_cmd = app.add_subcommand("run", "Execute an experiment config (JSON)");
  run_cmd->add_option("config", config_path, "path to the config document")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* list_cmd = app.add_subcommand("list-presets", "Print the acceptance preset names");

  std::string preset_name;
  CLI::App* accept_cmd = app.add_subcommand("accept", "Run one acceptance preset");
  accept_cmd->add_option("preset", preset_name, "preset name from list-presets")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_cmd->parsed()) {
      for (const std::string& name : heavywalk::list_presets()) std::cout << name << '\n';
      return 0;
    }
    if (run_cmd->parsed()) {
      std::ifstream in(config_path);
      nlohmann::json doc = nlohmann::json::parse(in);
      return execute(heavywalk::parse_config(doc));
    }
    return execute(heavywalk::preset_config(preset_name));
  } catch (const heavywalk::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
