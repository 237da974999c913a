#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "plrecon/pipelines.hpp"

int main(int argc, char** argv) {
  CLI::App app{"boundary recovery toolkit for the perturbed p-Laplace equation"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* cmd_run = app.add_subcommand("run", "execute the configured pipeline");
  cmd_run->add_option("config", config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::App* cmd_describe =
      app.add_subcommand("describe", "print the resolved plan without solving");
  cmd_describe->add_option("config", config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int r = app.exit(e);
    return r == 0 ? 0 : 1;
  }

  try {
    plr::ExperimentConfig c = plr::parse_config_file(config_path);
    if (cmd_describe->parsed()) {
      std::cout << plr::describe_pipeline(c);
      return 0;
    }
    std::string summary;
    int code = plr::run_pipeline(c, &summary, nullptr);
    std::cout << summary;
    if (code != 0)
      std::cerr << "error: pipeline finished with exit code " << code << "\n";
    return code;
  } catch (const plr::ConfigError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 1;
  } catch (const plr::ParseError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
