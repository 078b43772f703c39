#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fkc/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Contractivity criteria, spectral checks and path simulation for Feynman-Kac semigroups"};
  app.require_subcommand(1);
  std::string config;
  std::string out_dir = ".";

  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config, "scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", out_dir, "output directory (default: current directory)");
    return sub;
  };
  auto* run = add("run", "run the task of a scenario");
  auto* sweep = add("sweep", "run the task over the [grid] section");
  auto* validate = add("validate", "check the standing assumptions of a scenario");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fkc::cli::internal_error;
  }
  if (run->parsed()) return fkc::cli::run(config, out_dir, std::cerr);
  if (sweep->parsed()) return fkc::cli::sweep(config, out_dir, std::cerr);
  if (validate->parsed()) return fkc::cli::validate(config, out_dir, std::cerr);
  return fkc::cli::internal_error;
}
