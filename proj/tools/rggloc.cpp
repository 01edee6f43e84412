#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rggloc/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Localization of edge-count upper tails in random geometric graphs"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> input;
  bool quiet = false;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config,-c", config, "runconfig.v1 JSON file")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out,-o", out, "override the output directory");
    sub->add_flag("--quiet,-q", quiet, "suppress the printed summary");
  };
  add_common(app.add_subcommand("grid-info", "print derived grid quantities"));
  add_common(app.add_subcommand("simulate", "sample the point process and count edges"));
  add_common(app.add_subcommand("condition", "sample the upper-tail event and profile localization"));
  CLI::App* extract = app.add_subcommand("extract", "run the localization extractor and certify it");
  add_common(extract);
  extract->add_option("--input,-i", input, "point set CSV or cell configuration CSV");
  add_common(app.add_subcommand("tail", "estimate upper-tail probabilities and sandwich bounds"));
  add_common(app.add_subcommand("verify", "run the acceptance checks"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rggloc::kExitConfigError;
  }

  rggloc::CommandOptions options;
  options.seed = seed;
  options.out_dir = out;
  options.input = input;
  options.quiet = quiet;
  const std::string command = app.get_subcommands().front()->get_name();
  return rggloc::run_command(command, config, options, std::cout, std::cerr);
}
