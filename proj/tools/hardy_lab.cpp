#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "hardy/error.hpp"
#include "hardy/experiments.hpp"

int main(int argc, char** argv) {
  using namespace hardy;
  CLI::App app{"Discrete Hardy space experiments"};
  std::string command, config_path, grid, out, filter;
  std::optional<std::uint64_t> seed;
  app.add_option("command", command, fmt::format("one of: {}", fmt::join(command_names(), ", ")))->required();
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--grid", grid, "grid size override, e.g. 64 or 16x16");
  app.add_option("--seed", seed, "corpus seed override");
  app.add_option("--out", out, "output directory override");
  app.add_option("--filter", filter, "comma separated oracle suites");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  ExperimentConfig config;
  try {
    config = load_config(config_path);
    if (!grid.empty()) {
      const GridSpec g = parse_grid_override(grid);
      config.grid.sizes = g.sizes;
      config.grid.spacing = 0.0;
    }
    if (seed) config.corpus.seed = *seed;
    if (!out.empty()) config.output = out;
    if (!filter.empty()) config.filter = parse_filter(filter);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config;
  }
  return run_command(command, config, std::cout);
}
