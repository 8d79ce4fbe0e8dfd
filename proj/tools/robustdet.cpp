// Command-line front end: robustdet <mode> --config <path> [options]
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "robustdet/config.hpp"
#include "robustdet/errors.hpp"
#include "robustdet/experiment.hpp"
#include "robustdet/report.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

int exit_code(robustdet::ErrorKind kind) {
  using robustdet::ErrorKind;
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::parameter:
    case ErrorKind::argument:
      return kExitConfig;
    case ErrorKind::io:
      return kExitIo;
    default:
      return kExitNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust Gaussian signal detection toolkit"};
  app.set_version_flag("--version", std::string(robustdet::kToolkitVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string format = "json";
  std::uint64_t seed = 0;
  std::size_t grid = 0;

  for (const char* name : {"exponent", "dominance", "simulate", "minimax", "full"}) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_path, "report path (default: config `output`, else stdout)");
    sub->add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", seed, "master seed, overrides the config");
    sub->add_option("--grid", grid, "PSD grid size, overrides the config");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const auto* sub = app.get_subcommands().front();
  try {
    auto config = robustdet::load_config(config_path);
    config.mode = *robustdet::parse_mode(sub->get_name());
    if (sub->count("--seed")) config.seed = seed;
    if (sub->count("--grid")) config.grid_size = grid;
    if (sub->count("--out")) config.output_path = out_path;
    robustdet::validate(config);

    const auto record = robustdet::run_experiment(config);
    robustdet::write_report(record, config.output_path, *robustdet::parse_format(format));
  } catch (const robustdet::Error& e) {
    std::cerr << "robustdet: " << robustdet::to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::bad_alloc&) {
    std::cerr << "robustdet: out of memory\n";
    return kExitNumerical;
  }
  return 0;
}
