// rsf: command-line front end for the experiment runner.
//
//   rsf <train-value|run|sweep-beta|sweep-xi|certify> [--config PATH] [--seed N] [--out DIR] [--model PATH]
//
// Output directory: --out, else output.dir from the config, else $RSF_OUTPUT_DIR, else ./rsf_out.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rsf/config.hpp"
#include "rsf/error.hpp"
#include "rsf/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Risk-sensitive distributed safety filters: experiments"};
  app.set_version_flag("--version", std::string(RSF_VERSION));

  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string model_path;
  bool quiet = false;

  app.add_option("command", command, "train-value | run | sweep-beta | sweep-xi | certify")
      ->required()
      ->check(CLI::IsMember({"train-value", "run", "sweep-beta", "sweep-xi", "certify"}));
  app.add_option("--config", config_path, "Configuration file (defaults apply when omitted)");
  app.add_option("--seed", seed, "Base seed, overrides the config");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--model", model_path, "Value model file to write (train-value) or read");
  app.add_flag("-q,--quiet", quiet, "Only print errors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  rsf::ExperimentConfig config;
  try {
    config = config_path.empty() ? rsf::parse_config("") : rsf::parse_config_file(config_path);
    if (seed) config.seed = *seed;
  } catch (const rsf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return rsf::exit_code_for(e);
  }

  rsf::RunOptions options;
  if (!out_dir.empty()) {
    options.output_dir = out_dir;
  } else if (!config.output_dir.empty()) {
    options.output_dir = config.output_dir;
  } else if (const char* env = std::getenv("RSF_OUTPUT_DIR"); env && *env) {
    options.output_dir = env;
  } else {
    options.output_dir = "rsf_out";
  }
  if (!model_path.empty()) options.model_path = model_path;
  if (!quiet) options.log = &std::cout;

  const rsf::RunResult result = rsf::run_experiment(config, *rsf::parse_command(command), options);
  if (result.exit_code != 0) std::cerr << "error: " << result.error << '\n';
  return result.exit_code;
}
