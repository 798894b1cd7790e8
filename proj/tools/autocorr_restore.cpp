// autocorr-restore: simulate, reconstruct and evaluate autocorrelation
// inversion experiments from an INI config.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "autocorr/errors.hpp"
#include "autocorr/experiment.hpp"

namespace {

struct Options {
  std::optional<std::string> config;
  std::vector<std::string> overrides;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::size_t runs = 1;
  std::vector<std::string> paths;  // evaluate: [reconstruction [reference]]
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config, "INI config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", opt.overrides, "Override as section.key=value (repeatable)")
      ->take_all()
      ->allow_extra_args(false);
  cmd->add_option("--out", opt.out, "Output directory (output.dir)");
  cmd->add_option("--seed", opt.seed, "Noise and solver seed");
  cmd->add_option("--runs", opt.runs, "Independent seeded runs in out/run_<k>")
      ->check(CLI::PositiveNumber);
}

autocorr::ExperimentConfig resolve(const Options& opt) {
  std::vector<std::string> overrides = opt.overrides;
  if (opt.out) overrides.push_back("output.dir=" + *opt.out);
  if (opt.seed) {
    overrides.push_back("noise.seed=" + std::to_string(*opt.seed));
    overrides.push_back("solver.seed=" + std::to_string(*opt.seed));
  }
  if (!opt.paths.empty()) overrides.push_back("evaluate.reconstruction=" + opt.paths[0]);
  if (opt.paths.size() > 1) overrides.push_back("evaluate.reference=" + opt.paths[1]);
  std::optional<std::filesystem::path> path;
  if (opt.config) path = *opt.config;
  return autocorr::load_config(path, overrides);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object restoration from blurred, noisy autocorrelations"};
  app.require_subcommand(1);

  Options opt;
  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"phantom", "Write a procedural test object"},
      {"simulate", "Simulate a blurred, noisy autocorrelation measurement"},
      {"reconstruct", "Recover the object from a measurement"},
      {"evaluate", "Align a reconstruction to a reference and score it"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, opt);
    if (std::string(c.name) == "evaluate") {
      sub->add_option("paths", opt.paths, "[reconstruction [reference]]")->expected(0, 2);
    }
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    const autocorr::ExperimentConfig config = resolve(opt);
    const std::size_t threads = autocorr::thread_cap_from_env();
    autocorr::fan_out(config, opt.runs, threads, command, std::cout);
  } catch (const autocorr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const autocorr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
