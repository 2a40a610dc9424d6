// Command-line runner: cibo run --config <path> [--key value ...]
//                      cibo list-problems | list-presets

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "cibo/cli/config.hpp"
#include "cibo/cli/experiment.hpp"
#include "cibo/problems/registry.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

/// "--key value" and "--key=value" pairs left over after CLI11 parsing.
cibo::Settings parse_overrides(const std::vector<std::string>& args) {
  cibo::Settings out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0 || a.size() == 2) throw cibo::ConfigError("unexpected argument '" + a + "'");
    const std::string body = a.substr(2);
    const auto eq = body.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(body.substr(0, eq), body.substr(eq + 1));
    } else if (i + 1 < args.size()) {
      out.emplace_back(body, args[++i]);
    } else {
      throw cibo::ConfigError("missing value for '" + a + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained black-box optimization with flow priors and latent samplers"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment; any config key may be passed as --key value");
  run->add_option("--config", config_path, "Flat key = value config file");
  run->allow_extras();
  bool quiet = false;
  run->add_flag("-q,--quiet", quiet, "No per-round progress on stderr");

  auto* problems = app.add_subcommand("list-problems", "Registered problems");
  bool verbose = false;
  auto* presets = app.add_subcommand("list-presets", "Shipped presets");
  presets->add_flag("-v,--verbose", verbose, "Show the settings of each preset");
  auto* keys = app.add_subcommand("list-keys", "Recognized config keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  if (problems->parsed()) {
    for (const std::string& name : cibo::problem_names()) std::cout << name << '\n';
    return 0;
  }
  if (presets->parsed()) {
    for (const std::string& name : cibo::preset_names()) {
      std::cout << name << '\n';
      if (verbose) {
        for (const auto& [k, v] : cibo::preset_settings(name)) std::cout << "  " << k << " = " << v << '\n';
      }
    }
    return 0;
  }
  if (keys->parsed()) {
    for (const std::string& k : cibo::config_keys()) std::cout << k << '\n';
    return 0;
  }

  cibo::ExperimentConfig config;
  try {
    cibo::Settings file;
    if (!config_path.empty()) file = cibo::read_settings_file(config_path);
    cibo::Settings overrides;
    if (const char* dir = std::getenv("CIBO_OUTPUT_DIR"); dir && *dir) overrides.emplace_back("output_dir", dir);
    for (auto& kv : parse_overrides(run->remaining())) overrides.push_back(std::move(kv));
    config = cibo::build_config(file, overrides);
  } catch (const cibo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    const cibo::ExperimentResult result = cibo::run_experiment(config, quiet ? nullptr : &std::cerr);
    for (const cibo::SeedResult& s : result.seeds) {
      std::cout << s.trace_file.string();
      if (s.error) std::cout << " (failed: " << *s.error << ")";
      std::cout << '\n';
    }
    std::cout << result.aggregate_file.string() << '\n';
    return result.ok() ? 0 : kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
