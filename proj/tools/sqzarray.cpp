// sqzarray: batch front-end for the laser-array squeezing model.
//
//   sqzarray list-scenarios
//   sqzarray run fig-s1 --threads 4
//   sqzarray run my-config.json --out results/
//   sqzarray run results/fig-s1/manifest.json      (bit-identical rerun)
//   sqzarray sweep power-sweep.json
//   sqzarray verify --seed 3
//
// Exit codes: 0 success, 1 solver or I/O failure, 2 invalid input, 3 failed
// verification property.

#include <iostream>

#include <CLI11.hpp>

#include "sqz/errors.hpp"
#include "sqz/io.hpp"
#include "sqz/scenarios.hpp"
#include "sqz/sweep.hpp"
#include "sqz/verify.hpp"

namespace {

void add_run_flags(CLI::App* cmd, sqz::RunOptions& opts, bool& no_svg) {
  cmd->add_option("--out", opts.out, "Output directory (default: $SQZ_OUTPUT_ROOT/<name> or ./sqz-results/<name>)");
  cmd->add_option("--threads", opts.threads, "Worker threads, 0 for all cores (results do not depend on it)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--doppler-points", opts.doppler_points, "Override numerics.doppler_points")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--slices", opts.slices, "Override numerics.slices")->check(CLI::PositiveNumber);
  cmd->add_flag("--no-depletion", opts.no_depletion, "Hold the pump power constant along the cell");
  cmd->add_flag("--no-svg", no_svg, "Skip the SVG charts");
}

void report(const sqz::RunResult& r) {
  std::cout << "wrote " << r.files.size() << " files to " << r.directory.string() << "\n";
  for (const auto& f : r.files) std::cout << "  " << f.filename().string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Squeezed-light simulator for laser arrays in a coated Rb vapor cell"};
  app.set_version_flag("--version", sqz::version());
  app.require_subcommand(1);

  sqz::RunOptions opts;
  bool no_svg = false;
  std::string target;
  auto* run = app.add_subcommand("run", "Run a preset, a config file or a manifest");
  run->add_option("target", target, "Preset name, config path or manifest path")->required();
  add_run_flags(run, opts, no_svg);

  std::string sweep_path;
  auto* sweep = app.add_subcommand("sweep", "Evaluate metrics over a parameter grid");
  sweep->add_option("spec", sweep_path, "Sweep spec or sweep manifest")->required()->check(CLI::ExistingFile);
  add_run_flags(sweep, opts, no_svg);

  sqz::VerifyOptions vopts;
  bool as_json = false;
  auto* verify = app.add_subcommand("verify", "Run the cross-module property checks");
  verify->add_option("--seed", vopts.seed, "Seed of the randomized checks");
  verify->add_option("--threads", vopts.threads, "Worker threads")->check(CLI::NonNegativeNumber);
  verify->add_flag("--json", as_json, "Print the report as JSON");

  auto* list = app.add_subcommand("list-scenarios", "List the built-in presets");

  CLI11_PARSE(app, argc, argv);
  opts.svg = !no_svg;

  try {
    if (*list) {
      for (const auto& s : sqz::list_scenarios()) std::cout << s.name << "\t" << s.description << "\n";
    } else if (*run) {
      report(sqz::run_target(target, opts));
    } else if (*sweep) {
      report(sqz::run_sweep_file(sweep_path, opts));
    } else if (*verify) {
      const sqz::VerifyReport r = sqz::run_verify(vopts);
      std::cout << (as_json ? r.to_json().dump(2) + "\n" : r.text());
      return r.passed() ? 0 : 3;
    }
  } catch (const sqz::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
