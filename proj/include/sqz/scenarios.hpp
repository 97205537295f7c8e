#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sqz/config.hpp"
#include "sqz/noise_spectra.hpp"

namespace sqz {

/// Command-line adjustments applied on top of a preset or config file. The
/// numerics overrides are recorded in the manifest; threads never change results.
struct RunOptions {
  std::filesystem::path out;  // empty: see output_directory()
  int threads = 1;
  std::optional<int> doppler_points;
  std::optional<int> slices;
  bool no_depletion = false;
  bool svg = true;
};

struct ScenarioInfo {
  std::string name;
  std::string description;
};

/// Built-in presets in display order.
std::vector<ScenarioInfo> list_scenarios();
bool is_scenario(const std::string& name);
/// Base config of a preset (before command-line overrides).
RunConfig scenario_config(const std::string& name);

/// Dotted-path overrides implied by the options, e.g. {"numerics.slices": 16}.
json option_overrides(const RunOptions& opts);
/// Applies dotted-path overrides and re-validates.
RunConfig apply_overrides(const RunConfig& cfg, const json& overrides);

struct RunResult {
  std::string scenario;
  std::filesystem::path directory;
  std::vector<std::filesystem::path> files;
  json summary;
};

/// Runs a preset name, a config file or a manifest written by an earlier run.
/// A manifest replays its recorded scenario and resolved config, so the result
/// tables come out byte-identical.
RunResult run_target(const std::string& target, const RunOptions& opts);

/// Runs scenario `name` ("config" for a plain config file) on a resolved config.
RunResult run_scenario(const std::string& name, const RunConfig& resolved, const json& overrides,
                       const RunOptions& opts, const std::string& source = "");

/// Where a run writes: --out, then output.directory, then $SQZ_OUTPUT_ROOT/<name>,
/// then ./sqz-results/<name>.
std::filesystem::path output_directory(const std::string& name, const RunConfig& cfg, const RunOptions& opts);

/// Steady-state noise spectrum of one channel at every detection frequency.
NoiseSpectrum evaluate_channel(const RunConfig& cfg, int channel = 0);

}  // namespace sqz
