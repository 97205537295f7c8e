#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqz/array_solver.hpp"
#include "sqz/dynamics.hpp"

namespace sqz {

using json = nlohmann::ordered_json;

// Run configuration in the units people write down (mW, mm, degC, MHz, kHz).
// Keeping user units here makes parse -> serialize -> parse exact; conversion to
// SI happens once, in build_model().

struct SchemeSection {
  std::string kind = "five-level";  // "lambda", "four-level" or "five-level"
  double gamma_MHz = 6.0;
  double excited_splitting_MHz = 814.5;
  double ground_splitting_GHz = 6.8;
  double branching_x = 0.38;
  double branching_y = 0.38;
  double branching_trap = 0.24;
  double g1 = 1.0;
  double g2 = 0.4;
  bool operator==(const SchemeSection&) const = default;
};

struct CellSection {
  double length_cm = 7.5;
  double diameter_cm = 2.5;
  double temperature_C = 63.7;
  double gamma0_Hz = 10.0;
  double gamma12_Hz = 10.0;
  double doppler_width_MHz = 500.0;
  std::optional<double> density_m3;  // replaces the vapor-pressure density
  bool operator==(const CellSection&) const = default;
};

struct PulseSection {
  double start_ms = 0.0;
  double end_ms = 0.0;
  double power_mW = 0.0;
  bool operator==(const PulseSection&) const = default;
};

struct ChannelSection {
  double power_mW = 1.0;
  double waist_mm = 0.505;  // beam diameter as quoted for the experiment; radius = waist / 2
  std::string polarization = "H";
  double red_detuning_MHz = 0.0;
  std::vector<PulseSection> pulses;  // empty: continuous wave
  bool operator==(const ChannelSection&) const = default;
};

/// `count` identical channels. The cell model has no transverse structure, so beam
/// pitch never enters; the flag records that the user accepts this.
struct ArraySection {
  int count = 0;
  ChannelSection channel;
  bool pitch_irrelevant = true;
  bool operator==(const ArraySection&) const = default;
};

struct CalibrationSection {
  double reference_power_mW = 1.0;
  double reference_waist_mm = 0.505;
  double reference_rabi_MHz = 43.6;
  double line_strength = 0.15;
  double rabi_coupling = 0.5;
  bool operator==(const CalibrationSection&) const = default;
};

struct DetectionSection {
  std::vector<double> frequencies_kHz{160.0};
  bool lock_to_pump = true;
  bool operator==(const DetectionSection&) const = default;
};

struct NumericsSection {
  int doppler_points = 64;
  bool doppler = true;
  int slices = 8;
  bool pump_depletion = true;
  double tolerance = 1e-10;
  int max_iterations = 200;
  bool operator==(const NumericsSection&) const = default;
};

struct DynamicsSection {
  double start_ms = -2.0;
  double horizon_ms = 40.0;
  double dt_us = 10.0;
  double snapshot_ms = 0.25;
  double refresh_ms = 0.1;
  double detection_kHz = 186.0;
  std::vector<int> monitor{0};
  std::optional<double> fit_after_ms;  // fit a recovery time to the trace after this instant
  bool operator==(const DynamicsSection&) const = default;
};

struct OutputSection {
  std::string directory;
  bool svg = true;
  bool operator==(const OutputSection&) const = default;
};

struct RunConfig {
  SchemeSection scheme;
  CellSection cell;
  std::optional<ArraySection> array;
  std::vector<ChannelSection> channels;  // appended after the array channels
  CalibrationSection calibration;
  DetectionSection detection;
  NumericsSection numerics;
  std::optional<DynamicsSection> dynamics;
  OutputSection output;
  std::uint64_t seed = 1;

  bool operator==(const RunConfig&) const = default;

  /// Array channels followed by the explicit list.
  std::vector<ChannelSection> expanded_channels() const;
  /// Sideband frequencies in rad/s.
  std::vector<double> omegas() const;
};

/// Parses and validates a config document. Errors carry the 1-based line and
/// column of the offending key or value; `source` names the document in messages.
RunConfig parse_config(const std::string& text, const std::string& source = "config");
RunConfig load_config(const std::filesystem::path& path);

/// Validates an already-parsed document (no locations available).
RunConfig config_from_json(const json& doc);
json config_to_json(const RunConfig& cfg);
std::string serialize_config(const RunConfig& cfg);

/// SI model for the solvers. Physical invariants are checked here as well, so a
/// config that parses always builds.
ArrayModel build_model(const RunConfig& cfg);
PulseSchedule build_schedule(const RunConfig& cfg);
EvolveOptions build_evolve_options(const RunConfig& cfg);

/// Sets the value at a dotted path such as "cell.temperature_C" or
/// "channels[1].power_mW", creating intermediate objects as needed.
void set_path(json& doc, const std::string& path, const json& value);
json get_path(const json& doc, const std::string& path);

}  // namespace sqz
