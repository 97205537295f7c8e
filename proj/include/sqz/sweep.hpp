#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sqz/config.hpp"
#include "sqz/io.hpp"
#include "sqz/scenarios.hpp"

namespace sqz {

enum class Metric { SMin, SMax, ThetaSq, Purity, TauRecovery };

const char* to_string(Metric m);
Metric metric_from_string(const std::string& name);

struct SweepAxis {
  std::string path;  // dotted config path, e.g. "array.channel.power_mW"
  std::vector<json> values;
};

enum class SweepMode { Product, Zip };

/// Which point counts as best, optionally within groups sharing the values of
/// some axes (e.g. the optimal power at each temperature).
struct Objective {
  Metric metric = Metric::SMin;
  bool maximize = false;
  std::vector<std::string> group_by;  // axis paths
};

struct SweepSpec {
  std::vector<SweepAxis> axes;
  SweepMode mode = SweepMode::Product;
  std::vector<Metric> metrics{Metric::SMin};
  int channel = 0;
  std::optional<Objective> objective;

  static constexpr std::size_t kMaxPoints = 100000;

  std::size_t size() const;
  void validate() const;
  /// Axis values of point `index`; product mode varies the last axis fastest.
  std::vector<json> point(std::size_t index) const;
};

/// Reads the axes/mode/metrics/channel/objective keys of a sweep document.
SweepSpec parse_sweep(const json& doc);
json sweep_to_json(const SweepSpec& spec);

struct SweepPoint {
  std::vector<json> values;
  std::vector<double> metrics;  // NaN where the point failed
  std::string error;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepPoint> points;  // in index order whatever the worker count

  CsvTable table() const;
  /// argmin/argmax of the objective (or of the first metric) overall and per group.
  json best() const;
};

/// Evaluates every point; failures land in the error column and the sweep goes on.
SweepResult run_sweep(const SweepSpec& spec, const RunConfig& base, int threads = 1);

/// Metric values of a single config (what each sweep point computes).
std::vector<double> evaluate_metrics(const RunConfig& cfg, const std::vector<Metric>& metrics, int channel);

/// CLI entry: reads a sweep file (or a sweep manifest), resolves its base config,
/// writes sweep.csv, best.json, an optional chart and a manifest.
RunResult run_sweep_file(const std::filesystem::path& path, const RunOptions& opts);

}  // namespace sqz
