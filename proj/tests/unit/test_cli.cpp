#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <cmath>
#include <sstream>

#include "sqz/analytics.hpp"
#include "sqz/errors.hpp"
#include "sqz/scenarios.hpp"
#include "sqz/sweep.hpp"
#include "sqz/verify.hpp"

using namespace sqz;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sqz-unit-" + name);
  fs::remove_all(p);
  return p;
}

RunConfig quick_config(int n = 2) {
  RunConfig c;
  c.array.emplace();
  c.array->count = n;
  c.numerics.doppler_points = 8;
  c.numerics.slices = 4;
  return c;
}

}  // namespace

TEST_CASE("every preset resolves to a valid config") {
  const auto list = list_scenarios();
  CHECK(list.size() >= 14);
  for (const auto& s : list) {
    CHECK(is_scenario(s.name));
    CHECK_NOTHROW(build_model(scenario_config(s.name)));
  }
  CHECK_FALSE(is_scenario("fig-s99"));
}

TEST_CASE("command-line overrides land in the resolved config") {
  RunOptions o;
  o.doppler_points = 12;
  o.slices = 3;
  o.no_depletion = true;
  const RunConfig c = apply_overrides(quick_config(), option_overrides(o));
  CHECK(c.numerics.doppler_points == 12);
  CHECK(c.numerics.slices == 3);
  CHECK_FALSE(c.numerics.pump_depletion);
}

TEST_CASE("sweep output does not depend on the worker count") {
  SweepSpec s;
  s.axes.push_back({"array.channel.power_mW", {0.5, 1.0, 2.0}});
  s.axes.push_back({"array.count", {1, 4}});
  s.metrics = {Metric::SMin, Metric::SMax, Metric::ThetaSq, Metric::Purity};
  const SweepResult one = run_sweep(s, quick_config(), 1);
  const SweepResult three = run_sweep(s, quick_config(), 3);
  CHECK(one.table().str() == three.table().str());
  CHECK(one.points.size() == 6);
  CHECK(one.points[1].values[1] == 4);  // last axis varies fastest
}

TEST_CASE("zip mode pairs values") {
  SweepSpec s;
  s.mode = SweepMode::Zip;
  s.axes.push_back({"cell.temperature_C", {55.0, 63.7}});
  s.axes.push_back({"array.channel.power_mW", {1.0, 2.0}});
  CHECK(s.size() == 2);
  CHECK(s.point(1)[0] == 63.7);
  CHECK(s.point(1)[1] == 2.0);
  s.axes[1].values.push_back(3.0);
  CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("sweep specs are bounded and checked") {
  CHECK_THROWS_AS(parse_sweep(json::parse(R"({"axes": []})")), ValidationError);
  CHECK_THROWS_AS(parse_sweep(json::parse(R"({"axes": [{"path": "a", "range": {"start": 0, "stop": 1e6, "step": 1}}]})")),
                  ValidationError);
  CHECK_THROWS_AS(parse_sweep(json::parse(R"({"axes": [{"path": "a", "values": [1]}], "metrics": ["snr"]})")),
                  ValidationError);
  const SweepSpec s = parse_sweep(json::parse(
      R"({"axes": [{"path": "a", "range": {"start": 1, "stop": 2, "step": 0.25}}], "metrics": ["s_min_db"]})"));
  CHECK(s.size() == 5);
  CHECK(parse_sweep(sweep_to_json(s)).size() == 5);
}

TEST_CASE("failed points are recorded and the sweep goes on") {
  SweepSpec s;
  s.axes.push_back({"array.channel.power_mW", {1.0, -1.0, 2.0}});
  const SweepResult r = run_sweep(s, quick_config(), 1);
  CHECK(r.points[0].error.empty());
  CHECK_FALSE(r.points[1].error.empty());
  CHECK(std::isnan(r.points[1].metrics[0]));
  CHECK(r.points[2].error.empty());
  CHECK(r.best()["failures"] == 1);
}

TEST_CASE("best point per group") {
  SweepSpec s;
  s.axes.push_back({"cell.temperature_C", {55.0, 63.7}});
  s.axes.push_back({"array.channel.power_mW", {0.5, 2.0}});
  s.objective = Objective{Metric::SMin, false, {"cell.temperature_C"}};
  const json b = run_sweep(s, quick_config(1), 1).best();
  REQUIRE(b["groups"].size() == 2);
  CHECK(b["groups"][0]["group"]["cell.temperature_C"] == 55.0);
  CHECK(b["groups"][1]["best"]["values"]["array.channel.power_mW"] == 2.0);
}

TEST_CASE("a single-point sweep equals the config run bit for bit") {
  const fs::path dir = scratch_dir("single");
  fs::create_directories(dir);
  RunConfig cfg = quick_config();
  cfg.output.svg = false;
  {
    std::ofstream(dir / "base.json") << serialize_config(cfg);
    std::ofstream(dir / "sweep.json") << R"({"base": "base.json", "axes": [{"path": "array.count", "values": [2]}],
      "metrics": ["s_min_db", "s_max_db", "theta_sq", "purity_db"]})";
  }
  RunOptions o;
  o.out = dir / "run";
  run_target((dir / "base.json").string(), o);
  o.out = dir / "sweep";
  const RunResult sw = run_sweep_file(dir / "sweep.json", o);

  const NoiseSpectrum s = evaluate_channel(cfg, 0);
  const std::vector<double> m =
      evaluate_metrics(cfg, {Metric::SMin, Metric::SMax, Metric::ThetaSq, Metric::Purity}, 0);
  CHECK(m[0] == s.points[0].s_min_db);
  CHECK(m[1] == s.points[0].s_max_db);
  CHECK(m[2] == s.points[0].theta);

  // Same formatted numbers in both tables.
  const std::string run_csv = slurp(dir / "run" / "results.csv");
  const std::string sweep_csv = slurp(dir / "sweep" / "sweep.csv");
  const std::string row = sweep_csv.substr(sweep_csv.find("\r\n") + 2);
  const std::string smin = row.substr(row.find(',', row.find(',') + 1) + 1, 5);
  CHECK(run_csv.find("," + smin + ",") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("rerunning from a manifest reproduces every table") {
  const fs::path dir = scratch_dir("manifest");
  RunOptions o;
  o.out = dir / "first";
  o.doppler_points = 8;
  o.slices = 4;
  o.svg = false;
  const RunResult a = run_target("fig-s3", o);
  RunOptions again;
  again.out = dir / "again";
  again.threads = 2;
  again.svg = false;
  const RunResult b = run_target((a.directory / "manifest.json").string(), again);
  int compared = 0;
  for (const auto& f : a.files)
    if (f.extension() == ".csv") {
      CHECK(slurp(f) == slurp(b.directory / f.filename()));
      ++compared;
    }
  CHECK(compared > 0);
  fs::remove_all(dir);
}

TEST_CASE("sweep manifests replay") {
  const fs::path dir = scratch_dir("sweepmanifest");
  fs::create_directories(dir);
  std::ofstream(dir / "s.json") << R"({"base": {"array": {"count": 1}, "numerics": {"doppler_points": 8, "slices": 4}},
    "axes": [{"path": "array.channel.power_mW", "values": [0.5, 1.5]}]})";
  RunOptions o;
  o.out = dir / "a";
  o.svg = false;
  run_sweep_file(dir / "s.json", o);
  o.out = dir / "b";
  o.threads = 2;
  run_sweep_file(dir / "a" / "manifest.json", o);
  CHECK(slurp(dir / "a" / "sweep.csv") == slurp(dir / "b" / "sweep.csv"));
  fs::remove_all(dir);
}

TEST_CASE("verify is deterministic for a seed and catches a mutated dissipator") {
  CHECK(check_lambda_oracle(5, 20).value == check_lambda_oracle(5, 20).value);
  CHECK(check_lambda_oracle(5, 20).pass);
  const CMatrix a = random_density_matrix(3, 9), b = random_density_matrix(3, 9);
  CHECK(a == b);

  LambdaParams p;
  p.gamma0 = 0.0;
  p.gamma12 = 0.0;
  DissipatorPair diss = build_dissipators(p.scheme(), p.cell());
  diss.gamma(0, 2) = diss.gamma(2, 0) = -diss.gamma(0, 2);
  CHECK_FALSE(check_einstein(diss, a, p.gamma).pass);
}
