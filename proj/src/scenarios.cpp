#include "sqz/scenarios.hpp"

#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <sstream>

#include "sqz/analytics.hpp"
#include "sqz/dynamics.hpp"
#include "sqz/errors.hpp"
#include "sqz/io.hpp"
#include "sqz/parallel.hpp"
#include "sqz/svg_chart.hpp"

namespace sqz {

namespace {

constexpr double kDeg = 180.0 / kPi;

struct Output {
  std::vector<std::pair<std::string, CsvTable>> tables;
  std::vector<std::pair<std::string, LineChart>> charts;
  std::vector<std::pair<std::string, json>> documents;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> images;
  json summary = json::object();

  CsvTable& table(const std::string& name, std::vector<std::string> header) {
    tables.emplace_back(name, CsvTable(std::move(header)));
    return tables.back().second;
  }
};

struct Variant {
  std::string label;
  RunConfig cfg;
};

std::string label_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::vector<double> linspace(double lo, double hi, double step) {
  std::vector<double> v;
  const int n = static_cast<int>(std::lround((hi - lo) / step));
  for (int i = 0; i <= n; ++i) v.push_back(lo + step * i);
  return v;
}

// Defaults shared by the figure presets: 7.5 cm x 2.5 cm cell at 63.7 degC, five-level
// atoms, resonant pump, CH1 read out at 160 kHz.
RunConfig preset_base(int channels, double power_mW) {
  RunConfig c;
  c.array.emplace();
  c.array->count = channels;
  c.array->channel.power_mW = power_mW;
  c.array->channel.waist_mm = 0.505;
  c.detection.frequencies_kHz = {160.0};
  return c;
}

RunConfig with_array(RunConfig c, int channels, double power_mW) {
  c.array->count = channels;
  c.array->channel.power_mW = power_mW;
  return c;
}

std::vector<NoiseSpectrum> evaluate_all(const std::vector<Variant>& variants, int threads) {
  std::vector<NoiseSpectrum> out(variants.size());
  parallel_for(variants.size(), threads, [&](std::size_t i) {
    try {
      out[i] = evaluate_channel(variants[i].cfg, 0);
    } catch (const std::exception& e) {
      throw PointError(variants[i].label + ": " + e.what());
    }
  });
  return out;
}

std::vector<std::string> point_cells(const SpectrumPoint& p) {
  return {db(p.s_min_db), db(p.s_max_db), fixed(p.theta * kDeg, 2), db(0.5 * (p.s_min_db + p.s_max_db))};
}

const std::vector<std::string> kPointHeader{"s_min_dB", "s_max_dB", "theta_sq_deg", "purity_dB"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

Series series(std::string label, std::vector<double> x, std::vector<double> y, bool markers = true) {
  return Series{std::move(label), std::move(x), std::move(y), markers};
}

// A family of S_min curves against one swept parameter.
struct Curve {
  std::string label;
  std::vector<double> x;
  std::vector<double> s_min;
  std::vector<double> s_max;
};

void family_chart(Output& out, const std::string& name, const std::string& title, const std::string& x_label,
                  const std::vector<Curve>& curves, bool anti = false) {
  LineChart chart;
  chart.title = title;
  chart.x_label = x_label;
  chart.y_label = anti ? "noise power (dB re shot noise)" : "squeezed quadrature noise (dB)";
  for (const auto& c : curves) {
    chart.series.push_back(series(c.label + (anti ? " squeezed" : ""), c.x, c.s_min));
    if (anti) chart.series.push_back(series(c.label + " anti-squeezed", c.x, c.s_max));
  }
  out.charts.emplace_back(name, chart);
}

json best_point(const Curve& c, const char* key) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < c.s_min.size(); ++i)
    if (c.s_min[i] < c.s_min[k]) k = i;
  return {{key, c.x[k]}, {"s_min_dB", c.s_min[k]}};
}

// ---------------------------------------------------------------------------
// Steady-state presets

void run_power_families(const RunConfig& base, const RunOptions& opts, Output& out,
                        const std::vector<std::pair<std::string, RunConfig>>& families,
                        const std::vector<double>& powers, const std::string& family_column,
                        const std::string& title) {
  std::vector<Variant> variants;
  for (const auto& [label, cfg] : families)
    for (double p : powers)
      variants.push_back({label + ", power_mW=" + label_num(p), with_array(cfg, cfg.array->count, p)});
  const auto spectra = evaluate_all(variants, opts.threads);

  auto& t = out.table("results.csv", concat({family_column, "channels", "power_mW"}, kPointHeader));
  std::vector<Curve> curves;
  std::size_t idx = 0;
  for (const auto& [label, cfg] : families) {
    Curve c{label, {}, {}, {}};
    for (double p : powers) {
      const auto& pt = spectra[idx++].points.at(0);
      t.add_row(concat({label, std::to_string(cfg.array->count), fixed(p, 2)}, point_cells(pt)));
      c.x.push_back(p);
      c.s_min.push_back(pt.s_min_db);
      c.s_max.push_back(pt.s_max_db);
    }
    out.summary["optimum"][label] = best_point(c, "power_mW");
    curves.push_back(c);
  }
  (void)base;
  family_chart(out, "s_min_vs_power.svg", title, "power per channel (mW)", curves);
}

void fig_s1(const RunConfig& base, const RunOptions& opts, Output& out) {
  // "one-, eight-, and thirty-channel arrays, where each channel in the array has
  // identical input laser power", 63.7 degC, resonant, 160 kHz.
  std::vector<std::pair<std::string, RunConfig>> fam;
  for (int n : {1, 8, 30}) fam.emplace_back("N=" + std::to_string(n), with_array(base, n, 1.0));
  run_power_families(base, opts, out, fam, linspace(0.25, 4.0, 0.25), "array",
                     "CH1 squeezing vs power per channel");
}

void fig_s17(const RunConfig& base, const RunOptions& opts, Output& out) {
  // "cell lengths of 7.5 cm (blue) and 12 cm (red)", 30 channels, 63.7 degC, 160 kHz.
  std::vector<std::pair<std::string, RunConfig>> fam;
  for (double len : {7.5, 12.0}) {
    RunConfig c = base;
    c.cell.length_cm = len;
    fam.emplace_back("L=" + label_num(len) + "cm", c);
  }
  run_power_families(base, opts, out, fam, linspace(0.5, 5.0, 0.25), "cell",
                     "30-channel array: cell length");
}

void fig_s18(const RunConfig& base, const RunOptions& opts, Output& out) {
  // "cell diameters of 2.5 cm (blue) and 4 cm (red)", length 7.5 cm, 63.7 degC.
  std::vector<std::pair<std::string, RunConfig>> fam;
  for (double d : {2.5, 4.0}) {
    RunConfig c = base;
    c.cell.diameter_cm = d;
    fam.emplace_back("D=" + label_num(d) + "cm", c);
  }
  run_power_families(base, opts, out, fam, linspace(0.5, 5.0, 0.25), "cell",
                     "30-channel array: cell diameter");
}

void fig_s2(const RunConfig& base, const RunOptions& opts, Output& out) {
  // "as a function of the array size at temperatures of 63.7 degC and 55 degC", 2 mW each.
  const std::vector<int> counts{1, 2, 3, 5, 8, 10, 15, 20, 25, 30};
  const std::vector<double> temps{63.7, 55.0};
  std::vector<Variant> variants;
  for (double t : temps)
    for (int n : counts) {
      RunConfig c = with_array(base, n, base.array->channel.power_mW);
      c.cell.temperature_C = t;
      variants.push_back({"T=" + label_num(t) + "C, N=" + std::to_string(n), c});
    }
  const auto spectra = evaluate_all(variants, opts.threads);
  auto& tab = out.table("results.csv", concat({"temperature_C", "channels", "power_mW"}, kPointHeader));
  std::vector<Curve> curves;
  std::size_t idx = 0;
  for (double t : temps) {
    Curve c{"T=" + label_num(t) + "C", {}, {}, {}};
    for (int n : counts) {
      const auto& pt = spectra[idx++].points.at(0);
      tab.add_row(concat({fixed(t, 1), std::to_string(n), fixed(base.array->channel.power_mW, 2)}, point_cells(pt)));
      c.x.push_back(n);
      c.s_min.push_back(pt.s_min_db);
    }
    curves.push_back(c);
  }
  family_chart(out, "s_min_vs_channels.svg", "CH1 squeezing vs array size, 2 mW per channel",
               "number of channels", curves);
}

void fig_s3(const RunConfig& base, const RunOptions& opts, Output& out) {
  // Two identical squeezed beams combined after one of them is rotated by phi. The
  // model beam comes from a two-channel array at 5 mW; the reference beam is an ideal
  // state with -2.58 dB squeezing and +5.76 dB anti-squeezing.
  const NoiseSpectrum model = evaluate_all({{"two-channel array", base}}, opts.threads).at(0);
  const SpectrumPoint& m = model.points.at(0);
  NoiseSpectrum reference;
  {
    Mat2 cov = Mat2::Zero();
    cov(0, 0) = 0.25 * std::pow(10.0, -0.258);
    cov(1, 1) = 0.25 * std::pow(10.0, 0.576);
    reference.points.push_back(analyze_covariance(cov, m.omega));
  }
  auto& t = out.table("results.csv", {"phi_deg", "combined_model_dB", "combined_reference_dB"});
  Curve cm{"model", {}, {}, {}}, cc{"reference beam", {}, {}, {}};
  for (double phi : linspace(0.0, 180.0, 2.5)) {
    const double rad = phi / kDeg;
    const NoiseSpectrum a[] = {model, model};
    const NoiseSpectrum b[] = {reference, reference};
    const double phis[] = {0.0, rad};
    const Mat2 ca = combine_channels(a, phis).points.at(0).covariance;
    const Mat2 cb = combine_channels(b, phis).points.at(0).covariance;
    // Read out at the fixed squeezing angle of the unrotated beam.
    const double va = quadrature_noise_db(ca, m.theta);
    const double vb = quadrature_noise_db(cb, reference.points[0].theta);
    t.add_row({fixed(phi, 1), db(va), db(vb)});
    cm.x.push_back(phi);
    cm.s_min.push_back(va);
    cc.x.push_back(phi);
    cc.s_min.push_back(vb);
  }
  out.summary["single_beam"] = {{"s_min_dB", m.s_min_db}, {"s_max_dB", m.s_max_db}, {"theta_sq_rad", m.theta}};
  LineChart chart;
  chart.title = "Two combined squeezed beams";
  chart.x_label = "relative rotation phi (deg)";
  chart.y_label = "combined noise (dB)";
  chart.series = {series("model", cm.x, cm.s_min), series("reference beam", cc.x, cc.s_min)};
  out.charts.emplace_back("combined_noise.svg", chart);
}

void fig_s9(const RunConfig& base, const RunOptions& opts, Output& out) {
  // Single channel, resonant, 63.7 degC: four-level against five-level atoms.
  const auto powers = linspace(0.25, 5.0, 0.25);
  const std::vector<std::string> kinds{"four-level", "five-level"};
  std::vector<Variant> variants;
  for (const auto& k : kinds)
    for (double p : powers) {
      RunConfig c = with_array(base, 1, p);
      c.scheme.kind = k;
      variants.push_back({k + ", power_mW=" + label_num(p), c});
    }
  const auto spectra = evaluate_all(variants, opts.threads);
  auto& t = out.table("results.csv", concat({"scheme", "power_mW"}, kPointHeader));
  std::vector<Curve> curves;
  std::size_t idx = 0;
  for (const auto& k : kinds) {
    Curve c{k, {}, {}, {}};
    for (double p : powers) {
      const auto& pt = spectra[idx++].points.at(0);
      t.add_row(concat({k, fixed(p, 2)}, point_cells(pt)));
      c.x.push_back(p);
      c.s_min.push_back(pt.s_min_db);
      c.s_max.push_back(pt.s_max_db);
    }
    std::size_t peak = 0;
    for (std::size_t i = 1; i < c.s_max.size(); ++i)
      if (c.s_max[i] > c.s_max[peak]) peak = i;
    out.summary["anti_squeezing_peak"][k] = {{"power_mW", c.x[peak]}, {"s_max_dB", c.s_max[peak]}};
    curves.push_back(c);
  }
  family_chart(out, "quadratures_vs_power.svg", "Single channel: four- vs five-level atoms",
               "power (mW)", curves, true);
}

void fig_s15(const RunConfig& base, const RunOptions& opts, Output& out) {
  // 70 degC, 5 mW per channel, "red-detuned by 120 MHz", detected at 60 kHz;
  // cell length swept for two diameters.
  const auto lengths = linspace(5.0, 20.0, 2.5);
  const std::vector<double> diameters{2.5, 4.0};
  std::vector<Variant> variants;
  for (double d : diameters)
    for (double len : lengths) {
      RunConfig c = base;
      c.cell.diameter_cm = d;
      c.cell.length_cm = len;
      variants.push_back({"D=" + label_num(d) + "cm, L=" + label_num(len) + "cm", c});
    }
  const auto spectra = evaluate_all(variants, opts.threads);
  auto& t = out.table("results.csv", concat({"diameter_cm", "length_cm"}, kPointHeader));
  std::vector<Curve> curves;
  std::size_t idx = 0;
  for (double d : diameters) {
    Curve c{"D=" + label_num(d) + "cm", {}, {}, {}};
    for (double len : lengths) {
      const auto& pt = spectra[idx++].points.at(0);
      t.add_row(concat({fixed(d, 1), fixed(len, 1)}, point_cells(pt)));
      c.x.push_back(len);
      c.s_min.push_back(pt.s_min_db);
    }
    out.summary["best"][c.label] = best_point(c, "length_cm");
    curves.push_back(c);
  }
  family_chart(out, "s_min_vs_length.svg", "70 degC, 5 mW, 120 MHz red detuning, 60 kHz",
               "cell length (cm)", curves);
}

void fig_s16(const RunConfig& base, const RunOptions& opts, Output& out) {
  // "The powers used are 0.75 mW, 0.75 mW, 1 mW, 1.25 mW, 1.75 mW, 2.25 mW, and
  // 2.75 mW for temperatures of 45, 50, 55, 60, 65, 70, and 75 degC".
  const std::vector<std::pair<double, double>> pairs{{45, 0.75}, {50, 0.75}, {55, 1.0},  {60, 1.25},
                                                      {65, 1.75}, {70, 2.25}, {75, 2.75}};
  std::vector<Variant> variants;
  for (auto [t, p] : pairs) {
    RunConfig c = with_array(base, base.array->count, p);
    c.cell.temperature_C = t;
    variants.push_back({"T=" + label_num(t) + "C, power_mW=" + label_num(p), c});
  }
  const auto spectra = evaluate_all(variants, opts.threads);
  auto& tab = out.table("results.csv", concat({"temperature_C", "power_mW"}, kPointHeader));
  Curve c{"30 channels", {}, {}, {}};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& pt = spectra[i].points.at(0);
    tab.add_row(concat({fixed(pairs[i].first, 1), fixed(pairs[i].second, 2)}, point_cells(pt)));
    c.x.push_back(pairs[i].first);
    c.s_min.push_back(pt.s_min_db);
  }
  family_chart(out, "s_min_vs_temperature.svg", "30 channels at near-optimal power", "temperature (degC)", {c});
}

void fig_s19(const RunConfig& base, const RunOptions& opts, Output& out) {
  // Red detuning scan at 1 mW and 2 mW per channel, for 55 degC and 70 degC.
  const auto detunings = linspace(0.0, 200.0, 20.0);
  std::vector<Variant> variants;
  std::vector<std::tuple<double, double>> families;
  for (double t : {55.0, 70.0})
    for (double p : {1.0, 2.0}) families.emplace_back(t, p);
  for (auto [t, p] : families)
    for (double d : detunings) {
      RunConfig c = with_array(base, base.array->count, p);
      c.cell.temperature_C = t;
      c.array->channel.red_detuning_MHz = d;
      variants.push_back({"T=" + label_num(t) + "C, power_mW=" + label_num(p) + ", detuning=" + label_num(d), c});
    }
  const auto spectra = evaluate_all(variants, opts.threads);
  auto& tab = out.table("results.csv", concat({"temperature_C", "power_mW", "red_detuning_MHz"}, kPointHeader));
  std::vector<Curve> curves;
  std::size_t idx = 0;
  for (auto [t, p] : families) {
    Curve c{label_num(t) + "C, " + label_num(p) + " mW", {}, {}, {}};
    for (double d : detunings) {
      const auto& pt = spectra[idx++].points.at(0);
      tab.add_row(concat({fixed(t, 1), fixed(p, 2), fixed(d, 1)}, point_cells(pt)));
      c.x.push_back(d);
      c.s_min.push_back(pt.s_min_db);
    }
    out.summary["optimal_detuning"][c.label] = best_point(c, "red_detuning_MHz");
    curves.push_back(c);
  }
  family_chart(out, "s_min_vs_detuning.svg", "30 channels: red detuning", "red detuning (MHz)", curves);
}

void fig_s20(const RunConfig& base, const RunOptions& opts, Output& out) {
  // Squeezing spectra for "per-channel optical powers of 2 mW (red) and 5 mW".
  const std::vector<double> powers{2.0, 5.0};
  std::vector<Variant> variants;
  for (double p : powers) variants.push_back({"power_mW=" + label_num(p), with_array(base, base.array->count, p)});
  const auto spectra = evaluate_all(variants, opts.threads);
  auto& t = out.table("results.csv", concat({"power_mW", "frequency_kHz"}, kPointHeader));
  std::vector<Curve> curves;
  for (std::size_t i = 0; i < powers.size(); ++i) {
    Curve c{label_num(powers[i]) + " mW", {}, {}, {}};
    for (const auto& pt : spectra[i].points) {
      const double f = pt.omega / kTwoPi * 1e-3;
      t.add_row(concat({fixed(powers[i], 2), fixed(f, 1)}, point_cells(pt)));
      c.x.push_back(f);
      c.s_min.push_back(pt.s_min_db);
    }
    curves.push_back(c);
  }
  family_chart(out, "s_min_vs_frequency.svg", "30 channels: squeezing spectrum", "detection frequency (kHz)", curves);
}

void fig_5(const RunConfig& base, const RunOptions& opts, Output& out) {
  // "Laser power of 1 mW and beam size of 0.505 mm for each channel. Detection
  // frequency 180 kHz."
  const std::vector<int> counts{1, 2, 3, 5, 8, 10, 15, 20, 25, 30};
  std::vector<Variant> variants;
  for (int n : counts)
    variants.push_back({"N=" + std::to_string(n), with_array(base, n, base.array->channel.power_mW)});
  const auto spectra = evaluate_all(variants, opts.threads);
  auto& t = out.table("results.csv", concat({"channels"}, kPointHeader));
  Curve c{"CH1", {}, {}, {}};
  std::vector<double> purity;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto& pt = spectra[i].points.at(0);
    t.add_row(concat({std::to_string(counts[i])}, point_cells(pt)));
    c.x.push_back(counts[i]);
    c.s_min.push_back(pt.s_min_db);
    c.s_max.push_back(pt.s_max_db);
    purity.push_back(0.5 * (pt.s_min_db + pt.s_max_db));
  }
  family_chart(out, "quadratures_vs_channels.svg", "Squeezed and anti-squeezed noise, 1 mW per channel",
               "number of channels", {c}, true);
  LineChart pc;
  pc.title = "Purity product";
  pc.x_label = "number of channels";
  pc.y_label = "(S_min + S_max) / 2 (dB)";
  pc.series = {series("CH1", c.x, purity)};
  out.charts.emplace_back("purity_vs_channels.svg", pc);
}

// ---------------------------------------------------------------------------
// Dynamics presets

struct Trace {
  std::vector<double> t;                   // s
  std::vector<std::vector<double>> s_min;  // [monitor][snapshot]
  std::optional<RecoveryFit> fit;
  std::string fit_error;
};

Trace run_trace(const RunConfig& cfg, int threads) {
  const ArrayModel model = build_model(cfg);
  const Trajectory traj = time_evolve(model, build_schedule(cfg), build_evolve_options(cfg));
  const auto& d = *cfg.dynamics;
  const auto sq = instantaneous_squeezing(traj, angular(d.detection_kHz * 1e3), d.monitor, threads);
  Trace out;
  out.s_min.assign(d.monitor.size(), {});
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    out.t.push_back(traj.snapshots[i].time);
    for (std::size_t k = 0; k < d.monitor.size(); ++k) out.s_min[k].push_back(sq[i][k]);
  }
  if (d.fit_after_ms) {
    try {
      out.fit = recovery_time(out.t, out.s_min[0], *d.fit_after_ms * 1e-3);
    } catch (const FitError& e) {
      out.fit_error = e.what();
    }
  }
  return out;
}

std::vector<Trace> run_traces(const std::vector<Variant>& variants, int threads) {
  std::vector<Trace> out(variants.size());
  // Trajectories are sequential inside; spread the distinct runs over the workers.
  parallel_for(variants.size(), threads, [&](std::size_t i) {
    try {
      out[i] = run_trace(variants[i].cfg, 1);
    } catch (const std::exception& e) {
      throw PointError(variants[i].label + ": " + e.what());
    }
  });
  return out;
}

json fit_json(const Trace& tr) {
  if (!tr.fit) return {{"error", tr.fit_error}};
  return {{"tau_ms", tr.fit->tau * 1e3},
          {"tau_sigma_ms", tr.fit->tau_sigma * 1e3},
          {"offset_dB", tr.fit->offset},
          {"amplitude_dB", tr.fit->amplitude},
          {"rms_residual_dB", tr.fit->rms_residual}};
}

void fig_3d(const RunConfig& base, const RunOptions& opts, Output& out) {
  // "Channel D, with a laser power of 1.5 mW, is operated as a pulsed beam, with the
  // pulse starting at 0 ms and ending at 20 ms"; channel X from the 2 mW array is
  // monitored; lock-in demodulation at 230 kHz. Coupled: 31 beams. Uncoupled: each alone.
  const int n = base.array->count;
  RunConfig x_alone = base;
  x_alone.array->count = 1;
  x_alone.channels.clear();
  x_alone.dynamics->monitor = {0};
  RunConfig d_alone = base;
  d_alone.array.reset();
  d_alone.dynamics->monitor = {0};
  const std::vector<Variant> variants{{"coupled", base}, {"X alone", x_alone}, {"D alone", d_alone}};
  const auto traces = run_traces(variants, opts.threads);

  auto& t = out.table("results.csv", {"regime", "channel", "t_s", "s_min_dB"});
  auto emit = [&](const std::string& regime, const std::string& name, const Trace& tr, std::size_t k) {
    for (std::size_t i = 0; i < tr.t.size(); ++i) t.add_row({regime, name, exact(tr.t[i]), db(tr.s_min[k][i])});
  };
  emit("coupled", "X", traces[0], 0);
  emit("coupled", "D", traces[0], 1);
  emit("uncoupled", "X", traces[1], 0);
  emit("uncoupled", "D", traces[2], 0);

  LineChart chart;
  chart.title = "Pulsed channel D next to a " + std::to_string(n) + "-channel array";
  chart.x_label = "time (ms)";
  chart.y_label = "squeezed quadrature noise (dB)";
  chart.x_marks = {0.0, 20.0};
  auto ms = [](const std::vector<double>& t) {
    std::vector<double> v;
    for (double x : t) v.push_back(1e3 * x);
    return v;
  };
  chart.series = {series("X coupled", ms(traces[0].t), traces[0].s_min[0], false),
                  series("D coupled", ms(traces[0].t), traces[0].s_min[1], false),
                  series("X alone", ms(traces[1].t), traces[1].s_min[0], false),
                  series("D alone", ms(traces[2].t), traces[2].s_min[0], false)};
  out.charts.emplace_back("squeezing_vs_time.svg", chart);
}

void fig_4b(const RunConfig& base, const RunOptions& opts, Output& out) {
  // "The defect beam has a power of 1.0 mW and a waist of 0.468 mm, whereas the
  // H-polarized array beams have a power of 0.5 mW per channel and a waist of
  // 0.505 mm. The defect beam is switched on at 0 ms and switched off at 20 ms."
  const std::vector<int> counts{1, 5, 8, 15, 30};
  std::vector<Variant> variants;
  for (int n : counts) {
    RunConfig c = base;
    c.array->count = n;
    variants.push_back({"N=" + std::to_string(n), c});
  }
  const auto traces = run_traces(variants, opts.threads);
  auto& t = out.table("results.csv", {"channels", "t_s", "s_min_dB"});
  auto& r = out.table("recovery.csv", {"channels", "tau_ms", "tau_sigma_ms", "fit_error"});
  LineChart chart;
  chart.title = "CH1 after a V-polarized defect pulse";
  chart.x_label = "time (ms)";
  chart.y_label = "squeezed quadrature noise (dB)";
  chart.x_marks = {0.0, 20.0};
  LineChart taus;
  taus.title = "Recovery time";
  taus.x_label = "number of channels";
  taus.y_label = "tau (ms)";
  Series tau_series{"fit", {}, {}, true};
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const Trace& tr = traces[k];
    std::vector<double> ms;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
      t.add_row({std::to_string(counts[k]), exact(tr.t[i]), db(tr.s_min[0][i])});
      ms.push_back(1e3 * tr.t[i]);
    }
    chart.series.push_back(series("N=" + std::to_string(counts[k]), ms, tr.s_min[0], false));
    if (tr.fit) {
      r.add_row({std::to_string(counts[k]), fixed(tr.fit->tau * 1e3, 3), fixed(tr.fit->tau_sigma * 1e3, 3), ""});
      tau_series.x.push_back(counts[k]);
      tau_series.y.push_back(tr.fit->tau * 1e3);
    } else {
      r.add_row({std::to_string(counts[k]), "", "", tr.fit_error});
    }
    out.summary["recovery"]["N=" + std::to_string(counts[k])] = fit_json(tr);
  }
  taus.series.push_back(tau_series);
  out.charts.emplace_back("squeezing_vs_time.svg", chart);
  out.charts.emplace_back("recovery_time.svg", taus);
}

// ---------------------------------------------------------------------------

void far_field_preset(const RunConfig&, const RunOptions&, Output& out) {
  // Four adjacent beams of the square lattice, "in-phase 4-beam lattice". The
  // pitch is not quoted; 1.5 mm leaves the beams well separated.
  const double pitch = 1.5e-3;
  LatticeSpec spec;
  for (double y : {-0.5, 0.5})
    for (double x : {-0.5, 0.5}) spec.beams.push_back({x * pitch, y * pitch, {1.0, 0.0}});
  LatticeSpec checker = spec;
  checker.beams[1].amplitude = checker.beams[2].amplitude = {-1.0, 0.0};

  const FarField in_phase = far_field(spec);
  const FarField alternating = far_field(checker);
  const int crop = 128;
  const int o = in_phase.size / 2 - crop / 2;
  out.images.emplace_back("far_field_in_phase", in_phase.intensity.block(o, o, crop, crop));
  // Both patterns on a common scale: the alternating lattice normalized to the in-phase peak.
  const Eigen::MatrixXd alt = alternating.intensity * (alternating.peak / in_phase.peak);
  out.images.emplace_back("far_field_checkerboard", alt.block(o, o, crop, crop));

  auto& t = out.table("results.csv", {"spatial_frequency_per_mm", "in_phase", "checkerboard"});
  Series a{"in phase", {}, {}, false}, b{"checkerboard", {}, {}, false};
  const int c = in_phase.size / 2;
  for (int k = o; k < o + crop; ++k) {
    const double f = (k - c) * in_phase.spatial_frequency_step * 1e-3;
    t.add_row({fixed(f, 4), fixed(in_phase.intensity(c, k), 6), fixed(alt(c, k), 6)});
    a.x.push_back(f);
    a.y.push_back(in_phase.intensity(c, k));
    b.x.push_back(f);
    b.y.push_back(alt(c, k));
  }
  out.summary["pitch_mm"] = pitch * 1e3;
  out.summary["waist_mm"] = spec.waist * 1e3;
  out.summary["center_in_phase"] = in_phase.intensity(c, c);
  out.summary["center_checkerboard"] = alt(c, c);
  out.summary["parseval_relative_error"] = std::abs(in_phase.energy - in_phase.near_energy) / in_phase.near_energy;
  LineChart chart;
  chart.title = "Far field of a 2 x 2 lattice, horizontal cut";
  chart.x_label = "spatial frequency (1/mm)";
  chart.y_label = "intensity (in-phase peak = 1)";
  chart.series = {a, b};
  out.charts.emplace_back("far_field_cut.svg", chart);
}

// ---------------------------------------------------------------------------

void config_run(const RunConfig& cfg, const RunOptions& opts, Output& out) {
  const ArrayModel model = build_model(cfg);
  ArraySolution sol;
  try {
    sol = solve_array(model);
  } catch (const std::exception& e) {
    throw PointError(std::string("steady state: ") + e.what());
  }
  const auto omegas = cfg.omegas();
  SpectrumOptions so;
  so.lock_to_pump = cfg.detection.lock_to_pump;
  std::vector<NoiseSpectrum> per_profile(sol.profiles.size());
  std::vector<int> representative(sol.profiles.size(), -1);
  for (std::size_t i = 0; i < sol.profile_of.size(); ++i)
    if (representative[sol.profile_of[i]] < 0) representative[sol.profile_of[i]] = static_cast<int>(i);
  parallel_for(per_profile.size(), opts.threads, [&](std::size_t p) {
    try {
      per_profile[p] = channel_spectrum(sol, representative[p], omegas, so);
    } catch (const std::exception& e) {
      throw PointError("channel " + std::to_string(representative[p]) + ": " + e.what());
    }
  });

  auto& t = out.table("results.csv", {"channel", "frequency_Hz", "s_min_dB", "s_max_dB", "theta_sq_rad", "purity_dB"});
  json channels = json::array();
  for (std::size_t i = 0; i < sol.profile_of.size(); ++i) {
    const auto& spec = per_profile[sol.profile_of[i]];
    for (const auto& p : spec.points)
      t.add_row({std::to_string(i), exact(p.omega / kTwoPi), db(p.s_min_db), db(p.s_max_db), fixed(p.theta, 4),
                 db(0.5 * (p.s_min_db + p.s_max_db))});
    channels.push_back({{"index", i}, {"profile", sol.profile_of[i]}});
  }
  json profiles = json::array();
  for (std::size_t p = 0; p < sol.profiles.size(); ++p) {
    const auto& prof = sol.profiles[p];
    profiles.push_back({{"representative", representative[p]},
                        {"mean_state", matrix_json(sol.channel_mean(representative[p]))},
                        {"output_rabi", {prof.output_rabi.real(), prof.output_rabi.imag()}},
                        {"spectrum", spectrum_json(per_profile[p])}});
  }
  out.documents.emplace_back("steady_state.json", json{{"dark_state", matrix_json(sol.dark)},
                                                       {"iterations", sol.iterations},
                                                       {"channels", channels},
                                                       {"profiles", profiles}});
  out.summary["channel_0"] = {{"s_min_dB", per_profile[sol.profile_of[0]].points[0].s_min_db},
                              {"s_max_dB", per_profile[sol.profile_of[0]].points[0].s_max_db}};
  if (omegas.size() > 1) {
    LineChart chart;
    chart.title = "CH1 noise spectrum";
    chart.x_label = "detection frequency (kHz)";
    chart.y_label = "noise power (dB re shot noise)";
    Series lo{"squeezed", {}, {}, true}, hi{"anti-squeezed", {}, {}, true};
    for (const auto& p : per_profile[sol.profile_of[0]].points) {
      lo.x.push_back(p.omega / kTwoPi * 1e-3);
      lo.y.push_back(p.s_min_db);
      hi.x.push_back(p.omega / kTwoPi * 1e-3);
      hi.y.push_back(p.s_max_db);
    }
    chart.series = {lo, hi};
    out.charts.emplace_back("spectrum.svg", chart);
  }

  if (cfg.dynamics) {
    Trace tr;
    try {
      tr = run_trace(cfg, opts.threads);
    } catch (const std::exception& e) {
      throw PointError(std::string("dynamics: ") + e.what());
    }
    auto& tt = out.table("trajectory.csv", {"t_s", "channel_id", "s_min_dB"});
    LineChart chart;
    chart.title = "Instantaneous squeezing";
    chart.x_label = "time (ms)";
    chart.y_label = "squeezed quadrature noise (dB)";
    for (std::size_t k = 0; k < cfg.dynamics->monitor.size(); ++k) {
      Series s{"channel " + std::to_string(cfg.dynamics->monitor[k]), {}, {}, false};
      for (std::size_t i = 0; i < tr.t.size(); ++i) {
        tt.add_row({exact(tr.t[i]), std::to_string(cfg.dynamics->monitor[k]), db(tr.s_min[k][i])});
        s.x.push_back(1e3 * tr.t[i]);
        s.y.push_back(tr.s_min[k][i]);
      }
      chart.series.push_back(s);
    }
    out.charts.emplace_back("trajectory.svg", chart);
    if (cfg.dynamics->fit_after_ms) out.summary["recovery"] = fit_json(tr);
  }
}

// ---------------------------------------------------------------------------

struct Preset {
  const char* name;
  const char* description;
  std::function<RunConfig()> config;
  std::function<void(const RunConfig&, const RunOptions&, Output&)> run;
};

const std::vector<Preset>& presets() {
  static const std::vector<Preset> table{
      {"fig-s1", "CH1 S_min vs power per channel for 1, 8 and 30 channels (63.7 degC, 160 kHz)",
       [] { return preset_base(30, 1.0); }, fig_s1},
      {"fig-s2", "CH1 S_min vs array size at 63.7 and 55 degC, 2 mW per channel",
       [] { return preset_base(30, 2.0); }, fig_s2},
      {"fig-s3", "Combined noise of two squeezed beams vs relative rotation",
       [] {
         RunConfig c = preset_base(2, 5.0);
         return c;
       },
       fig_s3},
      {"fig-s9", "Single channel S_min and S_max vs power, four- vs five-level atoms",
       [] { return preset_base(1, 1.0); }, fig_s9},
      {"fig-s15", "30 channels at 70 degC, 5 mW, 120 MHz red detuning, 60 kHz, vs cell length",
       [] {
         RunConfig c = preset_base(30, 5.0);
         c.cell.temperature_C = 70.0;
         c.array->channel.red_detuning_MHz = 120.0;
         c.detection.frequencies_kHz = {60.0};
         return c;
       },
       fig_s15},
      {"fig-s16", "30 channels at near-optimal power per temperature, 45 to 75 degC",
       [] { return preset_base(30, 1.0); }, fig_s16},
      {"fig-s17", "30 channels S_min vs power for 7.5 cm and 12 cm cells",
       [] { return preset_base(30, 1.5); }, fig_s17},
      {"fig-s18", "30 channels S_min vs power for 2.5 cm and 4 cm cell diameters",
       [] { return preset_base(30, 1.5); }, fig_s18},
      {"fig-s19", "30 channels S_min vs red detuning at 1 and 2 mW, 55 and 70 degC",
       [] { return preset_base(30, 1.0); }, fig_s19},
      {"fig-s20", "30 channels squeezing spectra at 2 and 5 mW per channel",
       [] {
         RunConfig c = preset_base(30, 2.0);
         c.detection.frequencies_kHz = {10, 20, 40, 60, 80, 100, 130, 160, 200, 250, 300, 400, 500, 650, 800, 1000};
         return c;
       },
       fig_s20},
      {"fig-3d", "Pulsed 1.5 mW channel D beside a 30-channel 2 mW array, coupled and alone (230 kHz)",
       [] {
         RunConfig c = preset_base(30, 2.0);
         ChannelSection d;
         d.power_mW = 1.5;
         d.pulses = {{0.0, 20.0, 1.5}};
         c.channels = {d};
         c.detection.frequencies_kHz = {230.0};
         DynamicsSection dyn;
         dyn.detection_kHz = 230.0;
         dyn.monitor = {0, 30};
         c.dynamics = dyn;
         // Trajectories re-solve the channel maps many times; 32 velocity classes keep
         // a run to a minute or so.
         c.numerics.doppler_points = 32;
         return c;
       },
       fig_3d},
      {"fig-4b", "Recovery of CH1 after a 20 ms V-polarized defect pulse, N = 1, 5, 8, 15, 30 (186 kHz)",
       [] {
         RunConfig c = preset_base(30, 0.5);
         ChannelSection d;
         d.power_mW = 1.0;
         d.waist_mm = 0.468;
         d.polarization = "V";
         d.pulses = {{0.0, 20.0, 1.0}};
         c.channels = {d};
         c.detection.frequencies_kHz = {186.0};
         DynamicsSection dyn;
         dyn.detection_kHz = 186.0;
         dyn.monitor = {0};
         dyn.fit_after_ms = 20.0;
         c.dynamics = dyn;
         c.numerics.doppler_points = 32;
         return c;
       },
       fig_4b},
      {"fig-5", "CH1 squeezed, anti-squeezed and purity product vs array size, 1 mW, 180 kHz",
       [] {
         RunConfig c = preset_base(30, 1.0);
         c.detection.frequencies_kHz = {180.0};
         return c;
       },
       fig_5},
      {"far-field", "Far-field intensity of an in-phase 2 x 2 beam lattice (and a checkerboard)",
       [] { return preset_base(4, 1.0); }, far_field_preset},
  };
  return table;
}

const Preset* find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (name == p.name) return &p;
  return nullptr;
}

bool looks_like_manifest(const json& doc) {
  return doc.is_object() && doc.contains("manifest_version") && doc.contains("scenario") && doc.contains("config");
}

}  // namespace

std::vector<ScenarioInfo> list_scenarios() {
  std::vector<ScenarioInfo> out;
  for (const auto& p : presets()) out.push_back({p.name, p.description});
  return out;
}

bool is_scenario(const std::string& name) { return find_preset(name) != nullptr; }

RunConfig scenario_config(const std::string& name) {
  const Preset* p = find_preset(name);
  if (!p) throw ValidationError("unknown scenario \"" + name + "\"");
  return p->config();
}

json option_overrides(const RunOptions& opts) {
  json o = json::object();
  if (opts.doppler_points) o["numerics.doppler_points"] = *opts.doppler_points;
  if (opts.slices) o["numerics.slices"] = *opts.slices;
  if (opts.no_depletion) o["numerics.pump_depletion"] = false;
  return o;
}

RunConfig apply_overrides(const RunConfig& cfg, const json& overrides) {
  if (overrides.empty()) return cfg;
  json doc = config_to_json(cfg);
  for (const auto& [path, value] : overrides.items()) set_path(doc, path, value);
  return config_from_json(doc);
}

std::filesystem::path output_directory(const std::string& name, const RunConfig& cfg, const RunOptions& opts) {
  if (!opts.out.empty()) return opts.out;
  if (!cfg.output.directory.empty()) return cfg.output.directory;
  if (const char* root = std::getenv("SQZ_OUTPUT_ROOT"); root && *root) return std::filesystem::path(root) / name;
  return std::filesystem::path("sqz-results") / name;
}

NoiseSpectrum evaluate_channel(const RunConfig& cfg, int channel) {
  const ArraySolution sol = solve_array(build_model(cfg));
  SpectrumOptions so;
  so.lock_to_pump = cfg.detection.lock_to_pump;
  return channel_spectrum(sol, channel, cfg.omegas(), so);
}

RunResult run_scenario(const std::string& name, const RunConfig& resolved, const json& overrides,
                       const RunOptions& opts, const std::string& source) {
  Output out;
  if (name == "config") {
    config_run(resolved, opts, out);
  } else {
    const Preset* p = find_preset(name);
    if (!p) throw ValidationError("unknown scenario \"" + name + "\"");
    p->run(resolved, opts, out);
  }

  const std::string label = name == "config" && !source.empty() ? std::filesystem::path(source).stem().string() : name;
  RunResult result;
  result.scenario = name;
  result.directory = output_directory(label, resolved, opts);
  result.summary = out.summary;
  auto emit = [&](const std::string& file, const std::string& text) {
    const auto path = result.directory / file;
    write_text(path, text);
    result.files.push_back(path);
  };
  for (const auto& [file, table] : out.tables) emit(file, table.str());
  for (const auto& [file, doc] : out.documents) emit(file, doc.dump(2) + "\n");
  for (const auto& [stem, grid] : out.images) {
    write_pgm(result.directory / (stem + ".pgm"), grid);
    write_grid_csv(result.directory / (stem + ".csv"), grid);
    result.files.push_back(result.directory / (stem + ".pgm"));
    result.files.push_back(result.directory / (stem + ".csv"));
  }
  if (opts.svg && resolved.output.svg)
    for (const auto& [file, chart] : out.charts) emit(file, render_svg(chart));
  emit("summary.json", out.summary.dump(2) + "\n");

  json manifest;
  manifest["manifest_version"] = 1;
  manifest["tool"] = "sqzarray";
  manifest["version"] = version();
  manifest["scenario"] = name;
  manifest["source"] = source;
  manifest["overrides"] = overrides;
  manifest["config"] = config_to_json(resolved);
  json files = json::array();
  for (const auto& f : result.files) files.push_back(f.filename().string());
  manifest["files"] = files;
  write_json(result.directory / "manifest.json", manifest);
  result.files.push_back(result.directory / "manifest.json");
  return result;
}

RunResult run_target(const std::string& target, const RunOptions& opts) {
  const json cli = option_overrides(opts);
  if (is_scenario(target)) return run_scenario(target, apply_overrides(scenario_config(target), cli), cli, opts);

  if (!std::filesystem::exists(target))
    throw ValidationError("\"" + target + "\" is neither a scenario name nor an existing file");
  const json doc = read_json(target);
  if (looks_like_manifest(doc)) {
    const std::string name = doc.at("scenario").get<std::string>();
    if (name != "config" && !is_scenario(name))
      throw ValidationError(target + ": manifest names unknown scenario \"" + name + "\"");
    json overrides = doc.value("overrides", json::object());
    for (const auto& [k, v] : cli.items()) overrides[k] = v;
    const RunConfig resolved = apply_overrides(config_from_json(doc.at("config")), cli);
    return run_scenario(name, resolved, overrides, opts, doc.value("source", std::string()));
  }
  const RunConfig cfg = apply_overrides(load_config(target), cli);
  return run_scenario("config", cfg, cli, opts, target);
}

}  // namespace sqz
