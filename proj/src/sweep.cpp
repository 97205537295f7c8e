#include "sqz/sweep.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "sqz/dynamics.hpp"
#include "sqz/errors.hpp"
#include "sqz/parallel.hpp"
#include "sqz/svg_chart.hpp"

namespace sqz {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) throw ValidationError(where + "." + k + ": unknown key");
  }
}

std::string cell_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

std::string format_metric(Metric m, double v) {
  if (std::isnan(v)) return "";
  switch (m) {
    case Metric::ThetaSq: return fixed(v, 4);
    case Metric::TauRecovery: return fixed(v, 4);
    default: return db(v);
  }
}

std::string column_name(Metric m) {
  switch (m) {
    case Metric::SMin: return "s_min_dB";
    case Metric::SMax: return "s_max_dB";
    case Metric::ThetaSq: return "theta_sq_rad";
    case Metric::Purity: return "purity_dB";
    case Metric::TauRecovery: return "tau_recovery_ms";
  }
  return "?";
}

std::vector<double> numeric_range(const json& r, const std::string& where) {
  only_keys(r, where, {"start", "stop", "step"});
  if (!r.contains("start") || !r.contains("stop") || !r.contains("step"))
    throw ValidationError(where + ": range needs start, stop and step");
  const double a = r.at("start").get<double>();
  const double b = r.at("stop").get<double>();
  const double s = r.at("step").get<double>();
  if (!(s > 0.0) || !(b >= a)) throw ValidationError(where + ": need step > 0 and stop >= start");
  const double n = std::floor((b - a) / s + 1e-9);
  if (n + 1 > static_cast<double>(SweepSpec::kMaxPoints))
    throw ValidationError(where + ": range has more than 1e5 values");
  std::vector<double> out;
  for (long i = 0; i <= static_cast<long>(n); ++i) out.push_back(a + s * static_cast<double>(i));
  return out;
}

}  // namespace

const char* to_string(Metric m) {
  switch (m) {
    case Metric::SMin: return "s_min_db";
    case Metric::SMax: return "s_max_db";
    case Metric::ThetaSq: return "theta_sq";
    case Metric::Purity: return "purity_db";
    case Metric::TauRecovery: return "tau_recovery";
  }
  return "?";
}

Metric metric_from_string(const std::string& name) {
  for (Metric m : {Metric::SMin, Metric::SMax, Metric::ThetaSq, Metric::Purity, Metric::TauRecovery})
    if (name == to_string(m)) return m;
  throw ValidationError("unknown metric \"" + name +
                        "\" (expected s_min_db, s_max_db, theta_sq, purity_db or tau_recovery)");
}

std::size_t SweepSpec::size() const {
  if (axes.empty()) return 0;
  if (mode == SweepMode::Zip) return axes.front().values.size();
  std::size_t n = 1;
  for (const auto& a : axes) {
    if (a.values.empty()) return 0;
    if (n > kMaxPoints / a.values.size() + 1) return kMaxPoints + 1;
    n *= a.values.size();
  }
  return n;
}

void SweepSpec::validate() const {
  if (axes.empty()) throw ValidationError("sweep needs at least one axis");
  std::set<std::string> paths;
  for (const auto& a : axes) {
    if (a.values.empty()) throw ValidationError("axis \"" + a.path + "\" has no values");
    if (!paths.insert(a.path).second) throw ValidationError("axis \"" + a.path + "\" appears twice");
    if (mode == SweepMode::Zip && a.values.size() != axes.front().values.size())
      throw ValidationError("zip mode needs axes of equal length");
  }
  if (size() > kMaxPoints) throw ValidationError("sweep has more than 1e5 points");
  if (metrics.empty()) throw ValidationError("sweep needs at least one metric");
  if (channel < 0) throw ValidationError("channel must be non-negative");
  if (objective) {
    bool listed = false;
    for (Metric m : metrics) listed = listed || m == objective->metric;
    if (!listed) throw ValidationError("objective metric must be one of the sweep metrics");
    for (const auto& g : objective->group_by)
      if (!paths.count(g)) throw ValidationError("group_by names \"" + g + "\", which is not an axis");
  }
}

std::vector<json> SweepSpec::point(std::size_t index) const {
  std::vector<json> v(axes.size());
  if (mode == SweepMode::Zip) {
    for (std::size_t a = 0; a < axes.size(); ++a) v[a] = axes[a].values.at(index);
    return v;
  }
  for (std::size_t a = axes.size(); a-- > 0;) {
    const std::size_t n = axes[a].values.size();
    v[a] = axes[a].values[index % n];
    index /= n;
  }
  return v;
}

SweepSpec parse_sweep(const json& doc) {
  only_keys(doc, "sweep", {"base", "axes", "mode", "metrics", "channel", "objective", "label"});
  SweepSpec s;
  if (!doc.contains("axes") || !doc.at("axes").is_array()) throw ValidationError("sweep.axes: expected an array");
  const json& axes = doc.at("axes");
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const std::string where = "sweep.axes[" + std::to_string(i) + "]";
    only_keys(axes[i], where, {"path", "values", "range"});
    SweepAxis a;
    if (!axes[i].contains("path") || !axes[i].at("path").is_string())
      throw ValidationError(where + ".path: expected a string");
    a.path = axes[i].at("path").get<std::string>();
    if (axes[i].contains("values") == axes[i].contains("range"))
      throw ValidationError(where + ": give exactly one of values or range");
    if (axes[i].contains("values")) {
      if (!axes[i].at("values").is_array()) throw ValidationError(where + ".values: expected an array");
      for (const auto& v : axes[i].at("values")) a.values.push_back(v);
    } else {
      for (double v : numeric_range(axes[i].at("range"), where + ".range")) a.values.push_back(v);
    }
    s.axes.push_back(a);
  }
  if (doc.contains("mode")) {
    const std::string m = doc.at("mode").get<std::string>();
    if (m == "product") s.mode = SweepMode::Product;
    else if (m == "zip") s.mode = SweepMode::Zip;
    else throw ValidationError("sweep.mode: must be \"product\" or \"zip\"");
  }
  if (doc.contains("metrics")) {
    s.metrics.clear();
    for (const auto& m : doc.at("metrics")) s.metrics.push_back(metric_from_string(m.get<std::string>()));
  }
  if (doc.contains("channel")) {
    if (!doc.at("channel").is_number_integer()) throw ValidationError("sweep.channel: expected an integer");
    s.channel = doc.at("channel").get<int>();
  }
  if (doc.contains("objective")) {
    const json& o = doc.at("objective");
    only_keys(o, "sweep.objective", {"metric", "goal", "group_by"});
    Objective obj;
    if (o.contains("metric")) obj.metric = metric_from_string(o.at("metric").get<std::string>());
    if (o.contains("goal")) {
      const std::string g = o.at("goal").get<std::string>();
      if (g != "min" && g != "max") throw ValidationError("sweep.objective.goal: must be \"min\" or \"max\"");
      obj.maximize = g == "max";
    }
    if (o.contains("group_by"))
      for (const auto& g : o.at("group_by")) obj.group_by.push_back(g.get<std::string>());
    s.objective = obj;
  }
  s.validate();
  return s;
}

json sweep_to_json(const SweepSpec& s) {
  json axes = json::array();
  for (const auto& a : s.axes) axes.push_back({{"path", a.path}, {"values", a.values}});
  json metrics = json::array();
  for (Metric m : s.metrics) metrics.push_back(to_string(m));
  json j = {{"axes", axes},
            {"mode", s.mode == SweepMode::Zip ? "zip" : "product"},
            {"metrics", metrics},
            {"channel", s.channel}};
  if (s.objective)
    j["objective"] = {{"metric", to_string(s.objective->metric)},
                      {"goal", s.objective->maximize ? "max" : "min"},
                      {"group_by", s.objective->group_by}};
  return j;
}

std::vector<double> evaluate_metrics(const RunConfig& cfg, const std::vector<Metric>& metrics, int channel) {
  const int n = static_cast<int>(cfg.expanded_channels().size());
  if (channel >= n) throw ValidationError("channel " + std::to_string(channel) + " out of range");
  std::optional<SpectrumPoint> p;
  std::optional<double> tau;
  std::vector<double> out;
  for (Metric m : metrics) {
    if (m == Metric::TauRecovery) {
      if (!tau) {
        if (!cfg.dynamics || !cfg.dynamics->fit_after_ms)
          throw ValidationError("tau_recovery needs a dynamics section with fit_after_ms");
        RunConfig c = cfg;
        c.dynamics->monitor = {channel};
        const Trajectory traj = time_evolve(build_model(c), build_schedule(c), build_evolve_options(c));
        const auto sq = instantaneous_squeezing(traj, angular(c.dynamics->detection_kHz * 1e3), {channel});
        std::vector<double> t, s;
        for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
          t.push_back(traj.snapshots[i].time);
          s.push_back(sq[i][0]);
        }
        tau = recovery_time(t, s, *c.dynamics->fit_after_ms * 1e-3).tau * 1e3;
      }
      out.push_back(*tau);
      continue;
    }
    if (!p) p = evaluate_channel(cfg, channel).points.at(0);
    switch (m) {
      case Metric::SMin: out.push_back(p->s_min_db); break;
      case Metric::SMax: out.push_back(p->s_max_db); break;
      case Metric::ThetaSq: out.push_back(p->theta); break;
      case Metric::Purity: out.push_back(0.5 * (p->s_min_db + p->s_max_db)); break;
      default: break;
    }
  }
  return out;
}

SweepResult run_sweep(const SweepSpec& spec, const RunConfig& base, int threads) {
  spec.validate();
  SweepResult r;
  r.spec = spec;
  r.points.resize(spec.size());
  const json base_doc = config_to_json(base);
  parallel_for(r.points.size(), threads, [&](std::size_t i) {
    SweepPoint& pt = r.points[i];
    pt.values = spec.point(i);
    try {
      json doc = base_doc;
      for (std::size_t a = 0; a < spec.axes.size(); ++a) set_path(doc, spec.axes[a].path, pt.values[a]);
      pt.metrics = evaluate_metrics(config_from_json(doc), spec.metrics, spec.channel);
    } catch (const std::exception& e) {
      pt.metrics.assign(spec.metrics.size(), kNaN);
      pt.error = e.what();
    }
  });
  return r;
}

CsvTable SweepResult::table() const {
  std::vector<std::string> header{"index"};
  for (const auto& a : spec.axes) header.push_back(a.path);
  for (Metric m : spec.metrics) header.push_back(column_name(m));
  header.push_back("error");
  CsvTable t(header);
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    for (const auto& v : points[i].values) row.push_back(cell_text(v));
    for (std::size_t k = 0; k < spec.metrics.size(); ++k)
      row.push_back(format_metric(spec.metrics[k], points[i].metrics[k]));
    row.push_back(points[i].error);
    t.add_row(row);
  }
  return t;
}

json SweepResult::best() const {
  const Objective obj = spec.objective.value_or(Objective{spec.metrics.front(), false, {}});
  std::size_t col = 0;
  while (spec.metrics[col] != obj.metric) ++col;
  std::vector<std::size_t> group_axes;
  for (const auto& g : obj.group_by)
    for (std::size_t a = 0; a < spec.axes.size(); ++a)
      if (spec.axes[a].path == g) group_axes.push_back(a);

  auto describe = [&](std::size_t i) {
    json values = json::object();
    for (std::size_t a = 0; a < spec.axes.size(); ++a) values[spec.axes[a].path] = points[i].values[a];
    return json{{"index", i}, {"values", values}, {to_string(obj.metric), points[i].metrics[col]}};
  };
  struct Extremes {
    std::optional<std::size_t> lo, hi;
  };
  auto update = [&](Extremes& e, std::size_t i) {
    const double v = points[i].metrics[col];
    if (std::isnan(v)) return;
    if (!e.lo || v < points[*e.lo].metrics[col]) e.lo = i;
    if (!e.hi || v > points[*e.hi].metrics[col]) e.hi = i;
  };
  auto report = [&](const Extremes& e) {
    json j = json::object();
    if (!e.lo) return json{{"error", "no successful points"}};
    j["argmin"] = describe(*e.lo);
    j["argmax"] = describe(*e.hi);
    j["best"] = describe(obj.maximize ? *e.hi : *e.lo);
    return j;
  };

  Extremes all;
  std::vector<std::string> order;
  std::map<std::string, std::pair<json, Extremes>> groups;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].error.empty()) ++failures;
    update(all, i);
    if (group_axes.empty()) continue;
    json key = json::object();
    for (std::size_t a : group_axes) key[spec.axes[a].path] = points[i].values[a];
    const std::string k = key.dump();
    if (!groups.count(k)) {
      order.push_back(k);
      groups[k].first = key;
    }
    update(groups[k].second, i);
  }
  json out = {{"metric", to_string(obj.metric)},
              {"goal", obj.maximize ? "max" : "min"},
              {"points", points.size()},
              {"failures", failures},
              {"overall", report(all)}};
  if (!group_axes.empty()) {
    json list = json::array();
    for (const auto& k : order) {
      json g = report(groups[k].second);
      g["group"] = groups[k].first;
      list.push_back(g);
    }
    out["groups"] = list;
  }
  return out;
}

RunResult run_sweep_file(const std::filesystem::path& path, const RunOptions& opts) {
  json doc = read_json(path);
  std::string label = path.stem().string();
  if (doc.is_object() && doc.contains("manifest_version") && doc.contains("sweep")) {
    label = doc.value("label", label);
    doc = doc.at("sweep");
  }
  if (doc.contains("label")) label = doc.at("label").get<std::string>();
  if (!doc.contains("base")) throw ValidationError(path.string() + ": sweep.base is missing");
  const json& b = doc.at("base");
  RunConfig base;
  if (b.is_string()) {
    const std::string name = b.get<std::string>();
    if (is_scenario(name)) {
      base = scenario_config(name);
    } else {
      std::filesystem::path p = name;
      if (p.is_relative()) p = path.parent_path() / p;
      base = load_config(p);
    }
  } else {
    base = config_from_json(b);
  }
  const json cli = option_overrides(opts);
  base = apply_overrides(base, cli);
  const SweepSpec spec = parse_sweep(doc);
  const SweepResult result = run_sweep(spec, base, opts.threads);

  RunResult out;
  out.scenario = "sweep";
  out.directory = output_directory(label, base, opts);
  out.summary = result.best();
  write_text(out.directory / "sweep.csv", result.table().str());
  out.files.push_back(out.directory / "sweep.csv");
  write_json(out.directory / "best.json", out.summary);
  out.files.push_back(out.directory / "best.json");

  // Chart the first metric against the last axis, one line per combination of the others.
  const auto& last = spec.axes.back();
  const bool numeric_x = std::all_of(last.values.begin(), last.values.end(), [](const json& v) { return v.is_number(); });
  if (opts.svg && base.output.svg && numeric_x && spec.mode == SweepMode::Product) {
    std::map<std::string, Series> lines;
    std::vector<std::string> order;
    for (const auto& pt : result.points) {
      std::string key;
      for (std::size_t a = 0; a + 1 < spec.axes.size(); ++a)
        key += (key.empty() ? "" : ", ") + spec.axes[a].path + "=" + cell_text(pt.values[a]);
      if (!lines.count(key)) {
        order.push_back(key);
        lines[key].label = key.empty() ? to_string(spec.metrics.front()) : key;
      }
      lines[key].x.push_back(pt.values.back().get<double>());
      lines[key].y.push_back(pt.metrics.front());
    }
    if (order.size() <= 8) {
      LineChart chart;
      chart.title = "Sweep: " + std::string(to_string(spec.metrics.front()));
      chart.x_label = last.path;
      chart.y_label = to_string(spec.metrics.front());
      for (const auto& k : order) chart.series.push_back(lines[k]);
      write_svg(out.directory / "sweep.svg", chart);
      out.files.push_back(out.directory / "sweep.svg");
    }
  }

  json resolved = sweep_to_json(spec);
  resolved["base"] = config_to_json(base);
  json manifest = {{"manifest_version", 1},
                   {"tool", "sqzarray"},
                   {"version", version()},
                   {"label", label},
                   {"overrides", cli},
                   {"sweep", resolved}};
  write_json(out.directory / "manifest.json", manifest);
  out.files.push_back(out.directory / "manifest.json");
  return out;
}

}  // namespace sqz
