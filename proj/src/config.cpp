#include "sqz/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sqz/errors.hpp"

namespace sqz {

namespace {

struct Location {
  int line = 0;
  int column = 0;
};

Location location_of_offset(const std::string& text, std::size_t offset) {
  Location loc{1, 1};
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++loc.line;
      loc.column = 1;
    } else {
      ++loc.column;
    }
  }
  return loc;
}

// nlohmann::json keeps no source positions, so a second pass over the (already
// syntax-checked) text maps every key and array element to where it starts.
class SourceMap {
 public:
  explicit SourceMap(const std::string& text) : text_(text) { scan(); }

  Location find(const std::string& path) const {
    auto it = where_.find(path);
    return it == where_.end() ? Location{} : it->second;
  }

 private:
  struct Frame {
    bool array = false;
    int index = 0;
    std::string path;
  };

  void scan() {
    std::vector<Frame> stack;
    std::string pending;  // path of the value about to be read
    bool expect_key = false;
    int line = 1, column = 1;
    std::size_t i = 0;
    auto advance = [&] {
      if (text_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
      ++i;
    };
    auto element_start = [&] {
      if (!stack.empty() && stack.back().array) {
        pending = stack.back().path + "[" + std::to_string(stack.back().index) + "]";
        where_.emplace(pending, Location{line, column});
      }
    };
    while (i < text_.size()) {
      const char c = text_[i];
      if (c == '/' && i + 1 < text_.size() && text_[i + 1] == '/') {
        while (i < text_.size() && text_[i] != '\n') advance();
      } else if (c == '/' && i + 1 < text_.size() && text_[i + 1] == '*') {
        advance();
        advance();
        while (i + 1 < text_.size() && !(text_[i] == '*' && text_[i + 1] == '/')) advance();
        if (i < text_.size()) advance();
        if (i < text_.size()) advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '{' || c == '[') {
        element_start();
        stack.push_back({c == '[', 0, pending});
        expect_key = c == '{';
        advance();
        if (c == '[') {
          // An empty array must not register element 0, so peek past blanks.
          std::size_t j = i;
          while (j < text_.size() && std::isspace(static_cast<unsigned char>(text_[j]))) ++j;
          if (j < text_.size() && text_[j] != ']') {
            while (i < j) advance();
            element_start();
          }
        }
      } else if (c == '}' || c == ']') {
        stack.pop_back();
        expect_key = false;
        advance();
      } else if (c == ',') {
        advance();
        if (!stack.empty() && stack.back().array) {
          ++stack.back().index;
          while (i < text_.size() && std::isspace(static_cast<unsigned char>(text_[i]))) advance();
          element_start();
        } else {
          expect_key = true;
        }
      } else if (c == ':') {
        expect_key = false;
        advance();
      } else if (c == '"') {
        const Location start{line, column};
        std::string raw;
        advance();
        while (i < text_.size() && text_[i] != '"') {
          if (text_[i] == '\\') {
            raw += text_[i];
            advance();
          }
          if (i < text_.size()) {
            raw += text_[i];
            advance();
          }
        }
        advance();
        if (expect_key && !stack.empty()) {
          const std::string& base = stack.back().path;
          pending = base.empty() ? raw : base + "." + raw;
          where_.emplace(pending, start);
        }
      } else {
        while (i < text_.size() && !std::strchr(",]}: \t\r\n/", text_[i])) advance();
      }
    }
  }

  const std::string& text_;
  std::map<std::string, Location> where_;
};

class Reader {
 public:
  Reader(const json& node, std::string path, const SourceMap* map, const std::string& source)
      : node_(node), path_(std::move(path)), map_(map), source_(source) {
    if (!node_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] void fail(const std::string& path, const std::string& message) const {
    const Location loc = map_ ? map_->find(path) : Location{};
    std::ostringstream os;
    os << source_;
    if (loc.line > 0) os << ":" << loc.line << ":" << loc.column;
    os << ": " << (path.empty() ? "<root>" : path) << ": " << message;
    throw ValidationError(os.str(), loc.line, loc.column);
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const char* key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  void number(const char* key, double& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) fail(at(key), "must be finite");
  }

  void number(const char* key, std::optional<double>& out) {
    if (!has(key)) return;
    double v = 0.0;
    number(key, v);
    out = v;
  }

  void integer(const char* key, int& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    const auto wide = v.get<long long>();
    if (wide < -1000000000LL || wide > 1000000000LL) fail(at(key), "integer out of range");
    out = static_cast<int>(wide);
  }

  void boolean(const char* key, bool& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_boolean()) fail(at(key), "expected true or false");
    out = v.get<bool>();
  }

  void text(const char* key, std::string& out, std::initializer_list<const char*> choices = {}) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    out = v.get<std::string>();
    if (choices.size() == 0) return;
    for (const char* c : choices)
      if (out == c) return;
    std::string list;
    for (const char* c : choices) list += std::string(list.empty() ? "" : ", ") + "\"" + c + "\"";
    fail(at(key), "must be one of " + list);
  }

  void numbers(const char* key, std::vector<double>& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_array()) fail(at(key), "expected an array of numbers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string p = at(key) + "[" + std::to_string(i) + "]";
      if (!v[i].is_number()) fail(p, "expected a number");
      out.push_back(v[i].get<double>());
      if (!std::isfinite(out.back())) fail(p, "must be finite");
    }
  }

  void integers(const char* key, std::vector<int>& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_array()) fail(at(key), "expected an array of integers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer())
        fail(at(key) + "[" + std::to_string(i) + "]", "expected an integer");
      out.push_back(v[i].get<int>());
    }
  }

  const json* child(const char* key) {
    if (!has(key)) return nullptr;
    return &node_.at(key);
  }

  /// Rejects keys nobody asked for.
  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) fail(at(key), "unknown key");
    }
  }

  void check(bool ok, const char* key, const std::string& message) const {
    if (!ok) fail(at(key), message);
  }

  const std::string& path() const { return path_; }
  const SourceMap* map() const { return map_; }
  const std::string& source() const { return source_; }

 private:
  const json& node_;
  std::string path_;
  const SourceMap* map_;
  const std::string& source_;
  std::set<std::string> seen_;
};

void read_scheme(Reader r, SchemeSection& s) {
  r.text("kind", s.kind, {"lambda", "four-level", "five-level"});
  r.number("gamma_MHz", s.gamma_MHz);
  r.number("excited_splitting_MHz", s.excited_splitting_MHz);
  r.number("ground_splitting_GHz", s.ground_splitting_GHz);
  r.number("branching_x", s.branching_x);
  r.number("branching_y", s.branching_y);
  r.number("branching_trap", s.branching_trap);
  r.number("g1", s.g1);
  r.number("g2", s.g2);
  r.finish();
  r.check(s.gamma_MHz > 0.0, "gamma_MHz", "must be positive");
  r.check(s.excited_splitting_MHz != 0.0, "excited_splitting_MHz", "must be nonzero");
  r.check(s.ground_splitting_GHz > 0.0, "ground_splitting_GHz", "must be positive");
  r.check(s.branching_x >= 0.0, "branching_x", "must be non-negative");
  r.check(s.branching_y >= 0.0, "branching_y", "must be non-negative");
  r.check(s.branching_trap >= 0.0, "branching_trap", "must be non-negative");
  r.check(std::abs(s.branching_x + s.branching_y + s.branching_trap - 1.0) < 1e-9, "branching_trap",
          "branching fractions must sum to 1");
  r.check(s.g1 > 0.0, "g1", "must be positive");
  r.check(s.g2 >= 0.0, "g2", "must be non-negative");
}

void read_cell(Reader r, CellSection& c) {
  r.number("length_cm", c.length_cm);
  r.number("diameter_cm", c.diameter_cm);
  r.number("temperature_C", c.temperature_C);
  r.number("gamma0_Hz", c.gamma0_Hz);
  r.number("gamma12_Hz", c.gamma12_Hz);
  r.number("doppler_width_MHz", c.doppler_width_MHz);
  r.number("density_m3", c.density_m3);
  r.finish();
  r.check(c.length_cm > 0.0, "length_cm", "must be positive");
  r.check(c.diameter_cm > 0.0, "diameter_cm", "must be positive");
  r.check(c.temperature_C > 0.0 && c.temperature_C < 126.0, "temperature_C",
          "must lie in (0, 126) degC where the vapor-pressure curve holds");
  r.check(c.gamma0_Hz >= 0.0, "gamma0_Hz", "must be non-negative");
  r.check(c.gamma12_Hz >= 0.0, "gamma12_Hz", "must be non-negative");
  r.check(c.doppler_width_MHz > 0.0, "doppler_width_MHz", "must be positive");
  if (c.density_m3) r.check(*c.density_m3 >= 0.0, "density_m3", "must be non-negative");
}

void read_channel(Reader r, ChannelSection& ch) {
  r.number("power_mW", ch.power_mW);
  r.number("waist_mm", ch.waist_mm);
  r.text("polarization", ch.polarization, {"H", "V"});
  r.number("red_detuning_MHz", ch.red_detuning_MHz);
  if (const json* pulses = r.child("pulses")) {
    const std::string base = r.at("pulses");
    if (!pulses->is_array()) r.fail(base, "expected an array of pulses");
    ch.pulses.clear();
    for (std::size_t i = 0; i < pulses->size(); ++i) {
      Reader pr((*pulses)[i], base + "[" + std::to_string(i) + "]", r.map(), r.source());
      PulseSection p;
      pr.number("start_ms", p.start_ms);
      pr.number("end_ms", p.end_ms);
      pr.number("power_mW", p.power_mW);
      pr.finish();
      pr.check(p.end_ms > p.start_ms, "end_ms", "must be later than start_ms");
      pr.check(p.power_mW >= 0.0, "power_mW", "must be non-negative");
      if (!ch.pulses.empty())
        pr.check(p.start_ms >= ch.pulses.back().end_ms, "start_ms",
                 "pulses must be sorted and must not overlap");
      ch.pulses.push_back(p);
    }
  }
  r.finish();
  r.check(ch.power_mW >= 0.0, "power_mW", "must be non-negative");
  r.check(ch.waist_mm > 0.0, "waist_mm", "must be positive");
}

void read_array(Reader r, ArraySection& a) {
  r.integer("count", a.count);
  r.boolean("pitch_irrelevant", a.pitch_irrelevant);
  if (const json* ch = r.child("channel")) read_channel(Reader(*ch, r.at("channel"), r.map(), r.source()), a.channel);
  r.finish();
  r.check(a.count >= 1 && a.count <= 1000, "count", "must lie in [1, 1000]");
  r.check(a.pitch_irrelevant, "pitch_irrelevant",
          "must be true: atoms average over the whole cell, so beam positions do not enter");
}

void read_calibration(Reader r, CalibrationSection& c) {
  r.number("reference_power_mW", c.reference_power_mW);
  r.number("reference_waist_mm", c.reference_waist_mm);
  r.number("reference_rabi_MHz", c.reference_rabi_MHz);
  r.number("line_strength", c.line_strength);
  r.number("rabi_coupling", c.rabi_coupling);
  r.finish();
  r.check(c.reference_power_mW > 0.0, "reference_power_mW", "must be positive");
  r.check(c.reference_waist_mm > 0.0, "reference_waist_mm", "must be positive");
  r.check(c.reference_rabi_MHz > 0.0, "reference_rabi_MHz", "must be positive");
  r.check(c.line_strength >= 0.0, "line_strength", "must be non-negative");
  r.check(c.rabi_coupling > 0.0, "rabi_coupling", "must be positive");
}

void read_detection(Reader r, DetectionSection& d) {
  r.numbers("frequencies_kHz", d.frequencies_kHz);
  r.boolean("lock_to_pump", d.lock_to_pump);
  r.finish();
  r.check(!d.frequencies_kHz.empty(), "frequencies_kHz", "needs at least one frequency");
  r.check(d.frequencies_kHz.size() <= 100000, "frequencies_kHz", "at most 100000 frequencies");
  for (std::size_t i = 0; i < d.frequencies_kHz.size(); ++i)
    if (!(d.frequencies_kHz[i] > 0.0))
      r.fail(r.at("frequencies_kHz") + "[" + std::to_string(i) + "]", "must be positive");
}

void read_numerics(Reader r, NumericsSection& n) {
  r.integer("doppler_points", n.doppler_points);
  r.boolean("doppler", n.doppler);
  r.integer("slices", n.slices);
  r.boolean("pump_depletion", n.pump_depletion);
  r.number("tolerance", n.tolerance);
  r.integer("max_iterations", n.max_iterations);
  r.finish();
  r.check(n.doppler_points >= 1 && n.doppler_points <= 512, "doppler_points", "must lie in [1, 512]");
  r.check(n.slices >= 1 && n.slices <= 4096, "slices", "must lie in [1, 4096]");
  r.check(n.tolerance > 0.0, "tolerance", "must be positive");
  r.check(n.max_iterations >= 1, "max_iterations", "must be at least 1");
}

void read_dynamics(Reader r, DynamicsSection& d) {
  r.number("start_ms", d.start_ms);
  r.number("horizon_ms", d.horizon_ms);
  r.number("dt_us", d.dt_us);
  r.number("snapshot_ms", d.snapshot_ms);
  r.number("refresh_ms", d.refresh_ms);
  r.number("detection_kHz", d.detection_kHz);
  r.integers("monitor", d.monitor);
  r.number("fit_after_ms", d.fit_after_ms);
  r.finish();
  r.check(d.horizon_ms > d.start_ms, "horizon_ms", "must be later than start_ms");
  r.check(d.dt_us > 0.0, "dt_us", "must be positive");
  r.check(d.snapshot_ms > 0.0, "snapshot_ms", "must be positive");
  r.check((d.horizon_ms - d.start_ms) / d.snapshot_ms <= 1.0e6, "snapshot_ms", "more than 1e6 snapshots");
  r.check(d.refresh_ms > 0.0, "refresh_ms", "must be positive");
  r.check(d.detection_kHz > 0.0, "detection_kHz", "must be positive");
  r.check(!d.monitor.empty(), "monitor", "needs at least one channel index");
  if (d.fit_after_ms)
    r.check(*d.fit_after_ms > d.start_ms && *d.fit_after_ms < d.horizon_ms, "fit_after_ms",
            "must lie inside (start_ms, horizon_ms)");
}

void read_output(Reader r, OutputSection& o) {
  r.text("directory", o.directory);
  r.boolean("svg", o.svg);
  r.finish();
}

RunConfig read_config(const json& doc, const SourceMap* map, const std::string& source) {
  Reader root(doc, "", map, source);
  RunConfig cfg;
  auto section = [&](const char* key) -> std::optional<Reader> {
    const json* node = root.child(key);
    if (!node) return std::nullopt;
    return Reader(*node, key, map, source);
  };
  if (auto r = section("scheme")) read_scheme(*r, cfg.scheme);
  if (auto r = section("cell")) read_cell(*r, cfg.cell);
  if (auto r = section("array")) {
    cfg.array.emplace();
    read_array(*r, *cfg.array);
  }
  if (const json* list = root.child("channels")) {
    if (!list->is_array()) root.fail("channels", "expected an array of channels");
    for (std::size_t i = 0; i < list->size(); ++i) {
      ChannelSection ch;
      read_channel(Reader((*list)[i], "channels[" + std::to_string(i) + "]", map, source), ch);
      cfg.channels.push_back(ch);
    }
  }
  if (auto r = section("calibration")) read_calibration(*r, cfg.calibration);
  if (auto r = section("detection")) read_detection(*r, cfg.detection);
  if (auto r = section("numerics")) read_numerics(*r, cfg.numerics);
  if (auto r = section("dynamics")) {
    cfg.dynamics.emplace();
    read_dynamics(*r, *cfg.dynamics);
  }
  if (auto r = section("output")) read_output(*r, cfg.output);
  if (root.has("seed")) {
    const json& v = doc.at("seed");
    if (!v.is_number_unsigned()) root.fail("seed", "expected a non-negative integer");
    cfg.seed = v.get<std::uint64_t>();
  }
  root.finish();

  // Cross-section checks.
  const auto channels = cfg.expanded_channels();
  if (channels.empty())
    root.fail("channels", "empty channel list: set array.count or add entries to \"channels\"");
  const double cell_radius_mm = 5.0 * cfg.cell.diameter_cm;
  double covered = 0.0;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const double r = 0.5 * channels[i].waist_mm;
    covered += r * r;
    if (!(r < cell_radius_mm)) {
      const bool from_array = cfg.array && i < static_cast<std::size_t>(cfg.array->count);
      const std::size_t k = i - (cfg.array ? std::min<std::size_t>(i, cfg.array->count) : 0);
      root.fail(from_array ? "array.channel.waist_mm" : "channels[" + std::to_string(k) + "].waist_mm",
                "beam radius must be smaller than the cell radius");
    }
  }
  if (!(covered < cell_radius_mm * cell_radius_mm))
    root.fail(cfg.array ? "array.count" : "channels",
              "beams cover the whole cell cross-section; no dark region is left");
  if (cfg.dynamics) {
    for (std::size_t i = 0; i < cfg.dynamics->monitor.size(); ++i) {
      const int m = cfg.dynamics->monitor[i];
      if (m < 0 || m >= static_cast<int>(channels.size()))
        root.fail("dynamics.monitor[" + std::to_string(i) + "]", "channel index out of range");
    }
  }
  return cfg;
}

SchemeKind scheme_of(const std::string& kind) {
  if (kind == "lambda") return SchemeKind::Lambda3;
  if (kind == "four-level") return SchemeKind::DoubleLambda4;
  return SchemeKind::FiveLevel;
}

ChannelSpec channel_spec(const ChannelSection& c) {
  ChannelSpec ch;
  ch.power = c.power_mW * 1e-3;
  ch.radius = 0.5e-3 * c.waist_mm;
  ch.polarization = c.polarization == "V" ? Polarization::V : Polarization::H;
  // The rotating-frame energy of the excited state is omega_0 - omega_L, so a red
  // detuning enters with a positive sign.
  ch.detuning = angular(c.red_detuning_MHz * 1e6);
  return ch;
}

json channel_json(const ChannelSection& c) {
  json j;
  j["power_mW"] = c.power_mW;
  j["waist_mm"] = c.waist_mm;
  j["polarization"] = c.polarization;
  j["red_detuning_MHz"] = c.red_detuning_MHz;
  if (!c.pulses.empty()) {
    json list = json::array();
    for (const auto& p : c.pulses)
      list.push_back({{"start_ms", p.start_ms}, {"end_ms", p.end_ms}, {"power_mW", p.power_mW}});
    j["pulses"] = list;
  }
  return j;
}

struct PathStep {
  std::string key;
  std::vector<std::size_t> indices;
};

std::vector<PathStep> split_path(const std::string& path) {
  if (path.empty()) throw ValidationError("empty parameter path");
  std::vector<PathStep> steps;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    PathStep step;
    const auto bracket = part.find('[');
    step.key = part.substr(0, bracket);
    if (step.key.empty()) throw ValidationError("malformed parameter path \"" + path + "\"");
    std::size_t pos = bracket;
    while (pos != std::string::npos && pos < part.size()) {
      const auto close = part.find(']', pos);
      if (part[pos] != '[' || close == std::string::npos)
        throw ValidationError("malformed parameter path \"" + path + "\"");
      const std::string digits = part.substr(pos + 1, close - pos - 1);
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        throw ValidationError("malformed index in parameter path \"" + path + "\"");
      step.indices.push_back(std::stoul(digits));
      pos = close + 1;
    }
    steps.push_back(step);
  }
  return steps;
}

}  // namespace

std::vector<ChannelSection> RunConfig::expanded_channels() const {
  std::vector<ChannelSection> out;
  if (array) out.assign(array->count, array->channel);
  out.insert(out.end(), channels.begin(), channels.end());
  return out;
}

std::vector<double> RunConfig::omegas() const {
  std::vector<double> out;
  for (double f : detection.frequencies_kHz) out.push_back(angular(f * 1e3));
  return out;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    const Location loc = location_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string what = e.what();
    // Drop the library's "[json.exception.parse_error.101] " prefix.
    if (const auto cut = what.find("] "); cut != std::string::npos) what = what.substr(cut + 2);
    throw ValidationError(source + ":" + std::to_string(loc.line) + ":" + std::to_string(loc.column) +
                              ": malformed JSON: " + what,
                          loc.line, loc.column);
  }
  const SourceMap map(text);
  return read_config(doc, &map, source);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

RunConfig config_from_json(const json& doc) {
  const std::string source = "config";
  return read_config(doc, nullptr, source);
}

json config_to_json(const RunConfig& cfg) {
  json j;
  const auto& s = cfg.scheme;
  j["scheme"] = {{"kind", s.kind},
                 {"gamma_MHz", s.gamma_MHz},
                 {"excited_splitting_MHz", s.excited_splitting_MHz},
                 {"ground_splitting_GHz", s.ground_splitting_GHz},
                 {"branching_x", s.branching_x},
                 {"branching_y", s.branching_y},
                 {"branching_trap", s.branching_trap},
                 {"g1", s.g1},
                 {"g2", s.g2}};
  const auto& c = cfg.cell;
  j["cell"] = {{"length_cm", c.length_cm},
               {"diameter_cm", c.diameter_cm},
               {"temperature_C", c.temperature_C},
               {"gamma0_Hz", c.gamma0_Hz},
               {"gamma12_Hz", c.gamma12_Hz},
               {"doppler_width_MHz", c.doppler_width_MHz}};
  if (c.density_m3) j["cell"]["density_m3"] = *c.density_m3;
  if (cfg.array)
    j["array"] = {{"count", cfg.array->count},
                  {"pitch_irrelevant", cfg.array->pitch_irrelevant},
                  {"channel", channel_json(cfg.array->channel)}};
  json list = json::array();
  for (const auto& ch : cfg.channels) list.push_back(channel_json(ch));
  j["channels"] = list;
  const auto& cal = cfg.calibration;
  j["calibration"] = {{"reference_power_mW", cal.reference_power_mW},
                      {"reference_waist_mm", cal.reference_waist_mm},
                      {"reference_rabi_MHz", cal.reference_rabi_MHz},
                      {"line_strength", cal.line_strength},
                      {"rabi_coupling", cal.rabi_coupling}};
  j["detection"] = {{"frequencies_kHz", cfg.detection.frequencies_kHz},
                    {"lock_to_pump", cfg.detection.lock_to_pump}};
  const auto& n = cfg.numerics;
  j["numerics"] = {{"doppler_points", n.doppler_points}, {"doppler", n.doppler},
                   {"slices", n.slices},                 {"pump_depletion", n.pump_depletion},
                   {"tolerance", n.tolerance},           {"max_iterations", n.max_iterations}};
  if (cfg.dynamics) {
    const auto& d = *cfg.dynamics;
    j["dynamics"] = {{"start_ms", d.start_ms},       {"horizon_ms", d.horizon_ms},
                     {"dt_us", d.dt_us},             {"snapshot_ms", d.snapshot_ms},
                     {"refresh_ms", d.refresh_ms},   {"detection_kHz", d.detection_kHz},
                     {"monitor", d.monitor}};
    if (d.fit_after_ms) j["dynamics"]["fit_after_ms"] = *d.fit_after_ms;
  }
  j["output"] = {{"directory", cfg.output.directory}, {"svg", cfg.output.svg}};
  j["seed"] = cfg.seed;
  return j;
}

std::string serialize_config(const RunConfig& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

ArrayModel build_model(const RunConfig& cfg) {
  ArrayModel m;
  const auto& s = cfg.scheme;
  m.scheme.kind = scheme_of(s.kind);
  m.scheme.gamma = angular(s.gamma_MHz * 1e6);
  m.scheme.excited_splitting = angular(s.excited_splitting_MHz * 1e6);
  m.scheme.ground_splitting = angular(s.ground_splitting_GHz * 1e9);
  m.scheme.branching = {s.branching_x, s.branching_y, s.branching_trap};
  m.scheme.g1 = s.g1;
  m.scheme.g2 = s.g2;

  const auto& c = cfg.cell;
  m.cell.length = c.length_cm * 1e-2;
  m.cell.radius = 0.5e-2 * c.diameter_cm;
  m.cell.temperature = c.temperature_C + 273.15;
  m.cell.gamma0 = angular(c.gamma0_Hz);
  m.cell.gamma12 = angular(c.gamma12_Hz);
  m.cell.gamma = m.scheme.gamma;
  m.cell.doppler_width = angular(c.doppler_width_MHz * 1e6);
  m.density_override = c.density_m3;

  for (const auto& ch : cfg.expanded_channels()) m.channels.push_back(channel_spec(ch));

  const auto& cal = cfg.calibration;
  m.calibration.rabi.reference_power = cal.reference_power_mW * 1e-3;
  m.calibration.rabi.reference_waist = cal.reference_waist_mm * 1e-3;
  m.calibration.rabi.reference_rabi = angular(cal.reference_rabi_MHz * 1e6);
  m.calibration.line_strength = cal.line_strength;
  m.calibration.rabi_coupling = cal.rabi_coupling;

  const auto& n = cfg.numerics;
  m.numerics.doppler_points = n.doppler ? n.doppler_points : 1;
  m.numerics.doppler = n.doppler;
  m.numerics.slices = n.slices;
  m.numerics.pump_depletion = n.pump_depletion;
  m.numerics.tolerance = n.tolerance;
  m.numerics.max_iterations = n.max_iterations;

  try {
    m.validate();
  } catch (const std::logic_error& e) {
    throw ValidationError(std::string("invalid model: ") + e.what());
  }
  return m;
}

PulseSchedule build_schedule(const RunConfig& cfg) {
  if (!cfg.dynamics) throw ValidationError("config has no \"dynamics\" section");
  PulseSchedule s;
  s.start = cfg.dynamics->start_ms * 1e-3;
  s.horizon = cfg.dynamics->horizon_ms * 1e-3;
  for (const auto& ch : cfg.expanded_channels()) {
    std::vector<PowerInterval> list;
    for (const auto& p : ch.pulses) list.push_back({p.start_ms * 1e-3, p.end_ms * 1e-3, p.power_mW * 1e-3});
    s.channels.push_back(std::move(list));
  }
  s.validate(s.channels.size());
  return s;
}

EvolveOptions build_evolve_options(const RunConfig& cfg) {
  if (!cfg.dynamics) throw ValidationError("config has no \"dynamics\" section");
  EvolveOptions o;
  o.dt = cfg.dynamics->dt_us * 1e-6;
  o.snapshot_interval = cfg.dynamics->snapshot_ms * 1e-3;
  o.refresh_interval = cfg.dynamics->refresh_ms * 1e-3;
  return o;
}

void set_path(json& doc, const std::string& path, const json& value) {
  json* node = &doc;
  for (const auto& step : split_path(path)) {
    if (!node->is_object()) throw ValidationError("parameter path \"" + path + "\" runs through a non-object");
    node = &(*node)[step.key];
    for (std::size_t idx : step.indices) {
      if (!node->is_array() || idx >= node->size())
        throw ValidationError("parameter path \"" + path + "\": index " + std::to_string(idx) + " out of range");
      node = &(*node)[idx];
    }
  }
  *node = value;
}

json get_path(const json& doc, const std::string& path) {
  const json* node = &doc;
  for (const auto& step : split_path(path)) {
    if (!node->is_object() || !node->contains(step.key))
      throw ValidationError("parameter path \"" + path + "\" not found");
    node = &node->at(step.key);
    for (std::size_t idx : step.indices) {
      if (!node->is_array() || idx >= node->size())
        throw ValidationError("parameter path \"" + path + "\": index " + std::to_string(idx) + " out of range");
      node = &(*node)[idx];
    }
  }
  return *node;
}

}  // namespace sqz
