#include <doctest.h>

#include <string>

#include "sqz/config.hpp"
#include "sqz/errors.hpp"

using namespace sqz;

namespace {

const char* kFull = R"({
  // two explicit channels plus a small array
  "scheme": {"kind": "five-level", "gamma_MHz": 6.0},
  "cell": {"length_cm": 12, "temperature_C": 55.5, "gamma12_Hz": 20},
  "array": {"count": 4, "channel": {"power_mW": 1.5}},
  "channels": [
    {"power_mW": 2.0, "polarization": "V", "pulses": [{"start_ms": 0, "end_ms": 5, "power_mW": 1.0}]},
    {"power_mW": 0.5, "red_detuning_MHz": 40}
  ],
  "detection": {"frequencies_kHz": [60, 160, 300]},
  "numerics": {"doppler_points": 16, "slices": 4},
  "dynamics": {"horizon_ms": 10, "monitor": [0, 5], "fit_after_ms": 5},
  "output": {"directory": "out dir", "svg": false},
  "seed": 42
})";

}  // namespace

TEST_CASE("parse, serialize, parse is the identity") {
  const RunConfig a = parse_config(kFull);
  const RunConfig b = parse_config(serialize_config(a));
  CHECK(a == b);
  CHECK(serialize_config(a) == serialize_config(b));
  CHECK(a.expanded_channels().size() == 6);
  CHECK(a.seed == 42);
  const RunConfig minimal = parse_config(R"({"channels": [{}]})");
  CHECK(parse_config(serialize_config(minimal)) == minimal);
  CHECK(minimal.channels.size() == 1);
}

TEST_CASE("unknown keys are reported with line and column") {
  const std::string text = "{\n  \"cell\": {\n    \"lenght_cm\": 7.5\n  },\n  \"channels\": [{}]\n}";
  try {
    parse_config(text, "cfg.json");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 5);
    CHECK(std::string(e.what()).find("cell.lenght_cm") != std::string::npos);
    CHECK(std::string(e.what()).find("cfg.json:3:5") == 0);
  }
}

TEST_CASE("out-of-range values point at the value") {
  const std::string text = "{\"channels\": [{\"power_mW\": 1}, {\"power_mW\": -2}]}";
  try {
    parse_config(text);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.line() == 1);
    CHECK(std::string(e.what()).find("channels[1].power_mW") != std::string::npos);
  }
}

TEST_CASE("an empty channel list names the missing field") {
  try {
    parse_config("{\"channels\": []}");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("channels") != std::string::npos);
    CHECK(std::string(e.what()).find("array.count") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("{}"), ValidationError);
}

TEST_CASE("syntax errors carry a location") {
  try {
    parse_config("{\n  \"cell\": {\"length_cm\": 7.5,,}\n}");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() > 0);
  }
}

TEST_CASE("physical invariants are enforced at parse time") {
  CHECK_THROWS_AS(parse_config(R"({"cell": {"temperature_C": 150}, "channels": [{}]})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"scheme": {"branching_x": 0.5}, "channels": [{}]})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"cell": {"diameter_cm": 0.04}, "channels": [{}]})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"scheme": {"kind": "six-level"}, "channels": [{}]})"), ValidationError);
  CHECK_THROWS_AS(
      parse_config(R"({"channels": [{"pulses": [{"start_ms": 2, "end_ms": 1, "power_mW": 1}]}]})"),
      ValidationError);
}

TEST_CASE("dotted paths address nested values") {
  json doc = config_to_json(parse_config(kFull));
  set_path(doc, "channels[1].power_mW", 3.25);
  set_path(doc, "cell.temperature_C", 60);
  CHECK(get_path(doc, "channels[1].power_mW").get<double>() == 3.25);
  const RunConfig c = config_from_json(doc);
  CHECK(c.channels[1].power_mW == 3.25);
  CHECK(c.cell.temperature_C == 60.0);
  CHECK_THROWS(set_path(doc, "channels[7].power_mW", 1.0));
}

TEST_CASE("model conversion uses SI units and the beam-diameter convention") {
  const ArrayModel m = build_model(parse_config(kFull));
  REQUIRE(m.channels.size() == 6);
  CHECK(m.channels[0].radius == doctest::Approx(0.2525e-3));
  CHECK(m.channels[0].power == doctest::Approx(1.5e-3));
  CHECK(m.cell.length == doctest::Approx(0.12));
  CHECK(m.cell.temperature == doctest::Approx(273.15 + 55.5));
  CHECK(m.channels[4].polarization == Polarization::V);
  CHECK(m.channels[5].detuning == doctest::Approx(angular(40e6)));
  CHECK(m.numerics.doppler_points == 16);
}
