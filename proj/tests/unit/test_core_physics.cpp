#include <doctest.h>

#include <cmath>
#include <vector>

#include "sqz/atomic_model.hpp"
#include "sqz/core_physics.hpp"
#include "sqz/errors.hpp"

using namespace sqz;

TEST_CASE("vapor density rises steeply with temperature") {
  const double n55 = vapor_density(273.15 + 55.0);
  const double n64 = vapor_density(273.15 + 63.7);
  CHECK(n55 > 1e16);
  CHECK(n64 > 1.5 * n55);
  CHECK(n64 < 1e18);
  CHECK(vapor_pressure(300.0) == doctest::Approx(133.322 * std::pow(10.0, 7.193 - 4040.0 / 300.0)));
}

TEST_CASE("exchange rates follow the flight-time picture") {
  CellConfig cell;
  std::vector<ChannelSpec> chans(2);
  const ExchangeRates r = exchange_rates(cell, chans);
  const double k_out = mean_speed(cell.temperature) / (2.0 * chans[0].radius);
  CHECK(r.to_dark[0] == doctest::Approx(k_out));
  const double r2 = chans[0].radius * chans[0].radius;
  CHECK(r.from_dark[1] == doctest::Approx(k_out * r2 / (cell.radius * cell.radius - 2.0 * r2)));
}

TEST_CASE("beams covering the cell are rejected") {
  CellConfig cell;
  cell.radius = 1e-3;
  std::vector<ChannelSpec> chans(20);
  CHECK_THROWS_AS(exchange_rates(cell, chans), GeometryError);
}

TEST_CASE("atom numbers partition the cell") {
  CellConfig cell;
  std::vector<ChannelSpec> chans(3);
  const AtomNumbers a = atom_numbers(cell, chans);
  double total = a.dark;
  for (double n : a.channel) total += n;
  CHECK(total == doctest::Approx(a.density * kPi * cell.radius * cell.radius * cell.length));
}

TEST_CASE("power calibration scales as sqrt(P) / waist") {
  RabiCalibration cal;
  CHECK(power_to_rabi(cal.reference_power, cal.reference_waist, cal) == doctest::Approx(cal.reference_rabi));
  CHECK(power_to_rabi(4.0 * cal.reference_power, cal.reference_waist, cal) == doctest::Approx(2.0 * cal.reference_rabi));
  CHECK(power_to_rabi(cal.reference_power, 2.0 * cal.reference_waist, cal) == doctest::Approx(0.5 * cal.reference_rabi));
}

TEST_CASE("Doppler grid is normalized and symmetric") {
  for (int n : {1, 8, 33}) {
    const auto g = doppler_grid(angular(500e6), n);
    REQUIRE(static_cast<int>(g.size()) == n);
    double w = 0.0;
    for (const auto& c : g) w += c.weight;
    CHECK(w == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < n; ++i) {
      CHECK(g[i].velocity == doctest::Approx(-g[n - 1 - i].velocity).epsilon(1e-9));
      CHECK(g[i].weight == doctest::Approx(g[n - 1 - i].weight).epsilon(1e-9));
    }
  }
}

TEST_CASE("cell invariants") {
  CellConfig cell;
  CHECK_NOTHROW(cell.validate());
  cell.length = -1.0;
  CHECK_THROWS_AS(cell.validate(), DomainError);
}
