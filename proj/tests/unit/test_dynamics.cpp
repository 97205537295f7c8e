#include <doctest.h>

#include <cmath>
#include <vector>

#include "sqz/dynamics.hpp"
#include "sqz/errors.hpp"

using namespace sqz;

namespace {

ArrayModel small_model(int n) {
  ArrayModel m;
  m.numerics.doppler_points = 8;
  m.numerics.slices = 4;
  ChannelSpec ch;
  ch.power = 1e-3;
  m.channels.assign(n, ch);
  return m;
}

}  // namespace

TEST_CASE("pulse schedules reject overlaps and reversed intervals") {
  PulseSchedule s;
  s.start = 0.0;
  s.horizon = 1e-2;
  s.channels = {{{0.0, 2e-3, 1e-3}, {1e-3, 3e-3, 1e-3}}};
  CHECK_THROWS_AS(s.validate(1), DomainError);
  s.channels = {{{2e-3, 1e-3, 1e-3}}};
  CHECK_THROWS_AS(s.validate(1), DomainError);
  s.channels = {{{1e-3, 2e-3, 1e-3}}};
  CHECK_NOTHROW(s.validate(1));
  CHECK_THROWS_AS(s.validate(2), DimensionError);
  CHECK(s.power_at(0, 1.5e-3, 5e-3) == doctest::Approx(1e-3));
  CHECK(s.power_at(0, 2.5e-3, 5e-3) == 0.0);
  CHECK(s.transitions() == std::vector<double>{1e-3, 2e-3});
}

TEST_CASE("a continuous-wave array stays at its steady state") {
  const ArrayModel m = small_model(2);
  PulseSchedule s;
  s.start = 0.0;
  s.horizon = 2e-3;
  s.channels.assign(2, {});
  EvolveOptions o;
  o.snapshot_interval = 5e-4;
  const Trajectory tr = time_evolve(m, s, o);
  REQUIRE(tr.snapshots.size() >= 4);
  const auto sq = instantaneous_squeezing(tr, angular(160e3), {0});
  for (const auto& row : sq) CHECK(row[0] == doctest::Approx(sq.front()[0]).epsilon(1e-6));
  for (const auto& snap : tr.snapshots) CHECK(std::abs(snap.dark.trace() - 1.0) < 1e-8);
}

TEST_CASE("recovery fit returns the time constant of a clean exponential") {
  std::vector<double> t, v;
  for (int i = 0; i < 200; ++i) {
    t.push_back(i * 1e-4);
    v.push_back(-2.0 + 1.5 * std::exp(-(t.back() - 5e-3) / 3e-3));
  }
  const RecoveryFit f = recovery_time(t, v, 5e-3);
  CHECK(f.tau == doctest::Approx(3e-3).epsilon(1e-6));
  CHECK(f.offset == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(f.amplitude == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("recovery fit refuses a trace without samples after the offset") {
  const std::vector<double> t{0.0, 1.0}, v{0.0, 0.0};
  CHECK_THROWS_AS(recovery_time(t, v, 2.0), FitError);
}
