#include <doctest.h>

#include <cmath>
#include <vector>

#include "sqz/analytics.hpp"
#include "sqz/dynamics.hpp"
#include "sqz/errors.hpp"
#include "sqz/noise_spectra.hpp"
#include "sqz/steady_state.hpp"
#include "sqz/verify.hpp"

using namespace sqz;

TEST_CASE("Doppler grid: single class and second moment") {
  const auto one = doppler_grid(angular(500e6), 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].velocity == 0.0);
  CHECK(one[0].weight == 1.0);

  const double sigma_v = angular(500e6) / (2.0 * std::sqrt(2.0 * std::log(2.0))) / rb87().wavenumber();
  for (int n : {3, 16, 64}) {
    double m2 = 0.0;
    for (const auto& c : doppler_grid(angular(500e6), n)) m2 += c.weight * c.velocity * c.velocity;
    CHECK(m2 == doctest::Approx(sigma_v * sigma_v).epsilon(1e-12));
  }
}

TEST_CASE("exchange rates balance the atom flux of every channel") {
  CellConfig cell;
  std::vector<ChannelSpec> chans(5);
  chans[2].radius = 0.4e-3;
  const ExchangeRates r = exchange_rates(cell, chans);
  double lit = 0.0;
  for (const auto& c : chans) lit += kPi * c.radius * c.radius;
  for (std::size_t i = 0; i < chans.size(); ++i) {
    const double ratio = r.to_dark[i] * kPi * chans[i].radius * chans[i].radius /
                         (r.from_dark[i] * (kPi * cell.radius * cell.radius - lit));
    CHECK(ratio == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("Rabi frequency scales as the square root of power") {
  for (double a : {0.0, 0.25, 2.0, 5.0})
    CHECK(power_to_rabi(a * 1e-3, 0.505e-3) == doctest::Approx(std::sqrt(a) * power_to_rabi(1e-3, 0.505e-3)).epsilon(1e-12));
  CHECK(power_to_rabi(5e-3, 0.505e-3) / kTwoPi == doctest::Approx(97.49e6).epsilon(1e-3));
}

TEST_CASE("array generator keeps Hermiticity and the atom-weighted trace") {
  LevelScheme scheme;
  std::vector<ChannelSpec> chans(3);
  chans[0].power = 3e-3;
  chans[2].polarization = Polarization::V;
  const GeneratorMatrix g = assemble_generator(scheme, chans, CellConfig{}, 55.0);
  const int d = g.dim, b = d * d;
  CVector x(b * g.regions);
  for (int r = 0; r < g.regions; ++r) x.segment(b * r, b) = vec(random_density_matrix(d, 100 + r));
  const CVector y = g.matrix * x;
  double weighted = 0.0, scale = 0.0;
  for (int r = 0; r < g.regions; ++r) {
    const CMatrix blk = unvec(y.segment(b * r, b), d);
    CHECK((blk - blk.adjoint()).norm() < 1e-13 * g.matrix.norm());
    const double n = r == 0 ? g.atoms.dark : g.atoms.channel[r - 1];
    weighted += n * blk.trace().real();
    scale += n * blk.norm();
  }
  CHECK(std::abs(weighted) < 1e-12 * scale);
}

TEST_CASE("permuting identical channels permutes the steady state") {
  LevelScheme scheme;
  std::vector<ChannelSpec> a(3);
  a[1].power = 2e-3;
  std::vector<ChannelSpec> b{a[1], a[0], a[2]};
  const ArrayState sa = steady_state(assemble_generator(scheme, a, CellConfig{}, 0.0));
  const ArrayState sb = steady_state(assemble_generator(scheme, b, CellConfig{}, 0.0));
  CHECK((sa.channels[1] - sb.channels[0]).norm() < 1e-10);
  CHECK((sa.channels[0] - sb.channels[1]).norm() < 1e-10);
  CHECK((sa.dark - sb.dark).norm() < 1e-10);
}

TEST_CASE("trap population saturates monotonically with power") {
  LevelScheme scheme;
  double last = -1.0;
  for (double p : {0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0}) {
    std::vector<ChannelSpec> chans(1);
    chans[0].power = p * 1e-3;
    const ArrayState s = steady_state(assemble_generator(scheme, chans, CellConfig{}, 0.0));
    const double trap = s.channels[0](level::trap, level::trap).real();
    CHECK(trap >= last);
    last = trap;
  }
}

TEST_CASE("self-rotation is odd in the circular power imbalance at fixed total") {
  LambdaParams p;
  const double total = 2.0 * std::pow(3e6, 2);
  for (double f : {0.1, 0.3, 0.45}) {
    p.omega1 = std::sqrt(total * (0.5 + f));
    p.omega2 = std::sqrt(total * (0.5 - f));
    const double plus = self_rotation_sy(p).sy_reduced;
    std::swap(p.omega1, p.omega2);
    CHECK(self_rotation_sy(p).sy_reduced == doctest::Approx(-plus));
  }
}

TEST_CASE("larger arrays squeeze over a wider band") {
  std::vector<double> omegas;
  for (int k = 0; k <= 30; ++k) omegas.push_back(angular(10e3 * std::pow(10.0, k / 10.0)));
  auto half_band = [&](int n) {
    ArrayModel m;
    m.numerics.doppler_points = 16;
    m.numerics.slices = 4;
    m.channels.assign(n, ChannelSpec{});
    const NoiseSpectrum s = channel_spectrum(solve_array(m), 0, omegas);
    const double ref = s.points[0].s_min_db;
    for (const auto& p : s.points)
      if (p.s_min_db > 0.5 * ref) return p.omega;
    return omegas.back();
  };
  CHECK(half_band(30) > half_band(1));
}

TEST_CASE("trajectories are deterministic and refuse too-slow readout") {
  ArrayModel m;
  m.numerics.doppler_points = 4;
  m.numerics.slices = 2;
  m.channels.assign(2, ChannelSpec{});
  PulseSchedule s;
  s.start = -1e-3;
  s.horizon = 3e-3;
  s.channels = {{}, {{0.0, 1e-3, 1e-3}}};
  EvolveOptions o;
  o.snapshot_interval = 5e-4;
  const Trajectory a = time_evolve(m, s, o);
  const Trajectory b = time_evolve(m, s, o);
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
    CHECK(a.snapshots[i].dark == b.snapshots[i].dark);
    CHECK(std::abs(a.snapshots[i].dark.trace() - 1.0) < 1e-8);
    CHECK((a.snapshots[i].dark - a.snapshots[i].dark.adjoint()).norm() < 1e-8);
  }
  CHECK_THROWS(instantaneous_squeezing(a, angular(100.0), {0}));
}
