#include <doctest.h>

#include <vector>

#include "sqz/analytics.hpp"
#include "sqz/array_solver.hpp"
#include "sqz/errors.hpp"
#include "sqz/steady_state.hpp"

using namespace sqz;

TEST_CASE("array steady state is a set of physical density matrices") {
  LevelScheme scheme;
  CellConfig cell;
  std::vector<ChannelSpec> chans(3);
  chans[1].power = 2e-3;
  const GeneratorMatrix gen = assemble_generator(scheme, chans, cell, 40.0);
  const ArrayState st = steady_state(gen);
  REQUIRE(st.channels.size() == 3);
  auto check = [](const CMatrix& rho) {
    const DensityDiagnostics d = diagnose_density(rho);
    CHECK(d.trace_error < 1e-10);
    CHECK(d.hermiticity < 1e-10);
    CHECK(d.min_eigenvalue > -1e-10);
  };
  check(st.dark);
  for (const auto& r : st.channels) check(r);

  CVector x(gen.matrix.rows());
  const int b = gen.dim * gen.dim;
  x.segment(0, b) = vec(st.dark);
  for (int i = 0; i < 3; ++i) x.segment(b * (i + 1), b) = vec(st.channels[i]);
  CHECK((gen.matrix * x).norm() < 1e-8 * gen.matrix.norm());
}

TEST_CASE("identical channels reach identical states") {
  LevelScheme scheme;
  std::vector<ChannelSpec> chans(4);
  const ArrayState st = steady_state(assemble_generator(scheme, chans, CellConfig{}, 0.0));
  for (std::size_t i = 1; i < st.channels.size(); ++i) CHECK((st.channels[i] - st.channels[0]).norm() < 1e-9);
}

TEST_CASE("undriven cell relaxes to the ground mixture") {
  LevelScheme scheme;
  std::vector<ChannelSpec> chans(1);
  chans[0].power = 0.0;
  const ArrayState st = steady_state(assemble_generator(scheme, chans, CellConfig{}, 0.0));
  CHECK((st.dark - ground_mixture(scheme)).norm() < 1e-9);
  CHECK((st.channels[0] - ground_mixture(scheme)).norm() < 1e-9);
}

TEST_CASE("pump absorption factor lies in (0, 1]") {
  LevelScheme scheme;
  const Drive d = Drive::linear({2e8, 0.0});
  const auto h = build_hamiltonian(scheme, d, 0.0, 0.0, 0.0);
  std::vector<CMatrix> ls{liouvillian(h.h, build_dissipators(scheme, CellConfig{}))};
  ExchangeRates rates;
  rates.to_dark = {0.0};
  rates.from_dark = {0.0};
  AtomNumbers atoms;
  atoms.channel = {1.0};
  const ArrayState st = steady_state(assemble_generator(ls, dark_liouvillian(scheme, CellConfig{}), rates, atoms));
  const double t = pump_absorption(st.channels[0], scheme, d, 1e3, 1e-3);
  CHECK(t > 0.0);
  CHECK(t <= 1.0);
}

TEST_CASE("Lambda closed forms in their limits") {
  LambdaParams p;
  p.omega1 = 1e5;
  p.omega2 = 0.0;
  auto c = analytic_lambda3(p);
  CHECK(std::abs(c.rho12) == 0.0);
  const cplx i(0.0, 1.0);
  CHECK(std::abs(c.rho13 - 0.5 * i * p.omega1 / (p.gamma - i * p.delta1())) < 1e-15);

  // Balanced drive without ground decoherence: the dark state, rho12 = -1/2.
  p.omega2 = p.omega1;
  p.gamma12 = 0.0;
  c = analytic_lambda3(p);
  CHECK(c.rho12.real() == doctest::Approx(-0.5));
  CHECK(std::abs(c.rho12.imag()) < 1e-12);
}
