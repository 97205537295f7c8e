#include <doctest.h>

#include <cmath>

#include "sqz/analytics.hpp"

using namespace sqz;

TEST_CASE("self-rotation is antisymmetric in the circular components") {
  LambdaParams p;
  p.omega1 = 2e6;
  p.omega2 = 1e6;
  const SelfRotation a = self_rotation_sy(p);
  std::swap(p.omega1, p.omega2);
  const SelfRotation b = self_rotation_sy(p);
  CHECK(a.sy_chi == doctest::Approx(-b.sy_chi));
  CHECK(a.sy_reduced == doctest::Approx(-b.sy_reduced));
  CHECK(a.phi == doctest::Approx(-b.phi));

  p.omega2 = p.omega1;
  const SelfRotation c = self_rotation_sy(p);
  CHECK(std::abs(c.sy_chi) < 1e-12 * std::abs(a.sy_chi));
  CHECK(std::abs(c.sy_oat) < 1e-12 * std::abs(a.sy_oat) + 1e-300);
}

namespace {

LatticeSpec two_by_two(bool checkerboard) {
  LatticeSpec s;
  const double pitch = 1.5e-3;
  int k = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j, ++k) {
      Beam b;
      b.x = (i - 0.5) * pitch;
      b.y = (j - 0.5) * pitch;
      b.amplitude = checkerboard && (i + j) % 2 ? -1.0 : 1.0;
      s.beams.push_back(b);
    }
  return s;
}

}  // namespace

TEST_CASE("far field obeys Parseval") {
  const FarField f = far_field(two_by_two(false));
  CHECK(f.energy == doctest::Approx(f.near_energy).epsilon(1e-10));
  CHECK(f.size == 128 * 4);
}

TEST_CASE("in-phase lattice peaks at zero spatial frequency") {
  const FarField f = far_field(two_by_two(false));
  const int c = f.size / 2;
  CHECK(f.intensity(c, c) == doctest::Approx(1.0));
  CHECK(f.intensity.maxCoeff() == doctest::Approx(1.0));
}

TEST_CASE("checkerboard lattice is dark at the center") {
  const FarField f = far_field(two_by_two(true));
  const int c = f.size / 2;
  CHECK(f.intensity(c, c) < 1e-12);
  CHECK(f.energy == doctest::Approx(f.near_energy).epsilon(1e-10));
}

TEST_CASE("single beam far field is a Gaussian centered at zero") {
  LatticeSpec s;
  s.beams.push_back(Beam{});
  const FarField f = far_field(s);
  const int c = f.size / 2;
  CHECK(f.intensity(c, c) == doctest::Approx(1.0));
  CHECK(f.intensity(c, c + 3) == doctest::Approx(f.intensity(c, c - 3)).epsilon(1e-9));
}

TEST_CASE("lattice spec validation") {
  LatticeSpec s;
  CHECK_THROWS(s.validate());
  s.beams.push_back(Beam{});
  s.grid = 0;
  CHECK_THROWS(s.validate());
}
