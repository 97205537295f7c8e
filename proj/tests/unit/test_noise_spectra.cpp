#include <doctest.h>

#include <cmath>
#include <vector>

#include "sqz/noise_spectra.hpp"

using namespace sqz;

namespace {

Mat2 squeezed(double r, double theta) {
  Mat2 d = Mat2::Zero();
  d(0, 0) = 0.25 * std::exp(-2.0 * r);
  d(1, 1) = 0.25 * std::exp(2.0 * r);
  Mat2 rot;
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return rot * d * rot.transpose();
}

ArrayModel small_array(int n, double power) {
  ArrayModel m;
  ChannelSpec ch;
  ch.power = power;
  m.channels.assign(n, ch);
  m.numerics.doppler_points = 16;
  m.numerics.slices = 4;
  return m;
}

}  // namespace

TEST_CASE("vacuum covariance reads 0 dB at every angle") {
  const Mat2 vac = Mat2::Identity() * 0.25;
  for (double th : {0.0, 0.4, 1.3}) CHECK(std::abs(quadrature_noise_db(vac, th)) < 1e-12);
  const SpectrumPoint p = analyze_covariance(vac);
  CHECK(std::abs(p.s_min_db) < 1e-12);
  CHECK(p.degenerate);
}

TEST_CASE("pure squeezed state: S_min + S_max = 0 and theta is recovered") {
  const double r = 0.4, theta = 0.3;
  const SpectrumPoint p = analyze_covariance(squeezed(r, theta));
  CHECK(p.s_min_db == doctest::Approx(-10.0 * std::log10(std::exp(2.0 * r))));
  CHECK(p.s_min_db + p.s_max_db == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.theta == doctest::Approx(theta));
  CHECK(quadrature_noise_db(squeezed(r, theta), theta) == doctest::Approx(p.s_min_db));
}

TEST_CASE("rotation moves the squeezing angle") {
  const SpectrumPoint p = analyze_covariance(rotate_covariance(squeezed(0.3, 0.1), 0.5));
  CHECK(p.theta == doctest::Approx(0.6));
}

TEST_CASE("combining a beam with itself at phi = 0 changes nothing") {
  NoiseSpectrum s;
  s.points.push_back(analyze_covariance(squeezed(0.3, 0.2)));
  const std::vector<NoiseSpectrum> beams{s, s};
  const std::vector<double> phis{0.0, 0.0};
  const NoiseSpectrum c = combine_channels(beams, phis);
  CHECK(c.points[0].s_min_db == doctest::Approx(s.points[0].s_min_db));
  const std::vector<double> ortho{0.0, kPi / 2};
  const NoiseSpectrum o = combine_channels(beams, ortho);
  CHECK(o.points[0].s_min_db > s.points[0].s_min_db);
}

TEST_CASE("array spectrum respects the uncertainty bound and the output commutator") {
  const ArraySolution sol = solve_array(small_array(3, 2e-3));
  const std::vector<double> omegas{angular(60e3), angular(160e3), angular(1e6)};
  const NoiseSpectrum s = channel_spectrum(sol, 0, omegas);
  REQUIRE(s.points.size() == 3);
  for (const auto& p : s.points) {
    CHECK(p.s_min_db + p.s_max_db >= -1e-6);
    CHECK(p.s_min_db <= p.s_max_db);
  }
  const auto purity = purity_product(s);
  CHECK(purity[1] == doctest::Approx(0.5 * (s.points[1].s_min_db + s.points[1].s_max_db)));
}

TEST_CASE("empty cell gives shot noise") {
  ArrayModel m = small_array(2, 1e-3);
  m.density_override = 0.0;
  const std::vector<double> omegas{angular(160e3)};
  const NoiseSpectrum s = channel_spectrum(solve_array(m), 0, omegas);
  CHECK(std::abs(s.points[0].s_min_db) < 1e-9);
  CHECK(std::abs(s.points[0].s_max_db) < 1e-9);
}
