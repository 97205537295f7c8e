#include "sqz/analytics.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/FFT>

#include "sqz/errors.hpp"

namespace sqz {

void LambdaParams::validate() const {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (!(gamma0 >= 0.0) || !(gamma12 >= 0.0)) throw DomainError("ground-state rates must be non-negative");
  if (excited_splitting == 0.0 || !std::isfinite(excited_splitting))
    throw DomainError("excited-state splitting must be nonzero");
  if (!std::isfinite(omega1) || !std::isfinite(omega2)) throw DomainError("Rabi frequencies must be finite");
}

LevelScheme LambdaParams::scheme() const {
  LevelScheme s;
  s.kind = SchemeKind::Lambda3;
  s.gamma = gamma;
  s.excited_splitting = excited_splitting;
  return s;
}

CellConfig LambdaParams::cell() const {
  CellConfig c;
  c.gamma = gamma;
  c.gamma0 = gamma0;
  c.gamma12 = gamma12;
  return c;
}

Drive LambdaParams::drive() const { return Drive::circular(omega1, omega2); }

LambdaCoherences analytic_lambda3(const LambdaParams& p) {
  p.validate();
  const cplx i(0.0, 1.0);
  const double d1 = p.delta1();
  const double d2 = p.delta2();
  const cplx denom = p.gamma12 + (p.omega1 * p.omega1 + p.omega2 * p.omega2) / p.gamma + i * (d2 - d1);
  if (std::abs(denom) == 0.0)
    throw DomainError("degenerate Lambda parameters: gamma12 = Omega = 0 with equal Stark shifts");
  LambdaCoherences out;
  out.rho12 = (-p.omega1 * p.omega2 / p.gamma) / denom;
  out.rho13 = (0.5 * i * p.omega1 + i * p.omega2 * out.rho12) / (-i * d1 + p.gamma);
  out.rho23 = (0.5 * i * p.omega2 + i * p.omega1 * std::conj(out.rho12)) / (-i * d2 + p.gamma);
  return out;
}

SelfRotation self_rotation_sy(const LambdaParams& p, double length, double scale, const PhysConsts& pc) {
  const LambdaCoherences c = analytic_lambda3(p);
  SelfRotation out;
  // chi_i = N0 d rho_i3 / (eps0 E_i) and E_i = hbar Omega_i / d.
  out.chi1 = p.omega1 != 0.0 ? scale * c.rho13 / p.omega1 : cplx(0.0, 0.0);
  out.chi2 = p.omega2 != 0.0 ? scale * c.rho23 / p.omega2 : cplx(0.0, 0.0);
  out.sy_chi = out.chi1.real() - out.chi2.real();

  const double d1 = p.delta1();
  const double d2 = p.delta2();
  out.sy_reduced = scale *
                   ((d2 - d1) * (0.5 + c.rho12.real()) - 2.0 * p.gamma * c.rho12.imag()) /
                   (p.gamma * p.gamma + d1 * d1);

  const double total = p.omega1 * p.omega1 + p.omega2 * p.omega2;
  if (total > 0.0) {
    const double sz = (p.omega1 * p.omega1 - p.omega2 * p.omega2) / total;
    const double om2 = 0.5 * total;
    const double sat = p.gamma12 + om2 / p.gamma;
    out.sy_oat = sz * om2 * (1.0 - 0.5 * om2 / (sat * sat));
  }
  // n = 1 + Re(chi) / 2 for a dilute medium.
  out.phi = kTwoPi * length * 0.5 * out.sy_chi / pc.wavelength;
  return out;
}

void LatticeSpec::validate() const {
  if (beams.empty()) throw DomainError("lattice needs at least one beam");
  if (!(waist > 0.0)) throw DomainError("beam waist must be positive");
  if (grid < 64) throw DomainError("far-field grid must be at least 64 x 64");
  if (grid > 4096 || padding < 1 || padding > 16) throw ResourceError("far-field grid too large");
  if (!(extent >= 0.0)) throw DomainError("near-field extent must be non-negative");
}

FarField far_field(const LatticeSpec& spec) {
  spec.validate();
  double window = spec.extent;
  if (window == 0.0) {
    double reach = 0.0;
    for (const auto& b : spec.beams) reach = std::max({reach, std::abs(b.x), std::abs(b.y)});
    window = 2.0 * (reach + 3.0 * spec.waist);
  }
  const int n = spec.grid;
  const int m = n * spec.padding;
  const double dx = window / n;

  // Sample points symmetric about the origin so mirrored beams sample identically.
  Eigen::MatrixXcd field = Eigen::MatrixXcd::Zero(m, m);
  const double w2 = spec.waist * spec.waist;
  double near = 0.0;
  for (int r = 0; r < n; ++r) {
    const double y = (r - 0.5 * (n - 1)) * dx;
    for (int c = 0; c < n; ++c) {
      const double x = (c - 0.5 * (n - 1)) * dx;
      cplx e = 0.0;
      for (const auto& b : spec.beams) {
        const double rr = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
        e += b.amplitude * std::exp(-rr / w2);
      }
      field(r, c) = e;
      near += std::norm(e);
    }
  }

  Eigen::FFT<double> fft;
  std::vector<cplx> in(m), out(m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) in[c] = field(r, c);
    fft.fwd(out, in);
    for (int c = 0; c < m; ++c) field(r, c) = out[c];
  }
  for (int c = 0; c < m; ++c) {
    for (int r = 0; r < m; ++r) in[r] = field(r, c);
    fft.fwd(out, in);
    for (int r = 0; r < m; ++r) field(r, c) = out[r];
  }

  FarField ff;
  ff.size = m;
  ff.spatial_frequency_step = 1.0 / (m * dx);
  ff.intensity.resize(m, m);
  const double norm = static_cast<double>(m) * m;
  double energy = 0.0;
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      const double v = std::norm(field((r + m / 2) % m, (c + m / 2) % m)) / norm;
      ff.intensity(r, c) = v;
      energy += v;
    }
  ff.energy = energy;
  ff.peak = ff.intensity.maxCoeff();

  ff.near_energy = near;
  if (ff.peak > 0.0) ff.intensity /= ff.peak;
  return ff;
}

}  // namespace sqz
