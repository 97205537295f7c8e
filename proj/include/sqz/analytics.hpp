#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "sqz/atomic_model.hpp"

namespace sqz {

/// Three-level Lambda system driven by sigma+/sigma- components Omega1, Omega2.
struct LambdaParams {
  double omega1 = 0.0;  // rad/s
  double omega2 = 0.0;  // rad/s
  double gamma = angular(6.0e6);
  double gamma0 = angular(10.0);
  double gamma12 = angular(10.0);
  double excited_splitting = angular(814.5e6);  // Delta

  double delta1() const { return omega1 * omega1 / excited_splitting; }
  double delta2() const { return omega2 * omega2 / excited_splitting; }
  void validate() const;

  /// The same system expressed for the general solver.
  LevelScheme scheme() const;
  CellConfig cell() const;
  Drive drive() const;
};

struct LambdaCoherences {
  cplx rho12;
  cplx rho13;
  cplx rho23;
};

/// Weak-drive steady state of the Lambda system: ground populations held at 1/2,
/// excited population neglected, and the Stark shifts dropped against gamma in the
/// optical denominators of rho12.
LambdaCoherences analytic_lambda3(const LambdaParams& p);

struct SelfRotation {
  cplx chi1;          // susceptibility of the sigma+ component
  cplx chi2;          // susceptibility of the sigma- component
  double sy_chi = 0;  // Re(chi1) - Re(chi2)
  // (Delta2 - Delta1)(1/2 + Re rho12) - 2 gamma Im rho12, over gamma^2 + Delta1^2
  double sy_reduced = 0;
  // S_z Omega^2 (1 - Omega^2 / (2 (gamma12 + Omega^2/gamma)^2)) with Omega^2 the mean power
  double sy_oat = 0;
  double phi = 0;  // rad, 2 pi L (n_R - n_L) / lambda
};

/// Polarization self-rotation of the Lambda system. `scale` is the prefactor
/// N0 d^2 / (eps0 hbar) (s^-1) linking chi_i to rho_i3 / Omega_i; it only sets the
/// absolute size of chi and phi.
SelfRotation self_rotation_sy(const LambdaParams& p, double length = 0.075, double scale = 1.0,
                              const PhysConsts& pc = rb87());

struct Beam {
  double x = 0.0;  // m
  double y = 0.0;  // m
  cplx amplitude{1.0, 0.0};
};

struct LatticeSpec {
  std::vector<Beam> beams;
  double waist = 0.2525e-3;  // m, 1/e^2 intensity radius (half the quoted 0.505 mm beam size)
  int grid = 128;            // near-field samples per side
  double extent = 0.0;       // m, side of the near-field window; 0 picks a window that holds every beam
  int padding = 4;
  void validate() const;
};

struct FarField {
  int size = 0;                 // samples per side after zero padding
  Eigen::MatrixXd intensity;    // |FFT|^2 normalized to a peak of 1, zero frequency at (size/2, size/2)
  double peak = 0.0;            // unnormalized peak of |FFT|^2 / size^2
  double energy = 0.0;          // sum |FFT|^2 / size^2; equals near_energy by Parseval
  double near_energy = 0.0;     // sum |E|^2 over the padded near field
  double spatial_frequency_step = 0.0;  // 1/m per sample
};

/// Far-field intensity of a set of Gaussian beams.
FarField far_field(const LatticeSpec& spec);

}  // namespace sqz
