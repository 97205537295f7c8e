#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sqz/array_solver.hpp"
#include "sqz/atomic_model.hpp"

namespace sqz {

using Mat2c = Eigen::Matrix2cd;
using Mat2 = Eigen::Matrix2d;
using RowVec = Eigen::RowVectorXcd;

/// Linearized fluctuations of one velocity class in one slice. Vectors act on
/// vec(delta rho); the field obeys d a/dz = kappa w (source . delta rho).
struct FluctuationSystem {
  CMatrix drift;       // M: channel Liouvillian minus exchange loss
  CMatrix normal;      // <f_mu f_nu^dagger> = 2 D_{mu nu'}
  CMatrix antinormal;  // <f_nu^dagger f_mu> = 2 D_{nu' mu}
  CVector couple_a;    // vec(-i [F, rho])
  CVector couple_adag; // vec(-i [F^dagger, rho])
  RowVec source_a;     // d a / dz per unit delta rho
  RowVec source_adag;  // d a^dagger / dz per unit delta rho
};

/// Drift, couplings and diffusion for one channel atom at `velocity`.
FluctuationSystem linearize(const ArrayContext& ctx, const ChannelSpec& ch, cplx rabi,
                            const CMatrix& rho, const CMatrix& dark, double velocity,
                            bool check_stability = true);

/// Generalized Einstein relation for a (non-Hamiltonian) superoperator. Returns the
/// matrix 2 D_{mu nu} = <D*(A_mu A_nu) - D*(A_mu) A_nu - A_mu D*(A_nu)> with
/// A_mu = |n><m| for mu = (m, n) in column-major order.
CMatrix einstein_diffusion(const CMatrix& dissipative, const CMatrix& rho);

/// Per-unit-length coefficients of the (delta a, delta a^dagger) propagation.
struct SliceCoupling {
  Mat2c drift = Mat2c::Zero();
  Mat2c normal = Mat2c::Zero();
  Mat2c antinormal = Mat2c::Zero();
};

/// Transfer and added noise across one slice (or the whole cell).
struct SliceTransfer {
  Mat2c transfer = Mat2c::Identity();
  Mat2c normal = Mat2c::Zero();      // added <b b^dagger>
  Mat2c antinormal = Mat2c::Zero();  // added <b^dagger b>
};

/// Doppler-averaged coupling at sideband `omega` (rad/s).
SliceCoupling slice_coupling(std::span<const FluctuationSystem> classes,
                             std::span<const VelocityClass> weights, double kappa, double omega);

/// Exact integration over a slice of length dz with constant coefficients.
SliceTransfer slice_transfer(const SliceCoupling& c, double dz);

/// Composes slices in propagation order.
SliceTransfer propagate_field(std::span<const SliceCoupling> slices, double dz);

/// Output (delta a, delta a^dagger) symmetrized covariance for vacuum input.
Mat2c output_covariance(const SliceTransfer& t);
/// <[b_i, b_j^dagger]> at the output; stays diag(1, -1) when the noise is consistent.
Mat2c output_commutator(const SliceTransfer& t);

struct SpectrumPoint {
  double omega = 0.0;  // rad/s
  Mat2 covariance = Mat2::Identity() * 0.25;  // (X, P) symmetrized covariance
  double s_min_db = 0.0;
  double s_max_db = 0.0;
  double theta = 0.0;  // squeezing angle (rad), in (-pi/2, pi/2]
  bool degenerate = false;
};

struct NoiseSpectrum {
  std::vector<SpectrumPoint> points;
};

/// (X, P) covariance with X = (b1 + b2)/2, P = (b1 - b2)/(2i).
Mat2 quadrature_covariance(const Mat2c& sym);
/// S_min, S_max and theta_sq of a quadrature covariance.
SpectrumPoint analyze_covariance(const Mat2& cov, double omega = 0.0);
NoiseSpectrum quadrature_spectrum(std::span<const SliceTransfer> transfers, std::span<const double> omegas,
                                  std::span<const double> lo_phases = {});

/// Noise of quadrature theta, in dB relative to shot noise.
double quadrature_noise_db(const Mat2& cov, double theta);
/// Rotates the quadrature frame by phi: theta_sq -> theta_sq + phi.
Mat2 rotate_covariance(const Mat2& cov, double phi);

/// (S_min_dB + S_max_dB) / 2.
std::vector<double> purity_product(const NoiseSpectrum& spectrum);

/// Balanced combination of mutually uncorrelated beams, each rotated by phi_j.
NoiseSpectrum combine_channels(std::span<const NoiseSpectrum> spectra, std::span<const double> phis);

struct SpectrumOptions {
  bool check_stability = true;
  bool lock_to_pump = true;  // measure quadratures relative to the transmitted pump phase
};

/// Output spectrum of channel `channel` of a solved array at each sideband frequency.
NoiseSpectrum channel_spectrum(const ArraySolution& sol, int channel, std::span<const double> omegas,
                               const SpectrumOptions& opts = {});

/// Same, for channel states given directly (used by the dynamics layer).
NoiseSpectrum channel_spectrum(const ArrayContext& ctx, const ChannelSpec& ch,
                               const ChannelResponse& response, const CMatrix& dark,
                               std::span<const double> omegas, const SpectrumOptions& opts = {});

}  // namespace sqz
