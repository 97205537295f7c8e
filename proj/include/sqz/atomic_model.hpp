#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "sqz/core_physics.hpp"

namespace sqz {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;

enum class SchemeKind { Lambda3, DoubleLambda4, FiveLevel };

const char* to_string(SchemeKind kind);
SchemeKind scheme_kind_from_string(const std::string& name);

/// Basis ordering. Linear-polarization schemes use |x>, |y>, |3>, |4>[, |trap>];
/// Lambda3 uses the circular basis |1>, |2>, |3>.
namespace level {
inline constexpr int x = 0;
inline constexpr int y = 1;
inline constexpr int e3 = 2;
inline constexpr int e4 = 3;
inline constexpr int trap = 4;
}  // namespace level

/// Fractions of excited-state decay landing in |x>, |y> and the trap state.
struct Branching {
  double x = 0.38;
  double y = 0.38;
  double trap = 0.24;
};

struct LevelScheme {
  SchemeKind kind = SchemeKind::FiveLevel;
  double gamma = angular(6.0e6);               // excited decay rate, s^-1
  double excited_splitting = angular(814.5e6);  // Delta, rad/s
  double ground_splitting = angular(6.8e9);     // Delta_HF, rad/s (FiveLevel only)
  Branching branching;
  // Relative single-photon coupling strengths of the |x>-|3> (g1) and |y>-|4>
  // (g2) transitions; the absolute scale lives in the optical-depth calibration.
  // The weaker |y>-|4> leg limits how fast |x> atoms are pumped into the trap.
  double g1 = 1.0;
  double g2 = 0.4;

  int dim() const;
  /// Branching as used by the scheme (the four-level model folds the trap share
  /// equally into |x> and |y>).
  Branching effective_branching() const;
  void validate() const;
};

/// Classical drive. For linear schemes `omega1` is the pump Rabi frequency on
/// |y>-|3> (the |x>-|4> leg scales with g2/g1); for Lambda3 `omega1`/`omega2` are
/// the sigma+/sigma- Rabi frequencies.
struct Drive {
  cplx omega1{0.0, 0.0};
  cplx omega2{0.0, 0.0};
  Polarization polarization = Polarization::H;

  static Drive linear(cplx rabi, Polarization pol = Polarization::H);
  static Drive circular(double omega_plus, double omega_minus);
};

/// H/hbar in rad/s. `field` and `field_dag` are the coefficients of a_y and
/// a_y^dagger, so that `h` = H0 + a_y field + conj(a_y) field_dag.
struct HamiltonianMatrix {
  CMatrix h;
  CMatrix field;
  CMatrix field_dag;
};

/// Interaction Hamiltonian in the rotating frame. The one-photon detuning seen by
/// an atom moving at `velocity` along the beam is detuning - k v.
HamiltonianMatrix build_hamiltonian(const LevelScheme& scheme, const Drive& drive, cplx a_y,
                                    double detuning, double velocity,
                                    const PhysConsts& pc = rb87());

/// Element-wise relaxation rates and repopulation. The dissipator acts as
/// d rho_mn/dt = -Gamma_mn rho_mn + delta_mn sum_k feed(m, k) rho_kk.
struct DissipatorPair {
  RMatrix gamma;
  RMatrix feed;

  CMatrix repopulation(const CMatrix& rho) const;
  CMatrix apply(const CMatrix& rho) const;
};

DissipatorPair build_dissipators(const LevelScheme& scheme, const CellConfig& cell);

/// Unpolarized ground-state mixture the dark region relaxes toward.
CMatrix ground_mixture(const LevelScheme& scheme);

// Vectorization is column-major: vec(rho)[m + d n] = rho(m, n).
CVector vec(const CMatrix& m);
CMatrix unvec(const CVector& v, int dim);

/// Superoperator of -i[H, .] acting on vec(rho).
CMatrix commutator_superop(const CMatrix& h);
/// Superoperator of the dissipator acting on vec(rho).
CMatrix dissipator_superop(const DissipatorPair& diss);
/// -i[H, .] + dissipator.
CMatrix liouvillian(const CMatrix& h, const DissipatorPair& diss);

struct VelocityClass {
  double velocity = 0.0;  // m/s along the beam
  double weight = 1.0;
};

/// Gauss-Hermite velocity classes for a Gaussian Doppler profile of FWHM
/// `doppler_width` (rad/s). Weights sum to one and are symmetric in v -> -v.
std::vector<VelocityClass> doppler_grid(double doppler_width, int n, const PhysConsts& pc = rb87());

}  // namespace sqz
