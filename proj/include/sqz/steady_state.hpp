#pragma once

#include <span>
#include <vector>

#include "sqz/atomic_model.hpp"
#include "sqz/core_physics.hpp"

namespace sqz {

/// Quick physical checks on a d x d density matrix.
struct DensityDiagnostics {
  double hermiticity = 0.0;   // max |rho - rho^dagger|
  double trace_error = 0.0;   // |tr rho - 1|
  double min_eigenvalue = 0.0;
};

DensityDiagnostics diagnose_density(const CMatrix& rho);

/// Stacked state of one velocity class: dark region plus N illuminated channels.
struct ArrayState {
  CMatrix dark;
  std::vector<CMatrix> channels;
  ExchangeRates rates;
  AtomNumbers atoms;

  int dim() const { return static_cast<int>(dark.rows()); }
};

/// Block generator acting on [vec(rho0); vec(rho1); ...; vec(rhoN)].
/// Region 0 is the dark region, regions 1..N are the channels.
struct GeneratorMatrix {
  CMatrix matrix;
  int dim = 0;
  int regions = 0;
  ExchangeRates rates;
  AtomNumbers atoms;
};

/// Superoperator of the dark region: relaxation plus gamma0 redistribution toward
/// the unpolarized ground mixture (atoms are conserved in a coated cell).
CMatrix dark_liouvillian(const LevelScheme& scheme, const CellConfig& cell);

/// Assembles the block generator from already-built per-channel Liouvillians.
GeneratorMatrix assemble_generator(std::span<const CMatrix> channel_liouvillians,
                                   const CMatrix& dark, const ExchangeRates& rates,
                                   const AtomNumbers& atoms = {});

/// Physical assembly for a single velocity class with a_y = 0.
GeneratorMatrix assemble_generator(const LevelScheme& scheme, std::span<const ChannelSpec> channels,
                                   const CellConfig& cell, double velocity,
                                   const RabiCalibration& rabi = {}, const PhysConsts& pc = rb87());

struct SteadyStateOptions {
  // When the generator has more null directions than trace constraints, pick the
  // state reached from the ground mixture by long-time propagation instead of throwing.
  bool tie_break = false;
  double rank_tolerance = 1e-11;
};

/// Solves G x = 0 with tr(rho_r) = 1 in each region through a bordered
/// least-squares system. Throws SingularSystemError on extra null directions.
ArrayState steady_state(const GeneratorMatrix& gen, const SteadyStateOptions& opts = {});

/// Initial condition used for tie-breaking and for time propagation.
CVector stacked_mixture(const GeneratorMatrix& gen, const CMatrix& mixture);

/// Coherence that sources the pump field, dOmega/dz = i kappa X. For linear schemes
/// X = rho_3y + (g2/g1) rho_4x (x and y swapped for V polarization); for Lambda3 the
/// sigma+ leg rho_13 is returned.
cplx pump_coherence(const CMatrix& rho, const LevelScheme& scheme, Polarization pol);

/// Intensity transmission of a slab of thickness dz for the pump in state `rho`,
/// with kappa the field-coupling constant (m^-1 s^-1). The factor lies in (0, 1].
double pump_absorption(const CMatrix& rho, const LevelScheme& scheme, const Drive& drive,
                       double kappa, double dz);

}  // namespace sqz
