#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sqz/atomic_model.hpp"
#include "sqz/core_physics.hpp"
#include "sqz/steady_state.hpp"

namespace sqz {

struct Calibration {
  RabiCalibration rabi;
  // Scales the resonant cross section 3 lambda^2 / 2 pi. Absorbs the Clebsch-Gordan
  // weight and the geometry the single-photon couplings g1, g2 leave unspecified.
  double line_strength = 0.15;
  // Hamiltonian matrix element per unit of calibrated Rabi frequency. The 43.6 MHz
  // anchor is a full Rabi frequency, so the dipole term is Omega / 2.
  double rabi_coupling = 0.5;
};

struct Numerics {
  int doppler_points = 64;
  bool doppler = true;
  int slices = 8;
  bool pump_depletion = true;
  double tolerance = 1e-10;
  int max_iterations = 200;
};

/// Everything the array solver needs for one parameter point.
struct ArrayModel {
  LevelScheme scheme;
  CellConfig cell;
  std::vector<ChannelSpec> channels;
  Calibration calibration;
  Numerics numerics;
  // Replaces the vapor-pressure density (m^-3); 0 gives an empty cell.
  std::optional<double> density_override;

  void validate() const;
  double density() const;
};

/// Per-point constants shared by the steady-state, noise and dynamics layers.
struct ArrayContext {
  LevelScheme scheme;
  CellConfig cell;
  std::vector<ChannelSpec> channels;
  Numerics numerics;
  RabiCalibration rabi;
  double rabi_coupling = 0.5;
  std::vector<VelocityClass> classes;
  ExchangeRates rates;
  AtomNumbers atoms;
  DissipatorPair dissipators;
  CMatrix dark_generator;  // d^2 x d^2
  double kappa = 0.0;      // field coupling per unit length, dOmega/dz = i kappa X
  double slice_length = 0.0;
  const PhysConsts* consts = &rb87();

  int dim() const { return scheme.dim(); }
  /// Doppler-shifted Liouvillian of a channel atom (without exchange).
  CMatrix channel_liouvillian(const Drive& drive, double detuning, double velocity) const;
  Drive drive_for(const ChannelSpec& ch, cplx rabi) const;
  cplx input_rabi(const ChannelSpec& ch, double power_scale = 1.0) const;
};

ArrayContext make_context(const ArrayModel& model, const PhysConsts& pc = rb87());

struct SliceState {
  cplx rabi;                 // pump Rabi frequency entering the slice
  std::vector<CMatrix> rho;  // one per velocity class
  CMatrix mean;              // Doppler-weighted average
};

/// Channel maps rho_slice,class = T rho_dark for one pump profile.
struct ChannelResponse {
  std::vector<SliceState> slices;
  std::vector<std::vector<CMatrix>> maps;  // [slice][class]
  CMatrix mean_map;                        // slice- and class-averaged map
  cplx output_rabi;
};

/// Marches the pump through the slices for a given dark-region state.
ChannelResponse channel_response(const ArrayContext& ctx, const ChannelSpec& ch, double power_scale,
                                 const CMatrix& dark, bool keep_maps = false);

/// Effective dark-region generator once the channels have been slaved to it.
CMatrix effective_dark_generator(const ArrayContext& ctx, std::span<const CMatrix> mean_maps);

/// Unit-trace null vector of a d^2 x d^2 generator.
CMatrix solve_dark(const CMatrix& generator, int dim, double rank_tolerance = 1e-11);

struct ArraySolution {
  ArrayContext context;
  CMatrix dark;
  std::vector<ChannelResponse> profiles;  // distinct channels only
  std::vector<int> profile_of;           // channel index -> profile index
  int iterations = 0;

  const ChannelResponse& channel(int i) const { return profiles.at(profile_of.at(i)); }
  /// Populated channel state averaged over slices and classes.
  CMatrix channel_mean(int i) const;
};

/// Joint steady state of the array. Identical channels share one profile. With
/// pump depletion the dark state and pump profiles are iterated to self-consistency.
ArraySolution solve_array(const ArrayModel& model, std::span<const double> power_scales = {},
                          const PhysConsts& pc = rb87());

/// Groups channels that produce identical physics (same spec and power scale).
std::vector<int> group_channels(std::span<const ChannelSpec> channels,
                                std::span<const double> power_scales, int& distinct);

}  // namespace sqz
