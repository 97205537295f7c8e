#pragma once

#include <numbers>
#include <span>
#include <vector>

namespace sqz {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Converts an ordinary frequency in Hz to angular frequency in rad/s.
constexpr double angular(double hz) { return kTwoPi * hz; }

struct PhysConsts {
  double hbar = 1.054571817e-34;       // J s
  double boltzmann = 1.380649e-23;    // J/K
  double atomic_mass = 1.443160648e-25;  // kg, 87Rb
  double wavelength = 795.0e-9;        // m, D1 line
  double speed_of_light = 299792458.0;  // m/s
  double vacuum_permittivity = 8.8541878128e-12;  // F/m

  double wavenumber() const { return kTwoPi / wavelength; }
  /// Resonant two-level cross section 3 lambda^2 / 2 pi.
  double unit_cross_section() const { return 3.0 * wavelength * wavelength / kTwoPi; }
};

/// Shared immutable constants for 87Rb on the D1 line.
const PhysConsts& rb87();

struct CellConfig {
  double length = 0.075;        // m
  double radius = 0.0125;       // m
  double temperature = 336.85;  // K
  double gamma0 = angular(10.0);   // ground population decay, s^-1
  double gamma12 = angular(10.0);  // ground coherence decay, s^-1
  double gamma = angular(6.0e6);   // excited-state / optical decay, s^-1
  double doppler_width = angular(500.0e6);  // FWHM of the Doppler profile, rad/s

  /// Throws DomainError when an invariant is violated.
  void validate() const;
};

enum class Polarization { H, V };

/// Power scale factor applied from `time` until the next step.
struct EnvelopeStep {
  double time = 0.0;   // s
  double scale = 1.0;
};

struct ChannelSpec {
  double radius = 0.2525e-3;  // m
  double power = 1.0e-3;      // W
  Polarization polarization = Polarization::H;
  double detuning = 0.0;      // one-photon detuning, rad/s
  std::vector<EnvelopeStep> envelope;  // empty means always on at full power

  /// Power scale at time t (1 when the envelope is empty or t precedes the first step).
  double scale_at(double t) const;
  void validate(const CellConfig& cell) const;

  friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;
};

/// Rubidium saturated number density (m^-3) from the liquid-phase vapor-pressure
/// curve log10(P/torr) = 7.193 - 4040/T (Alcock, Itkin & Horrigan 1984, as
/// tabulated in Steck's "Rubidium 87 D Line Data") and the ideal-gas law.
/// Valid for 273 K < T < 400 K.
double vapor_density(double temperature);

/// Vapor pressure in Pa from the same curve as vapor_density.
double vapor_pressure(double temperature);

/// Mean thermal speed sqrt(8 kB T / (pi m)).
double mean_speed(double temperature, const PhysConsts& pc = rb87());

struct ExchangeRates {
  std::vector<double> to_dark;    // k_i0: channel -> dark region, s^-1
  std::vector<double> from_dark;  // k_0i: dark region -> channel, s^-1
};

/// Channel/dark-region hopping rates. k_i0 = vbar / (2 r_i) and
/// k_0i = k_i0 r_i^2 / (R^2 - sum r_j^2). Throws GeometryError when the beams
/// cover the whole cell cross-section.
ExchangeRates exchange_rates(const CellConfig& cell, std::span<const ChannelSpec> channels,
                             const PhysConsts& pc = rb87());

struct AtomNumbers {
  double density = 0.0;              // m^-3
  std::vector<double> channel;       // N_i = n pi r_i^2 L
  double dark = 0.0;                 // N_d = n (pi R^2 - sum pi r_i^2) L
};

AtomNumbers atom_numbers(const CellConfig& cell, std::span<const ChannelSpec> channels);

/// Power-to-Rabi calibration anchored at a single reference point.
struct RabiCalibration {
  double reference_power = 1.0e-3;      // W
  double reference_waist = 0.505e-3;    // m
  double reference_rabi = angular(43.6e6);  // rad/s

  /// Omega = C sqrt(P) / waist.
  double constant() const;
};

/// Pump Rabi frequency (rad/s), Omega proportional to sqrt(P / A) with A ~ waist^2.
double power_to_rabi(double power, double waist, const RabiCalibration& cal = {});

}  // namespace sqz
