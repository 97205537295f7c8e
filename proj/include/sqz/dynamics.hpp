#pragma once

#include <vector>

#include "sqz/array_solver.hpp"
#include "sqz/noise_spectra.hpp"

namespace sqz {

/// Channel power held over [start, end).
struct PowerInterval {
  double start = 0.0;  // s
  double end = 0.0;    // s
  double power = 0.0;  // W
};

/// Piecewise-constant power envelopes. A channel with no intervals runs CW at its
/// ChannelSpec power; otherwise it is dark outside its intervals. The state at
/// `start` is the steady state of the powers in effect at that instant.
struct PulseSchedule {
  std::vector<std::vector<PowerInterval>> channels;
  double start = 0.0;    // s
  double horizon = 0.0;  // s, end of the trajectory

  void validate(std::size_t n_channels) const;
  double power_at(std::size_t channel, double t, double cw_power) const;
  /// Interval edges strictly inside (start, horizon), sorted and unique.
  std::vector<double> transitions() const;
  /// Shortest time between consecutive power changes (horizon length if none).
  double shortest_segment() const;

  /// Builds intervals from the ChannelSpec envelopes (scale times base power).
  static PulseSchedule from_envelopes(const std::vector<ChannelSpec>& channels, double start,
                                      double horizon);
};

struct EvolveOptions {
  double dt = 1.0e-5;                // s, RK4 step on the reduced system
  double snapshot_interval = 1.0e-4;  // s
  // Channel maps depend on the dark state through pump depletion and are
  // rebuilt this often; without depletion they only change at transitions.
  double refresh_interval = 1.0e-4;  // s
  int max_halvings = 8;
  double step_tolerance = 1.0e-9;    // max |x(dt) - x(dt/2)| per interval
  double trace_tolerance = 1.0e-6;
};

struct Snapshot {
  double time = 0.0;
  std::vector<double> powers;     // W, per channel
  CMatrix dark;                   // rho_0
  std::vector<CMatrix> channels;  // slice- and class-averaged rho_i
};

struct Trajectory {
  ArrayContext context;
  PulseSchedule schedule;
  std::vector<Snapshot> snapshots;
  int refreshes = 0;
  int halvings = 0;  // largest step-halving count any interval needed
};

/// Integrates the mean-field array equations under `schedule`. Optical coherences
/// and the channel regions follow the ground-state populations and coherences of
/// the dark region adiabatically, so only those are stepped in time.
Trajectory time_evolve(const ArrayModel& model, const PulseSchedule& schedule,
                       const EvolveOptions& opts = {});

/// Quasi-static S_min(t) in dB at sideband `omega_detect` (rad/s).
/// Returns [snapshot][k] for channel index channels[k].
std::vector<std::vector<double>> instantaneous_squeezing(const Trajectory& traj, double omega_detect,
                                                         const std::vector<int>& channels,
                                                         int threads = 1);

struct RecoveryFit {
  double tau = 0.0;  // s
  double tau_sigma = 0.0;
  double offset = 0.0;     // A
  double amplitude = 0.0;  // B
  double rms_residual = 0.0;
};

/// Fits S(t) = A + B exp(-(t - t_off)/tau) to the samples with t > t_off.
RecoveryFit recovery_time(const std::vector<double>& times, const std::vector<double>& values,
                          double t_off);

}  // namespace sqz
