#include "sqz/core_physics.hpp"

#include <cmath>
#include <string>

#include "sqz/errors.hpp"

namespace sqz {

const PhysConsts& rb87() {
  static const PhysConsts consts{};
  return consts;
}

void CellConfig::validate() const {
  if (!(length > 0.0)) throw DomainError("cell length must be positive");
  if (!(radius > 0.0)) throw DomainError("cell radius must be positive");
  if (!(temperature > 0.0)) throw DomainError("cell temperature must be positive");
  if (!(gamma0 >= 0.0)) throw DomainError("gamma0 must be non-negative");
  if (!(gamma12 >= 0.0)) throw DomainError("gamma12 must be non-negative");
  if (!(gamma >= gamma12)) throw DomainError("optical decay gamma must be >= gamma12");
  if (!(doppler_width > 0.0)) throw DomainError("Doppler width must be positive");
}

double ChannelSpec::scale_at(double t) const {
  double s = 1.0;
  for (const auto& step : envelope) {
    if (t >= step.time) s = step.scale;
  }
  return s;
}

void ChannelSpec::validate(const CellConfig& cell) const {
  if (!(radius > 0.0) || !(radius < cell.radius))
    throw GeometryError("channel radius must lie in (0, R_cell)");
  if (!(power >= 0.0)) throw DomainError("channel power must be non-negative");
  for (std::size_t i = 0; i < envelope.size(); ++i) {
    if (!(envelope[i].scale >= 0.0)) throw DomainError("envelope scale must be non-negative");
    if (i > 0 && !(envelope[i].time > envelope[i - 1].time))
      throw DomainError("envelope steps must be strictly increasing in time");
  }
}

double vapor_pressure(double temperature) {
  if (!(temperature > 273.0 && temperature < 400.0))
    throw DomainError("vapor pressure curve valid for 273 K < T < 400 K, got " +
                      std::to_string(temperature));
  constexpr double kTorr = 133.322368;
  const double log10_torr = 2.881 + 4.312 - 4040.0 / temperature;
  return kTorr * std::pow(10.0, log10_torr);
}

double vapor_density(double temperature) {
  return vapor_pressure(temperature) / (rb87().boltzmann * temperature);
}

double mean_speed(double temperature, const PhysConsts& pc) {
  if (!(temperature >= 0.0)) throw DomainError("temperature must be non-negative");
  return std::sqrt(8.0 * pc.boltzmann * temperature / (kPi * pc.atomic_mass));
}

ExchangeRates exchange_rates(const CellConfig& cell, std::span<const ChannelSpec> channels,
                             const PhysConsts& pc) {
  double covered = 0.0;
  for (const auto& ch : channels) {
    if (!(ch.radius > 0.0)) throw GeometryError("channel radius must be positive");
    covered += ch.radius * ch.radius;
  }
  const double dark_area = cell.radius * cell.radius - covered;
  if (!(dark_area > 0.0))
    throw GeometryError("channels cover the full cell cross-section; no dark region remains");

  const double vbar = mean_speed(cell.temperature, pc);
  ExchangeRates rates;
  rates.to_dark.reserve(channels.size());
  rates.from_dark.reserve(channels.size());
  for (const auto& ch : channels) {
    const double k_out = vbar / (2.0 * ch.radius);
    rates.to_dark.push_back(k_out);
    rates.from_dark.push_back(k_out * ch.radius * ch.radius / dark_area);
  }
  return rates;
}

AtomNumbers atom_numbers(const CellConfig& cell, std::span<const ChannelSpec> channels) {
  AtomNumbers out;
  out.density = vapor_density(cell.temperature);
  double covered = 0.0;
  for (const auto& ch : channels) {
    const double area = kPi * ch.radius * ch.radius;
    covered += area;
    out.channel.push_back(out.density * area * cell.length);
  }
  const double dark_area = kPi * cell.radius * cell.radius - covered;
  if (!(dark_area > 0.0))
    throw GeometryError("channels cover the full cell cross-section; no dark region remains");
  out.dark = out.density * dark_area * cell.length;
  return out;
}

double RabiCalibration::constant() const {
  return reference_rabi * reference_waist / std::sqrt(reference_power);
}

double power_to_rabi(double power, double waist, const RabiCalibration& cal) {
  if (!(power >= 0.0)) throw DomainError("power must be non-negative");
  if (!(waist > 0.0)) throw DomainError("waist must be positive");
  return cal.constant() * std::sqrt(power) / waist;
}

}  // namespace sqz
