#include "sqz/array_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>
#include <Eigen/QR>

#include "sqz/errors.hpp"

namespace sqz {

void ArrayModel::validate() const {
  scheme.validate();
  cell.validate();
  if (channels.empty()) throw DomainError("channel list is empty");
  for (const auto& ch : channels) ch.validate(cell);
  if (numerics.doppler_points < 1) throw DomainError("doppler_points must be >= 1");
  if (numerics.slices < 1 || numerics.slices > 4096) throw DomainError("slices must be in [1, 4096]");
  if (!(calibration.line_strength >= 0.0)) throw DomainError("line_strength must be >= 0");
  if (!(calibration.rabi_coupling > 0.0)) throw DomainError("rabi_coupling must be > 0");
  if (density_override && !(*density_override >= 0.0))
    throw DomainError("density override must be >= 0");
}

double ArrayModel::density() const {
  return density_override ? *density_override : vapor_density(cell.temperature);
}

CMatrix ArrayContext::channel_liouvillian(const Drive& drive, double detuning, double velocity) const {
  const auto h = build_hamiltonian(scheme, drive, 0.0, detuning, velocity, *consts);
  return liouvillian(h.h, dissipators);
}

Drive ArrayContext::drive_for(const ChannelSpec& ch, cplx rabi) const {
  if (scheme.kind == SchemeKind::Lambda3) return Drive{rabi, rabi, ch.polarization};
  return Drive::linear(rabi, ch.polarization);
}

cplx ArrayContext::input_rabi(const ChannelSpec& ch, double power_scale) const {
  return rabi_coupling * power_to_rabi(ch.power * power_scale, 2.0 * ch.radius, rabi);
}

ArrayContext make_context(const ArrayModel& model, const PhysConsts& pc) {
  model.validate();
  ArrayContext ctx;
  ctx.scheme = model.scheme;
  ctx.cell = model.cell;
  ctx.channels = model.channels;
  ctx.numerics = model.numerics;
  ctx.rabi = model.calibration.rabi;
  ctx.rabi_coupling = model.calibration.rabi_coupling;
  ctx.consts = &pc;
  ctx.classes = model.numerics.doppler
                    ? doppler_grid(model.cell.doppler_width, model.numerics.doppler_points, pc)
                    : std::vector<VelocityClass>{VelocityClass{0.0, 1.0}};
  ctx.rates = exchange_rates(model.cell, model.channels, pc);
  ctx.atoms = atom_numbers(model.cell, model.channels);
  const double density = model.density();
  ctx.atoms.density = density;
  for (std::size_t i = 0; i < model.channels.size(); ++i) {
    const double r = model.channels[i].radius;
    ctx.atoms.channel[i] = density * kPi * r * r * model.cell.length;
  }
  double lit = 0.0;
  for (const auto& ch : model.channels) lit += kPi * ch.radius * ch.radius;
  ctx.atoms.dark = density * (kPi * model.cell.radius * model.cell.radius - lit) * model.cell.length;

  ctx.dissipators = build_dissipators(model.scheme, model.cell);
  ctx.dark_generator = dark_liouvillian(model.scheme, model.cell);
  const double sigma = pc.unit_cross_section() * model.calibration.line_strength;
  ctx.kappa = density * sigma * model.scheme.gamma / 4.0;
  ctx.slice_length = model.cell.length / model.numerics.slices;
  return ctx;
}

ChannelResponse channel_response(const ArrayContext& ctx, const ChannelSpec& ch, double power_scale,
                                 const CMatrix& dark, bool keep_maps) {
  const int d = ctx.dim();
  const Eigen::Index block = static_cast<Eigen::Index>(d) * d;
  const int n_slices = ctx.numerics.slices;
  const double k_out = mean_speed(ctx.cell.temperature, *ctx.consts) / (2.0 * ch.radius);
  const CVector dark_vec = vec(dark);
  const CMatrix eye = CMatrix::Identity(block, block);

  ChannelResponse out;
  out.slices.reserve(n_slices);
  out.mean_map = CMatrix::Zero(block, block);
  if (keep_maps) out.maps.resize(n_slices);

  cplx omega = ctx.input_rabi(ch, power_scale);
  for (int s = 0; s < n_slices; ++s) {
    SliceState slice;
    slice.rabi = omega;
    slice.mean = CMatrix::Zero(d, d);
    const Drive drive = ctx.drive_for(ch, omega);
    for (const auto& vc : ctx.classes) {
      const CMatrix shifted = ctx.channel_liouvillian(drive, ch.detuning, vc.velocity) - k_out * eye;
      const CMatrix map = -k_out * shifted.partialPivLu().inverse();
      CMatrix rho = unvec(map * dark_vec, d);
      rho = 0.5 * (rho + rho.adjoint());
      slice.mean += vc.weight * rho;
      out.mean_map += (vc.weight / n_slices) * map;
      slice.rho.push_back(std::move(rho));
      if (keep_maps) out.maps[s].push_back(map);
    }
    if (ctx.numerics.pump_depletion && ctx.kappa > 0.0 && std::abs(omega) > 0.0) {
      const cplx source = pump_coherence(slice.mean, ctx.scheme, ch.polarization);
      omega *= std::exp(cplx(0.0, 1.0) * ctx.kappa * ctx.slice_length * source / omega);
    }
    out.slices.push_back(std::move(slice));
  }
  out.output_rabi = omega;
  return out;
}

CMatrix effective_dark_generator(const ArrayContext& ctx, std::span<const CMatrix> mean_maps) {
  if (mean_maps.size() != ctx.channels.size())
    throw DimensionError("one channel map per channel required");
  CMatrix g = ctx.dark_generator;
  const Eigen::Index block = g.rows();
  const CMatrix eye = CMatrix::Identity(block, block);
  for (std::size_t i = 0; i < mean_maps.size(); ++i)
    g += ctx.rates.from_dark[i] * (mean_maps[i] - eye);
  return g;
}

CMatrix solve_dark(const CMatrix& generator, int dim, double rank_tolerance) {
  const Eigen::Index block = generator.rows();
  const double scale = std::max(1.0, generator.cwiseAbs().maxCoeff());
  CMatrix bordered = CMatrix::Zero(block + 1, block);
  bordered.topRows(block) = generator / scale;
  for (int m = 0; m < dim; ++m) bordered(block, m + dim * m) = 1.0;
  CVector rhs = CVector::Zero(block + 1);
  rhs(block) = 1.0;

  Eigen::ColPivHouseholderQR<CMatrix> qr(bordered);
  qr.setThreshold(rank_tolerance);
  if (qr.rank() < block) {
    Eigen::ColPivHouseholderQR<CMatrix> gq(generator / scale);
    gq.setThreshold(rank_tolerance);
    const int null_dim = static_cast<int>(block - gq.rank());
    throw SingularSystemError("dark-region steady state not unique: null space dimension " +
                                  std::to_string(null_dim),
                              null_dim);
  }
  CVector x = qr.solve(rhs);
  x += qr.solve(rhs - bordered * x);
  CMatrix rho = unvec(x, dim);
  return 0.5 * (rho + rho.adjoint());
}

std::vector<int> group_channels(std::span<const ChannelSpec> channels,
                                std::span<const double> power_scales, int& distinct) {
  std::vector<int> of(channels.size(), -1);
  std::vector<std::size_t> reps;
  auto scale = [&](std::size_t i) { return power_scales.empty() ? 1.0 : power_scales[i]; };
  auto same = [&](std::size_t a, std::size_t b) {
    const auto& x = channels[a];
    const auto& y = channels[b];
    return x.radius == y.radius && x.power * scale(a) == y.power * scale(b) &&
           x.polarization == y.polarization && x.detuning == y.detuning;
  };
  for (std::size_t i = 0; i < channels.size(); ++i) {
    for (std::size_t r = 0; r < reps.size(); ++r)
      if (same(i, reps[r])) {
        of[i] = static_cast<int>(r);
        break;
      }
    if (of[i] < 0) {
      of[i] = static_cast<int>(reps.size());
      reps.push_back(i);
    }
  }
  distinct = static_cast<int>(reps.size());
  return of;
}

CMatrix ArraySolution::channel_mean(int i) const {
  const auto& prof = channel(i);
  CMatrix out = CMatrix::Zero(dark.rows(), dark.cols());
  for (const auto& s : prof.slices) out += s.mean;
  return out / static_cast<double>(prof.slices.size());
}

namespace {

void refresh(ChannelResponse& prof, const ArrayContext& ctx, const CMatrix& dark) {
  const int d = ctx.dim();
  const CVector dv = vec(dark);
  for (std::size_t s = 0; s < prof.slices.size(); ++s) {
    auto& slice = prof.slices[s];
    slice.mean = CMatrix::Zero(d, d);
    for (std::size_t k = 0; k < ctx.classes.size(); ++k) {
      CMatrix rho = unvec(prof.maps[s][k] * dv, d);
      slice.rho[k] = 0.5 * (rho + rho.adjoint());
      slice.mean += ctx.classes[k].weight * slice.rho[k];
    }
  }
}

}  // namespace

ArraySolution solve_array(const ArrayModel& model, std::span<const double> power_scales,
                          const PhysConsts& pc) {
  if (!power_scales.empty() && power_scales.size() != model.channels.size())
    throw DimensionError("power_scales must match the channel count");
  ArraySolution sol;
  sol.context = make_context(model, pc);
  const auto& ctx = sol.context;
  const int d = ctx.dim();

  int distinct = 0;
  sol.profile_of = group_channels(model.channels, power_scales, distinct);
  std::vector<std::size_t> rep(distinct);
  for (std::size_t i = model.channels.size(); i-- > 0;) rep[sol.profile_of[i]] = i;
  auto scale = [&](std::size_t i) { return power_scales.empty() ? 1.0 : power_scales[i]; };

  const bool iterate = ctx.numerics.pump_depletion && ctx.kappa > 0.0;
  sol.dark = ground_mixture(model.scheme);
  std::vector<CMatrix> maps(model.channels.size());
  for (int it = 1;; ++it) {
    sol.profiles.clear();
    for (int p = 0; p < distinct; ++p)
      sol.profiles.push_back(
          channel_response(ctx, model.channels[rep[p]], scale(rep[p]), sol.dark, true));
    for (std::size_t i = 0; i < maps.size(); ++i) maps[i] = sol.profiles[sol.profile_of[i]].mean_map;
    const CMatrix next = solve_dark(effective_dark_generator(ctx, maps), d);
    const double change = (next - sol.dark).cwiseAbs().maxCoeff();
    sol.dark = next;
    sol.iterations = it;
    if (!iterate || change < ctx.numerics.tolerance) break;
    if (it >= ctx.numerics.max_iterations)
      throw IntegrationError("pump-depletion iteration did not converge after " +
                             std::to_string(it) + " sweeps (last change " +
                             std::to_string(change) + ")");
  }
  for (auto& prof : sol.profiles) refresh(prof, ctx, sol.dark);
  return sol;
}

}  // namespace sqz
