#include "sqz/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <unsupported/Eigen/MatrixFunctions>

#include "sqz/errors.hpp"

namespace sqz {

DensityDiagnostics diagnose_density(const CMatrix& rho) {
  DensityDiagnostics out;
  out.hermiticity = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  out.trace_error = std::abs(rho.trace() - cplx(1.0, 0.0));
  const CMatrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm, Eigen::EigenvaluesOnly);
  out.min_eigenvalue = eig.eigenvalues().minCoeff();
  return out;
}

CMatrix dark_liouvillian(const LevelScheme& scheme, const CellConfig& cell) {
  const int d = scheme.dim();
  CMatrix out = dissipator_superop(build_dissipators(scheme, cell));
  const CVector mix = vec(ground_mixture(scheme));
  const CVector ident = vec(CMatrix::Identity(d, d));
  out += cell.gamma0 * (mix * ident.transpose());
  out -= cell.gamma0 * CMatrix::Identity(d * d, d * d);
  return out;
}

GeneratorMatrix assemble_generator(std::span<const CMatrix> channel_liouvillians,
                                   const CMatrix& dark, const ExchangeRates& rates,
                                   const AtomNumbers& atoms) {
  const Eigen::Index block = dark.rows();
  const auto n_channels = channel_liouvillians.size();
  if (dark.cols() != block) throw DimensionError("dark-region Liouvillian must be square");
  if (rates.to_dark.size() != n_channels || rates.from_dark.size() != n_channels)
    throw DimensionError("exchange rates do not match the channel count");
  for (const auto& l : channel_liouvillians)
    if (l.rows() != block || l.cols() != block)
      throw DimensionError("channel Liouvillian dimension differs from the dark region");

  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(block))));
  if (static_cast<Eigen::Index>(d) * d != block) throw DimensionError("block size is not d^2");

  GeneratorMatrix gen;
  gen.dim = d;
  gen.regions = static_cast<int>(n_channels) + 1;
  gen.rates = rates;
  gen.atoms = atoms;
  gen.matrix = CMatrix::Zero(block * gen.regions, block * gen.regions);

  const CMatrix eye = CMatrix::Identity(block, block);
  gen.matrix.block(0, 0, block, block) = dark;
  for (std::size_t i = 0; i < n_channels; ++i) {
    const Eigen::Index off = block * static_cast<Eigen::Index>(i + 1);
    const double k_out = rates.to_dark[i];
    const double k_in = rates.from_dark[i];
    gen.matrix.block(off, off, block, block) = channel_liouvillians[i] - k_out * eye;
    gen.matrix.block(off, 0, block, block) = k_out * eye;
    gen.matrix.block(0, off, block, block) = k_in * eye;
    gen.matrix.block(0, 0, block, block) -= k_in * eye;
  }
  return gen;
}

GeneratorMatrix assemble_generator(const LevelScheme& scheme, std::span<const ChannelSpec> channels,
                                   const CellConfig& cell, double velocity,
                                   const RabiCalibration& rabi, const PhysConsts& pc) {
  scheme.validate();
  cell.validate();
  for (const auto& ch : channels) ch.validate(cell);
  const DissipatorPair diss = build_dissipators(scheme, cell);

  std::vector<CMatrix> ls;
  ls.reserve(channels.size());
  for (const auto& ch : channels) {
    const double omega = power_to_rabi(ch.power, 2.0 * ch.radius, rabi);
    const Drive drive = scheme.kind == SchemeKind::Lambda3
                            ? Drive::circular(omega, omega)
                            : Drive::linear(omega, ch.polarization);
    const auto h = build_hamiltonian(scheme, drive, 0.0, ch.detuning, velocity, pc);
    ls.push_back(liouvillian(h.h, diss));
  }
  return assemble_generator(ls, dark_liouvillian(scheme, cell), exchange_rates(cell, channels, pc),
                            atom_numbers(cell, channels));
}

CVector stacked_mixture(const GeneratorMatrix& gen, const CMatrix& mixture) {
  const Eigen::Index block = static_cast<Eigen::Index>(gen.dim) * gen.dim;
  CVector x(block * gen.regions);
  const CVector one = vec(mixture);
  for (int r = 0; r < gen.regions; ++r) x.segment(block * r, block) = one;
  return x;
}

namespace {

ArrayState unpack(const GeneratorMatrix& gen, const CVector& x) {
  const Eigen::Index block = static_cast<Eigen::Index>(gen.dim) * gen.dim;
  ArrayState st;
  st.rates = gen.rates;
  st.atoms = gen.atoms;
  auto region = [&](int r) {
    CMatrix rho = unvec(x.segment(block * r, block), gen.dim);
    return CMatrix(0.5 * (rho + rho.adjoint()));
  };
  st.dark = region(0);
  for (int r = 1; r < gen.regions; ++r) st.channels.push_back(region(r));
  return st;
}

// Long-time limit of exp(G t) x0, used to select a physical state when the
// trace constraints leave the null space underdetermined.
CVector propagate_to_rest(const CMatrix& g, const CVector& x0, double tol) {
  Eigen::ComplexEigenSolver<CMatrix> eig(g, false);
  const double scale = g.cwiseAbs().maxCoeff();
  double slowest = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const cplx lam = eig.eigenvalues()(i);
    if (std::abs(lam) > tol * scale) slowest = std::min(slowest, std::abs(lam.real()));
  }
  if (!std::isfinite(slowest) || slowest <= 0.0)
    throw SingularSystemError("no decaying modes to select a steady state from", 0);
  const double t = 60.0 / slowest;
  const CMatrix prop = (g * t).exp();
  return prop * x0;
}

}  // namespace

ArrayState steady_state(const GeneratorMatrix& gen, const SteadyStateOptions& opts) {
  const Eigen::Index block = static_cast<Eigen::Index>(gen.dim) * gen.dim;
  const Eigen::Index n = block * gen.regions;
  if (gen.matrix.rows() != n || gen.matrix.cols() != n)
    throw DimensionError("generator size does not match its declared layout");

  const double scale = std::max(1.0, gen.matrix.cwiseAbs().maxCoeff());
  CMatrix bordered = CMatrix::Zero(n + gen.regions, n);
  bordered.topRows(n) = gen.matrix / scale;
  CVector rhs = CVector::Zero(n + gen.regions);
  for (int r = 0; r < gen.regions; ++r) {
    for (int m = 0; m < gen.dim; ++m) bordered(n + r, block * r + m + gen.dim * m) = 1.0;
    rhs(n + r) = 1.0;
  }

  Eigen::ColPivHouseholderQR<CMatrix> qr(bordered);
  qr.setThreshold(opts.rank_tolerance);
  if (qr.rank() < n) {
    Eigen::ColPivHouseholderQR<CMatrix> gq(gen.matrix / scale);
    gq.setThreshold(opts.rank_tolerance);
    const int null_dim = static_cast<int>(n - gq.rank());
    if (!opts.tie_break)
      throw SingularSystemError("steady state not unique: generator null space has dimension " +
                                    std::to_string(null_dim) + " but only " +
                                    std::to_string(gen.regions) + " trace constraints",
                                null_dim);
    // Start from the unpolarized ground mixture in every region.
    const int d = gen.dim;
    CMatrix mix = CMatrix::Zero(d, d);
    const int grounds = d == 5 ? 3 : 2;
    const int idx[3] = {0, 1, 4};
    for (int i = 0; i < grounds; ++i) mix(idx[i], idx[i]) = 1.0 / grounds;
    return unpack(gen, propagate_to_rest(gen.matrix, stacked_mixture(gen, mix), opts.rank_tolerance));
  }
  CVector x = qr.solve(rhs);
  // One refinement pass: the generator spans rates from gamma12 to gamma, which
  // costs a few digits in the first solve.
  x += qr.solve(rhs - bordered * x);
  return unpack(gen, x);
}

cplx pump_coherence(const CMatrix& rho, const LevelScheme& scheme, Polarization pol) {
  if (scheme.kind == SchemeKind::Lambda3) return rho(0, 2);
  const double ratio = scheme.g2 / scheme.g1;
  const int gx = pol == Polarization::H ? level::x : level::y;
  const int gy = pol == Polarization::H ? level::y : level::x;
  return rho(level::e3, gy) + ratio * rho(level::e4, gx);
}

double pump_absorption(const CMatrix& rho, const LevelScheme& scheme, const Drive& drive,
                       double kappa, double dz) {
  auto leg = [&](cplx coherence, cplx omega) {
    if (std::abs(omega) == 0.0) return 1.0;
    return std::min(1.0, std::exp(-2.0 * kappa * dz * (coherence / omega).imag()));
  };
  if (scheme.kind == SchemeKind::Lambda3) {
    const double p1 = std::norm(drive.omega1);
    const double p2 = std::norm(drive.omega2);
    if (p1 + p2 == 0.0) return 1.0;
    return (p1 * leg(rho(0, 2), drive.omega1) + p2 * leg(rho(1, 2), drive.omega2)) / (p1 + p2);
  }
  return leg(pump_coherence(rho, scheme, drive.polarization), drive.omega1);
}

}  // namespace sqz
