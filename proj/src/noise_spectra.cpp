#include "sqz/noise_spectra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

#include "sqz/errors.hpp"

namespace sqz {

namespace {

const cplx kI(0.0, 1.0);

// Hermitizes a covariance-type matrix and clips round-off negativity. Larger
// violations mean the relaxation model is not positive enough to be trusted.
CMatrix clip_psd(const CMatrix& m, const char* what) {
  CMatrix h = 0.5 * (m + m.adjoint());
  const double norm = h.cwiseAbs().maxCoeff();
  if (norm == 0.0) return h;
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  const double lowest = eig.eigenvalues().minCoeff();
  if (lowest >= -1e-10 * norm) return h;
  if (lowest < -1e-4 * norm) {
    std::ostringstream os;
    os << what << " has eigenvalue " << lowest << " against norm " << norm;
    throw ModelConsistencyError(os.str());
  }
  Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * vals.cast<cplx>().asDiagonal() * eig.eigenvectors().adjoint();
}

CMatrix channel_dissipative(const ArrayContext& ctx, double k_out, const CMatrix& dark) {
  const int d = ctx.dim();
  const Eigen::Index block = static_cast<Eigen::Index>(d) * d;
  CMatrix s = dissipator_superop(ctx.dissipators);
  s += k_out * (vec(dark) * vec(CMatrix::Identity(d, d)).transpose());
  s -= k_out * CMatrix::Identity(block, block);
  return s;
}

FluctuationSystem linearize_with(const ArrayContext& ctx, const ChannelSpec& ch, cplx rabi,
                                 const CMatrix& rho, const CMatrix& dissipative, double k_out,
                                 double velocity, bool check_stability) {
  const int d = ctx.dim();
  const Eigen::Index block = static_cast<Eigen::Index>(d) * d;
  const auto h = build_hamiltonian(ctx.scheme, ctx.drive_for(ch, rabi), 0.0, ch.detuning, velocity,
                                   *ctx.consts);
  FluctuationSystem fs;
  fs.drift = liouvillian(h.h, ctx.dissipators) - k_out * CMatrix::Identity(block, block);
  if (check_stability) {
    Eigen::ComplexEigenSolver<CMatrix> eig(fs.drift, false);
    const double scale = fs.drift.cwiseAbs().maxCoeff();
    const double worst = eig.eigenvalues().real().maxCoeff();
    if (worst > 1e-6 * scale) {
      std::ostringstream os;
      os << "unstable drift (max Re lambda = " << worst << ") at |Omega| = " << std::abs(rabi)
         << " rad/s, v = " << velocity << " m/s";
      throw StabilityError(os.str());
    }
  }
  fs.couple_a = vec(CMatrix(-kI * (h.field * rho - rho * h.field)));
  fs.couple_adag = vec(CMatrix(-kI * (h.field_dag * rho - rho * h.field_dag)));
  fs.source_a.resize(block);
  fs.source_adag.resize(block);
  for (int n = 0; n < d; ++n)
    for (int m = 0; m < d; ++m) {
      fs.source_a(m + d * n) = -kI * std::conj(h.field(m, n));
      fs.source_adag(m + d * n) = kI * h.field(n, m);
    }

  const CMatrix two_d = einstein_diffusion(dissipative, rho);
  CMatrix normal(block, block), anti(block, block);
  for (int nu = 0; nu < block; ++nu) {
    const int nu_t = (nu / d) + d * (nu % d);
    for (int mu = 0; mu < block; ++mu) {
      normal(mu, nu) = two_d(mu, nu_t);
      anti(mu, nu) = two_d(nu_t, mu);
    }
  }
  fs.normal = clip_psd(normal, "normally ordered diffusion");
  fs.antinormal = clip_psd(anti, "antinormally ordered diffusion");
  return fs;
}

double k_out_of(const ArrayContext& ctx, const ChannelSpec& ch) {
  return mean_speed(ctx.cell.temperature, *ctx.consts) / (2.0 * ch.radius);
}

}  // namespace

CMatrix einstein_diffusion(const CMatrix& dissipative, const CMatrix& rho) {
  const int d = static_cast<int>(rho.rows());
  const int block = d * d;
  if (dissipative.rows() != block) throw DimensionError("superoperator size does not match rho");

  // Heisenberg-picture image of each |a><b|: vec(B^T) = row (b + d a) of S.
  std::vector<CMatrix> rb(block), br(block);
  CVector trace_rb(block);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      const CVector row = dissipative.row(b + d * a).transpose();
      const CMatrix adj = unvec(row, d).transpose();
      rb[a + d * b] = rho * adj;
      br[a + d * b] = adj * rho;
      trace_rb(a + d * b) = rb[a + d * b].trace();
    }

  CMatrix out(block, block);
  for (int nu = 0; nu < block; ++nu) {
    const int mp = nu % d, np = nu / d;
    const CMatrix& br_nu = br[np + d * mp];  // B(|n'><m'|) rho
    for (int mu = 0; mu < block; ++mu) {
      const int m = mu % d, n = mu / d;
      cplx v = (m == np) ? trace_rb(n + d * mp) : cplx(0.0, 0.0);
      v -= rb[n + d * m](mp, np);
      v -= br_nu(m, n);
      out(mu, nu) = v;
    }
  }
  return out;
}

FluctuationSystem linearize(const ArrayContext& ctx, const ChannelSpec& ch, cplx rabi,
                            const CMatrix& rho, const CMatrix& dark, double velocity,
                            bool check_stability) {
  const double k_out = k_out_of(ctx, ch);
  return linearize_with(ctx, ch, rabi, rho, channel_dissipative(ctx, k_out, dark), k_out, velocity,
                        check_stability);
}

SliceCoupling slice_coupling(std::span<const FluctuationSystem> classes,
                             std::span<const VelocityClass> weights, double kappa, double omega) {
  if (classes.size() != weights.size()) throw DimensionError("one weight per velocity class");
  SliceCoupling out;
  if (kappa == 0.0) return out;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const auto& fs = classes[k];
    const Eigen::Index block = fs.drift.rows();
    const CMatrix kt =
        (-kI * omega * CMatrix::Identity(block, block) - fs.drift).transpose();
    Eigen::PartialPivLU<CMatrix> lu(kt);
    if (!(lu.rcond() > 1e-14)) {
      std::ostringstream os;
      os << "(i omega - M) singular at omega = " << omega << " rad/s";
      throw ResonanceError(os.str());
    }
    CMatrix rhs(block, 2);
    rhs.col(0) = fs.source_a.transpose();
    rhs.col(1) = fs.source_adag.transpose();
    const CMatrix u = lu.solve(rhs).transpose();  // rows: s R, sbar R
    const double w = kappa * weights[k].weight;
    Mat2c a;
    a.col(0) = u * fs.couple_a;
    a.col(1) = u * fs.couple_adag;
    out.drift += w * a;
    out.normal += w * (u * fs.normal * u.adjoint());
    out.antinormal += w * (u * fs.antinormal * u.adjoint());
  }
  return out;
}

SliceTransfer slice_transfer(const SliceCoupling& c, double dz) {
  SliceTransfer out;
  auto van_loan = [&](const Mat2c& w, Mat2c& transfer, Mat2c& noise) {
    Eigen::Matrix4cd g = Eigen::Matrix4cd::Zero();
    g.topLeftCorner<2, 2>() = -c.drift * dz;
    g.topRightCorner<2, 2>() = w * dz;
    g.bottomRightCorner<2, 2>() = c.drift.adjoint() * dz;
    const Eigen::Matrix4cd e = g.exp();
    transfer = e.bottomRightCorner<2, 2>().adjoint();
    noise = transfer * e.topRightCorner<2, 2>();
  };
  van_loan(c.normal, out.transfer, out.normal);
  Mat2c unused;
  van_loan(c.antinormal, unused, out.antinormal);
  out.normal = 0.5 * (out.normal + out.normal.adjoint()).eval();
  out.antinormal = 0.5 * (out.antinormal + out.antinormal.adjoint()).eval();
  return out;
}

SliceTransfer propagate_field(std::span<const SliceCoupling> slices, double dz) {
  if (slices.empty()) throw DomainError("propagate_field needs at least one slice");
  SliceTransfer total;
  for (const auto& c : slices) {
    const SliceTransfer s = slice_transfer(c, dz);
    total.transfer = (s.transfer * total.transfer).eval();
    total.normal = (s.transfer * total.normal * s.transfer.adjoint() + s.normal).eval();
    total.antinormal = (s.transfer * total.antinormal * s.transfer.adjoint() + s.antinormal).eval();
  }
  return total;
}

Mat2c output_covariance(const SliceTransfer& t) {
  Mat2c vac_n = Mat2c::Zero(), vac_a = Mat2c::Zero();
  vac_n(0, 0) = 1.0;
  vac_a(1, 1) = 1.0;
  const Mat2c n = t.transfer * vac_n * t.transfer.adjoint() + t.normal;
  const Mat2c a = t.transfer * vac_a * t.transfer.adjoint() + t.antinormal;
  return 0.5 * (n + a);
}

Mat2c output_commutator(const SliceTransfer& t) {
  Mat2c vac = Mat2c::Zero();
  vac(0, 0) = 1.0;
  vac(1, 1) = -1.0;
  return t.transfer * vac * t.transfer.adjoint() + t.normal - t.antinormal;
}

Mat2 quadrature_covariance(const Mat2c& sym) {
  Eigen::RowVector2cd ux(0.5, 0.5);
  Eigen::RowVector2cd up(-0.5 * kI, 0.5 * kI);
  Mat2 c;
  c(0, 0) = (ux * sym * ux.adjoint())(0, 0).real();
  c(1, 1) = (up * sym * up.adjoint())(0, 0).real();
  c(0, 1) = c(1, 0) = (ux * sym * up.adjoint())(0, 0).real();
  return c;
}

double quadrature_noise_db(const Mat2& cov, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double v = cov(0, 0) * c * c + cov(1, 1) * s * s + cov(0, 1) * std::sin(2.0 * theta);
  return 10.0 * std::log10(v / 0.25);
}

SpectrumPoint analyze_covariance(const Mat2& cov, double omega) {
  SpectrumPoint p;
  p.omega = omega;
  p.covariance = cov;
  const double mean = 0.5 * (cov(0, 0) + cov(1, 1));
  const double b = 0.5 * (cov(0, 0) - cov(1, 1));
  const double c = cov(0, 1);
  const double radius = std::hypot(b, c);
  const double s_min = mean - radius;
  const double s_max = mean + radius;
  if (!(s_min > 0.0)) {
    std::ostringstream os;
    os << "quadrature covariance is not positive definite (S_min = " << s_min << ")";
    throw ModelConsistencyError(os.str());
  }
  p.s_min_db = 10.0 * std::log10(s_min / 0.25);
  p.s_max_db = 10.0 * std::log10(s_max / 0.25);
  if (radius <= 1e-13 * mean) {
    p.theta = 0.0;
    p.degenerate = true;
  } else {
    double theta = 0.5 * std::atan2(-c, -b);
    if (theta <= -kPi / 2.0) theta += kPi;
    if (theta > kPi / 2.0) theta -= kPi;
    p.theta = theta;
  }
  return p;
}

NoiseSpectrum quadrature_spectrum(std::span<const SliceTransfer> transfers, std::span<const double> omegas,
                                  std::span<const double> lo_phases) {
  if (transfers.size() != omegas.size()) throw DimensionError("one transfer per frequency");
  NoiseSpectrum out;
  for (std::size_t i = 0; i < transfers.size(); ++i) {
    Mat2c sym = output_covariance(transfers[i]);
    if (!lo_phases.empty()) {
      const double phi = lo_phases[i];
      Mat2c r = Mat2c::Zero();
      r(0, 0) = std::exp(-kI * phi);
      r(1, 1) = std::exp(kI * phi);
      sym = (r * sym * r.adjoint()).eval();
    }
    out.points.push_back(analyze_covariance(quadrature_covariance(sym), omegas[i]));
  }
  return out;
}

Mat2 rotate_covariance(const Mat2& cov, double phi) {
  Mat2 r;
  r << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
  return r * cov * r.transpose();
}

std::vector<double> purity_product(const NoiseSpectrum& spectrum) {
  std::vector<double> out;
  out.reserve(spectrum.points.size());
  for (const auto& p : spectrum.points) out.push_back(0.5 * (p.s_min_db + p.s_max_db));
  return out;
}

NoiseSpectrum combine_channels(std::span<const NoiseSpectrum> spectra, std::span<const double> phis) {
  if (spectra.empty()) throw DomainError("combine_channels needs at least one spectrum");
  if (phis.size() != spectra.size()) throw DimensionError("one rotation angle per spectrum");
  const std::size_t n_points = spectra.front().points.size();
  for (const auto& s : spectra)
    if (s.points.size() != n_points) throw DimensionError("spectra must share a frequency grid");
  NoiseSpectrum out;
  for (std::size_t i = 0; i < n_points; ++i) {
    Mat2 c = Mat2::Zero();
    for (std::size_t j = 0; j < spectra.size(); ++j)
      c += rotate_covariance(spectra[j].points[i].covariance, phis[j]);
    c /= static_cast<double>(spectra.size());
    out.points.push_back(analyze_covariance(c, spectra.front().points[i].omega));
  }
  return out;
}

NoiseSpectrum channel_spectrum(const ArrayContext& ctx, const ChannelSpec& ch,
                               const ChannelResponse& response, const CMatrix& dark,
                               std::span<const double> omegas, const SpectrumOptions& opts) {
  const std::size_t n_slices = response.slices.size();
  std::vector<SliceTransfer> transfers(omegas.size());
  if (ctx.kappa > 0.0) {
    const double k_out = k_out_of(ctx, ch);
    const CMatrix dissipative = channel_dissipative(ctx, k_out, dark);
    std::vector<std::vector<FluctuationSystem>> systems(n_slices);
    for (std::size_t s = 0; s < n_slices; ++s) {
      const auto& slice = response.slices[s];
      for (std::size_t k = 0; k < ctx.classes.size(); ++k)
        systems[s].push_back(linearize_with(ctx, ch, slice.rabi, slice.rho[k], dissipative, k_out,
                                            ctx.classes[k].velocity, opts.check_stability));
    }
    std::vector<SliceCoupling> couplings(n_slices);
    for (std::size_t i = 0; i < omegas.size(); ++i) {
      for (std::size_t s = 0; s < n_slices; ++s)
        couplings[s] = slice_coupling(systems[s], ctx.classes, ctx.kappa, omegas[i]);
      transfers[i] = propagate_field(couplings, ctx.slice_length);
    }
  }
  std::vector<double> phases;
  if (opts.lock_to_pump && std::abs(response.output_rabi) > 0.0)
    phases.assign(omegas.size(), std::arg(response.output_rabi));
  return quadrature_spectrum(transfers, omegas, phases);
}

NoiseSpectrum channel_spectrum(const ArraySolution& sol, int channel, std::span<const double> omegas,
                               const SpectrumOptions& opts) {
  return channel_spectrum(sol.context, sol.context.channels.at(channel), sol.channel(channel), sol.dark,
                          omegas, opts);
}

}  // namespace sqz
