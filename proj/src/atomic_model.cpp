#include "sqz/atomic_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "sqz/errors.hpp"

namespace sqz {

const char* to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Lambda3: return "lambda3";
    case SchemeKind::DoubleLambda4: return "double-lambda4";
    case SchemeKind::FiveLevel: return "five-level";
  }
  return "unknown";
}

SchemeKind scheme_kind_from_string(const std::string& name) {
  if (name == "lambda3") return SchemeKind::Lambda3;
  if (name == "double-lambda4") return SchemeKind::DoubleLambda4;
  if (name == "five-level") return SchemeKind::FiveLevel;
  throw DomainError("unknown level scheme '" + name + "'");
}

int LevelScheme::dim() const {
  switch (kind) {
    case SchemeKind::Lambda3: return 3;
    case SchemeKind::DoubleLambda4: return 4;
    case SchemeKind::FiveLevel: return 5;
  }
  throw DomainError("unknown scheme kind");
}

Branching LevelScheme::effective_branching() const {
  if (kind != SchemeKind::DoubleLambda4) return branching;
  const double ground = branching.x + branching.y;
  return {branching.x / ground, branching.y / ground, 0.0};
}

void LevelScheme::validate() const {
  if (!(gamma > 0.0)) throw DomainError("excited decay rate must be positive");
  if (!(excited_splitting != 0.0)) throw DomainError("excited splitting must be nonzero");
  const auto& b = branching;
  if (b.x < 0.0 || b.y < 0.0 || b.trap < 0.0) throw DomainError("branching fractions must be >= 0");
  if (std::abs(b.x + b.y + b.trap - 1.0) > 1e-12)
    throw DomainError("branching fractions must sum to one");
  if (kind == SchemeKind::DoubleLambda4 && !(b.x + b.y > 0.0))
    throw DomainError("four-level scheme needs nonzero ground branching");
  if (!(g1 > 0.0) || !(g2 >= 0.0)) throw DomainError("coupling strengths must be positive");
  (void)dim();
}

Drive Drive::linear(cplx rabi, Polarization pol) { return Drive{rabi, cplx{0.0, 0.0}, pol}; }

Drive Drive::circular(double omega_plus, double omega_minus) {
  return Drive{cplx{omega_plus, 0.0}, cplx{omega_minus, 0.0}, Polarization::H};
}

namespace {

HamiltonianMatrix lambda3_hamiltonian(const LevelScheme& s, const Drive& drive, double detuning) {
  const int d = 3;
  HamiltonianMatrix out{CMatrix::Zero(d, d), CMatrix::Zero(d, d), CMatrix::Zero(d, d)};
  const double stark1 = std::norm(drive.omega1) / s.excited_splitting;
  const double stark2 = std::norm(drive.omega2) / s.excited_splitting;
  // Sign convention fixed so that -i[H, rho] reproduces the Lambda master equation
  // with d rho12/dt containing +i(Delta1 - Delta2) rho12.
  out.h(0, 0) = -stark1;
  out.h(1, 1) = -stark2;
  out.h(2, 2) = detuning;
  out.h(0, 2) = drive.omega1;
  out.h(2, 0) = std::conj(drive.omega1);
  out.h(1, 2) = drive.omega2;
  out.h(2, 1) = std::conj(drive.omega2);
  return out;
}

HamiltonianMatrix linear_hamiltonian(const LevelScheme& s, const Drive& drive, cplx a_y,
                                     double detuning) {
  using namespace level;
  const int d = s.dim();
  HamiltonianMatrix out{CMatrix::Zero(d, d), CMatrix::Zero(d, d), CMatrix::Zero(d, d)};
  const double ratio = s.g2 / s.g1;
  const cplx omega = drive.omega1;

  out.h(e3, e3) = detuning;
  out.h(e4, e4) = detuning + s.excited_splitting;
  if (d == 5) out.h(trap, trap) = -s.ground_splitting;

  // Pump: |y>-|3> and |x>-|4>.
  out.h(e3, y) = -omega;
  out.h(y, e3) = -std::conj(omega);
  out.h(e4, x) = -ratio * omega;
  out.h(x, e4) = -ratio * std::conj(omega);

  // Orthogonal quantum field a_y: absorption a_y |3><x| and a_y |4><y|.
  out.field(e3, x) = -s.g1;
  out.field(e4, y) = -s.g2;
  out.field_dag = out.field.adjoint();

  out.h += a_y * out.field + std::conj(a_y) * out.field_dag;

  if (drive.polarization == Polarization::V) {
    Eigen::PermutationMatrix<Eigen::Dynamic> swap(d);
    swap.setIdentity();
    swap.indices()[x] = y;
    swap.indices()[y] = x;
    out.h = swap * out.h * swap.transpose();
    out.field = swap * out.field * swap.transpose();
    out.field_dag = swap * out.field_dag * swap.transpose();
  }
  return out;
}

}  // namespace

HamiltonianMatrix build_hamiltonian(const LevelScheme& scheme, const Drive& drive, cplx a_y,
                                    double detuning, double velocity, const PhysConsts& pc) {
  const double shifted = detuning - pc.wavenumber() * velocity;
  switch (scheme.kind) {
    case SchemeKind::Lambda3: return lambda3_hamiltonian(scheme, drive, shifted);
    case SchemeKind::DoubleLambda4:
    case SchemeKind::FiveLevel: return linear_hamiltonian(scheme, drive, a_y, shifted);
  }
  throw DomainError("unknown scheme kind");
}

CMatrix DissipatorPair::repopulation(const CMatrix& rho) const {
  const Eigen::Index d = rho.rows();
  const Eigen::VectorXd pops = rho.diagonal().real();
  const Eigen::VectorXd in = feed * pops;
  CMatrix out = CMatrix::Zero(d, d);
  for (Eigen::Index m = 0; m < d; ++m) out(m, m) = in(m);
  return out;
}

CMatrix DissipatorPair::apply(const CMatrix& rho) const {
  CMatrix out = -(gamma.cast<cplx>().cwiseProduct(rho));
  out += repopulation(rho);
  return out;
}

DissipatorPair build_dissipators(const LevelScheme& scheme, const CellConfig& cell) {
  const int d = scheme.dim();
  const double g = scheme.gamma;
  const double g0 = cell.gamma0;
  const double g12 = cell.gamma12;
  DissipatorPair out{RMatrix::Zero(d, d), RMatrix::Zero(d, d)};

  if (scheme.kind == SchemeKind::Lambda3) {
    out.gamma << g0, g12, g,
                 g12, g0, g,
                 g, g, 2.0 * g;
    out.feed(0, 1) = g0;
    out.feed(0, 2) = g;
    out.feed(1, 0) = g0;
    out.feed(1, 2) = g;
    return out;
  }

  using namespace level;
  const bool five = scheme.kind == SchemeKind::FiveLevel;
  std::vector<int> ground{x, y};
  if (five) ground.push_back(trap);
  const std::vector<int> excited{e3, e4};

  for (int a : ground)
    for (int b : ground) out.gamma(a, b) = (a == b) ? g0 : g12;
  for (int a : ground)
    for (int e : excited) out.gamma(a, e) = out.gamma(e, a) = 0.5 * g;
  for (int e : excited)
    for (int f : excited) out.gamma(e, f) = g;

  const Branching b = scheme.effective_branching();
  const double mix = five ? 0.5 * g0 : g0;
  for (int a : ground)
    for (int c : ground)
      if (a != c) out.feed(a, c) = mix;
  for (int e : excited) {
    out.feed(x, e) = b.x * g;
    out.feed(y, e) = b.y * g;
    if (five) out.feed(trap, e) = b.trap * g;
  }
  return out;
}

CMatrix ground_mixture(const LevelScheme& scheme) {
  const int d = scheme.dim();
  CMatrix out = CMatrix::Zero(d, d);
  if (scheme.kind == SchemeKind::FiveLevel) {
    out(level::x, level::x) = out(level::y, level::y) = out(level::trap, level::trap) = 1.0 / 3.0;
  } else {
    out(0, 0) = out(1, 1) = 0.5;
  }
  return out;
}

CVector vec(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix unvec(const CVector& v, int dim) {
  return Eigen::Map<const CMatrix>(v.data(), dim, dim);
}

CMatrix commutator_superop(const CMatrix& h) {
  const Eigen::Index d = h.rows();
  const cplx I(0.0, 1.0);
  CMatrix out = CMatrix::Zero(d * d, d * d);
  // vec(H rho) = (1 (x) H) vec(rho), vec(rho H) = (H^T (x) 1) vec(rho).
  for (Eigen::Index n = 0; n < d; ++n)
    for (Eigen::Index m = 0; m < d; ++m) {
      const Eigen::Index row = m + d * n;
      for (Eigen::Index k = 0; k < d; ++k) {
        out(row, k + d * n) += -I * h(m, k);
        out(row, m + d * k) += I * h(k, n);
      }
    }
  return out;
}

CMatrix dissipator_superop(const DissipatorPair& diss) {
  const Eigen::Index d = diss.gamma.rows();
  CMatrix out = CMatrix::Zero(d * d, d * d);
  for (Eigen::Index n = 0; n < d; ++n)
    for (Eigen::Index m = 0; m < d; ++m) out(m + d * n, m + d * n) = -diss.gamma(m, n);
  for (Eigen::Index m = 0; m < d; ++m)
    for (Eigen::Index k = 0; k < d; ++k) out(m + d * m, k + d * k) += diss.feed(m, k);
  return out;
}

CMatrix liouvillian(const CMatrix& h, const DissipatorPair& diss) {
  return commutator_superop(h) + dissipator_superop(diss);
}

std::vector<VelocityClass> doppler_grid(double doppler_width, int n, const PhysConsts& pc) {
  if (n < 1) throw DomainError("Doppler grid needs at least one class");
  if (n > 512) throw ResourceError("Doppler grid limited to 512 classes, got " + std::to_string(n));
  if (!(doppler_width > 0.0)) throw DomainError("Doppler width must be positive");
  if (n == 1) return {VelocityClass{0.0, 1.0}};

  // Golub-Welsch for the physicists' Hermite weight exp(-x^2).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(0.5 * i);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  Eigen::VectorXd nodes = eig.eigenvalues();
  Eigen::VectorXd weights = eig.eigenvectors().row(0).array().square().transpose();

  // Symmetrize pairs so that w(v) == w(-v) exactly.
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double node = 0.5 * (nodes(j) - nodes(i));
    const double w = 0.5 * (weights(i) + weights(j));
    nodes(i) = -node;
    nodes(j) = node;
    weights(i) = weights(j) = w;
  }
  if (n % 2 == 1) nodes(n / 2) = 0.0;
  weights /= weights.sum();

  const double sigma = doppler_width / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  const double scale = std::sqrt(2.0) * sigma / pc.wavenumber();
  std::vector<VelocityClass> out(n);
  for (int i = 0; i < n; ++i) out[i] = {scale * nodes(i), weights(i)};
  return out;
}

}  // namespace sqz
