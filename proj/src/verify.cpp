#include "sqz/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "sqz/analytics.hpp"
#include "sqz/errors.hpp"
#include "sqz/io.hpp"
#include "sqz/noise_spectra.hpp"
#include "sqz/parallel.hpp"
#include "sqz/scenarios.hpp"
#include "sqz/steady_state.hpp"

namespace sqz {

namespace {

CheckResult bounded_above(std::string name, double value, double limit, std::string detail) {
  return {std::move(name), value < limit, value, limit, std::move(detail)};
}

RunConfig uniform_array(int channels, double power_mW) {
  RunConfig c;
  c.array.emplace();
  c.array->count = channels;
  c.array->channel.power_mW = power_mW;
  return c;
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::string VerifyReport::text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e (limit %.3e)", c.value, c.limit);
    os << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << buf << "  " << c.detail << "\n";
  }
  os << (passed() ? "all properties hold" : "property failures") << " (seed " << seed << ")\n";
  return os.str();
}

json VerifyReport::to_json() const {
  json list = json::array();
  for (const auto& c : checks)
    list.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"limit", c.limit}, {"detail", c.detail}});
  return {{"seed", seed}, {"passed", passed()}, {"checks", list}};
}

CMatrix random_density_matrix(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CMatrix a(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) a(i, j) = cplx(u(rng), u(rng));
  CMatrix rho = a * a.adjoint() + 1e-3 * CMatrix::Identity(dim, dim);
  return rho / rho.trace().real();
}

CheckResult check_lambda_oracle(std::uint64_t seed, int draws) {
  // Weak drive and a ground decoherence comparable to the optical pumping rate,
  // where the closed forms are exact to the leading order they keep.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  double worst = 0.0;
  for (int k = 0; k < draws; ++k) {
    LambdaParams p;
    p.gamma = angular(6e6) * u(rng);
    const double om0 = 1e-5 * p.gamma;
    p.omega1 = om0 * u(rng);
    p.omega2 = om0 * u(rng);
    p.gamma12 = u(rng) * om0 * om0 / p.gamma;
    p.gamma0 = p.gamma * u(rng);
    p.excited_splitting = p.gamma * u(rng) * (k % 2 ? 1.0 : -1.0);
    const LambdaCoherences a = analytic_lambda3(p);

    const auto h = build_hamiltonian(p.scheme(), p.drive(), 0.0, 0.0, 0.0);
    std::vector<CMatrix> ls{liouvillian(h.h, build_dissipators(p.scheme(), p.cell()))};
    ExchangeRates rates;
    rates.to_dark = {0.0};
    rates.from_dark = {0.0};
    AtomNumbers atoms;
    atoms.channel = {1.0};
    const auto st = steady_state(assemble_generator(ls, dark_liouvillian(p.scheme(), p.cell()), rates, atoms));
    const CMatrix& rho = st.channels[0];
    worst = std::max({worst, std::abs(rho(0, 1) - a.rho12) / std::abs(a.rho12),
                      std::abs(rho(0, 2) - a.rho13) / std::abs(a.rho13),
                      std::abs(rho(1, 2) - a.rho23) / std::abs(a.rho23)});
  }
  return bounded_above("lambda-oracle", worst, 1e-8,
                       "worst relative coherence error, solver vs closed form, " + std::to_string(draws) + " draws");
}

CheckResult check_einstein(const DissipatorPair& diss, const CMatrix& rho, double gamma) {
  const int d = static_cast<int>(rho.rows());
  if (d != 3) throw DimensionError("Einstein subblock check expects a three-level Lambda system");
  const CMatrix two_d = einstein_diffusion(dissipator_superop(diss), rho);
  auto idx = [d](int m, int n) { return m + d * n; };
  const double r33 = rho(2, 2).real();

  // Population subblock against the rates of a pure optical decay.
  double err = std::abs(two_d(idx(2, 2), idx(2, 2)) - 2.0 * gamma * r33);
  err = std::max(err, std::abs(two_d(idx(0, 0), idx(0, 0)) - gamma * r33));
  err = std::max(err, std::abs(two_d(idx(1, 1), idx(1, 1)) - gamma * r33));
  const double rel = err / (gamma * r33);

  // Normally ordered matrix <f_mu f_nu^dagger> must be a covariance.
  const int block = d * d;
  CMatrix normal(block, block);
  for (int nu = 0; nu < block; ++nu)
    for (int mu = 0; mu < block; ++mu) normal(mu, nu) = two_d(mu, (nu / d) + d * (nu % d));
  const double scale = std::max(normal.norm(), 1e-300);
  const double asym = (normal - normal.adjoint()).norm() / scale;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (normal + normal.adjoint()));
  const double neg = std::max(0.0, -es.eigenvalues().minCoeff()) / scale;

  const double worst = std::max({rel, asym, neg});
  std::ostringstream detail;
  detail << "population subblock rel. error " << exact(rel) << ", non-Hermitian part " << exact(asym)
         << ", negative eigenvalue " << exact(neg);
  return bounded_above("einstein-subblock", worst, 1e-10, detail.str());
}

CheckResult check_trace_preservation(const DissipatorPair& diss, const CMatrix& rho) {
  const int d = static_cast<int>(rho.rows());
  double scale = 0.0, err = 0.0;
  for (int k = 0; k < d; ++k) {
    scale = std::max(scale, std::abs(diss.gamma(k, k)));
    err = std::max(err, std::abs(diss.feed.col(k).sum() - diss.gamma(k, k)));
  }
  err = std::max(err, std::abs(diss.apply(rho).trace()));
  const double rel = err / std::max(scale, 1e-300);
  return bounded_above("trace-preservation", rel, 1e-12, "feed out of each level minus its decay, relative to the largest rate");
}

CheckResult check_heisenberg_scan(int threads) {
  const std::vector<double> powers{0.5, 2.0, 5.0};
  const std::vector<int> sizes{1, 30};
  const std::vector<double> freqs_kHz{60.0, 160.0, 1000.0};
  std::vector<double> lowest(powers.size() * sizes.size(), 0.0);
  parallel_for(lowest.size(), threads, [&](std::size_t i) {
    RunConfig c = uniform_array(sizes[i % sizes.size()], powers[i / sizes.size()]);
    c.numerics.doppler_points = 32;
    c.detection.frequencies_kHz = freqs_kHz;
    const NoiseSpectrum s = evaluate_channel(c, 0);
    double lo = 1e300;
    for (const auto& p : s.points) lo = std::min(lo, p.s_min_db + p.s_max_db);
    lowest[i] = lo;
  });
  const double worst = *std::min_element(lowest.begin(), lowest.end());
  CheckResult r{"heisenberg-scan", worst >= -1e-6, worst, -1e-6,
                "lowest S_min + S_max in dB over 3 powers x 2 sizes x 3 frequencies (must stay above the limit)"};
  return r;
}

CheckResult check_doppler_convergence(int threads) {
  std::vector<double> s(2);
  parallel_for(2, threads, [&](std::size_t i) {
    RunConfig c = uniform_array(1, 1.0);
    c.numerics.doppler_points *= i == 0 ? 1 : 2;
    s[i] = evaluate_channel(c, 0).points.at(0).s_min_db;
  });
  return bounded_above("doppler-convergence", std::abs(s[1] - s[0]), 0.01,
                       "|S_min(2n) - S_min(n)| in dB at default settings, n = 64 classes");
}

VerifyReport run_verify(const VerifyOptions& opts) {
  VerifyReport r;
  r.seed = opts.seed;
  r.checks.push_back(check_lambda_oracle(opts.seed, opts.oracle_draws));

  LambdaParams p;
  p.gamma0 = 0.0;
  p.gamma12 = 0.0;
  const DissipatorPair diss = build_dissipators(p.scheme(), p.cell());
  const CMatrix rho = random_density_matrix(3, opts.seed);
  r.checks.push_back(check_einstein(diss, rho, p.gamma));
  r.checks.push_back(check_trace_preservation(build_dissipators(p.scheme(), LambdaParams{}.cell()), rho));

  r.checks.push_back(check_heisenberg_scan(opts.threads));
  r.checks.push_back(check_doppler_convergence(opts.threads));
  return r;
}

}  // namespace sqz
