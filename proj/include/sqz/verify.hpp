#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqz/atomic_model.hpp"
#include "sqz/config.hpp"

namespace sqz {

/// One property of the self-check suite. `value` is the measured quantity and
/// `limit` the bound it is held to; `detail` says which side is the good one.
struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  int threads = 1;
  int oracle_draws = 100;
};

struct VerifyReport {
  std::uint64_t seed = 1;
  std::vector<CheckResult> checks;

  bool passed() const;
  /// One "PASS name value (limit) detail" line per check.
  std::string text() const;
  json to_json() const;
};

/// Weak-drive Lambda system: general Liouvillian solver against the closed forms.
/// Value is the worst relative coherence error over `draws` random parameter sets.
CheckResult check_lambda_oracle(std::uint64_t seed, int draws = 100);

/// Einstein-relation subblock of a three-level Lambda dissipator with only optical
/// decay at rate `gamma`: 2D for the excited population must equal 2 gamma rho_33,
/// for each ground population gamma rho_33, and the normally ordered matrix must be
/// Hermitian and positive semidefinite.
CheckResult check_einstein(const DissipatorPair& diss, const CMatrix& rho, double gamma);

/// Every relaxation channel returns what it removes: sum_m feed(m, k) = Gamma_kk,
/// and the dissipator is traceless on `rho`.
CheckResult check_trace_preservation(const DissipatorPair& diss, const CMatrix& rho);

/// S_min + S_max >= 0 dB over a small power x array size x frequency grid.
CheckResult check_heisenberg_scan(int threads = 1);

/// Doubling the Doppler classes at default settings moves S_min by less than 0.01 dB.
CheckResult check_doppler_convergence(int threads = 1);

/// Random density matrix of dimension `dim` (Hermitian, unit trace, full rank).
CMatrix random_density_matrix(int dim, std::uint64_t seed);

/// The whole suite. Same seed, same report.
VerifyReport run_verify(const VerifyOptions& opts = {});

}  // namespace sqz
