#include <doctest.h>

#include "sqz/atomic_model.hpp"
#include "sqz/analytics.hpp"
#include "sqz/verify.hpp"

using namespace sqz;

namespace {

LevelScheme scheme_of(SchemeKind kind) {
  LevelScheme s;
  s.kind = kind;
  return s;
}

}  // namespace

TEST_CASE("Hamiltonian is Hermitian for every scheme") {
  for (auto kind : {SchemeKind::Lambda3, SchemeKind::DoubleLambda4, SchemeKind::FiveLevel}) {
    const LevelScheme s = scheme_of(kind);
    const Drive d = kind == SchemeKind::Lambda3 ? Drive::circular(1e7, 2e7) : Drive::linear({2e7, 1e6});
    const auto h = build_hamiltonian(s, d, {0.3, -0.1}, 1e8, 12.0);
    CHECK(h.h.rows() == s.dim());
    CHECK((h.h - h.h.adjoint()).norm() < 1e-6 * h.h.norm());
  }
}

TEST_CASE("dissipators conserve trace") {
  for (auto kind : {SchemeKind::Lambda3, SchemeKind::DoubleLambda4, SchemeKind::FiveLevel}) {
    const LevelScheme s = scheme_of(kind);
    const auto diss = build_dissipators(s, CellConfig{});
    const CMatrix rho = random_density_matrix(s.dim(), 11);
    CHECK(check_trace_preservation(diss, rho).pass);
  }
}

TEST_CASE("Liouvillian superoperator matches the matrix form") {
  const LevelScheme s = scheme_of(SchemeKind::FiveLevel);
  const auto diss = build_dissipators(s, CellConfig{});
  const auto h = build_hamiltonian(s, Drive::linear({3e7, 0.0}), 0.0, 0.0, 0.0);
  const CMatrix rho = random_density_matrix(s.dim(), 5);
  const cplx i(0.0, 1.0);
  const CMatrix direct = -i * (h.h * rho - rho * h.h) + diss.apply(rho);
  const CMatrix via = unvec(liouvillian(h.h, diss) * vec(rho), s.dim());
  CHECK((direct - via).norm() < 1e-9 * direct.norm());
  CHECK(std::abs(direct.trace()) < 1e-6 * direct.norm());
}

TEST_CASE("four-level branching folds the trap share into the ground states") {
  LevelScheme s = scheme_of(SchemeKind::DoubleLambda4);
  const Branching b = s.effective_branching();
  CHECK(b.trap == 0.0);
  CHECK(b.x + b.y == doctest::Approx(1.0));
}

TEST_CASE("Einstein subblock check catches a sign flip in the decay rates") {
  LambdaParams p;
  p.gamma0 = 0.0;
  p.gamma12 = 0.0;
  DissipatorPair diss = build_dissipators(p.scheme(), p.cell());
  const CMatrix rho = random_density_matrix(3, 1);
  REQUIRE(check_einstein(diss, rho, p.gamma).pass);
  REQUIRE(check_trace_preservation(diss, rho).pass);

  diss.gamma(2, 2) = -diss.gamma(2, 2);
  CHECK_FALSE(check_einstein(diss, rho, p.gamma).pass);
  CHECK_FALSE(check_trace_preservation(diss, rho).pass);
}
