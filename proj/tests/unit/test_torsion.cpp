#include <doctest.h>

#include "g2flow/identity_suite.hpp"
#include "g2flow/lie_examples.hpp"
#include "g2flow/lie_g2.hpp"
#include "test_helpers.hpp"

using namespace g2;

namespace {

bool passed(const std::vector<CheckResult>& rs, const std::string& name) {
  for (const auto& r : rs)
    if (r.name == name) return r.passed;
  FAIL("missing check " << name);
  return false;
}

}  // namespace

TEST_CASE("torsion of the nilpotent example, exact") {
  const auto ex = nilpotent_example<Rational>(Rational(1));
  const auto j = lie_g2_jet(ex.alg, ex.phi);
  const auto& m = j.s.metric;
  CHECK(j.closed());
  CHECK((j.t + j.t.permuted(std::array<int, 2>{1, 0})).is_zero_tensor());
  CHECK(torsion_norm2(j.t, m) == Rational(1, 2));
  CHECK(j.curv.scalar == Rational(-1));
  CHECK(scalar_from_torsion(j.t, m) == j.curv.scalar);
  // Closed: only τ2 survives and T = −½ τ2.
  const auto f = torsion_forms(j.s, j.dphi, j.dpsi);
  CHECK(f.tau0 == 0);
  CHECK(f.tau1.is_zero_tensor());
  CHECK(f.tau3.is_zero_tensor());
  CHECK(j.t == f.tau2 * Rational(-1, 2));
  CHECK(split_2form(f.tau2, j.s).part7.is_zero_tensor());
}

TEST_CASE("nilpotent example passes the exact closed-torsion suite") {
  for (const Rational s : {Rational(1), Rational(2), Rational(1, 3)}) {
    const auto ex = nilpotent_example<Rational>(s);
    const auto rs = closed_torsion_suite<Rational>(ex.alg, ex.phi);
    CHECK(all_passed(rs));
    for (const auto& r : rs) CHECK(r.exact);
  }
}

TEST_CASE("closed family with standard 3-form, exact") {
  for (const auto& alg : closed_nilpotent_family()) {
    const auto rs = closed_torsion_suite<Rational>(alg, standard_phi<Rational>());
    CHECK(all_passed(rs));
  }
}

TEST_CASE("random closed structures satisfy the torsion identities") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 20; ++i) {
    const auto ex = random_closed_structure(rng);
    const auto rs = closed_torsion_suite<double>(ex.alg, ex.phi, 1e-8);
    for (const auto& r : rs) CHECK_MESSAGE(r.passed, r.name << " deviation " << r.deviation);
    const auto j = lie_g2_jet(ex.alg, ex.phi);
    CHECK(j.curv.scalar <= 0);
  }
}

TEST_CASE("torsion forms reconstruct the full torsion of a non-closed structure") {
  // so(3) on the first three generators: the standard 3-form is not closed.
  std::vector<BracketTerm<double>> so3{{0, 1, 2, 1.0}, {1, 2, 0, 1.0}, {2, 0, 1, 1.0}};
  const auto alg = LieAlgebra<double>::from_brackets(so3);
  std::mt19937_64 rng(3);
  const auto phi = pullback(standard_phi<double>(), random_frame(rng, 0.2));
  const auto j = lie_g2_jet(alg, phi);
  CHECK_FALSE(j.closed());
  CHECK_THROWS_AS(laplacian_phi(alg, j), NotClosed);
  const auto f = torsion_forms(j.s, j.dphi, j.dpsi);
  CHECK(f.dphi_residual < 1e-12);
  CHECK(f.dpsi_residual < 1e-12);
  CHECK((torsion_from_forms(f, j.s) - j.t).max_abs() < 1e-11);
  const auto rs = closed_torsion_suite<double>(alg, phi, 1e-8);
  CHECK_FALSE(passed(rs, "closed"));
}

TEST_CASE("corrupted 3-form fails the algebraic suite") {
  auto phi = standard_phi<Rational>();
  phi(0, 1, 2) = Rational(1001, 1000);
  phi(1, 2, 0) = phi(2, 0, 1) = Rational(1001, 1000);
  phi(1, 0, 2) = phi(0, 2, 1) = phi(2, 1, 0) = Rational(-1001, 1000);
  const auto rs = algebraic_suite_auto(phi, true);
  CHECK_FALSE(all_passed(rs));
  CHECK_FALSE(passed(rs, "phi_components"));
  CHECK(all_passed(algebraic_suite_auto(standard_phi<Rational>(), true)));
}
