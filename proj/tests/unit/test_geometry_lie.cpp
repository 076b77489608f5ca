#include <doctest.h>

#include "g2flow/lie_examples.hpp"
#include "g2flow/lie_g2.hpp"
#include "test_helpers.hpp"

using namespace g2;

TEST_CASE("structure constants must satisfy Jacobi") {
  // [e1,e2] = e3, [e1,e3] = e1 fails Jacobi.
  std::vector<BracketTerm<Rational>> bad{{0, 1, 2, Rational(1)}, {0, 2, 0, Rational(1)}};
  CHECK_THROWS_AS(LieAlgebra<Rational>::from_brackets(bad), JacobiViolation);
  std::vector<BracketTerm<Rational>> diag{{1, 1, 2, Rational(1)}};
  CHECK_THROWS_AS(LieAlgebra<Rational>::from_brackets(diag), JacobiViolation);
  // so(3) on the first three generators satisfies it.
  std::vector<BracketTerm<Rational>> so3{
      {0, 1, 2, Rational(1)}, {1, 2, 0, Rational(1)}, {2, 0, 1, Rational(1)}};
  CHECK(LieAlgebra<Rational>::from_brackets(so3).jacobi_defect() == 0);
}

TEST_CASE("Maurer-Cartan equation on the nilpotent example") {
  const auto ex = nilpotent_example<Rational>(Rational(1));
  Tensor<Rational> e5 = Tensor<Rational>::form(1);
  e5(4) = 1;
  // [e2,e3] = e5 gives de^5 = −e^{23}.
  const auto d = ex.alg.exterior_derivative(e5);
  CHECK(d(1, 2) == -1);
  CHECK(d.max_abs() == 1);
  Tensor<Rational> e1 = Tensor<Rational>::form(1);
  e1(0) = 1;
  CHECK(ex.alg.exterior_derivative(e1).is_zero_tensor());
}

TEST_CASE("d squares to zero on every closed family member") {
  std::mt19937_64 rng(17);
  for (const auto& alg : closed_nilpotent_family())
    for (int k = 1; k <= 5; ++k) {
      Tensor<Rational> a = Tensor<Rational>::form(k);
      const auto& sets = combinations(k);
      for (std::size_t r = 0; r < sets.size(); ++r)
        set_form_component(a, sets[r].data(), Rational(static_cast<long>(rng() % 7) - 3));
      CHECK(alg.exterior_derivative(alg.exterior_derivative(a)).is_zero_tensor());
    }
}

TEST_CASE("Levi-Civita connection is torsion-free and metric") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const auto ex = random_closed_structure(rng);
    const auto m = metric_from_phi(ex.phi);
    const auto conn = levi_civita(ex.alg, m);
    const auto& c = ex.alg.structure_constants();
    double torsion = 0;
    for (int k = 0; k < kDim; ++k)
      for (int i = 0; i < kDim; ++i)
        for (int j = 0; j < kDim; ++j)
          torsion = std::max(torsion, std::abs(conn.gamma(k, i, j) - conn.gamma(k, j, i) - c(k, i, j)));
    CHECK(torsion < 1e-12);
    CHECK(covariant_derivative(m.g, conn).max_abs() < 1e-12);
  }
}

TEST_CASE("curvature symmetries on random closed structures") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    const auto ex = random_closed_structure(rng);
    const auto m = metric_from_phi(ex.phi);
    const auto cd = riemann(ex.alg, levi_civita(ex.alg, m), m);
    const auto& r = cd.rm;
    double dev = 0;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j)
        for (int k = 0; k < kDim; ++k)
          for (int l = 0; l < kDim; ++l) {
            dev = std::max(dev, std::abs(r(i, j, k, l) + r(j, i, k, l)));
            dev = std::max(dev, std::abs(r(i, j, k, l) + r(i, j, l, k)));
            dev = std::max(dev, std::abs(r(i, j, k, l) - r(k, l, i, j)));
            dev = std::max(dev, std::abs(r(i, j, k, l) + r(j, k, i, l) + r(k, i, j, l)));
          }
    CHECK(dev < 1e-11);
    CHECK((cd.ric - cd.ric.permuted(std::array<int, 2>{1, 0})).max_abs() < 1e-12);
    CHECK(cd.scalar <= 0);
  }
}

TEST_CASE("curvature of the nilpotent example, exact") {
  // Orthonormal two-step nilpotent metric: Ric diagonal with −½ per bracket
  // a generator enters and +½ per bracket landing on a central direction.
  const auto ex = nilpotent_example<Rational>(Rational(1));
  const auto j = lie_g2_jet(ex.alg, ex.phi);
  CHECK(j.s.metric.g == kronecker<Rational>());
  const Rational diag[7] = {Rational(-1, 2), Rational(-1, 2), Rational(-1), Rational(0),
                            Rational(1, 2), Rational(1, 2), Rational(0)};
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b) CHECK(j.curv.ric(a, b) == (a == b ? diag[a] : Rational(0)));
  CHECK(j.curv.scalar == -1);
  CHECK(norm2(j.curv.rm, j.s.metric) == Rational(13, 2));
  CHECK(j.closed());
}

TEST_CASE("frame change preserves the geometry") {
  std::mt19937_64 rng(31);
  const auto ex = nilpotent_example<double>(1.0);
  const auto a = random_frame(rng, 0.3);
  const auto alg2 = ex.alg.change_frame(a);
  const auto phi2 = pullback(ex.phi, a);
  const auto j1 = lie_g2_jet(ex.alg, ex.phi);
  const auto j2 = lie_g2_jet(alg2, phi2);
  CHECK(j2.curv.scalar == doctest::Approx(j1.curv.scalar).epsilon(1e-12));
  CHECK(norm2(j2.curv.rm, j2.s.metric) == doctest::Approx(norm2(j1.curv.rm, j1.s.metric)).epsilon(1e-12));
  CHECK(j2.dphi.max_abs() < 1e-13);
}
