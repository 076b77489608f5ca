#include <doctest.h>

#include "g2flow/g2algebra.hpp"
#include "g2flow/linalg.hpp"
#include "test_helpers.hpp"

using namespace g2;

TEST_CASE("standard 3-form components") {
  const auto phi = standard_phi<Rational>();
  CHECK(phi(0, 1, 2) == 1);
  CHECK(phi(1, 4, 6) == -1);
  CHECK(phi(4, 1, 6) == 1);
  CHECK(phi(0, 1, 3) == 0);
  int nonzero = 0;
  for (const auto& c : combinations(3)) nonzero += !is_zero(form_component(phi, c.data()));
  CHECK(nonzero == 7);
}

TEST_CASE("standard 4-form components and the Hodge dual") {
  const auto psi = standard_psi<Rational>();
  CHECK(psi(3, 4, 5, 6) == 1);
  CHECK(psi(0, 1, 3, 6) == -1);
  const auto display = form_from_terms<Rational>(4, {{{3, 4, 5, 6}, Rational(1)},
                                                     {{1, 2, 5, 6}, Rational(1)},
                                                     {{1, 2, 3, 4}, Rational(1)},
                                                     {{0, 2, 4, 6}, Rational(1)},
                                                     {{0, 2, 3, 5}, Rational(-1)},
                                                     {{0, 1, 4, 5}, Rational(-1)},
                                                     {{0, 1, 3, 6}, Rational(-1)}});
  CHECK(psi == display);
  const auto s = make_structure(standard_phi<Rational>());
  CHECK(s.metric.g == kronecker<Rational>());
  CHECK(s.vol_density == 1);
  CHECK(s.psi == display);
  CHECK(hodge_star(s.psi, s.metric) == s.phi);
}

TEST_CASE("contraction identities of the standard pair, exact") {
  const auto s = standard_structure<Rational>();
  const auto rep = check_contraction_identities(s);
  CHECK(rep.phi_phi_deviation == 0);
  CHECK(rep.psi_psi == 168);
  CHECK(inner_form(s.phi, s.phi, s.metric) == 7);
  CHECK(inner_form(s.psi, s.psi, s.metric) == 7);
  CHECK(top_wedge(s.phi, s.psi) == 7);
}

TEST_CASE("induced metric scales like the 2/3 power") {
  const auto phi = standard_phi<Rational>() * Rational(8);
  const auto m = metric_from_phi(phi);
  CHECK(m.g == kronecker<Rational>() * Rational(4));
  CHECK(sqrt_det(m) == 128);
}

TEST_CASE("pullback transforms the induced metric by congruence") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  Tensor<double> a(2);
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) a(i, j) = (i == j) + u(rng);
  const auto phi = pullback(standard_phi<double>(), a);
  const auto g = metric_from_phi(phi).g;
  const auto m = to_matrix(a);
  double dev = 0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      double s = 0;
      for (int k = 0; k < kDim; ++k) s += m(k, i) * m(k, j);
      dev = std::max(dev, std::abs(s - g(i, j)));
    }
  CHECK(dev < 1e-12);
  const auto st = make_structure(phi);
  CHECK((st.psi - pullback(standard_psi<double>(), a)).max_abs() < 1e-12);
  CHECK(check_contraction_identities(st).holds(1e-11));
}

TEST_CASE("non-positive 3-forms are rejected") {
  CHECK_THROWS_AS(metric_from_phi(standard_phi<Rational>() * Rational(-1)), NotPositive);
  CHECK_THROWS_AS(metric_from_phi(Tensor<double>::form(3)), NotPositive);
  const auto degenerate = form_from_terms<double>(3, {{{0, 1, 2}, 1.0}});
  CHECK_THROWS_AS(metric_from_phi(degenerate), NotPositive);
}

TEST_CASE("2-form splitting") {
  const auto s = standard_structure<double>();
  std::mt19937_64 rng(8);
  const auto x = test::random_vector(rng);
  const auto b7 = interior_product(x, s.phi);
  const auto sp7 = split_2form(b7, s);
  CHECK(sp7.part14.max_abs() < 1e-14);
  CHECK((star_phi_wedge(b7, s) - b7 * 2.0).max_abs() < 1e-13);
  const auto beta = test::random_form(2, rng);
  const auto sp = split_2form(beta, s);
  CHECK((sp.part7 + sp.part14 - beta).max_abs() < 1e-14);
  CHECK((star_phi_wedge(sp.part14, s) + sp.part14).max_abs() < 1e-13);
  CHECK((pi7_index_formula(beta, s) - sp.part7).max_abs() < 1e-13);
  CHECK(inner_form(sp.part7, sp.part14, s.metric) == doctest::Approx(0).scale(1));
}

TEST_CASE("projector matrices, exact") {
  const auto s = standard_structure<Rational>();
  const auto p7 = pi7_matrix(s), p14 = pi14_matrix(s);
  CHECK(rank(p7) == 7);
  CHECK(rank(p14) == 14);
  Matrix<Rational> sum(21, 21), prod(21, 21), sq(21, 21);
  for (int i = 0; i < 21; ++i)
    for (int j = 0; j < 21; ++j) {
      sum(i, j) = p7(i, j) + p14(i, j);
      for (int k = 0; k < 21; ++k) {
        prod(i, j) += p7(i, k) * p14(k, j);
        sq(i, j) += p7(i, k) * p7(k, j);
      }
    }
  bool ok_sum = true, ok_prod = true, ok_sq = true;
  for (int i = 0; i < 21; ++i)
    for (int j = 0; j < 21; ++j) {
      ok_sum = ok_sum && sum(i, j) == Rational(i == j);
      ok_prod = ok_prod && prod(i, j) == 0;
      ok_sq = ok_sq && sq(i, j) == p7(i, j);
    }
  CHECK(ok_sum);
  CHECK(ok_prod);
  CHECK(ok_sq);
}

TEST_CASE("3-form splitting and the maps i and j") {
  const auto s = standard_structure<double>();
  std::mt19937_64 rng(13);
  const auto h = test::random_symmetric(rng);
  const auto ih = i_phi(h, s);
  const auto sp = split_3form(ih, s);
  CHECK(sp.part7.max_abs() < 1e-13);
  CHECK((sp.h - h).max_abs() < 1e-12);
  const auto x = test::random_vector(rng);
  const auto xpsi = interior_product(x, s.psi);
  const auto spx = split_3form(xpsi, s);
  CHECK(spx.part1.max_abs() < 1e-13);
  CHECK(spx.part27.max_abs() < 1e-13);
  CHECK((spx.x - x).max_abs() < 1e-12);
  const auto eta = test::random_form(3, rng);
  const auto spe = split_3form(eta, s);
  CHECK((spe.part1 + spe.part7 + spe.part27 - eta).max_abs() < 1e-12);

  // i_φ(g) = 3φ and j_φ(φ) = 6g, exact.
  const auto se = standard_structure<Rational>();
  CHECK(i_phi(kronecker<Rational>(), se) == se.phi * Rational(3));
  CHECK(j_phi(se.phi, se) == kronecker<Rational>() * Rational(6));
  // j_φ(i_φ(h)) = 4h + 2 tr(h) g
  double tr = 0;
  for (int i = 0; i < kDim; ++i) tr += h(i, i);
  CHECK((j_phi(ih, s) - h * 4.0 - kronecker<double>() * (2 * tr)).max_abs() < 1e-12);
  CHECK(j_phi(xpsi, s).max_abs() < 1e-12);
}
