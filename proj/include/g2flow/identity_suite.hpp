#pragma once

// Named pass/fail identity checks used by the `check` command and acceptance.

#include <string>
#include <vector>

#include "g2flow/diagnostics.hpp"
#include "g2flow/g2algebra.hpp"
#include "g2flow/linalg.hpp"
#include "g2flow/torsion.hpp"

namespace g2 {

struct CheckResult {
  std::string name;
  bool passed = false;
  double deviation = 0;  // 0 for exact passes
  bool exact = false;
};

bool all_passed(const std::vector<CheckResult>& rs);
std::vector<std::string> failed_names(const std::vector<CheckResult>& rs);

namespace detail {

template <ScalarKind S>
CheckResult make_check(std::string name, double dev, double tol) {
  return {std::move(name), dev <= tol, dev, is_exact_v<S>};
}

template <ScalarKind S>
double deviation(const Tensor<S>& a, const Tensor<S>& b) {
  return (a - b).max_abs();
}

template <ScalarKind S>
double deviation(const Matrix<S>& a, const Matrix<S>& b) {
  return (a - b).max_abs();
}

}  // namespace detail

// Algebraic identities of the structure induced by phi. With expect_standard
// the components, metric and ∗φ are also compared with the standard forms.
template <ScalarKind S>
std::vector<CheckResult> algebraic_suite(const Tensor<S>& phi, bool expect_standard,
                                         double tol = 0.0) {
  using detail::deviation;
  using detail::make_check;
  std::vector<CheckResult> out;
  const G2Structure<S> s = make_structure(phi);
  const auto& m = s.metric;
  if (expect_standard) {
    out.push_back(make_check<S>("phi_components", deviation(phi, standard_phi<S>()), tol));
    out.push_back(make_check<S>("induced_metric", deviation(m.g, kronecker<S>()), tol));
    out.push_back(make_check<S>("star_phi_is_psi", deviation(s.psi, standard_psi<S>()), tol));
  }
  out.push_back(make_check<S>("star_star_phi", deviation(hodge_star(s.psi, m), phi), tol));
  const auto rep = check_contraction_identities(s);
  out.push_back(make_check<S>("phi_phi_contraction", to_double(rep.phi_phi_deviation), tol));
  out.push_back(
      make_check<S>("psi_psi_168", std::abs(to_double(S(rep.psi_psi - S(168)))), tol * 168));
  out.push_back(make_check<S>(
      "phi_norm_7", std::abs(to_double(S(inner_form(phi, phi, m) - S(7)))), tol * 7));
  double worst = 0;
  for (const auto& c : combinations(2)) {
    Tensor<S> a = Tensor<S>::form(2);
    set_form_component(a, c.data(), S(1));
    worst = std::max(worst, std::abs(to_double(S(norm2(a, m) - S(2) * inner_form(a, a, m)))));
  }
  out.push_back(make_check<S>("two_form_norms", worst, tol));
  out.push_back(make_check<S>("j_phi_phi_6g", deviation(j_phi(phi, s), Tensor<S>(m.g * S(6))),
                              tol * 6));
  return out;
}

// π²₇ and π²₁₄: idempotent, mutually annihilating, complementary, ranks 7 and 14.
template <ScalarKind S>
std::vector<CheckResult> projector_suite(const G2Structure<S>& s, double tol = 0.0) {
  using detail::deviation;
  using detail::make_check;
  const Matrix<S> p7 = pi7_matrix(s), p14 = pi14_matrix(s);
  const Matrix<S> zero(21, 21);
  Matrix<S> id(21, 21);
  for (int i = 0; i < 21; ++i) id(i, i) = S(1);
  std::vector<CheckResult> out;
  out.push_back(make_check<S>("pi7_idempotent", deviation(Matrix<S>(p7 * p7), p7), tol));
  out.push_back(make_check<S>("pi14_idempotent", deviation(Matrix<S>(p14 * p14), p14), tol));
  out.push_back(make_check<S>("pi7_pi14_orthogonal", deviation(Matrix<S>(p7 * p14), zero), tol));
  out.push_back(make_check<S>("pi_sum_identity", deviation(Matrix<S>(p7 + p14), id), tol));
  const double rtol = is_exact_v<S> ? 0.0 : 1e-9;
  out.push_back(make_check<S>("pi7_rank_7", std::abs(rank(p7, rtol) - 7), 0.0));
  out.push_back(make_check<S>("pi14_rank_14", std::abs(rank(p14, rtol) - 14), 0.0));
  return out;
}

// Closed-case torsion and curvature identities on a left-invariant structure.
template <ScalarKind S>
std::vector<CheckResult> closed_torsion_suite(const LieAlgebra<S>& alg, const Tensor<S>& phi,
                                              double tol = 0.0) {
  using detail::deviation;
  using detail::make_check;
  std::vector<CheckResult> out;
  const LieG2Jet<S> j = lie_g2_jet(alg, phi);
  const double scale = std::max(1.0, phi.max_abs());
  out.push_back(make_check<S>("closed", j.dphi.max_abs(), is_exact_v<S> ? 0.0 : kClosedTolerance * scale));
  if (!out.back().passed) return out;
  const auto& m = j.s.metric;
  const Tensor<S> t_sym = j.t + j.t.permuted(std::array<int, 2>{1, 0});
  out.push_back(make_check<S>("torsion_antisymmetric", t_sym.max_abs(), tol));
  out.push_back(make_check<S>("torsion_divergence_free",
                              einsum("ij,ijk->k", m.g_inv, j.nt).max_abs(), tol));
  out.push_back(make_check<S>(
      "scalar_minus_two_t2",
      std::abs(to_double(S(j.curv.scalar - scalar_from_torsion(j.t, m)))), tol));
  out.push_back(make_check<S>("ricci_from_torsion",
                              deviation(ricci_from_torsion(j.t, j.nt, j.s), j.curv.ric), tol));
  out.push_back(make_check<S>(
      "ricci_from_torsion_general",
      deviation(ricci_from_torsion_general(j.t, j.nt, j.s), j.curv.ric), tol));
  out.push_back(make_check<S>("grad_torsion_formula",
                              deviation(grad_torsion_formula(j.curv.rm, j.t, j.s), j.nt), tol));
  out.push_back(make_check<S>("bianchi_identity",
                              bianchi_residual(j.curv.rm, j.t, j.nt, j.s).max_abs(), tol));
  out.push_back(make_check<S>("phi_trace_grad_torsion",
                              deviation(phi_trace_grad_torsion(grad_torsion_formula(j.curv.rm, j.t, j.s), j.s),
                                        Tensor<S>(t_hat(j.t, m) * S(2))),
                              tol));
  out.push_back(make_check<S>(
      "nabla_phi_reconstruction", deviation(nabla_phi_from_torsion(j.t, j.s), j.nabla_phi), tol));
  const LaplacianPhi<S> lap = laplacian_phi(alg, j);
  out.push_back(make_check<S>("laplacian_is_i_phi_h",
                              deviation(lap.delta_phi, i_phi(lap.h, j.s, is_exact_v<S> ? 0.0 : 1e-9)),
                              tol));
  out.push_back(make_check<S>("laplacian_pi7_zero",
                              split_3form(lap.delta_phi, j.s).part7.max_abs(), tol));
  const Tensor<S> sic = sic_tensor(j.curv.ric, j.t, m);
  const S t2 = torsion_norm2(j.t, m);
  const S lap_n = inner_form(lap.delta_phi, lap.delta_phi, m);
  const S rhs = make_scalar<S>(16, 9) * t2 * t2 + S(2) * norm2(sic, m);
  out.push_back(make_check<S>("laplacian_norm", std::abs(to_double(S(lap_n - rhs))), tol));
  out.push_back(make_check<S>("sic_is_minus_h", (sic + lap.h).max_abs(), tol));
  return out;
}

// Exact suite when the induced metric is rational, float suite (at tol)
// otherwise; names carry no marker, CheckResult::exact records which ran.
std::vector<CheckResult> algebraic_suite_auto(const Tensor<Rational>& phi, bool expect_standard,
                                              double tol = 1e-12);
std::vector<CheckResult> projector_suite_auto(const Tensor<Rational>& phi, double tol = 1e-12);
std::vector<CheckResult> closed_torsion_suite_auto(const LieAlgebra<Rational>& alg,
                                                   const Tensor<Rational>& phi,
                                                   double tol = 1e-8);

// Flat-point balance of the S-form scalar equation, exact.
CheckResult flat_point_suite();

}  // namespace g2
