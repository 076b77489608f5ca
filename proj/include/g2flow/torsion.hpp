#pragma once

// Pointwise torsion and curvature formulas for a G2 structure. Inputs are the
// tensors at one point: ∇φ, T, ∇T (derivative slot first), Rm, Ric.

#include "g2flow/einsum.hpp"
#include "g2flow/g2algebra.hpp"

namespace g2 {

inline constexpr double kClosedTolerance = 1e-9;

template <ScalarKind S>
bool is_closed(const Tensor<S>& dphi, const Tensor<S>& phi,
               double tol = kClosedTolerance) {
  return dphi.max_abs() <= tol * phi.max_abs();
}

template <ScalarKind S>
void require_closed(const Tensor<S>& dphi, const Tensor<S>& phi,
                    double tol = kClosedTolerance) {
  if (!is_closed(dphi, phi, tol))
    throw NotClosed("structure is not closed: |dphi| = " +
                    std::to_string(dphi.max_abs()));
}

// T_lm = (1/24) ∇_l φ_abc ψ_m^abc
template <ScalarKind S>
Tensor<S> full_torsion(const Tensor<S>& nabla_phi, const G2Structure<S>& s) {
  Tensor<S> psi_up = s.psi;
  for (int slot = 1; slot < 4; ++slot) psi_up = raise_index(psi_up, slot, s.metric);
  return einsum("labc,mabc->lm", nabla_phi, psi_up) * make_scalar<S>(1, 24);
}

// ∇_l φ_abc = T_l^n ψ_nabc
template <ScalarKind S>
Tensor<S> nabla_phi_from_torsion(const Tensor<S>& t, const G2Structure<S>& s) {
  return einsum("ln,nabc->labc", raise_index(t, 1, s.metric), s.psi);
}

// T̂_ij = T_i^k T_kj
template <ScalarKind S>
Tensor<S> t_hat(const Tensor<S>& t, const Metric<S>& m) {
  Tensor<S> out = einsum("ik,kj->ij", raise_index(t, 1, m), t);
  return out;
}

// |T|² = ½ T_kl T^kl
template <ScalarKind S>
S torsion_norm2(const Tensor<S>& t, const Metric<S>& m) {
  return norm2(t, m) * make_scalar<S>(1, 2);
}

// R_jk = −(∇_i T_jm) φ_k^im − T_j^i T_ik   (closed case)
template <ScalarKind S>
Tensor<S> ricci_from_torsion(const Tensor<S>& t, const Tensor<S>& nt,
                             const G2Structure<S>& s) {
  Tensor<S> phi_up = raise_index(raise_index(s.phi, 1, s.metric), 2, s.metric);
  Tensor<S> out = -einsum("ijm,kim->jk", nt, phi_up);
  out -= t_hat(t, s.metric);
  return out;
}

// R_jk = −(∇_i T_jm − ∇_j T_im) φ^m_k^i − T_j^i T_ik + (tr T) T_jk
//        + T_jb T_ia ψ^iab_k   (general case)
template <ScalarKind S>
Tensor<S> ricci_from_torsion_general(const Tensor<S>& t, const Tensor<S>& nt,
                                     const G2Structure<S>& s) {
  const auto& m = s.metric;
  const Tensor<S> phi_mki = raise_index(raise_index(s.phi, 0, m), 2, m);
  const Tensor<S> skew = nt - nt.permuted(std::array<int, 3>{1, 0, 2});
  Tensor<S> out = -einsum("ijm,mki->jk", skew, phi_mki);
  out -= t_hat(t, m);
  const S tr = einsum("ij,ij->", t, m.g_inv).value();
  out += t * tr;
  Tensor<S> psi_up = s.psi;
  for (int slot = 0; slot < 3; ++slot) psi_up = raise_index(psi_up, slot, m);
  out += einsum("jb,ia,iabk->jk", t, t, psi_up);
  return out;
}

// R = −2|T|²   (closed case)
template <ScalarKind S>
S scalar_from_torsion(const Tensor<S>& t, const Metric<S>& m) {
  return S(-2) * torsion_norm2(t, m);
}

// (∇_j T_im) φ^m_k^i, which equals 2 T̂_jk for closed structures
template <ScalarKind S>
Tensor<S> phi_trace_grad_torsion(const Tensor<S>& nt, const G2Structure<S>& s) {
  const Tensor<S> phi_mki = raise_index(raise_index(s.phi, 0, s.metric), 2, s.metric);
  return einsum("jim,mki->jk", nt, phi_mki);
}

// ∇_i T_jk expressed through Rm and T   (closed case)
template <ScalarKind S>
Tensor<S> grad_torsion_formula(const Tensor<S>& rm, const Tensor<S>& t,
                               const G2Structure<S>& s) {
  const Tensor<S> p = raise_index(raise_index(s.phi, 1, s.metric), 2, s.metric);
  const S q = make_scalar<S>(1, 4), h = make_scalar<S>(1, 2);
  Tensor<S> out = einsum("ijmn,kmn->ijk", rm, p) * (-q);
  out -= einsum("kjmn,imn->ijk", rm, p) * q;
  out += einsum("ikmn,jmn->ijk", rm, p) * q;
  const Tensor<S> tp = einsum("jn,kmn->jkm", t, p);  // T_jn φ_k^mn
  out -= einsum("im,jkm->ijk", t, tp) * h;
  out -= einsum("km,jim->ijk", t, tp) * h;
  out += einsum("im,kjm->ijk", t, tp) * h;
  return out;
}

// ∇_i T_jl − ∇_j T_il + (½ R_ijab + T_ia T_jb) φ^ab_l
template <ScalarKind S>
Tensor<S> bianchi_residual(const Tensor<S>& rm, const Tensor<S>& t,
                           const Tensor<S>& nt, const G2Structure<S>& s) {
  const Tensor<S> phi_up = raise_index(raise_index(s.phi, 0, s.metric), 1, s.metric);
  Tensor<S> inner = rm * make_scalar<S>(1, 2);
  inner += einsum("ia,jb->ijab", t, t);
  Tensor<S> out = nt - nt.permuted(std::array<int, 3>{1, 0, 2});
  out += einsum("ijab,abl->ijl", inner, phi_up);
  return out;
}

// h_ij = −R_ij − (2/3)|T|² g_ij − 2 T̂_ij, the velocity with Δφ = i_φ(h)
template <ScalarKind S>
Tensor<S> h_tensor(const Tensor<S>& ric, const Tensor<S>& t, const Metric<S>& m) {
  Tensor<S> h = -ric;
  h -= m.g * (make_scalar<S>(2, 3) * torsion_norm2(t, m));
  h -= t_hat(t, m) * S(2);
  h.set_symmetry(Symmetry::symmetric_pairs({{0, 1}}));
  return h;
}

// Sic = Ric + (2/3)|T|² g + 2 T̂ = −h
template <ScalarKind S>
Tensor<S> sic_tensor(const Tensor<S>& ric, const Tensor<S>& t, const Metric<S>& m) {
  return -h_tensor(ric, t, m);
}

template <ScalarKind S>
struct TorsionForms {
  S tau0;
  Tensor<S> tau1;         // 1-form
  Tensor<S> tau1_tilde;   // from dψ
  Tensor<S> tau2;         // 2-form
  Tensor<S> tau3;         // 3-form
  Tensor<S> tau3_tensor;  // symmetric trace-free, τ3 = i_φ(tau3_tensor)
  double dphi_residual = 0, dpsi_residual = 0;
};

// dφ = τ0 ψ + 3 τ1∧φ + ∗τ3,   dψ = 4 τ̃1∧ψ − ∗τ2
template <ScalarKind S>
TorsionForms<S> torsion_forms(const G2Structure<S>& s, const Tensor<S>& dphi,
                              const Tensor<S>& dpsi) {
  const auto& m = s.metric;
  TorsionForms<S> out;
  const Tensor<S> sdphi = hodge_star(dphi, m);
  const auto split = split_3form(sdphi, s);
  out.tau0 = inner_form(sdphi, s.phi, m) / S(7);
  // part7 = 3∗(τ1∧φ) = −3 τ1♯⌟ψ, so X = −3 τ1♯
  out.tau1 = lower_index(split.x, 0, m) * make_scalar<S>(-1, 3);
  out.tau3 = split.part27;
  out.tau3_tensor = split.h - m.g * (einsum("ij,ij->", split.h, m.g_inv).value() / S(7));
  out.tau2 = -hodge_star(dpsi - wedge(out.tau1, s.psi) * S(4), m);
  out.tau2.set_symmetry(Symmetry::antisymmetric());

  // π²₇(∗dψ) = 4∗(τ̃1∧ψ): least squares over 1-forms
  const Tensor<S> target = split_2form(hodge_star(dpsi, m), s).part7;
  Matrix<S> a(21, 7);
  for (int c = 0; c < kDim; ++c) {
    Tensor<S> e(1, Symmetry::antisymmetric());
    e(c) = S(1);
    const auto v = packed_components(hodge_star(wedge(e, s.psi), m) * S(4));
    for (int r = 0; r < 21; ++r) a(r, c) = v[r];
  }
  const auto b = packed_components(target);
  const Matrix<S> at = a.transpose();
  const Matrix<S> ata = at * a;
  std::vector<S> atb(7, S(0));
  for (int i = 0; i < 7; ++i)
    for (int r = 0; r < 21; ++r) atb[i] += at(i, r) * b[r];
  const auto x = LuSolver<S>(ata).solve(atb);
  out.tau1_tilde = Tensor<S>(1, Symmetry::antisymmetric());
  for (int i = 0; i < kDim; ++i) out.tau1_tilde(i) = x[i];

  Tensor<S> rebuilt = s.psi * out.tau0;
  rebuilt += wedge(out.tau1, s.phi) * S(3);
  rebuilt += hodge_star(out.tau3, m);
  out.dphi_residual = (dphi - rebuilt).max_abs();
  Tensor<S> rebuilt5 = wedge(out.tau1_tilde, s.psi) * S(4);
  rebuilt5 -= hodge_star(out.tau2, m);
  out.dpsi_residual = (dpsi - rebuilt5).max_abs();
  return out;
}

// T = (τ0/4) g − τ3 − τ1♯⌟φ − ½ τ2
template <ScalarKind S>
Tensor<S> torsion_from_forms(const TorsionForms<S>& f, const G2Structure<S>& s) {
  const auto& m = s.metric;
  Tensor<S> t = m.g * (f.tau0 / S(4));
  t -= f.tau3_tensor;
  t -= interior_product(raise_index(f.tau1, 0, m), s.phi);
  t -= f.tau2 * make_scalar<S>(1, 2);
  t.set_symmetry(Symmetry::none());
  return t;
}

// R = −12 div τ1 + (21/8)τ0² − ||τ3||² + 30|τ1|² − ½|τ2|²
template <ScalarKind S>
S scalar_from_torsion_forms(const TorsionForms<S>& f, const S& div_tau1,
                            const G2Structure<S>& s) {
  const auto& m = s.metric;
  return S(-12) * div_tau1 + make_scalar<S>(21, 8) * f.tau0 * f.tau0 -
         norm2(f.tau3_tensor, m) + S(30) * inner_form(f.tau1, f.tau1, m) -
         make_scalar<S>(1, 2) * inner_form(f.tau2, f.tau2, m);
}

}  // namespace g2
