#include "g2flow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace g2 {

FlatPointCheck flat_point_check() {
  const auto c = flat_point_terms<Rational>(true);
  const auto p = flat_point_terms<Rational>(false);
  FlatPointCheck out;
  out.corrected = c.total();
  out.uncorrected = p.total();
  out.r_form_constant = -Rational(3, 2) * c.flat_squares();
  out.r_form_quoted = Rational(-210);
  return out;
}

double StaticIdentityReport::max() const {
  return std::max({sic_plus_h, s_minus_two_thirds_r, s_plus_four_thirds_t2, laplacian_norm,
                   laplacian_vs_i_phi, pi7_laplacian});
}

StaticIdentityReport static_identities(const LieAlgebra<double>& alg,
                                       const Tensor<double>& phi) {
  const auto j = lie_g2_jet(alg, phi);
  const auto lap = laplacian_phi(alg, j);
  const auto& m = j.s.metric;
  const auto sic = sic_tensor(j.curv.ric, j.t, m);
  const double sc = einsum("ij,ij->", sic, m.g_inv).value();
  const double t2 = torsion_norm2(j.t, m);
  StaticIdentityReport r;
  r.sic_plus_h = (sic + lap.h).max_abs();
  r.s_minus_two_thirds_r = std::abs(sc - 2.0 / 3.0 * j.curv.scalar);
  r.s_plus_four_thirds_t2 = std::abs(sc + 4.0 / 3.0 * t2);
  r.laplacian_norm = std::abs(inner_form(lap.delta_phi, lap.delta_phi, m) -
                              16.0 / 9.0 * t2 * t2 - 2 * norm2(sic, m));
  r.laplacian_vs_i_phi = (lap.delta_phi - i_phi(lap.h, j.s, 1e-9)).max_abs();
  r.pi7_laplacian = split_3form(lap.delta_phi, j.s).part7.max_abs();
  return r;
}

SampleEvaluation evaluate_sample(const LieAlgebra<double>& alg, const Tensor<double>& phi,
                                 double t) {
  const auto j = lie_g2_jet(alg, phi);
  require_closed(j.dphi, j.s.phi);
  const auto& m = j.s.metric;
  const auto& rm = j.curv.rm;
  const auto& ric = j.curv.ric;
  const auto& tt = j.t;
  const auto& nt = j.nt;

  SampleEvaluation e;
  e.t = t;
  e.t_tensor = tt;
  e.ric = ric;
  e.metric = m.g;
  e.r = j.curv.scalar;
  e.t2 = torsion_norm2(tt, m);
  const Tensor<double> that = t_hat(tt, m);
  const Tensor<double> sic = sic_tensor(ric, tt, m);
  e.s = einsum("ij,ij->", sic, m.g_inv).value();
  e.lap_t = j.rough_lap(tt);
  e.lap_ric = j.rough_lap(ric);

  // Torsion equation. The |T|² gradient term vanishes for left-invariant data.
  const Tensor<double> ric_up = raise_index(ric, 0, m);  // R^k_j
  const Tensor<double> t_up = raised(tt, {0, 1}, m);
  const Tensor<double> t_mixed = raise_index(tt, 1, m);  // T_i^k
  const Tensor<double> rm_mixed = raise_index(rm, 3, m);
  const Tensor<double> psi_up = raised(j.s.psi, {1, 2, 3}, m);
  const Tensor<double> phi_up = raise_index(j.s.phi, 2, m);  // φ_kj^q
  Tensor<double> base = einsum("kj,ki->ij", ric_up, tt) * 3.0;
  base -= einsum("ki,kj->ij", ric_up, tt);
  base -= einsum("ijmk,mk->ij", rm, t_up) * 0.5;
  base += einsum("pqi,pk,kjq->ij", nt, t_up, phi_up);
  base -= einsum("pqi,qk,kjp->ij", nt, t_up, phi_up) * 2.0;
  base -= tt * (2.0 / 3.0 * e.t2);
  base -= einsum("ik,km,mj->ij", t_mixed, t_mixed, tt) * 4.0;
  e.rhs_torsion = base - einsum("mpik,qk,jpqm->ij", rm_mixed, tt, psi_up) * 0.5;
  e.rhs_torsion_uncorrected = base - einsum("mpik,qk,jpqm->ij", rm_mixed, ric, psi_up) * 0.5;

  // Scalar equation, ∇T form and ∇∇T̂ form.
  const double ric_n2 = norm2(ric, m);
  e.rhs_scalar = 2 * ric_n2 - 2.0 / 3.0 * e.r * e.r +
                 4 * einsum("ijkl,ik,jl->", rm, t_up, t_up).value() +
                 4 * einsum("jik,ijk->", raised(nt, {0, 1, 2}, m), nt).value();
  const Tensor<double> nn_that = j.nabla(j.nabla(that));  // ∇_a ∇_b T̂_cd
  const double divdiv = einsum("ab,cd,acbd->", m.g_inv, m.g_inv, nn_that).value();
  e.rhs_scalar_alt =
      2 * ric_n2 - 2.0 / 3.0 * e.r * e.r - 4 * divdiv + 4 * inner_2tensor(ric, that, m);

  e.wa = wellarranged_terms(rm, ric, tt, nt, j.s, true);
  e.wa_uncorrected = wellarranged_terms(rm, ric, tt, nt, j.s, false);

  // Ricci equation; |T|² is constant in space here.
  const Tensor<double> ric_mixed = raise_index(ric, 1, m);    // R_i^p
  const Tensor<double> that_mixed = raise_index(that, 1, m);  // T̂_i^p
  const Tensor<double> ric_upup = raised(ric, {0, 1}, m);
  const Tensor<double> that_upup = raised(that, {0, 1}, m);
  const Tensor<double> lap_that = einsum("ab,abij->ij", m.g_inv, nn_that);
  const Tensor<double> div_that = einsum("pq,iqpj->ij", m.g_inv, nn_that);
  Tensor<double> rr = einsum("ip,pj->ij", ric_mixed, ric) * -2.0;
  rr += einsum("pijq,pq->ij", rm, ric_upup) * 2.0;
  rr += lap_that * 2.0;
  rr -= einsum("ip,pj->ij", ric_mixed, that) * 2.0;
  rr -= einsum("ip,pj->ij", that_mixed, ric) * 2.0;
  rr += einsum("pijq,pq->ij", rm, that_upup) * 4.0;
  rr -= div_that * 2.0;
  rr -= div_that.permuted(std::array<int, 2>{1, 0}) * 2.0;
  e.rhs_ricci = rr;

  const Tensor<double> h = h_tensor(ric, tt, m);
  const double tr = einsum("ij,ij->", rr, m.g_inv).value();
  e.ricci_trace_gap = std::abs(tr - 2 * inner_2tensor(h, ric, m) - e.rhs_scalar_alt);
  return e;
}

namespace {

void push(ResidualSeries& s, double t, double r) {
  s.t.push_back(t);
  s.residual.push_back(r);
}

}  // namespace

EvolutionResiduals evolution_residuals(const LieAlgebra<double>& alg,
                                       const Trajectory<Tensor<double>>& traj) {
  if (traj.size() < 3)
    throw InsufficientSamples("need at least 3 samples for centered differences");
  std::vector<SampleEvaluation> ev;
  ev.reserve(traj.size());
  for (const auto& st : traj) ev.push_back(evaluate_sample(alg, st.phi, st.t));

  EvolutionResiduals out;
  for (std::size_t n = 1; n + 1 < ev.size(); ++n) {
    const auto& a = ev[n - 1];
    const auto& b = ev[n];
    const auto& c = ev[n + 1];
    const double inv = 1.0 / (c.t - a.t);
    const Tensor<double> dt_t = (c.t_tensor - a.t_tensor) * inv - b.lap_t;
    push(out.torsion, b.t, (dt_t - b.rhs_torsion).max_abs());
    push(out.torsion_uncorrected, b.t, (dt_t - b.rhs_torsion_uncorrected).max_abs());
    const double dt_r = (c.r - a.r) * inv;
    const double res_r = dt_r - b.rhs_scalar;
    push(out.scalar, b.t, std::abs(res_r));
    push(out.scalar_alt, b.t, std::abs(dt_r - b.rhs_scalar_alt));
    const double dt_s = (c.s - a.s) * inv;
    const double res_s = dt_s - b.wa.total();
    push(out.wellarranged, b.t, std::abs(res_s));
    push(out.wellarranged_uncorrected, b.t, std::abs(dt_s - b.wa_uncorrected.total()));
    const Tensor<double> dt_ric = (c.ric - a.ric) * inv - b.lap_ric;
    push(out.ricci, b.t, (dt_ric - b.rhs_ricci).max_abs());
    out.ricci_trace_gap = std::max(out.ricci_trace_gap, b.ricci_trace_gap);
    out.scalar_vs_s_gap = std::max(out.scalar_vs_s_gap, std::abs(res_r - 1.5 * res_s));
    out.wa_terms.push_back(b.wa.as_map());
  }
  return out;
}

ResidualSeries residual_torsion_evolution(const LieAlgebra<double>& alg,
                                          const Trajectory<Tensor<double>>& traj) {
  return evolution_residuals(alg, traj).torsion;
}

ResidualSeries residual_scalar_evolution(const LieAlgebra<double>& alg,
                                         const Trajectory<Tensor<double>>& traj) {
  return evolution_residuals(alg, traj).scalar;
}

ResidualSeries residual_wellarranged_scalar(const LieAlgebra<double>& alg,
                                            const Trajectory<Tensor<double>>& traj) {
  return evolution_residuals(alg, traj).wellarranged;
}

ResidualSeries residual_ricci_evolution(const LieAlgebra<double>& alg,
                                        const Trajectory<Tensor<double>>& traj) {
  return evolution_residuals(alg, traj).ricci;
}

double convergence_order(double coarse, double fine, double floor) {
  if (coarse <= floor || fine <= floor) return std::numeric_limits<double>::quiet_NaN();
  return std::log2(coarse / fine);
}

}  // namespace g2
