#include "g2flow/lie_flow.hpp"

#include <algorithm>

namespace g2 {

StateHealth LieFlowBackend::health(const State& phi) const {
  const Metric<double> m = metric_from_phi(phi);
  const auto ev = symmetric_eigenvalues(to_matrix(m.g));
  StateHealth h;
  h.min_metric_eigenvalue = *std::min_element(ev.begin(), ev.end());
  h.closedness = alg_.exterior_derivative(phi).max_abs();
  const auto conn = levi_civita(alg_, m);
  h.rm_norm = std::sqrt(norm2(riemann(alg_, conn, m).rm, m));
  return h;
}

MetricTrackingBackend::State MetricTrackingBackend::velocity(const State& s) const {
  const auto j = lie_g2_jet(inner_.algebra(), s.phi);
  const auto lap = laplacian_phi(inner_.algebra(), j);
  return {lap.delta_phi, lap.h * 2.0};
}

double hitchin_functional(const Tensor<double>& phi) {
  return sqrt_det(metric_from_phi(phi));
}

double hitchin_wedge_form(const Tensor<double>& phi) {
  const auto s = make_structure(phi);
  return top_wedge(phi, s.psi) / 7.0;
}

double ResidualSeries::max() const {
  double m = 0;
  for (double r : residual) m = std::max(m, r);
  return m;
}

namespace {

void require_samples(std::size_t n) {
  if (n < 3) throw InsufficientSamples("need at least 3 samples for centered differences");
}

}  // namespace

ResidualSeries metric_evolution_residual(const LieAlgebra<double>& alg,
                                         const Trajectory<Tensor<double>>& traj) {
  require_samples(traj.size());
  ResidualSeries out;
  for (std::size_t n = 1; n + 1 < traj.size(); ++n) {
    const double dt = traj[n + 1].t - traj[n - 1].t;
    const auto gp = metric_from_phi(traj[n + 1].phi).g;
    const auto gm = metric_from_phi(traj[n - 1].phi).g;
    const auto j = lie_g2_jet(alg, traj[n].phi);
    const auto rhs = h_tensor(j.curv.ric, j.t, j.s.metric) * 2.0;
    out.t.push_back(traj[n].t);
    out.residual.push_back(((gp - gm) * (1.0 / dt) - rhs).max_abs());
  }
  return out;
}

ResidualSeries volume_evolution_residual(const LieAlgebra<double>& alg,
                                         const Trajectory<Tensor<double>>& traj) {
  require_samples(traj.size());
  ResidualSeries out;
  for (std::size_t n = 1; n + 1 < traj.size(); ++n) {
    const double dt = traj[n + 1].t - traj[n - 1].t;
    const double vp = hitchin_functional(traj[n + 1].phi);
    const double vm = hitchin_functional(traj[n - 1].phi);
    const auto j = lie_g2_jet(alg, traj[n].phi);
    const double rhs = 4.0 / 3.0 * torsion_norm2(j.t, j.s.metric) * j.s.vol_density;
    out.t.push_back(traj[n].t);
    out.residual.push_back(std::abs((vp - vm) / dt - rhs));
  }
  return out;
}

}  // namespace g2
