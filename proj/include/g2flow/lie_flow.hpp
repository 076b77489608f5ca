#pragma once

#include "g2flow/flow.hpp"
#include "g2flow/lie_g2.hpp"

namespace g2 {

// Laplacian flow on invariant 3-forms: a 35-dimensional autonomous ODE.
class LieFlowBackend {
 public:
  using State = Tensor<double>;

  explicit LieFlowBackend(LieAlgebra<double> alg) : alg_(std::move(alg)) {}

  const LieAlgebra<double>& algebra() const { return alg_; }

  State velocity(const State& phi) const {
    const Metric<double> m = metric_from_phi(phi);
    return hodge_laplacian(alg_, phi, m);
  }

  StateHealth health(const State& phi) const;

  void axpy(State& x, double a, const State& y) const { x.axpy(a, y); }

 private:
  LieAlgebra<double> alg_;
};

// State (φ, g̃): φ follows the flow while g̃ integrates ∂t g̃ = 2h(φ) on the
// same stages, independently of the metric induced by φ.
class MetricTrackingBackend {
 public:
  struct State {
    Tensor<double> phi;
    Tensor<double> g;
  };

  explicit MetricTrackingBackend(const LieFlowBackend& inner) : inner_(inner) {}

  State velocity(const State& s) const;
  StateHealth health(const State& s) const { return inner_.health(s.phi); }
  void axpy(State& x, double a, const State& y) const {
    x.phi.axpy(a, y.phi);
    x.g.axpy(a, y.g);
  }

 private:
  const LieFlowBackend& inner_;
};

// Total volume with unit covolume: ∫∗1 = √det g.
double hitchin_functional(const Tensor<double>& phi);

// (1/7) ∫ φ∧ψ
double hitchin_wedge_form(const Tensor<double>& phi);

struct ResidualSeries {
  std::vector<double> t;
  std::vector<double> residual;
  double max() const;
};

// |centered ∂t g − 2h| at interior samples.
ResidualSeries metric_evolution_residual(const LieAlgebra<double>& alg,
                                         const Trajectory<Tensor<double>>& traj);

// |centered ∂t vol − (4/3)|T|² vol| at interior samples.
ResidualSeries volume_evolution_residual(const LieAlgebra<double>& alg,
                                         const Trajectory<Tensor<double>>& traj);

}  // namespace g2
