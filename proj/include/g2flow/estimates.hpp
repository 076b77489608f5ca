#pragma once

// Localized curvature integrals A1..A4, B1, B2 and U with a distance cutoff,
// and a fitted constant ĉ for U' ≤ ĉK(U + A4) along a trajectory.

#include <vector>

#include "g2flow/lattice.hpp"
#include "g2flow/lie_g2.hpp"

namespace g2 {

struct EstimateConfig {
  std::vector<double> x0;  // cutoff centre, active coordinates (lattice only)
  double rho = 1;
  double k = 1;            // Ricci bound K
  int p = 5;
  double c = 1;            // constant used inside U
  void validate() const;
  bool operator==(const EstimateConfig&) const = default;
};

struct EstimateQuantities {
  double a1 = 0, a2 = 0, a3 = 0, a4 = 0, b1 = 0, b2 = 0, u = 0;
  double ric_max = 0;  // max ||Ric|| over the domain
  bool finite() const;
};

// Pointwise ingredients; the integrals are weighted sums of these.
struct EstimatePoint {
  double rm = 0, ric = 0, scalar = 0, grad_ric2 = 0, grad_rm2 = 0;
  double dv = 0, eta = 1, grad_eta2 = 0;
};

EstimateQuantities accumulate_estimates(const std::vector<EstimatePoint>& pts,
                                        const EstimateConfig& cfg);

// Distance to x0 under the metric field: exact periodic distance when the
// metric is the identity everywhere, Dijkstra over the grid graph otherwise.
std::vector<double> distance_field(const Lattice& lat, const MetricField& m,
                                   const std::vector<double>& x0);

// η = ((ρ/√K − d)/(ρ/√K))₊
std::vector<double> cutoff_field(const std::vector<double>& dist, const EstimateConfig& cfg);

// Lattice state; η from the supplied cutoff field (built from g(0)).
EstimateQuantities estimate_quantities(const Lattice& lat, const LatticeForm& phi,
                                       const std::vector<double>& eta, const EstimateConfig& cfg);

// Lattice state with η built from its own metric.
EstimateQuantities estimate_quantities(const Lattice& lat, const LatticeForm& phi,
                                       const EstimateConfig& cfg);

// Left-invariant structure: a single cell of unit covolume with η ≡ 1.
EstimateQuantities estimate_quantities(const LieAlgebra<double>& alg, const Tensor<double>& phi,
                                       const EstimateConfig& cfg);

struct EstimateReport {
  std::vector<double> t;
  std::vector<EstimateQuantities> q;
  std::size_t valid_samples = 0;  // prefix with ||Ric|| ≤ K
  bool ricci_bound_held = true;
  bool finite = true;             // over the valid prefix
  bool a3_le_a4 = true;
  double c_hat = 0;               // max U' / (K (U + A4)); NaN when undefined
  bool c_hat_defined = false;
};

EstimateReport estimate_report(const Lattice& lat, const Trajectory<LatticeForm>& traj,
                               const EstimateConfig& cfg);
EstimateReport estimate_report(const LieAlgebra<double>& alg,
                               const Trajectory<Tensor<double>>& traj, const EstimateConfig& cfg);

}  // namespace g2
