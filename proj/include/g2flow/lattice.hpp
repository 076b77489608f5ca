#pragma once

// Periodic finite-difference backend. A few coordinates of T^7 are resolved on
// a uniform grid; fields are constant along the others. Forms are stored as
// packed increasing-index components per grid point.

#include <cstddef>
#include <vector>

#include "g2flow/flow.hpp"
#include "g2flow/g2algebra.hpp"
#include "g2flow/lie.hpp"

namespace g2 {

struct LatticeSpec {
  std::vector<int> active_dims{0, 1};  // 0-based coordinate indices
  std::vector<int> sizes{32, 32};
  std::vector<double> spacings{1.0 / 32, 1.0 / 32};
  int stencil_order = 4;  // 2 or 4

  void validate() const;
  bool operator==(const LatticeSpec&) const = default;
};

class Lattice {
 public:
  explicit Lattice(LatticeSpec spec);

  const LatticeSpec& spec() const { return spec_; }
  std::size_t points() const { return points_; }
  int active() const { return static_cast<int>(spec_.active_dims.size()); }
  int axis(int a) const { return spec_.active_dims[a]; }
  double cell_volume() const { return cell_volume_; }

  // Grid index of p moved by s cells along active axis a (periodic).
  std::size_t shift(std::size_t p, int a, int s) const;
  int index(std::size_t p, int a) const;
  double coordinate(std::size_t p, int a) const;
  double period(int a) const;

  // First derivative along active axis a of ncomp interleaved components.
  void derivative(const double* in, double* out, int ncomp, int a) const;
  // Same at a single point.
  double derivative_at(const double* in, int ncomp, int comp, std::size_t p, int a) const;

  struct StencilTap {
    int offset;
    double weight;
  };
  const std::vector<StencilTap>& stencil() const { return taps_; }

 private:
  LatticeSpec spec_;
  std::size_t points_ = 1;
  std::vector<std::size_t> strides_;
  double cell_volume_ = 1;
  std::vector<StencilTap> taps_;
};

struct LatticeForm {
  int k = 3;
  std::vector<double> data;

  LatticeForm() = default;
  LatticeForm(int degree, std::size_t points);
  int ncomp() const;
  std::size_t points() const { return data.size() / ncomp(); }
  const double* at(std::size_t p) const { return data.data() + p * ncomp(); }
  double* at(std::size_t p) { return data.data() + p * ncomp(); }
  Tensor<double> tensor_at(std::size_t p) const;
  LatticeForm& axpy(double a, const LatticeForm& o);
  double max_abs() const;
};

enum class LatticeKernel { Parallel, Serial };

LatticeForm constant_form(const Lattice& lat, const Tensor<double>& form);

struct PerturbationMode {
  int i = 0, j = 1;                 // β = f e^ij, 0-based
  double amplitude = 0;
  std::vector<int> wavevector;      // one entry per active axis
  double phase = 0;
  bool operator==(const PerturbationMode&) const = default;
};

// φ₀ + dβ with β_ij = amplitude · cos(2π k·x/L + phase) / (2π); closed by
// construction since the discrete d squares to zero.
LatticeForm perturbed_standard(const Lattice& lat, const std::vector<PerturbationMode>& modes);

// Metric data at every point: g and g⁻¹ (49 each) and √det g.
struct MetricField {
  std::vector<double> g, g_inv, vol;
  Metric<double> at(std::size_t p) const;
};

MetricField metric_field(const Lattice& lat, const LatticeForm& phi,
                         LatticeKernel kernel = LatticeKernel::Parallel);

LatticeForm exterior_derivative(const Lattice& lat, const LatticeForm& a,
                                LatticeKernel kernel = LatticeKernel::Parallel);
LatticeForm hodge_star(const LatticeForm& a, const MetricField& m,
                       LatticeKernel kernel = LatticeKernel::Parallel);
// (−1)^k ∗d∗ on k-forms
LatticeForm codifferential(const Lattice& lat, const LatticeForm& a, const MetricField& m,
                           LatticeKernel kernel = LatticeKernel::Parallel);

// Δφ = −d∗d∗φ for closed φ.
LatticeForm laplacian_phi(const Lattice& lat, const LatticeForm& phi,
                          LatticeKernel kernel = LatticeKernel::Parallel);

// Σ_p ⟨a, b⟩ √det g · cell volume
double l2_inner(const Lattice& lat, const LatticeForm& a, const LatticeForm& b,
                const MetricField& m);

// Christoffel symbols and curvature from finite differences of g.
struct CurvatureField {
  std::vector<double> gamma;  // Γ^m_ij, 343 per point
  std::vector<double> rm;     // R_ijkl, 2401 per point
  std::vector<double> ric;    // 49 per point
  std::vector<double> scalar, rm_norm;

  Tensor<double> gamma_at(std::size_t p) const;
  Tensor<double> rm_at(std::size_t p) const;
  Tensor<double> ric_at(std::size_t p) const;
};

CurvatureField curvature_field(const Lattice& lat, const MetricField& m);

// ∇ of a per-point tensor field at p: finite-difference partials plus
// connection terms, derivative slot first.
Tensor<double> covariant_derivative_at(const Lattice& lat, const std::vector<Tensor<double>>& f,
                                       const CurvatureField& curv, std::size_t p);

struct LatticeSample {
  MetricField metric;
  CurvatureField curv;
  std::vector<Tensor<double>> t;  // full torsion per point
  std::vector<double> t2;
  double closedness = 0;
  double min_eigenvalue = 0;
  double max_scalar = 0, max_t2 = 0, max_rm = 0, volume = 0;
};

LatticeSample lattice_sample(const Lattice& lat, const LatticeForm& phi);

class LatticeFlowBackend {
 public:
  using State = LatticeForm;

  explicit LatticeFlowBackend(Lattice lat, LatticeKernel kernel = LatticeKernel::Parallel)
      : lat_(std::move(lat)), kernel_(kernel) {}

  const Lattice& lattice() const { return lat_; }
  State velocity(const State& phi) const { return laplacian_phi(lat_, phi, kernel_); }
  StateHealth health(const State& phi) const;
  void axpy(State& x, double a, const State& y) const { x.axpy(a, y); }

 private:
  Lattice lat_;
  LatticeKernel kernel_;
};

// Σ_p √det g · cell volume
double lattice_volume(const Lattice& lat, const MetricField& m);

}  // namespace g2
