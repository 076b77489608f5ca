#pragma once

// G2 structures on a Lie algebra: derived geometry at the (single) point.

#include "g2flow/lie.hpp"
#include "g2flow/torsion.hpp"

namespace g2 {

// d* = (−1)^k ∗d∗ on k-forms in dimension 7
template <ScalarKind S>
Tensor<S> codifferential(const LieAlgebra<S>& alg, const Tensor<S>& alpha,
                         const Metric<S>& m) {
  const int k = alpha.rank();
  if (k == 0) return Tensor<S>::scalar(S(0));
  Tensor<S> out = hodge_star(alg.exterior_derivative(hodge_star(alpha, m)), m);
  if (k % 2 == 1) out *= S(-1);
  return out;
}

// dd* + d*d
template <ScalarKind S>
Tensor<S> hodge_laplacian(const LieAlgebra<S>& alg, const Tensor<S>& alpha,
                          const Metric<S>& m) {
  Tensor<S> out = alg.exterior_derivative(codifferential(alg, alpha, m));
  if (alpha.rank() < kDim)
    out += codifferential(alg, alg.exterior_derivative(alpha), m);
  out.set_symmetry(Symmetry::antisymmetric());
  return out;
}

template <ScalarKind S>
struct LieG2Jet {
  G2Structure<S> s;
  LieConnection<S> conn;
  CurvatureData<S> curv;
  Tensor<S> dphi, dpsi;
  Tensor<S> nabla_phi;
  Tensor<S> t;   // full torsion T_ij
  Tensor<S> nt;  // ∇_i T_jk

  Tensor<S> nabla(const Tensor<S>& x) const { return covariant_derivative(x, conn); }
  Tensor<S> rough_lap(const Tensor<S>& x) const {
    return rough_laplacian(x, conn, s.metric);
  }
  bool closed() const { return is_closed(dphi, s.phi); }
};

template <ScalarKind S>
LieG2Jet<S> lie_g2_jet(const LieAlgebra<S>& alg, const Tensor<S>& phi) {
  LieG2Jet<S> j{make_structure(phi), {}, {}, {}, {}, {}, {}, {}};
  j.conn = levi_civita(alg, j.s.metric);
  j.curv = riemann(alg, j.conn, j.s.metric);
  j.dphi = alg.exterior_derivative(phi);
  j.dpsi = alg.exterior_derivative(j.s.psi);
  j.nabla_phi = covariant_derivative(phi, j.conn);
  j.t = full_torsion(j.nabla_phi, j.s);
  j.nt = covariant_derivative(j.t, j.conn);
  return j;
}

// Hodge Laplacian of φ (closed structures only) together with h.
template <ScalarKind S>
struct LaplacianPhi {
  Tensor<S> delta_phi;
  Tensor<S> h;
};

template <ScalarKind S>
LaplacianPhi<S> laplacian_phi(const LieAlgebra<S>& alg, const LieG2Jet<S>& j) {
  require_closed(j.dphi, j.s.phi);
  return {hodge_laplacian(alg, j.s.phi, j.s.metric),
          h_tensor(j.curv.ric, j.t, j.s.metric)};
}

}  // namespace g2
