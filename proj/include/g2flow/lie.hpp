#pragma once

// Left-invariant geometry on a 7-dimensional Lie algebra. Every tensor is
// frame-constant, so d, ∇ and curvature are algebraic in the structure
// constants c^k_ij, stored as c(k, i, j). Maurer-Cartan: de^k = −½ c^k_ij e^ij.

#include <tuple>
#include <vector>

#include "g2flow/einsum.hpp"
#include "g2flow/forms.hpp"
#include "g2flow/metric.hpp"

namespace g2 {

template <ScalarKind S>
struct BracketTerm {
  int i, j, k;  // [e_i, e_j] = value e_k, 0-based
  S value;
};

template <ScalarKind S>
class LieAlgebra {
 public:
  explicit LieAlgebra(Tensor<S> c, double tol = 1e-12) : c_(std::move(c)) {
    if (c_.rank() != 3) throw RankError("structure constants must have rank 3");
    double scale = std::max(1.0, c_.max_abs());
    for (int k = 0; k < kDim; ++k)
      for (int i = 0; i < kDim; ++i)
        for (int j = 0; j < kDim; ++j)
          if (std::abs(to_double(c_(k, i, j) + c_(k, j, i))) > tol * scale)
            throw JacobiViolation("structure constants are not antisymmetric");
    const double jac = jacobi_defect();
    if (jac > (is_exact_v<S> ? 0.0 : tol * scale * scale))
      throw JacobiViolation("Jacobi identity fails (defect " + std::to_string(jac) + ")");
  }

  static LieAlgebra abelian() { return LieAlgebra(Tensor<S>(3)); }

  static LieAlgebra from_brackets(const std::vector<BracketTerm<S>>& terms,
                                  double tol = 1e-12) {
    Tensor<S> c(3);
    for (const auto& t : terms) {
      if (t.i == t.j) throw JacobiViolation("bracket [e_i, e_i] must vanish");
      c(t.k, t.i, t.j) += t.value;
      c(t.k, t.j, t.i) -= t.value;
    }
    return LieAlgebra(std::move(c), tol);
  }

  const Tensor<S>& structure_constants() const { return c_; }

  bool is_abelian() const { return c_.is_zero_tensor(); }

  // max |c^m_ij c^n_mk + c^m_jk c^n_mi + c^m_ki c^n_mj|
  double jacobi_defect() const {
    const Tensor<S> cc = einsum("mij,nmk->nijk", c_, c_);
    double worst = 0;
    for (int n = 0; n < kDim; ++n)
      for (int i = 0; i < kDim; ++i)
        for (int j = 0; j < kDim; ++j)
          for (int k = 0; k < kDim; ++k) {
            const S v = cc(n, i, j, k) + cc(n, j, k, i) + cc(n, k, i, j);
            worst = std::max(worst, std::abs(to_double(v)));
          }
    return worst;
  }

  // (dα)_{i0..ik} = Σ_{a<b} (−1)^{a+b} c^m_{ia ib} α_{m, rest}
  Tensor<S> exterior_derivative(const Tensor<S>& alpha) const {
    const int k = alpha.rank();
    if (k >= kDim) throw RankError("exterior derivative of a top form");
    Tensor<S> out = Tensor<S>::form(k + 1);
    std::array<int, kDim> rest{};
    for (const auto& set : combinations(k + 1)) {
      S acc(0);
      for (int a = 0; a <= k; ++a)
        for (int b = a + 1; b <= k; ++b) {
          int n = 1;
          for (int z = 0; z <= k; ++z)
            if (z != a && z != b) rest[n++] = set[z];
          for (int m = 0; m < kDim; ++m) {
            const S& cm = c_(m, set[a], set[b]);
            if (is_zero(cm)) continue;
            rest[0] = m;
            const S& v = alpha.at(std::span<const int>(rest.data(), k));
            if (is_zero(v)) continue;
            if ((a + b) % 2 == 0) acc += cm * v; else acc -= cm * v;
          }
        }
      if (!is_zero(acc)) set_form_component(out, set.data(), acc);
    }
    return out;
  }

  // New frame e'_a = A^i_a e_i: c'^c_ab = (A⁻¹)^c_k c^k_ij A^i_a A^j_b.
  LieAlgebra change_frame(const Tensor<S>& a) const {
    const Tensor<S> ainv = from_matrix(inverse(to_matrix(a)));
    return LieAlgebra(einsum("ck,kij,ia,jb->cab", ainv, c_, a, a));
  }

 private:
  Tensor<S> c_;
};

// Levi-Civita connection and curvature of a left-invariant metric.
template <ScalarKind S>
struct LieConnection {
  Tensor<S> gamma;  // gamma(k, i, j) = Γ^k_ij, ∇_{e_i} e_j = Γ^k_ij e_k
};

template <ScalarKind S>
struct CurvatureData {
  Tensor<S> rm;   // R_ijkl
  Tensor<S> ric;  // R_jk = R_ijkl g^il
  S scalar;
};

// Koszul: Γ_ijl = ½(c_ijl − c_jli + c_lij), c_ijl = c^m_ij g_ml.
template <ScalarKind S>
LieConnection<S> levi_civita(const LieAlgebra<S>& alg, const Metric<S>& m) {
  const Tensor<S> cl = einsum("mij,ml->ijl", alg.structure_constants(), m.g);
  Tensor<S> low(3);
  const S half = make_scalar<S>(1, 2);
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int l = 0; l < kDim; ++l)
        low(i, j, l) = half * (cl(i, j, l) - cl(j, l, i) + cl(l, i, j));
  return {einsum("ijl,lk->kij", low, m.g_inv)};
}

// (∇_i T)_{a..} = −Σ_s Γ^m_{i a_s} T_{..m..}; derivative slot first.
template <ScalarKind S>
Tensor<S> covariant_derivative(const Tensor<S>& t, const LieConnection<S>& conn) {
  const int k = t.rank();
  if (k + 1 > kMaxRank) throw RankError("covariant derivative rank too large");
  Tensor<S> out(k + 1);
  const std::size_t n = t.size();
  std::array<int, kMaxRank> idx{};
  for (std::size_t flat = 0; flat < n; ++flat) {
    unflatten(flat, k, idx.data());
    for (int i = 0; i < kDim; ++i) {
      S acc(0);
      for (int s = 0; s < k; ++s) {
        const int a = idx[s];
        const std::size_t stride = kPow7[k - 1 - s];
        const std::size_t base = flat - static_cast<std::size_t>(a) * stride;
        for (int m = 0; m < kDim; ++m) {
          const S& gm = conn.gamma(m, i, a);
          if (is_zero(gm)) continue;
          const S& v = t[base + m * stride];
          if (!is_zero(v)) acc -= gm * v;
        }
      }
      out[i * n + flat] = acc;
    }
  }
  return out;
}

// R^n_ijk = Γ^m_jk Γ^n_im − Γ^m_ik Γ^n_jm − c^m_ij Γ^n_mk
template <ScalarKind S>
CurvatureData<S> riemann(const LieAlgebra<S>& alg, const LieConnection<S>& conn,
                         const Metric<S>& m) {
  const auto& gam = conn.gamma;
  Tensor<S> up = einsum("mjk,nim->nijk", gam, gam);
  up -= einsum("mik,njm->nijk", gam, gam);
  up -= einsum("mij,nmk->nijk", alg.structure_constants(), gam);
  CurvatureData<S> out;
  out.rm = einsum("mijk,ml->ijkl", up, m.g);
  out.ric = einsum("ijkl,il->jk", out.rm, m.g_inv);
  out.ric.set_symmetry(Symmetry::symmetric_pairs({{0, 1}}));
  out.scalar = einsum("jk,jk->", out.ric, m.g_inv).value();
  return out;
}

// g^ij ∇_i ∇_j X
template <ScalarKind S>
Tensor<S> rough_laplacian(const Tensor<S>& x, const LieConnection<S>& conn,
                          const Metric<S>& m) {
  const Tensor<S> nn = covariant_derivative(covariant_derivative(x, conn), conn);
  Tensor<S> out(x.rank());
  const std::size_t n = x.size();
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      const S& w = m.g_inv(i, j);
      if (is_zero(w)) continue;
      const std::size_t base = (i * kDim + j) * n;
      for (std::size_t r = 0; r < n; ++r) out[r] += w * nn[base + r];
    }
  return out;
}

}  // namespace g2
