#pragma once

#include <vector>

#include "g2flow/einsum.hpp"
#include "g2flow/forms.hpp"
#include "g2flow/linalg.hpp"
#include "g2flow/metric.hpp"

namespace g2 {

// φ = e123 + e145 + e167 + e246 − e257 − e347 − e356 (1-based labels)
template <ScalarKind S>
Tensor<S> standard_phi() {
  return form_from_terms<S>(3, {{{0, 1, 2}, S(1)},
                                {{0, 3, 4}, S(1)},
                                {{0, 5, 6}, S(1)},
                                {{1, 3, 5}, S(1)},
                                {{1, 4, 6}, S(-1)},
                                {{2, 3, 6}, S(-1)},
                                {{2, 4, 5}, S(-1)}});
}

// ψ = e4567 + e2367 + e2345 + e1357 − e1346 − e1256 − e1247
template <ScalarKind S>
Tensor<S> standard_psi() {
  return form_from_terms<S>(4, {{{3, 4, 5, 6}, S(1)},
                                {{1, 2, 5, 6}, S(1)},
                                {{1, 2, 3, 4}, S(1)},
                                {{0, 2, 4, 6}, S(1)},
                                {{0, 2, 3, 5}, S(-1)},
                                {{0, 1, 4, 5}, S(-1)},
                                {{0, 1, 3, 6}, S(-1)}});
}

namespace detail {

struct EpsilonBlock {
  int a, b;  // packed 2-set positions
  IndexSet rest;
  int sign;
};

// Ordered pairs of disjoint 2-sets with the complementary 3-set and the sign
// of the concatenated permutation.
const std::vector<EpsilonBlock>& epsilon_blocks();

}  // namespace detail

// B_ij = (1/144) φ_ikl φ_jmn φ_pqr ε^{klmnpqr}
template <ScalarKind S>
Tensor<S> epsilon_contraction(const Tensor<S>& phi) {
  const auto& pairs = combinations(2);
  Matrix<S> p(kDim, 21), w(21, 21);
  for (int i = 0; i < kDim; ++i)
    for (int a = 0; a < 21; ++a) p(i, a) = phi(i, pairs[a][0], pairs[a][1]);
  for (const auto& blk : detail::epsilon_blocks()) {
    const S& c = form_component(phi, blk.rest.data());
    if (is_zero(c)) continue;
    if (blk.sign > 0) w(blk.a, blk.b) += c; else w(blk.a, blk.b) -= c;
  }
  const Matrix<S> b = p * w * p.transpose();
  Tensor<S> out = Tensor<S>::symmetric2();
  const S sixth = make_scalar<S>(1, 6);
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) out(i, j) = b(i, j) * sixth;
  return out;
}

// Metric g = B / det(B)^{1/9} induced by a positive 3-form.
template <ScalarKind S>
Metric<S> metric_from_phi(const Tensor<S>& phi, double tol = 1e-10) {
  const Tensor<S> b = epsilon_contraction(phi);
  const Matrix<S> bm = to_matrix(b);
  const S det = determinant(bm);
  if constexpr (is_exact_v<S>) {
    if (sgn(det) <= 0) throw NotPositive("3-form is not positive (det B <= 0)");
  } else {
    if (!(det > 0)) throw NotPositive("3-form is not positive (det B <= 0)");
  }
  if (!is_positive_definite(bm, is_exact_v<S> ? 0.0 : tol * bm.max_abs()))
    throw NotPositive("3-form is not positive (B not definite)");
  const S scale = S(1) / real_root(det, 9);
  return make_metric<S>(b * scale, tol);
}

template <ScalarKind S>
struct G2Structure {
  Tensor<S> phi;
  Metric<S> metric;
  Tensor<S> psi;
  S vol_density;  // √det g, the coefficient of ∗1 on e^{1..7}
};

template <ScalarKind S>
G2Structure<S> make_structure(const Tensor<S>& phi) {
  G2Structure<S> s{phi, metric_from_phi(phi), {}, S(0)};
  s.psi = hodge_star(phi, s.metric);
  s.vol_density = sqrt_det(s.metric);
  return s;
}

template <ScalarKind S>
G2Structure<S> standard_structure() {
  return {standard_phi<S>(), Metric<S>::euclidean(), standard_psi<S>(), S(1)};
}

// φ'_{abc} = φ_{ijk} A^i_a A^j_b A^k_c
template <ScalarKind S>
Tensor<S> pullback(const Tensor<S>& form, const Tensor<S>& a) {
  Tensor<S> t = form;
  for (int s = 0; s < form.rank(); ++s) {
    // replace slot s index i by a: sum_i A(i,a) t[..i..]
    t = detail::apply_at_slot(t, s, from_matrix(to_matrix(a).transpose()));
  }
  t.set_symmetry(form.symmetry());
  return t;
}

// Coefficient of e^{1..7} in a ∧ b when deg a + deg b = 7.
template <ScalarKind S>
S top_wedge(const Tensor<S>& a, const Tensor<S>& b) {
  const int k = a.rank();
  if (k + b.rank() != kDim) throw RankError("top_wedge needs complementary degrees");
  S acc(0);
  std::array<int, kDim> joined{};
  for (const auto& ia : combinations(k)) {
    const S& va = form_component(a, ia.data());
    if (is_zero(va)) continue;
    const IndexSet ib = complement(ia, k);
    const S& vb = form_component(b, ib.data());
    if (is_zero(vb)) continue;
    for (int s = 0; s < k; ++s) joined[s] = ia[s];
    for (int s = k; s < kDim; ++s) joined[s] = ib[s - k];
    if (permutation_sign(joined.data(), kDim) > 0) acc += va * vb; else acc -= va * vb;
  }
  return acc;
}

template <ScalarKind S>
struct Form2Split {
  Tensor<S> part7;
  Tensor<S> part14;
};

// β ↦ ∗(φ∧β)
template <ScalarKind S>
Tensor<S> star_phi_wedge(const Tensor<S>& beta, const G2Structure<S>& s) {
  return hodge_star(wedge(s.phi, beta), s.metric);
}

template <ScalarKind S>
Form2Split<S> split_2form(const Tensor<S>& beta, const G2Structure<S>& s) {
  Tensor<S> p7 = (beta + star_phi_wedge(beta, s)) * make_scalar<S>(1, 3);
  Tensor<S> p14 = beta - p7;
  p7.set_symmetry(Symmetry::antisymmetric());
  p14.set_symmetry(Symmetry::antisymmetric());
  return {std::move(p7), std::move(p14)};
}

// (1/3)β_ab + (1/6)β^{lm}ψ_{lmab}
template <ScalarKind S>
Tensor<S> pi7_index_formula(const Tensor<S>& beta, const G2Structure<S>& s) {
  const Tensor<S> up = raise_all(beta, s.metric);
  Tensor<S> out = beta * make_scalar<S>(1, 3);
  out += einsum("lm,lmab->ab", up, s.psi) * make_scalar<S>(1, 6);
  out.set_symmetry(Symmetry::antisymmetric());
  return out;
}

// i_φ(h)_{ijk} = h_i^l φ_ljk + h_j^l φ_ilk + h_k^l φ_ijl
template <ScalarKind S>
Tensor<S> i_phi(const Tensor<S>& h, const G2Structure<S>& s, double tol = 1e-12) {
  if (h.rank() != 2) throw RankError("i_phi needs a 2-tensor");
  Tensor<S> hs = h;
  hs.set_symmetry(Symmetry::symmetric_pairs({{0, 1}}));
  if (hs.symmetry_defect() > (is_exact_v<S> ? 0.0 : tol * (1 + h.max_abs())))
    throw std::invalid_argument("i_phi: input is not symmetric");
  const Tensor<S> mixed = einsum("im,ml->il", h, s.metric.g_inv);
  const Tensor<S> t = einsum("il,ljk->ijk", mixed, s.phi);
  Tensor<S> out = Tensor<S>::form(3);
  for (const auto& c : combinations(3)) {
    const int i = c[0], j = c[1], k = c[2];
    S v = t(i, j, k) - t(j, i, k) + t(k, i, j);
    if (!is_zero(v)) set_form_component(out, c.data(), v);
  }
  return out;
}

// j_φ(η)(e_a, e_b) = ∗((e_a⌟φ) ∧ (e_b⌟φ) ∧ η)
template <ScalarKind S>
Tensor<S> j_phi(const Tensor<S>& eta, const G2Structure<S>& s) {
  if (eta.rank() != 3) throw RankError("j_phi needs a 3-form");
  std::vector<Tensor<S>> xphi;
  for (int a = 0; a < kDim; ++a) xphi.push_back(interior_product(basis_vector<S>(a), s.phi));
  Tensor<S> out = Tensor<S>::symmetric2();
  for (int a = 0; a < kDim; ++a)
    for (int b = a; b < kDim; ++b) {
      const S v = top_wedge(wedge(xphi[a], xphi[b]), eta) / s.vol_density;
      out(a, b) = v;
      out(b, a) = v;
    }
  return out;
}

template <ScalarKind S>
struct Form3Split {
  Tensor<S> part1, part7, part27;
  Tensor<S> h;  // symmetric, η = i_φ(h) + X⌟ψ
  Tensor<S> x;
};

// Inverts (h, X) ↦ i_φ(h) + X⌟ψ on the 35-dimensional space of 3-forms.
template <ScalarKind S>
class Form3Splitter {
 public:
  explicit Form3Splitter(G2Structure<S> s) : s_(std::move(s)), lu_(assemble(s_)) {}

  Form3Split<S> split(const Tensor<S>& eta) const {
    if (eta.rank() != 3) throw RankError("split_3form needs a 3-form");
    const auto sol = lu_.solve(packed_components(eta));
    Form3Split<S> out;
    out.h = Tensor<S>::symmetric2();
    int n = 0;
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j, ++n) out.h(i, j) = out.h(j, i) = sol[n];
    out.x = Tensor<S>(1);
    for (int a = 0; a < kDim; ++a) out.x(a) = sol[n + a];
    const S tr = einsum("ij,ij->", out.h, s_.metric.g_inv).value();
    const Tensor<S> h0 = out.h - s_.metric.g * (tr / S(7));
    out.part1 = s_.phi * (make_scalar<S>(3, 7) * tr);
    out.part27 = i_phi(h0, s_);
    out.part7 = interior_product(out.x, s_.psi);
    out.part7.set_symmetry(Symmetry::antisymmetric());
    return out;
  }

  const G2Structure<S>& structure() const { return s_; }

 private:
  static LuSolver<S> assemble(const G2Structure<S>& s) {
    Matrix<S> m(35, 35);
    int col = 0;
    auto put = [&](const Tensor<S>& form) {
      const auto v = packed_components(form);
      for (int r = 0; r < 35; ++r) m(r, col) = v[r];
      ++col;
    };
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j) {
        Tensor<S> e = Tensor<S>::symmetric2();
        e(i, j) = e(j, i) = S(1);
        put(i_phi(e, s));
      }
    for (int a = 0; a < kDim; ++a) put(interior_product(basis_vector<S>(a), s.psi));
    return LuSolver<S>(std::move(m));
  }

  G2Structure<S> s_;
  LuSolver<S> lu_;
};

template <ScalarKind S>
Form3Split<S> split_3form(const Tensor<S>& eta, const G2Structure<S>& s) {
  return Form3Splitter<S>(s).split(eta);
}

template <ScalarKind S>
struct ContractionReport {
  S phi_phi_deviation;  // max |φ_ijk φ^k_ab − (g_ia g_jb − g_ib g_ja + ψ_ijab)|
  S psi_psi;            // ψ_ijkl ψ^ijkl
  bool holds(double tol = 0.0) const {
    return std::abs(to_double(phi_phi_deviation)) <= tol &&
           std::abs(to_double(psi_psi - S(168))) <= tol * 168;
  }
};

template <ScalarKind S>
ContractionReport<S> check_contraction_identities(const G2Structure<S>& s) {
  const Tensor<S> up = raise_index(s.phi, 0, s.metric);  // φ^k_ab
  const Tensor<S> lhs = einsum("ijk,kab->ijab", s.phi, up);
  const Tensor<S>& g = s.metric.g;
  S worst(0);
  std::array<int, 4> idx{};
  for (std::size_t flat = 0; flat < lhs.size(); ++flat) {
    unflatten(flat, 4, idx.data());
    const auto [i, j, a, b] = idx;
    S rhs = g(i, a) * g(j, b) - g(i, b) * g(j, a) + s.psi[flat];
    S d = abs_value(S(lhs[flat] - rhs));
    if (d > worst) worst = d;
  }
  return {worst, full_contraction(s.psi, s.psi, s.metric)};
}

// Matrix of a linear map on 2-forms in the packed basis of combinations(2).
template <ScalarKind S, class F>
Matrix<S> two_form_operator(F&& f) {
  Matrix<S> m(21, 21);
  const auto& cs = combinations(2);
  for (int col = 0; col < 21; ++col) {
    Tensor<S> e = Tensor<S>::form(2);
    set_form_component(e, cs[col].data(), S(1));
    const auto v = packed_components(f(e));
    for (int r = 0; r < 21; ++r) m(r, col) = v[r];
  }
  return m;
}

template <ScalarKind S>
Matrix<S> pi7_matrix(const G2Structure<S>& s) {
  return two_form_operator<S>([&](const Tensor<S>& b) { return split_2form(b, s).part7; });
}

template <ScalarKind S>
Matrix<S> pi14_matrix(const G2Structure<S>& s) {
  return two_form_operator<S>([&](const Tensor<S>& b) { return split_2form(b, s).part14; });
}

template <ScalarKind S>
Matrix<S> star_phi_wedge_matrix(const G2Structure<S>& s) {
  return two_form_operator<S>([&](const Tensor<S>& b) { return star_phi_wedge(b, s); });
}

}  // namespace g2
