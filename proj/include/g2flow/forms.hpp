#pragma once

#include <array>
#include <vector>

#include "g2flow/metric.hpp"
#include "g2flow/tensor.hpp"

namespace g2 {

using IndexSet = std::array<int, kDim>;

// Increasing index sets of size k, in lexicographic order.
const std::vector<IndexSet>& combinations(int k);

// Position of an increasing index set within combinations(k).
int combination_rank(const int* sorted, int k);

struct SignedPermutation {
  IndexSet p;
  int sign;
};

// All permutations of 0..k-1 with their signs.
const std::vector<SignedPermutation>& permutations(int k);

// Sign of the permutation sorting idx[0..n), 0 if an index repeats.
int permutation_sign(const int* idx, int n);

// Complement of an increasing set, increasing.
IndexSet complement(const IndexSet& set, int k);

// Writes value at every reordering of a sorted index set.
template <ScalarKind S>
void set_form_component(Tensor<S>& t, const int* sorted, const S& value) {
  const int k = t.rank();
  std::array<int, kDim> idx{};
  for (const auto& sp : permutations(k)) {
    for (int s = 0; s < k; ++s) idx[s] = sorted[sp.p[s]];
    t.at(std::span<const int>(idx.data(), k)) = sp.sign > 0 ? value : S(-value);
  }
}

template <ScalarKind S>
const S& form_component(const Tensor<S>& t, const int* sorted) {
  return t.at(std::span<const int>(sorted, t.rank()));
}

// Builds a form from (indices, coefficient) terms; indices may be unsorted.
template <ScalarKind S>
Tensor<S> form_from_terms(int k,
                          const std::vector<std::pair<std::vector<int>, S>>& terms) {
  Tensor<S> t = Tensor<S>::form(k);
  for (const auto& [idx, c] : terms) {
    if (static_cast<int>(idx.size()) != k) throw RankError("term degree mismatch");
    std::array<int, kDim> sorted{};
    std::copy(idx.begin(), idx.end(), sorted.begin());
    const int sgn = permutation_sign(sorted.data(), k);
    if (sgn == 0) throw RankError("repeated index in form term");
    std::sort(sorted.begin(), sorted.begin() + k);
    S v = form_component(t, sorted.data());
    v += sgn > 0 ? c : S(-c);
    set_form_component(t, sorted.data(), v);
  }
  return t;
}

// Coefficients at increasing index sets, in combinations(k) order.
template <ScalarKind S>
std::vector<S> packed_components(const Tensor<S>& form) {
  std::vector<S> out;
  for (const auto& c : combinations(form.rank()))
    out.push_back(form_component(form, c.data()));
  return out;
}

template <ScalarKind S>
Tensor<S> form_from_packed(int k, const std::vector<S>& packed) {
  Tensor<S> t = Tensor<S>::form(k);
  const auto& cs = combinations(k);
  for (std::size_t n = 0; n < cs.size(); ++n)
    if (!is_zero(packed[n])) set_form_component(t, cs[n].data(), packed[n]);
  return t;
}

template <ScalarKind S>
Tensor<S> antisymmetrize(const Tensor<S>& t) {
  const int k = t.rank();
  Tensor<S> out = Tensor<S>::form(k);
  const auto& perms = permutations(k);
  const S inv_fact = S(1) / S(static_cast<long>(perms.size()));
  std::array<int, kDim> idx{};
  for (const auto& c : combinations(k)) {
    S acc(0);
    for (const auto& sp : perms) {
      for (int s = 0; s < k; ++s) idx[s] = c[sp.p[s]];
      const S& v = t.at(std::span<const int>(idx.data(), k));
      if (sp.sign > 0) acc += v; else acc -= v;
    }
    if (!is_zero(acc)) set_form_component(out, c.data(), S(acc * inv_fact));
  }
  return out;
}

template <ScalarKind S>
Tensor<S> wedge(const Tensor<S>& a, const Tensor<S>& b) {
  const int k = a.rank(), l = b.rank(), n = k + l;
  if (n > kDim) throw RankError("wedge degree exceeds 7");
  Tensor<S> out = Tensor<S>::form(n);
  const auto& slots = combinations(k);  // positions within the n-set
  std::array<int, kDim> ia{}, ib{};
  for (const auto& set : combinations(n)) {
    S acc(0);
    for (const auto& pos : slots) {
      bool valid = true;
      for (int s = 0; s < k; ++s)
        if (pos[s] >= n) valid = false;
      if (!valid) continue;
      int na = 0, nb = 0, shift = 0;
      std::array<bool, kDim> in_a{};
      for (int s = 0; s < k; ++s) {
        in_a[pos[s]] = true;
        shift += pos[s] - s;
      }
      for (int q = 0; q < n; ++q) {
        if (in_a[q]) ia[na++] = set[q]; else ib[nb++] = set[q];
      }
      const S& va = form_component(a, ia.data());
      if (is_zero(va)) continue;
      const S& vb = form_component(b, ib.data());
      if (is_zero(vb)) continue;
      if (shift % 2 == 0) acc += va * vb; else acc -= va * vb;
    }
    if (!is_zero(acc)) set_form_component(out, set.data(), acc);
  }
  return out;
}

// (X ⌟ a)_{i..} = X^m a_{m i..}
template <ScalarKind S>
Tensor<S> interior_product(const Tensor<S>& x, const Tensor<S>& a) {
  if (x.rank() != 1) throw RankError("interior product needs a vector");
  if (a.rank() < 1) throw RankError("interior product of a 0-form");
  Tensor<S> out(a.rank() - 1, a.symmetry());
  const std::size_t n = out.size();
  for (int m = 0; m < kDim; ++m) {
    if (is_zero(x[m])) continue;
    for (std::size_t r = 0; r < n; ++r) {
      const S& v = a[m * n + r];
      if (!is_zero(v)) out[r] += x[m] * v;
    }
  }
  return out;
}

template <ScalarKind S>
S sqrt_det(const Metric<S>& m) {
  return real_root(m.det, 2);
}

// det of the k×k submatrix m[rows, cols]
template <ScalarKind S>
S minor_det(const Tensor<S>& m, const int* rows, const int* cols, int k) {
  std::array<S, kDim * kDim> a;
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) a[r * k + c] = m(rows[r], cols[c]);
  S det(1);
  for (int c = 0; c < k; ++c) {
    int p = -1;
    double best = -1;
    for (int r = c; r < k; ++r) {
      if (is_zero(a[r * k + c])) continue;
      const double v = std::abs(to_double(a[r * k + c]));
      if (v > best) {
        best = v;
        p = r;
      }
      if constexpr (is_exact_v<S>) break;
    }
    if (p < 0) return S(0);
    if (p != c) {
      for (int j = 0; j < k; ++j) std::swap(a[p * k + j], a[c * k + j]);
      det = -det;
    }
    det *= a[c * k + c];
    for (int r = c + 1; r < k; ++r) {
      if (is_zero(a[r * k + c])) continue;
      const S f = a[r * k + c] / a[c * k + c];
      for (int j = c + 1; j < k; ++j) a[r * k + j] -= f * a[c * k + j];
    }
  }
  return det;
}

// Packed components of a form with every index raised: a^I = Σ_K det(g^{-1}[I,K]) a_K
template <ScalarKind S>
std::vector<S> raised_packed(const Tensor<S>& a, const Metric<S>& m) {
  const int k = a.rank();
  const auto& cs = combinations(k);
  std::vector<S> low = packed_components(a);
  if (m.is_identity() || k == 0) return low;
  std::vector<S> out(cs.size(), S(0));
  for (std::size_t i = 0; i < cs.size(); ++i) {
    S acc(0);
    for (std::size_t j = 0; j < cs.size(); ++j) {
      if (is_zero(low[j])) continue;
      acc += minor_det(m.g_inv, cs[i].data(), cs[j].data(), k) * low[j];
    }
    out[i] = acc;
  }
  return out;
}

// (∗a)_J = orientation · √det g · (1/k!) a^I ε_{IJ}
template <ScalarKind S>
Tensor<S> hodge_star(const Tensor<S>& a, const Metric<S>& m, int orientation = 1) {
  const int k = a.rank();
  const std::vector<S> up = raised_packed(a, m);
  const S vol = orientation > 0 ? sqrt_det(m) : S(-sqrt_det(m));
  Tensor<S> out = Tensor<S>::form(kDim - k);
  std::array<int, kDim> joined{};
  for (const auto& j : combinations(kDim - k)) {
    const IndexSet i = complement(j, kDim - k);
    for (int s = 0; s < k; ++s) joined[s] = i[s];
    for (int s = 0; s < kDim - k; ++s) joined[k + s] = j[s];
    const int sgn = permutation_sign(joined.data(), kDim);
    const S& v = up[combination_rank(i.data(), k)];
    if (is_zero(v)) continue;
    set_form_component(out, j.data(), sgn > 0 ? S(vol * v) : S(-(vol * v)));
  }
  return out;
}

template <ScalarKind S>
Tensor<S> volume_form(const Metric<S>& m) {
  return hodge_star(Tensor<S>::scalar(S(1)), m);
}

// T_{I} T'^{I}, every slot raised with the metric.
template <ScalarKind S>
S full_contraction(const Tensor<S>& a, const Tensor<S>& b, const Metric<S>& m) {
  if (a.rank() != b.rank()) throw RankError("contraction rank mismatch");
  const Tensor<S> up = raise_all(b, m);
  S acc(0);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!is_zero(a[i])) acc += a[i] * up[i];
  return acc;
}

// ⟨a,b⟩ = (1/k!) a_I b^I
template <ScalarKind S>
S inner_form(const Tensor<S>& a, const Tensor<S>& b, const Metric<S>& m) {
  if (a.rank() != b.rank()) throw RankError("inner_form rank mismatch");
  return full_contraction(a, b, m) / S(static_cast<long>(permutations(a.rank()).size()));
}

// ⟨⟨A,B⟩⟩ = A_ij B^ij
template <ScalarKind S>
S inner_2tensor(const Tensor<S>& a, const Tensor<S>& b, const Metric<S>& m) {
  if (a.rank() != 2 || b.rank() != 2) throw RankError("inner_2tensor needs rank 2");
  return full_contraction(a, b, m);
}

// Full tensor norm squared, no factorial weight.
template <ScalarKind S>
S norm2(const Tensor<S>& a, const Metric<S>& m) {
  return full_contraction(a, a, m);
}

}  // namespace g2
