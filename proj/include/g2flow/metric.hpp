#pragma once

#include "g2flow/einsum.hpp"
#include "g2flow/linalg.hpp"
#include "g2flow/tensor.hpp"

namespace g2 {

template <ScalarKind S>
Matrix<S> to_matrix(const Tensor<S>& t) {
  if (t.rank() != 2) throw RankError("to_matrix needs a rank-2 tensor");
  Matrix<S> m(kDim, kDim);
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) m(i, j) = t(i, j);
  return m;
}

template <ScalarKind S>
Tensor<S> from_matrix(const Matrix<S>& m, Symmetry sym = Symmetry::none()) {
  Tensor<S> t(2, std::move(sym));
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) t(i, j) = m(i, j);
  return t;
}

template <ScalarKind S>
struct Metric {
  Tensor<S> g;
  Tensor<S> g_inv;
  S det;

  static Metric euclidean() {
    return Metric{kronecker<S>(), kronecker<S>(), S(1)};
  }
  bool is_identity() const { return g_inv == kronecker<S>(); }
};

// Builds a metric, rejecting matrices that are not symmetric positive definite.
template <ScalarKind S>
Metric<S> make_metric(const Tensor<S>& g, double tol = 1e-10) {
  if (g.rank() != 2) throw RankError("metric must have rank 2");
  const auto m = to_matrix(g);
  for (int i = 0; i < kDim; ++i)
    for (int j = i + 1; j < kDim; ++j)
      if (std::abs(to_double(m(i, j) - m(j, i))) >
          (is_exact_v<S> ? 0.0 : tol * (1 + m.max_abs())))
        throw NotPositive("metric is not symmetric");
  if (!is_positive_definite(m, is_exact_v<S> ? 0.0 : tol * m.max_abs()))
    throw NotPositive("metric is not positive definite");
  LuSolver<S> lu(m);
  Matrix<S> inv = inverse(m);
  Metric<S> out{from_matrix(m, Symmetry::symmetric_pairs({{0, 1}})),
                from_matrix(inv, Symmetry::symmetric_pairs({{0, 1}})),
                lu.determinant()};
  if constexpr (!is_exact_v<S>) {
    // Symmetrize the inverse against rounding.
    for (int i = 0; i < kDim; ++i)
      for (int j = i + 1; j < kDim; ++j) {
        const double v = 0.5 * (out.g_inv(i, j) + out.g_inv(j, i));
        out.g_inv(i, j) = out.g_inv(j, i) = v;
      }
  }
  return out;
}

namespace detail {

// Contract slot `slot` of t with the first index of m: out[..a..] = m_{ab} t[..b..]
template <ScalarKind S>
Tensor<S> apply_at_slot(const Tensor<S>& t, int slot, const Tensor<S>& m) {
  if (slot < 0 || slot >= t.rank()) throw RankError("slot out of range");
  Tensor<S> out(t.rank(), t.symmetry());
  const std::size_t stride = kPow7[t.rank() - 1 - slot];
  const std::size_t block = stride * kDim;
  for (std::size_t outer = 0; outer < t.size(); outer += block)
    for (std::size_t inner = 0; inner < stride; ++inner)
      for (int a = 0; a < kDim; ++a) {
        S acc(0);
        for (int b = 0; b < kDim; ++b) {
          const S& tv = t[outer + b * stride + inner];
          if (is_zero(tv)) continue;
          acc += m(a, b) * tv;
        }
        out[outer + a * stride + inner] = acc;
      }
  return out;
}

}  // namespace detail

template <ScalarKind S>
Tensor<S> raise_index(const Tensor<S>& t, int slot, const Metric<S>& m) {
  return detail::apply_at_slot(t, slot, m.g_inv);
}

template <ScalarKind S>
Tensor<S> lower_index(const Tensor<S>& t, int slot, const Metric<S>& m) {
  return detail::apply_at_slot(t, slot, m.g);
}

template <ScalarKind S>
Tensor<S> raise_all(Tensor<S> t, const Metric<S>& m) {
  if (m.is_identity()) return t;
  for (int s = 0; s < t.rank(); ++s) t = raise_index(t, s, m);
  return t;
}

// Plain trace over two slots (one upper, one lower).
template <ScalarKind S>
Tensor<S> contract(const Tensor<S>& t, int slot1, int slot2) {
  const int k = t.rank();
  if (slot1 == slot2 || slot1 < 0 || slot2 < 0 || slot1 >= k || slot2 >= k)
    throw RankError("contract: invalid slots");
  Tensor<S> out(k - 2);
  std::array<int, kMaxRank> idx{}, oidx{};
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    unflatten(flat, k, idx.data());
    if (idx[slot1] != idx[slot2]) continue;
    int o = 0;
    for (int s = 0; s < k; ++s)
      if (s != slot1 && s != slot2) oidx[o++] = idx[s];
    out.at(std::span<const int>(oidx.data(), k - 2)) += t[flat];
  }
  return out;
}

// Trace of two lower slots with the inverse metric.
template <ScalarKind S>
Tensor<S> contract(const Tensor<S>& t, int slot1, int slot2, const Metric<S>& m) {
  return contract(raise_index(t, slot2, m), slot1, slot2);
}

}  // namespace g2
