#pragma once

// Index-notation contraction: einsum("ij,jk->ik", a, b). Every letter ranges
// over 0..6; letters absent from the output are summed.

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "g2flow/tensor.hpp"

namespace g2 {

namespace detail {

struct EinsumPlan {
  int n_letters = 0;
  int out_rank = 0;
  int n_ops = 0;
  // stride[op][letter], op == n_ops is the output
  std::vector<std::array<std::size_t, 26>> stride;
};

inline EinsumPlan plan_einsum(std::string_view spec,
                              const std::vector<int>& ranks) {
  EinsumPlan p;
  const auto arrow = spec.find("->");
  if (arrow == std::string_view::npos)
    throw RankError("einsum spec needs '->': " + std::string(spec));
  std::vector<std::string> terms;
  std::string cur;
  for (char c : spec.substr(0, arrow)) {
    if (c == ',') {
      terms.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  terms.push_back(cur);
  std::string out;
  for (char c : spec.substr(arrow + 2))
    if (c != ' ') out.push_back(c);
  if (terms.size() != ranks.size())
    throw RankError("einsum operand count mismatch: " + std::string(spec));

  std::array<int, 128> id;
  id.fill(-1);
  std::vector<char> letters;
  auto letter_id = [&](char c) {
    if (c < 'A' || c > 'z' || (c > 'Z' && c < 'a'))
      throw RankError("bad einsum letter in " + std::string(spec));
    if (id[c] < 0) {
      id[c] = static_cast<int>(letters.size());
      letters.push_back(c);
      if (letters.size() > 26) throw RankError("too many einsum letters");
    }
    return id[c];
  };
  // Output letters first so they are the outer loops.
  for (char c : out) letter_id(c);
  for (auto& t : terms)
    for (char c : t) letter_id(c);

  p.n_ops = static_cast<int>(terms.size());
  p.n_letters = static_cast<int>(letters.size());
  p.out_rank = static_cast<int>(out.size());
  p.stride.assign(p.n_ops + 1, {});
  for (auto& s : p.stride) s.fill(0);
  auto fill = [&](int op, const std::string& t, int rank) {
    if (static_cast<int>(t.size()) != rank)
      throw RankError("einsum term '" + t + "' does not match rank " +
                      std::to_string(rank));
    for (int pos = 0; pos < rank; ++pos)
      p.stride[op][id[t[pos]]] += kPow7[rank - 1 - pos];
  };
  for (int op = 0; op < p.n_ops; ++op) fill(op, terms[op], ranks[op]);
  for (int a = 0; a < p.out_rank; ++a)
    for (int b = a + 1; b < p.out_rank; ++b)
      if (out[a] == out[b]) throw RankError("repeated output letter");
  fill(p.n_ops, out, p.out_rank);
  return p;
}

}  // namespace detail

template <ScalarKind S, class... Rest>
Tensor<S> einsum(std::string_view spec, const Tensor<S>& first,
                 const Rest&... rest) {
  const std::array<const Tensor<S>*, 1 + sizeof...(Rest)> ops{&first, &rest...};
  std::vector<int> ranks;
  for (auto* t : ops) ranks.push_back(t->rank());
  const auto p = detail::plan_einsum(spec, ranks);
  Tensor<S> out(p.out_rank);
  constexpr int n_ops = static_cast<int>(ops.size());

  std::array<int, 26> counter{};
  std::array<std::size_t, n_ops + 1> off{};
  const int L = p.n_letters;
  if (L == 0) {
    S prod = ops[0]->data()[0];
    for (int o = 1; o < n_ops; ++o) prod *= ops[o]->data()[0];
    out[0] = prod;
    return out;
  }
  std::array<const S*, n_ops> base{};
  for (int o = 0; o < n_ops; ++o) base[o] = ops[o]->data().data();
  S* obase = out.data().data();
  S prod;
  while (true) {
    bool nonzero = true;
    for (int o = 0; o < n_ops; ++o)
      if (is_zero(base[o][off[o]])) {
        nonzero = false;
        break;
      }
    if (nonzero) {
      prod = base[0][off[0]];
      for (int o = 1; o < n_ops; ++o) prod *= base[o][off[o]];
      obase[off[n_ops]] += prod;
    }
    int l = L - 1;
    for (; l >= 0; --l) {
      if (++counter[l] < kDim) {
        for (int o = 0; o <= n_ops; ++o) off[o] += p.stride[o][l];
        break;
      }
      counter[l] = 0;
      for (int o = 0; o <= n_ops; ++o) off[o] -= (kDim - 1) * p.stride[o][l];
    }
    if (l < 0) break;
  }
  return out;
}

}  // namespace g2
