#include "g2flow/forms.hpp"

#include <algorithm>
#include <numeric>

namespace g2 {

namespace {

std::vector<IndexSet> build_combinations(int k) {
  std::vector<IndexSet> out;
  std::array<bool, kDim> pick{};
  std::fill(pick.begin(), pick.begin() + k, true);
  // prev_permutation over a leading-true mask enumerates sets lexicographically.
  do {
    IndexSet s{};
    int n = 0;
    for (int i = 0; i < kDim; ++i)
      if (pick[i]) s[n++] = i;
    out.push_back(s);
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return out;
}

std::vector<SignedPermutation> build_permutations(int k) {
  std::vector<SignedPermutation> out;
  IndexSet p{};
  std::iota(p.begin(), p.begin() + k, 0);
  do {
    out.push_back({p, permutation_sign(p.data(), k)});
  } while (std::next_permutation(p.begin(), p.begin() + k));
  return out;
}

}  // namespace

const std::vector<IndexSet>& combinations(int k) {
  static const auto table = [] {
    std::array<std::vector<IndexSet>, kDim + 1> t;
    for (int k = 0; k <= kDim; ++k) t[k] = build_combinations(k);
    return t;
  }();
  if (k < 0 || k > kDim) throw RankError("combination size out of range");
  return table[k];
}

int combination_rank(const int* sorted, int k) {
  static const auto lookup = [] {
    // bitmask -> position
    std::array<int, 1 << kDim> t{};
    for (int k = 0; k <= kDim; ++k) {
      const auto& cs = combinations(k);
      for (std::size_t n = 0; n < cs.size(); ++n) {
        int mask = 0;
        for (int s = 0; s < k; ++s) mask |= 1 << cs[n][s];
        t[mask] = static_cast<int>(n);
      }
    }
    return t;
  }();
  int mask = 0;
  for (int s = 0; s < k; ++s) mask |= 1 << sorted[s];
  return lookup[mask];
}

const std::vector<SignedPermutation>& permutations(int k) {
  static const auto table = [] {
    std::array<std::vector<SignedPermutation>, kDim + 1> t;
    for (int k = 0; k <= kDim; ++k) t[k] = build_permutations(k);
    return t;
  }();
  if (k < 0 || k > kDim) throw RankError("permutation size out of range");
  return table[k];
}

int permutation_sign(const int* idx, int n) {
  int sign = 1;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (idx[a] == idx[b]) return 0;
      if (idx[a] > idx[b]) sign = -sign;
    }
  return sign;
}

IndexSet complement(const IndexSet& set, int k) {
  IndexSet out{};
  std::array<bool, kDim> used{};
  for (int s = 0; s < k; ++s) used[set[s]] = true;
  int n = 0;
  for (int i = 0; i < kDim; ++i)
    if (!used[i]) out[n++] = i;
  return out;
}

}  // namespace g2
