#include "g2flow/g2algebra.hpp"

namespace g2::detail {

const std::vector<EpsilonBlock>& epsilon_blocks() {
  static const auto blocks = [] {
    std::vector<EpsilonBlock> out;
    const auto& pairs = combinations(2);
    for (int a = 0; a < 21; ++a)
      for (int b = 0; b < 21; ++b) {
        const auto& pa = pairs[a];
        const auto& pb = pairs[b];
        if (pa[0] == pb[0] || pa[0] == pb[1] || pa[1] == pb[0] || pa[1] == pb[1])
          continue;
        std::array<bool, kDim> used{};
        used[pa[0]] = used[pa[1]] = used[pb[0]] = used[pb[1]] = true;
        EpsilonBlock blk{a, b, {}, 0};
        std::array<int, kDim> perm{pa[0], pa[1], pb[0], pb[1]};
        int n = 0;
        for (int i = 0; i < kDim; ++i)
          if (!used[i]) blk.rest[n++] = i;
        for (int s = 0; s < 3; ++s) perm[4 + s] = blk.rest[s];
        blk.sign = permutation_sign(perm.data(), kDim);
        out.push_back(blk);
      }
    return out;
  }();
  return blocks;
}

}  // namespace g2::detail
