#pragma once

// Stock left-invariant closed G2-structures used by tests and scenarios.

#include <cstdint>
#include <random>

#include "g2flow/g2algebra.hpp"
#include "g2flow/lie.hpp"

namespace g2 {

template <ScalarKind S>
struct LieExample {
  LieAlgebra<S> alg;
  Tensor<S> phi;
};

// [e2,e3] = s e5, [e1,e3] = s e6 (1-based) with the standard φ, which is closed.
template <ScalarKind S>
LieExample<S> nilpotent_example(const S& s = S(1)) {
  return {LieAlgebra<S>::from_brackets({{1, 2, 4, s}, {0, 2, 5, s}}), standard_phi<S>()};
}

// 2-step nilpotent algebras with brackets of e1,e2,e3 into e5,e6,e7 for which
// the standard φ is closed: exact basis of that linear family.
const std::vector<LieAlgebra<Rational>>& closed_nilpotent_family();

// Random element of the family above in a random positively oriented frame.
LieExample<double> random_closed_structure(std::mt19937_64& rng, double frame_spread = 0.3);

// Random invertible A with det A > 0.
Tensor<double> random_frame(std::mt19937_64& rng, double spread);

}  // namespace g2
