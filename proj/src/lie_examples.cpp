#include "g2flow/lie_examples.hpp"

#include "g2flow/linalg.hpp"

namespace g2 {

namespace {

struct Slot {
  int i, j, k;
};

std::vector<Slot> family_slots() {
  std::vector<Slot> out;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      for (int k = 4; k < 7; ++k) out.push_back({i, j, k});
  return out;
}

}  // namespace

const std::vector<LieAlgebra<Rational>>& closed_nilpotent_family() {
  static const std::vector<LieAlgebra<Rational>> family = [] {
    const auto slots = family_slots();
    const auto phi = standard_phi<Rational>();
    const auto& quads = combinations(4);
    Matrix<Rational> m(static_cast<int>(quads.size()), static_cast<int>(slots.size()));
    for (std::size_t c = 0; c < slots.size(); ++c) {
      const auto alg = LieAlgebra<Rational>::from_brackets(
          {{slots[c].i, slots[c].j, slots[c].k, Rational(1)}});
      const auto dphi = alg.exterior_derivative(phi);
      for (std::size_t r = 0; r < quads.size(); ++r)
        m(static_cast<int>(r), static_cast<int>(c)) = form_component(dphi, quads[r].data());
    }
    const Matrix<Rational> basis = null_space(m);
    std::vector<LieAlgebra<Rational>> out;
    for (int b = 0; b < basis.cols(); ++b) {
      std::vector<BracketTerm<Rational>> terms;
      for (std::size_t c = 0; c < slots.size(); ++c)
        if (basis(static_cast<int>(c), b) != 0)
          terms.push_back({slots[c].i, slots[c].j, slots[c].k, basis(static_cast<int>(c), b)});
      out.push_back(LieAlgebra<Rational>::from_brackets(terms));
    }
    return out;
  }();
  return family;
}

Tensor<double> random_frame(std::mt19937_64& rng, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  for (;;) {
    Tensor<double> a = kronecker<double>();
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) a(i, j) += u(rng);
    if (determinant(to_matrix(a)) > 0.1) return a;
  }
}

LieExample<double> random_closed_structure(std::mt19937_64& rng, double frame_spread) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto& family = closed_nilpotent_family();
  Tensor<double> c(3);
  for (const auto& member : family) c.axpy(u(rng), member.structure_constants().cast<double>());
  const LieAlgebra<double> alg(c);
  const Tensor<double> a = random_frame(rng, frame_spread);
  return {alg.change_frame(a), pullback(standard_phi<double>(), a)};
}

}  // namespace g2
