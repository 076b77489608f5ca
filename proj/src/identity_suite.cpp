#include "g2flow/identity_suite.hpp"

#include <stdexcept>

namespace g2 {

bool all_passed(const std::vector<CheckResult>& rs) {
  for (const auto& r : rs)
    if (!r.passed) return false;
  return true;
}

std::vector<std::string> failed_names(const std::vector<CheckResult>& rs) {
  std::vector<std::string> out;
  for (const auto& r : rs)
    if (!r.passed) out.push_back(r.name);
  return out;
}

namespace {

// Runs the exact variant; an irrational metric root falls back to doubles.
template <class Exact, class Approx>
std::vector<CheckResult> exact_or_float(Exact&& exact, Approx&& approx) {
  try {
    return exact();
  } catch (const std::domain_error&) {
    return approx();
  }
}

}  // namespace

std::vector<CheckResult> algebraic_suite_auto(const Tensor<Rational>& phi, bool expect_standard,
                                              double tol) {
  return exact_or_float([&] { return algebraic_suite(phi, expect_standard); },
                        [&] { return algebraic_suite(phi.cast<double>(), expect_standard, tol); });
}

std::vector<CheckResult> projector_suite_auto(const Tensor<Rational>& phi, double tol) {
  return exact_or_float([&] { return projector_suite(make_structure(phi)); },
                        [&] { return projector_suite(make_structure(phi.cast<double>()), tol); });
}

std::vector<CheckResult> closed_torsion_suite_auto(const LieAlgebra<Rational>& alg,
                                                   const Tensor<Rational>& phi, double tol) {
  return exact_or_float(
      [&] { return closed_torsion_suite(alg, phi); },
      [&] {
        const LieAlgebra<double> a(alg.structure_constants().cast<double>());
        return closed_torsion_suite(a, phi.cast<double>(), tol);
      });
}

CheckResult flat_point_suite() {
  const FlatPointCheck fp = flat_point_check();
  return {"flat_point_balance", fp.corrected == 0, std::abs(fp.corrected.get_d()), true};
}

}  // namespace g2
