#include <doctest.h>

#include <cmath>

#include "g2flow/diagnostics.hpp"
#include "g2flow/lie_examples.hpp"

using namespace g2;

namespace {

EvolutionResiduals nilpotent_residuals(double dt) {
  const auto ex = nilpotent_example<double>(1.0);
  FlowConfig cfg;
  cfg.dt = dt;
  cfg.t_end = 20 * 2e-4;
  const auto traj = FlowIntegrator<LieFlowBackend>(LieFlowBackend(ex.alg), cfg).run({0.0, ex.phi});
  return evolution_residuals(ex.alg, traj);
}

}  // namespace

TEST_CASE("flat-point terms of the scalar equation, exact") {
  // ||½ψ||²/3 = 14 and ||ψ||²/3 = 56 with ||ψ||² = 168.
  const auto w = flat_point_terms<Rational>(true);
  CHECK(w.sq_rr == 14);
  CHECK(w.sq_ttr == 56);
  CHECK(w.sq_tt == 56);
  CHECK(w.flat_squares() == 126);
  CHECK(w.constant == -126);
  CHECK(w.total() == 0);
  const auto p = flat_point_terms<Rational>(false);
  CHECK(p.sq_rr == 56);
  CHECK(p.total() == 42);
  const auto fp = flat_point_check();
  CHECK(fp.corrected == 0);
  CHECK(fp.uncorrected == 42);
  CHECK(fp.r_form_constant == -189);
  CHECK(fp.r_form_quoted == -210);
}

TEST_CASE("convergence order helper") {
  CHECK(convergence_order(4e-6, 1e-6) == doctest::Approx(2));
  CHECK(convergence_order(1.6e-5, 1e-6) == doctest::Approx(4));
  CHECK(std::isnan(convergence_order(1e-16, 1e-17)));
}

TEST_CASE("static identities on random closed structures") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 20; ++i) {
    const auto ex = random_closed_structure(rng);
    const auto rep = static_identities(ex.alg, ex.phi);
    CHECK(rep.max() <= 1e-8);
  }
}

TEST_CASE("sample evaluation on the nilpotent example") {
  const auto ex = nilpotent_example<double>(1.0);
  const auto ev = evaluate_sample(ex.alg, ex.phi);
  CHECK(ev.r == doctest::Approx(-1));
  CHECK(ev.t2 == doctest::Approx(0.5));
  CHECK(ev.s == doctest::Approx(2.0 / 3 * ev.r));
  CHECK(ev.ricci_trace_gap < 1e-10);
  CHECK(ev.wa.total() == doctest::Approx(ev.rhs_scalar * 2.0 / 3).epsilon(1e-10));
}

TEST_CASE("evolution residuals converge at second order") {
  const auto coarse = nilpotent_residuals(2e-4);
  const auto fine = nilpotent_residuals(1e-4);
  const auto ac = coarse.asserted(), af = fine.asserted();
  for (const auto& [name, series] : af) {
    const double order = convergence_order(ac.at(name)->max(), series->max());
    CHECK_MESSAGE(order >= 1.9, name << " order " << order);
    CHECK_MESSAGE(series->max() <= 1e-6, name << " residual " << series->max());
  }
  CHECK(fine.ricci_trace_gap < 1e-8);
  // The variant with curvature in the ψ term leaves an O(1) residual.
  CHECK(fine.torsion_uncorrected.max() > 0.1);
  CHECK(fine.wellarranged_uncorrected.max() > 0.1);
}
