// One pass/fail line per acceptance criterion; exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "g2flow/app/scenario.hpp"
#include "g2flow/diagnostics.hpp"
#include "g2flow/estimates.hpp"
#include "g2flow/identity_suite.hpp"
#include "g2flow/lie_examples.hpp"
#include "g2flow/lie_flow.hpp"

using namespace g2;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

constexpr std::uint64_t kEnsembleSeed = 20240101;
constexpr int kEnsembleSize = 20;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double worst(const std::vector<CheckResult>& rs, const std::vector<std::string>& names, bool& ok) {
  double w = 0;
  for (const auto& r : rs)
    for (const auto& n : names)
      if (r.name == n) {
        w = std::max(w, r.deviation);
        ok = ok && r.passed;
      }
  return w;
}

std::vector<LieExample<double>> ensemble() {
  std::mt19937_64 rng(kEnsembleSeed);
  std::vector<LieExample<double>> out;
  for (int i = 0; i < kEnsembleSize; ++i) out.push_back(random_closed_structure(rng));
  return out;
}

Outcome ensemble_criterion(const std::vector<std::string>& names) {
  bool ok = true;
  double w = 0;
  for (const auto& ex : ensemble())
    w = std::max(w, worst(closed_torsion_suite<double>(ex.alg, ex.phi, 1e-8), names, ok));
  return {ok, std::to_string(kEnsembleSize) + " structures, max deviation " + fmt("%.2e", w)};
}

Outcome criterion1() {
  const auto rs = algebraic_suite<Rational>(standard_phi<Rational>(), true, 0.0);
  bool exact = true;
  for (const auto& r : rs) exact = exact && r.exact;
  return {all_passed(rs) && exact,
          std::to_string(rs.size()) + " exact checks, failed: " +
              std::to_string(failed_names(rs).size())};
}

Outcome criterion2() {
  const auto rs = projector_suite<Rational>(standard_structure<Rational>(), 0.0);
  return {all_passed(rs), std::to_string(rs.size()) + " exact checks"};
}

Outcome criterion3() {
  const auto alg = LieAlgebra<Rational>::abelian();
  const auto j = lie_g2_jet(alg, standard_phi<Rational>());
  const auto lap = hodge_laplacian(alg, j.s.phi, j.s.metric);
  const bool static_ok = j.t.is_zero_tensor() && j.curv.scalar == 0 && lap.is_zero_tensor();
  FlowConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.sample_every = 1000;
  const LieFlowBackend b(LieAlgebra<double>::abelian());
  const auto traj = FlowIntegrator<LieFlowBackend>(b, cfg).run({0.0, standard_phi<double>()});
  const double change = (traj.back().phi - standard_phi<double>()).max_abs();
  return {static_ok && cfg.steps() == 1000 && change <= 1e-12,
          "T, R, Laplacian exactly zero: " + std::string(static_ok ? "yes" : "no") +
              "; 1000-step change " + fmt("%.2e", change)};
}

Outcome criterion7() {
  const auto ex = nilpotent_example<double>(2.0);
  const LieFlowBackend inner(ex.alg);
  const MetricTrackingBackend b(inner);
  double err[2] = {0, 0};
  bool closed = true, volume = true, scalar = true;
  for (int r = 0; r < 2; ++r) {
    FlowConfig cfg;
    cfg.dt = 1e-3 / (1 << r);
    cfg.t_end = 1.0;
    cfg.sample_every = 10 << r;
    const auto traj =
        FlowIntegrator<MetricTrackingBackend>(b, cfg).run({0.0, {ex.phi, kronecker<double>()}});
    double prev = 0;
    for (const auto& s : traj) {
      const auto h = inner.health(s.phi.phi);
      closed = closed && h.closedness <= 1e-8;
      const double vol = hitchin_functional(s.phi.phi);
      volume = volume && vol >= prev;
      prev = vol;
      scalar = scalar && lie_g2_jet(ex.alg, s.phi.phi).curv.scalar <= 0;
      err[r] = std::max(err[r], (metric_from_phi(s.phi.phi).g - s.phi.g).max_abs());
    }
  }
  const double order = std::log2(err[0] / err[1]);
  return {closed && volume && scalar && order >= 3.5,
          "closed " + std::string(closed ? "yes" : "no") + ", volume nondecreasing " +
              (volume ? "yes" : "no") + ", R <= 0 " + (scalar ? "yes" : "no") +
              ", metric agreement order " + fmt("%.3f", order)};
}

Outcome criterion8() {
  const auto ex = nilpotent_example<double>(1.0);
  const LieFlowBackend b(ex.alg);
  EvolutionResiduals res[2];
  for (int r = 0; r < 2; ++r) {
    FlowConfig cfg;
    cfg.dt = 2e-4 / (1 << r);
    cfg.t_end = 20 * 2e-4;
    res[r] = evolution_residuals(ex.alg, FlowIntegrator<LieFlowBackend>(b, cfg).run({0.0, ex.phi}));
  }
  bool ok = flat_point_check().corrected == 0;
  double min_order = 1e300, max_res = 0;
  const auto coarse = res[0].asserted(), fine = res[1].asserted();
  for (const auto& [name, series] : fine) {
    const double order = convergence_order(coarse.at(name)->max(), series->max());
    min_order = std::min(min_order, order);
    max_res = std::max(max_res, series->max());
    ok = ok && order >= 1.9 && series->max() <= 1e-6;
  }
  return {ok, "min order " + fmt("%.3f", min_order) + ", max residual at dt=1e-4 " +
                  fmt("%.2e", max_res) + ", flat-point constant exactly 0"};
}

Outcome criterion9() {
  LatticeSpec spec;
  spec.sizes = {32, 32};
  spec.spacings = {1.0 / 32, 1.0 / 32};
  const Lattice lat(spec);
  const double eps = 0.05;
  const LatticeForm phi0 = perturbed_standard(
      lat, {{2, 3, eps, {1, 1}, 0.0}, {2, 3, eps, {1, -1}, 0.3}, {4, 6, eps, {1, 2}, 0.0},
            {0, 5, eps, {1, 2}, 1.0}});
  EstimateConfig cfg;
  cfg.x0 = {0.5, 0.5};
  cfg.k = 1.5 * estimate_quantities(lat, phi0, cfg).ric_max;
  cfg.rho = 0.3 * std::sqrt(cfg.k);
  const LatticeFlowBackend b(lat);
  EstimateReport rep[2];
  for (int r = 0; r < 2; ++r) {
    FlowConfig fc;
    fc.dt = 2e-4 / (1 << r);
    fc.t_end = 0.01;
    fc.sample_every = 5 << r;
    rep[r] = estimate_report(lat, FlowIntegrator<LatticeFlowBackend>(b, fc).run({0.0, phi0}), cfg);
  }
  bool ok = true;
  for (const auto& e : rep) ok = ok && e.ricci_bound_held && e.finite && e.a3_le_a4 && e.c_hat_defined;
  const double rel = std::abs(rep[1].c_hat - rep[0].c_hat) / std::abs(rep[1].c_hat);
  ok = ok && rel <= 0.2;
  return {ok, "K " + fmt("%.3f", cfg.k) + ", c_hat " + fmt("%.6f", rep[0].c_hat) + " vs " +
                  fmt("%.6f", rep[1].c_hat) + " (relative change " + fmt("%.1e", rel) + ")"};
}

Outcome criterion10() {
  auto phi = standard_phi<Rational>();
  const int idx[3] = {0, 1, 2};
  set_form_component(phi, idx, Rational(1001, 1000));
  const auto rs = algebraic_suite_auto(phi, true);
  const bool corrupted_fails = !all_passed(rs);
  bool rejected = false;
  try {
    parse_scenario_text(R"({"backend": {"type": "lie",
      "structure_constants": [[1, 2, 3, 1], [1, 3, 1, 1]]}})");
  } catch (const ScenarioError& e) {
    rejected = std::string(e.what()).find("Jacobi") != std::string::npos;
  }
  std::string names;
  for (const auto& n : failed_names(rs)) names += (names.empty() ? "" : ",") + n;
  return {corrupted_fails && rejected,
          "corrupted coefficient fails [" + names + "]; non-Jacobi file rejected " +
              (rejected ? "yes" : "no")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    double limit_s;  // 0 when no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {1, 10, criterion1},
      {2, 0, criterion2},
      {3, 30, criterion3},
      {4, 0, [] { return ensemble_criterion({"torsion_antisymmetric", "torsion_divergence_free",
                                             "scalar_minus_two_t2", "ricci_from_torsion",
                                             "ricci_from_torsion_general"}); }},
      {5, 0, [] { return ensemble_criterion({"grad_torsion_formula", "bianchi_identity",
                                             "phi_trace_grad_torsion"}); }},
      {6, 0, [] { return ensemble_criterion({"laplacian_is_i_phi_h", "laplacian_pi7_zero",
                                             "laplacian_norm"}); }},
      {7, 120, criterion7},
      {8, 0, criterion8},
      {9, 300, criterion9},
      {10, 0, criterion10},
  };
  int failures = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0 && secs >= c.limit_s) {
      o.passed = false;
      o.detail += "; runtime over limit";
    }
    failures += !o.passed;
    std::printf("criterion %d: %s (%.2f s) %s\n", c.id, o.passed ? "PASS" : "FAIL", secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
