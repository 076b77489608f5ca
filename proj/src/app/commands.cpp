#include "g2flow/app/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include "g2flow/diagnostics.hpp"
#include "g2flow/estimates.hpp"
#include "g2flow/identity_suite.hpp"
#include "g2flow/lie_examples.hpp"
#include "g2flow/lie_flow.hpp"

namespace g2 {

using nlohmann::ordered_json;

namespace {

std::ostream& out_of(const RunOptions& o) { return o.out ? *o.out : std::cout; }
std::ostream& err_of(const RunOptions& o) { return o.err ? *o.err : std::cerr; }

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path().empty() ? "." : p.parent_path());
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

LieAlgebra<double> as_double(const LieAlgebra<Rational>& a) {
  return LieAlgebra<double>(a.structure_constants().cast<double>());
}

struct Assertion {
  std::string name;
  bool passed;
  double value;
  double tolerance;
};

ordered_json assertions_json(const std::vector<Assertion>& as) {
  ordered_json arr = ordered_json::array();
  for (const auto& a : as)
    arr.push_back({{"name", a.name}, {"passed", a.passed}, {"value", a.value}, {"tolerance", a.tolerance}});
  return arr;
}

std::vector<std::string> failed(const std::vector<Assertion>& as) {
  std::vector<std::string> out;
  for (const auto& a : as)
    if (!a.passed) out.push_back(a.name);
  return out;
}

ordered_json checks_json(const std::vector<CheckResult>& rs) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rs)
    arr.push_back({{"name", r.name}, {"passed", r.passed}, {"deviation", r.deviation}, {"exact", r.exact}});
  return arr;
}

void append(std::vector<CheckResult>& to, const std::vector<CheckResult>& from,
            const std::string& prefix = "") {
  for (auto r : from) {
    r.name = prefix + r.name;
    to.push_back(r);
  }
}

FlowConfig refined(FlowConfig f, int level, bool keep_sample_times) {
  const long factor = 1L << level;
  f.dt /= static_cast<double>(factor);
  if (keep_sample_times) f.sample_every *= static_cast<int>(factor);
  return f;
}

// Random smooth-looking test data for the adjointness check.
LatticeForm random_lattice_form(int k, std::size_t points, std::mt19937_64& rng) {
  LatticeForm f(k, points);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& v : f.data) v = u(rng);
  return f;
}

EstimateConfig auto_estimates(double ric_max, std::vector<double> x0) {
  EstimateConfig c;
  c.k = std::max(1.5 * ric_max, 1.0);
  c.rho = 0.3 * std::sqrt(c.k);
  c.x0 = std::move(x0);
  return c;
}

ordered_json estimate_config_json(const EstimateConfig& c) {
  return {{"x0", c.x0}, {"rho", c.rho}, {"K", c.k}, {"p", c.p}, {"c", c.c}};
}

ordered_json report_json(const EstimateReport& r) {
  return {{"valid_samples", r.valid_samples},
          {"samples", r.t.size()},
          {"ricci_bound_held", r.ricci_bound_held},
          {"finite", r.finite},
          {"a3_le_a4", r.a3_le_a4},
          {"c_hat", r.c_hat_defined ? ordered_json(r.c_hat) : ordered_json(nullptr)}};
}

void append_estimates_csv(std::string& csv, int level, double dt, const EstimateReport& r) {
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    const auto& q = r.q[i];
    csv += std::to_string(level) + "," + fmt17(dt) + "," + fmt17(r.t[i]);
    for (double v : {q.a1, q.a2, q.a3, q.a4, q.b1, q.b2, q.u, q.ric_max}) csv += "," + fmt17(v);
    csv += "\n";
  }
}

ordered_json flat_point_json(const FlatPointCheck& fp) {
  return {{"corrected", fp.corrected.get_str()},
          {"uncorrected", fp.uncorrected.get_str()},
          {"r_form_constant", fp.r_form_constant.get_str()},
          {"r_form_quoted", fp.r_form_quoted.get_str()}};
}

const char* kEstimatesHeader = "level,dt,t,A1,A2,A3,A4,B1,B2,U,ric_max\n";

// Estimate assertions shared by both backends: finiteness, A3 ≤ A4 on every
// level, and ĉ agreeing within 20% between consecutive levels.
void assert_estimates(const std::vector<EstimateReport>& reps, std::vector<Assertion>& as) {
  bool finite = true, ordered = true;
  for (const auto& r : reps) {
    finite = finite && r.finite;
    ordered = ordered && r.a3_le_a4;
  }
  as.push_back({"estimates_finite", finite, finite ? 0.0 : 1.0, 0});
  as.push_back({"estimates_a3_le_a4", ordered, ordered ? 0.0 : 1.0, 0});
  for (std::size_t l = 1; l < reps.size(); ++l) {
    const auto& a = reps[l - 1];
    const auto& b = reps[l];
    const std::string name = "c_hat_stable_level_" + std::to_string(l);
    if (!a.c_hat_defined || !b.c_hat_defined) {
      const bool both_undefined = !a.c_hat_defined && !b.c_hat_defined;
      as.push_back({name, both_undefined, both_undefined ? 0.0 : 1.0, 0.2});
      continue;
    }
    const double rel = std::abs(b.c_hat - a.c_hat) / std::max(std::abs(b.c_hat), 1e-300);
    as.push_back({name, rel <= 0.2 || std::abs(b.c_hat - a.c_hat) <= 1e-12, rel, 0.2});
  }
}

int finish(const std::vector<Assertion>& as, ordered_json report, const std::filesystem::path& path,
           const RunOptions& opt) {
  report["assertions"] = assertions_json(as);
  report["failed"] = failed(as);
  write_file(path, report.dump(2) + "\n");
  for (const auto& a : as)
    out_of(opt) << (a.passed ? "PASS " : "FAIL ") << a.name << " value=" << fmt17(a.value)
                << " tol=" << a.tolerance << "\n";
  return failed(as).empty() ? kExitOk : kExitCheckFailed;
}

// ---- check ----

int check_lie(const Scenario& s, const RunOptions& opt) {
  const LieSetup setup = build_lie(s);
  // Without a frame change the structure must be the standard one, whether it
  // came from "standard" or from an explicit coefficient table.
  const bool standard = s.frame_change.empty();
  std::vector<CheckResult> rs;
  append(rs, algebraic_suite_auto(setup.phi, standard));
  append(rs, projector_suite_auto(setup.phi));
  append(rs, closed_torsion_suite_auto(setup.alg, setup.phi));
  rs.push_back(flat_point_suite());
  if (opt.seed) {
    std::mt19937_64 rng(*opt.seed);
    for (int i = 0; i < 20; ++i) {
      const auto ex = random_closed_structure(rng);
      append(rs, closed_torsion_suite<double>(ex.alg, ex.phi, 1e-8),
             "random_" + std::to_string(i) + ".");
    }
  }
  ordered_json j;
  j["scenario"] = s.name;
  j["backend"] = "lie";
  j["checks"] = checks_json(rs);
  j["failed"] = failed_names(rs);
  write_file(opt.out_dir / "check.json", j.dump(2) + "\n");
  for (const auto& r : rs)
    out_of(opt) << (r.passed ? "PASS " : "FAIL ") << r.name << " deviation=" << fmt17(r.deviation)
                << "\n";
  return all_passed(rs) ? kExitOk : kExitCheckFailed;
}

int check_lattice(const Scenario& s, const RunOptions& opt) {
  const Lattice lat = build_lattice(s);
  const LatticeForm phi = build_lattice_phi(s, lat);
  std::vector<CheckResult> rs;
  const Tensor<Rational> phi0 = initial_phi_exact(s);
  append(rs, algebraic_suite_auto(phi0, true), "constant_part.");
  append(rs, projector_suite_auto(phi0), "constant_part.");
  rs.push_back(flat_point_suite());

  const double closed = exterior_derivative(lat, phi).max_abs();
  rs.push_back(detail::make_check<double>("initial_closed", closed, s.flow.closedness_tol));

  const LatticeForm fast = laplacian_phi(lat, phi, LatticeKernel::Parallel);
  const LatticeForm slow = laplacian_phi(lat, phi, LatticeKernel::Serial);
  LatticeForm diff = fast;
  diff.axpy(-1, slow);
  rs.push_back(detail::make_check<double>("kernel_agreement", diff.max_abs(), 1e-9 * (1 + fast.max_abs())));

  std::mt19937_64 rng(opt.seed.value_or(0));
  const MetricField m = metric_field(lat, phi);
  const LatticeForm a = random_lattice_form(2, lat.points(), rng);
  const LatticeForm b = random_lattice_form(3, lat.points(), rng);
  const double lhs = l2_inner(lat, exterior_derivative(lat, a), b, m);
  const double rhs = l2_inner(lat, a, codifferential(lat, b, m), m);
  rs.push_back(detail::make_check<double>("codifferential_adjoint", std::abs(lhs - rhs),
                                  1e-10 * (1 + std::abs(lhs))));

  ordered_json j;
  j["scenario"] = s.name;
  j["backend"] = "lattice";
  j["checks"] = checks_json(rs);
  j["failed"] = failed_names(rs);
  write_file(opt.out_dir / "check.json", j.dump(2) + "\n");
  for (const auto& r : rs)
    out_of(opt) << (r.passed ? "PASS " : "FAIL ") << r.name << " deviation=" << fmt17(r.deviation)
                << "\n";
  return all_passed(rs) ? kExitOk : kExitCheckFailed;
}

// ---- flow ----

template <class Backend, class RowFn>
int run_flow(const Backend& backend, typename Backend::State phi, const FlowConfig& cfg,
             const std::filesystem::path& csv_path, RowFn row, const RunOptions& opt) {
  std::filesystem::create_directories(opt.out_dir);
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
  csv << csv_header();
  FlowIntegrator<Backend> integ(backend, cfg);
  try {
    integ.run({0.0, std::move(phi)}, [&](const auto& st) {
      csv << csv_row(row(st.phi, st.t)) << std::flush;
    });
  } catch (const FlowBlowupError& e) {
    err_of(opt) << "flow blowup after t=" << fmt17(e.t) << ": " << e.what() << "\n";
    return kExitBlowup;
  } catch (const ClosednessDriftError& e) {
    err_of(opt) << "closedness drift after t=" << fmt17(e.t) << ": " << e.what() << "\n";
    return kExitClosednessDrift;
  }
  out_of(opt) << "wrote " << csv_path.string() << "\n";
  return kExitOk;
}

// ---- diagnose ----

int diagnose_lie(const Scenario& s, const RunOptions& opt) {
  const LieSetup setup = build_lie(s);
  const LieAlgebra<double> alg = as_double(setup.alg);
  const Tensor<double> phi0 = setup.phi.cast<double>();
  const LieFlowBackend backend(alg);

  EstimateConfig ecfg = s.estimates;
  if (!s.has_estimates) ecfg = auto_estimates(estimate_quantities(alg, phi0, EstimateConfig{}).ric_max, {});

  std::vector<Assertion> as;
  ordered_json report;
  report["scenario"] = s.name;
  report["backend"] = "lie";

  const FlatPointCheck fp = flat_point_check();
  report["flat_point"] = flat_point_json(fp);
  as.push_back({"flat_point_balance", fp.corrected == 0, g2::to_double(fp.corrected), 0});

  std::string res_csv =
      "level,dt,t,torsion,scalar,scalar_alt,wellarranged,ricci,metric,volume,torsion_uncorrected,"
      "wellarranged_uncorrected\n";
  std::string est_csv = kEstimatesHeader;
  std::vector<std::map<std::string, double>> maxima;
  std::vector<EstimateReport> reps;
  ordered_json levels = ordered_json::array();
  Trajectory<Tensor<double>> last;

  for (int l = 0; l <= opt.dt_halve; ++l) {
    const FlowConfig cfg = refined(s.flow, l, false);
    const auto traj = FlowIntegrator<LieFlowBackend>(backend, cfg).run({0.0, phi0});
    const EvolutionResiduals ev = evolution_residuals(alg, traj);
    const ResidualSeries met = metric_evolution_residual(alg, traj);
    const ResidualSeries vol = volume_evolution_residual(alg, traj);
    std::map<std::string, double> mx;
    for (const auto& [name, series] : ev.asserted()) mx[name] = series->max();
    mx["metric"] = met.max();
    mx["volume"] = vol.max();
    maxima.push_back(mx);
    for (std::size_t i = 0; i < met.t.size(); ++i) {
      res_csv += std::to_string(l) + "," + fmt17(cfg.dt) + "," + fmt17(met.t[i]);
      for (double v : {ev.torsion.residual[i], ev.scalar.residual[i], ev.scalar_alt.residual[i],
                       ev.wellarranged.residual[i], ev.ricci.residual[i], met.residual[i],
                       vol.residual[i], ev.torsion_uncorrected.residual[i],
                       ev.wellarranged_uncorrected.residual[i]})
        res_csv += "," + fmt17(v);
      res_csv += "\n";
    }
    const EstimateReport rep = estimate_report(alg, traj, ecfg);
    append_estimates_csv(est_csv, l, cfg.dt, rep);
    reps.push_back(rep);
    ordered_json lj;
    lj["level"] = l;
    lj["dt"] = cfg.dt;
    lj["samples"] = traj.size();
    lj["residual_max"] = mx;
    lj["residual_max_uncorrected_variants"] = {{"torsion", ev.torsion_uncorrected.max()},
                                           {"wellarranged", ev.wellarranged_uncorrected.max()}};
    lj["ricci_trace_gap"] = ev.ricci_trace_gap;
    lj["scalar_vs_s_gap"] = ev.scalar_vs_s_gap;
    if (!ev.wa_terms.empty()) lj["wellarranged_terms_first_interior"] = ev.wa_terms.front();
    lj["estimates"] = report_json(rep);
    levels.push_back(lj);
    last = traj;
  }
  report["levels"] = levels;
  report["estimate_config"] = estimate_config_json(ecfg);

  const StaticIdentityReport st0 = static_identities(alg, last.front().phi);
  const StaticIdentityReport st1 = static_identities(alg, last.back().phi);
  report["static_identities"] = {{"initial", st0.max()}, {"final", st1.max()}};
  as.push_back({"static_identities", std::max(st0.max(), st1.max()) <= 1e-8,
                std::max(st0.max(), st1.max()), 1e-8});

  const auto& finest = maxima.back();
  for (const auto& [name, v] : finest)
    as.push_back({"residual_" + name, v <= s.residual_tolerance, v, s.residual_tolerance});

  ordered_json orders = ordered_json::object();
  for (std::size_t l = 1; l < maxima.size(); ++l)
    for (const auto& [name, fine] : maxima[l]) {
      const double coarse = maxima[l - 1].at(name);
      const double ord = convergence_order(coarse, fine, 1e-12);
      orders[name].push_back(ord);
      const bool floor = std::isnan(ord) && fine <= 1e-12;
      as.push_back({"order_" + name + "_level_" + std::to_string(l), floor || ord >= s.order_threshold,
                    ord, s.order_threshold});
    }
  report["orders"] = orders;
  assert_estimates(reps, as);

  write_file(opt.out_dir / "residuals.csv", res_csv);
  write_file(opt.out_dir / "estimates.csv", est_csv);
  return finish(as, report, opt.out_dir / s.diagnostics, opt);
}

int diagnose_lattice(const Scenario& s, const RunOptions& opt) {
  const Lattice lat = build_lattice(s);
  const LatticeForm phi0 = build_lattice_phi(s, lat);
  const LatticeFlowBackend backend(lat);

  EstimateConfig ecfg = s.estimates;
  if (!s.has_estimates) {
    std::vector<double> centre;
    for (int a = 0; a < lat.active(); ++a)
      centre.push_back(0.5 * s.lattice.sizes[a] * s.lattice.spacings[a]);
    EstimateConfig probe;
    probe.x0 = centre;
    ecfg = auto_estimates(estimate_quantities(lat, phi0, probe).ric_max, centre);
  }

  std::vector<Assertion> as;
  ordered_json report;
  report["scenario"] = s.name;
  report["backend"] = "lattice";
  report["unsupported"] = {"torsion_evolution", "scalar_evolution", "wellarranged_evolution",
                           "ricci_evolution", "metric_evolution", "volume_evolution"};
  const FlatPointCheck fp = flat_point_check();
  report["flat_point"] = flat_point_json(fp);
  as.push_back({"flat_point_balance", fp.corrected == 0, g2::to_double(fp.corrected), 0});

  std::string est_csv = kEstimatesHeader;
  std::vector<EstimateReport> reps;
  ordered_json levels = ordered_json::array();
  for (int l = 0; l <= opt.dt_halve; ++l) {
    const FlowConfig cfg = refined(s.flow, l, true);
    const auto traj = FlowIntegrator<LatticeFlowBackend>(backend, cfg).run({0.0, phi0});
    double drift = 0;
    for (const auto& st : traj) drift = std::max(drift, exterior_derivative(lat, st.phi).max_abs());
    const EstimateReport rep = estimate_report(lat, traj, ecfg);
    append_estimates_csv(est_csv, l, cfg.dt, rep);
    reps.push_back(rep);
    levels.push_back({{"level", l},
                      {"dt", cfg.dt},
                      {"samples", traj.size()},
                      {"closedness_drift", drift},
                      {"estimates", report_json(rep)}});
    as.push_back({"closedness_level_" + std::to_string(l), drift <= s.flow.closedness_tol, drift,
                  s.flow.closedness_tol});
  }
  report["levels"] = levels;
  report["estimate_config"] = estimate_config_json(ecfg);
  assert_estimates(reps, as);
  write_file(opt.out_dir / "estimates.csv", est_csv);
  return finish(as, report, opt.out_dir / s.diagnostics, opt);
}

}  // namespace

std::string csv_header() { return "t,R,T_norm2,vol,Rm_norm,closedness_drift,min_eig_g\n"; }

std::string csv_row(const SampleRow& r) {
  std::string out;
  for (double v : {r.t, r.scalar, r.t2, r.vol, r.rm, r.closedness}) out += fmt17(v) + ",";
  return out + fmt17(r.min_eig) + "\n";
}

SampleRow lie_sample_row(const LieAlgebra<double>& alg, const Tensor<double>& phi, double t) {
  const auto j = lie_g2_jet(alg, phi);
  const auto& m = j.s.metric;
  const auto ev = symmetric_eigenvalues(to_matrix(m.g));
  SampleRow r;
  r.t = t;
  r.scalar = j.curv.scalar;
  r.t2 = torsion_norm2(j.t, m);
  r.vol = sqrt_det(m);
  r.rm = std::sqrt(norm2(j.curv.rm, m));
  r.closedness = j.dphi.max_abs();
  r.min_eig = *std::min_element(ev.begin(), ev.end());
  return r;
}

SampleRow lattice_sample_row(const Lattice& lat, const LatticeForm& phi, double t) {
  const LatticeSample smp = lattice_sample(lat, phi);
  SampleRow r;
  r.t = t;
  r.scalar = smp.max_scalar;
  r.t2 = smp.max_t2;
  r.vol = smp.volume;
  r.rm = smp.max_rm;
  r.closedness = smp.closedness;
  r.min_eig = smp.min_eigenvalue;
  return r;
}

int cmd_check(const Scenario& s, const RunOptions& opt) {
  return s.backend == Scenario::Backend::Lie ? check_lie(s, opt) : check_lattice(s, opt);
}

int cmd_flow(const Scenario& s, const RunOptions& opt) {
  const FlowConfig cfg = refined(s.flow, opt.dt_halve, true);
  const auto csv_path = opt.out_dir / s.csv;
  if (s.backend == Scenario::Backend::Lie) {
    const LieSetup setup = build_lie(s);
    const LieAlgebra<double> alg = as_double(setup.alg);
    return run_flow(LieFlowBackend(alg), setup.phi.cast<double>(), cfg, csv_path,
                    [&](const Tensor<double>& phi, double t) { return lie_sample_row(alg, phi, t); },
                    opt);
  }
  const Lattice lat = build_lattice(s);
  return run_flow(LatticeFlowBackend(lat), build_lattice_phi(s, lat), cfg, csv_path,
                  [&](const LatticeForm& phi, double t) { return lattice_sample_row(lat, phi, t); },
                  opt);
}

int cmd_diagnose(const Scenario& s, const RunOptions& opt) {
  return s.backend == Scenario::Backend::Lie ? diagnose_lie(s, opt) : diagnose_lattice(s, opt);
}

int run_command(const std::string& command, const std::filesystem::path& scenario,
                const RunOptions& opt) {
  try {
    const Scenario s = load_scenario(scenario);
    if (opt.dt_halve < 0 || opt.dt_halve > 12) throw ScenarioError("--dt-halve must be in [0, 12]");
    if (command == "check") return cmd_check(s, opt);
    if (command == "flow") return cmd_flow(s, opt);
    if (command == "diagnose") return cmd_diagnose(s, opt);
    err_of(opt) << "unknown command " << command << "\n";
    return kExitUsage;
  } catch (const ScenarioError& e) {
    err_of(opt) << e.what() << "\n";
    return kExitUsage;
  } catch (const FlowBlowupError& e) {
    err_of(opt) << "flow blowup after t=" << fmt17(e.t) << ": " << e.what() << "\n";
    return kExitBlowup;
  } catch (const ClosednessDriftError& e) {
    err_of(opt) << "closedness drift after t=" << fmt17(e.t) << ": " << e.what() << "\n";
    return kExitClosednessDrift;
  } catch (const std::exception& e) {
    err_of(opt) << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace g2
