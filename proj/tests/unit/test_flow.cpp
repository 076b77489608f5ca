#include <doctest.h>

#include <cmath>

#include "g2flow/lie_examples.hpp"
#include "g2flow/lie_flow.hpp"

using namespace g2;

namespace {

// dx/dt = a x^p with health derived from x.
struct ScalarBackend {
  using State = std::vector<double>;
  double a = -1;
  int power = 1;
  bool lose_positivity_above = false;
  double threshold = 1e300;

  State velocity(const State& x) const {
    if (lose_positivity_above && x[0] > threshold) throw NotPositive("toy");
    return {a * std::pow(x[0], power)};
  }
  StateHealth health(const State& x) const { return {1.0, std::abs(x[0]) * 1e-12, std::abs(x[0])}; }
  void axpy(State& x, double s, const State& y) const { x[0] += s * y[0]; }
};

double exp_error(Method method, double dt) {
  FlowConfig cfg;
  cfg.dt = dt;
  cfg.t_end = 1;
  cfg.method = method;
  cfg.sample_every = 1000000;
  const auto traj = FlowIntegrator<ScalarBackend>(ScalarBackend{}, cfg).run({0.0, {1.0}});
  return std::abs(traj.back().phi[0] - std::exp(-1.0));
}

}  // namespace

TEST_CASE("flow config validation") {
  FlowConfig c;
  CHECK_NOTHROW(c.validate());
  c.dt = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = FlowConfig{};
  c.sample_every = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = FlowConfig{};
  c.t_end = -1;
  CHECK_THROWS_AS(FlowIntegrator<ScalarBackend>(ScalarBackend{}, c), std::invalid_argument);
}

TEST_CASE("integrators converge at their nominal order") {
  CHECK(std::log2(exp_error(Method::Rk4, 0.1) / exp_error(Method::Rk4, 0.05)) ==
        doctest::Approx(4).epsilon(0.05));
  CHECK(std::log2(exp_error(Method::Euler, 0.01) / exp_error(Method::Euler, 0.005)) ==
        doctest::Approx(1).epsilon(0.05));
}

TEST_CASE("sampling schedule") {
  FlowConfig cfg;
  cfg.dt = 0.1;
  cfg.t_end = 1.05;  // 11 steps
  cfg.sample_every = 4;
  std::vector<double> seen;
  const auto traj = FlowIntegrator<ScalarBackend>(ScalarBackend{}, cfg)
                        .run({0.0, {1.0}}, [&](const auto& s) { seen.push_back(s.t); });
  REQUIRE(traj.size() == 4);
  CHECK(seen == std::vector<double>{0.0, 0.4, 0.8, 11 * 0.1});
  CHECK(traj[2].t == 8 * 0.1);
}

TEST_CASE("blowup is reported with the last good state") {
  ScalarBackend b;
  b.a = 1;
  b.power = 2;  // x(t) = 1/(1 − t)
  FlowConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 2;
  cfg.rm_ceiling = 100;
  try {
    FlowIntegrator<ScalarBackend>(b, cfg).run({0.0, {1.0}});
    FAIL("expected blowup");
  } catch (const FlowBlowup<ScalarBackend::State>& e) {
    CHECK(e.last_good.phi[0] <= 100);
    CHECK(e.t == e.last_good.t);
    CHECK(e.t == doctest::Approx(0.99).epsilon(0.01));
  }
  b.lose_positivity_above = true;
  b.threshold = 10;
  CHECK_THROWS_AS(FlowIntegrator<ScalarBackend>(b, cfg).run({0.0, {1.0}}), FlowBlowupError);
}

TEST_CASE("closedness drift is reported separately") {
  ScalarBackend b;
  b.a = 1;
  FlowConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_end = 5;
  cfg.closedness_tol = 1e-11;  // health reports 1e-12 |x|, so drift once x > 10
  try {
    FlowIntegrator<ScalarBackend>(b, cfg).run({0.0, {1.0}});
    FAIL("expected drift");
  } catch (const ClosednessDrift<ScalarBackend::State>& e) {
    CHECK(e.last_good.phi[0] <= 10);
    CHECK(e.t == doctest::Approx(std::log(10.0)).epsilon(0.01));
  } catch (const FlowBlowupError&) {
    FAIL("drift reported as blowup");
  }
}

TEST_CASE("flat structure is a fixed point") {
  const LieFlowBackend b(LieAlgebra<double>::abelian());
  FlowConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1;
  cfg.sample_every = 1000;
  const auto traj = FlowIntegrator<LieFlowBackend>(b, cfg).run({0.0, standard_phi<double>()});
  CHECK((traj.back().phi - standard_phi<double>()).max_abs() <= 1e-12);
}

TEST_CASE("nilpotent flow: volume nondecreasing, scalar curvature nonpositive") {
  const auto ex = nilpotent_example<double>(2.0);
  const LieFlowBackend b(ex.alg);
  FlowConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_end = 1;
  cfg.sample_every = 5;
  const auto traj = FlowIntegrator<LieFlowBackend>(b, cfg).run({0.0, ex.phi});
  double prev = 0;
  for (const auto& s : traj) {
    const double vol = hitchin_functional(s.phi);
    CHECK(vol >= prev);
    prev = vol;
    CHECK(vol == doctest::Approx(hitchin_wedge_form(s.phi)).epsilon(1e-12));
    const auto h = b.health(s.phi);
    CHECK(h.closedness <= 1e-12);
    CHECK(lie_g2_jet(ex.alg, s.phi).curv.scalar <= 0);
  }
  CHECK(prev > 1);
}

TEST_CASE("tracked metric agrees with the metric of the evolved 3-form") {
  const auto ex = nilpotent_example<double>(2.0);
  const LieFlowBackend inner(ex.alg);
  const MetricTrackingBackend b(inner);
  double err[2];
  for (int r = 0; r < 2; ++r) {
    FlowConfig cfg;
    cfg.dt = 0.02 / (1 << r);
    cfg.t_end = 0.2;
    cfg.sample_every = 1000;
    const auto traj =
        FlowIntegrator<MetricTrackingBackend>(b, cfg).run({0.0, {ex.phi, kronecker<double>()}});
    err[r] = (metric_from_phi(traj.back().phi.phi).g - traj.back().phi.g).max_abs();
  }
  CHECK(std::log2(err[0] / err[1]) >= 3.5);
}

TEST_CASE("metric and volume evolution residuals") {
  const auto ex = nilpotent_example<double>(1.0);
  const LieFlowBackend b(ex.alg);
  FlowConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.01;
  const auto traj = FlowIntegrator<LieFlowBackend>(b, cfg).run({0.0, ex.phi});
  CHECK(metric_evolution_residual(ex.alg, traj).max() < 1e-5);
  CHECK(volume_evolution_residual(ex.alg, traj).max() < 1e-5);
  const Trajectory<Tensor<double>> two(traj.begin(), traj.begin() + 2);
  CHECK_THROWS_AS(metric_evolution_residual(ex.alg, two), InsufficientSamples);
}
