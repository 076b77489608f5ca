#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "g2flow/lattice.hpp"

using namespace g2;

namespace {

Lattice make_lattice(int n, int order = 4) {
  LatticeSpec spec;
  spec.sizes = {n, n};
  spec.spacings = {1.0 / n, 1.0 / n};
  spec.stencil_order = order;
  return Lattice(spec);
}

LatticeForm random_form(int k, const Lattice& lat, std::mt19937_64& rng) {
  LatticeForm f(k, lat.points());
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& v : f.data) v = u(rng);
  return f;
}

double max_diff(const LatticeForm& a, const LatticeForm& b) {
  LatticeForm d = a;
  d.axpy(-1, b);
  return d.max_abs();
}

std::vector<PerturbationMode> test_modes(double eps) {
  return {{2, 3, eps, {1, 1}, 0.0}, {4, 6, eps, {1, 2}, 0.0}, {0, 5, eps, {1, 2}, 1.0}};
}

// Scalar curvature of e^{2f}δ in dimension 7.
double conformal_scalar_error(int n) {
  const Lattice lat = make_lattice(n);
  const double k = 2 * std::numbers::pi;
  auto f = [&](double x, double y) { return 0.1 * std::sin(k * x) * std::cos(k * y); };
  LatticeForm phi = constant_form(lat, standard_phi<double>());
  for (std::size_t p = 0; p < lat.points(); ++p) {
    const double s = std::exp(3 * f(lat.coordinate(p, 0), lat.coordinate(p, 1)));
    for (int c = 0; c < phi.ncomp(); ++c) phi.at(p)[c] *= s;
  }
  const auto curv = curvature_field(lat, metric_field(lat, phi));
  double err = 0;
  for (std::size_t p = 0; p < lat.points(); ++p) {
    const double x = lat.coordinate(p, 0), y = lat.coordinate(p, 1);
    const double fx = 0.1 * k * std::cos(k * x) * std::cos(k * y);
    const double fy = -0.1 * k * std::sin(k * x) * std::sin(k * y);
    const double lap = -2 * k * k * f(x, y);
    const double exact = std::exp(-2 * f(x, y)) * (-12 * lap - 30 * (fx * fx + fy * fy));
    err = std::max(err, std::abs(curv.scalar[p] - exact));
  }
  return err;
}

}  // namespace

TEST_CASE("lattice layout validation") {
  LatticeSpec bad;
  bad.sizes = {32};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  LatticeSpec order;
  order.stencil_order = 6;
  CHECK_THROWS_AS(order.validate(), std::invalid_argument);
  LatticeSpec dup;
  dup.active_dims = {1, 1};
  CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
  CHECK_NOTHROW(LatticeSpec{}.validate());
}

TEST_CASE("stencil weights") {
  const Lattice lat = make_lattice(8, 4);
  const auto& t4 = lat.stencil();
  REQUIRE(t4.size() == 4);
  double s = 0, m1 = 0, m3 = 0;
  for (const auto& tap : t4) {
    s += tap.weight;
    m1 += tap.weight * tap.offset;
    m3 += tap.weight * tap.offset * tap.offset * tap.offset;
  }
  CHECK(s == doctest::Approx(0).scale(1));
  CHECK(m1 == doctest::Approx(1));
  CHECK(m3 == doctest::Approx(0).scale(1));
}

TEST_CASE("periodic derivative converges at the stencil order") {
  for (int order : {2, 4}) {
    double err[2];
    for (int r = 0; r < 2; ++r) {
      const Lattice lat = make_lattice(16 << r, order);
      std::vector<double> f(lat.points()), df(lat.points());
      const double k = 2 * std::numbers::pi;
      for (std::size_t p = 0; p < lat.points(); ++p) f[p] = std::sin(k * lat.coordinate(p, 0));
      lat.derivative(f.data(), df.data(), 1, 0);
      err[r] = 0;
      for (std::size_t p = 0; p < lat.points(); ++p)
        err[r] = std::max(err[r], std::abs(df[p] - k * std::cos(k * lat.coordinate(p, 0))));
    }
    CHECK(std::log2(err[0] / err[1]) > order - 0.1);
  }
}

TEST_CASE("discrete exterior derivative squares to zero") {
  const Lattice lat = make_lattice(12);
  std::mt19937_64 rng(1);
  for (int k = 0; k <= 4; ++k) {
    const auto a = random_form(k, lat, rng);
    const auto dda = exterior_derivative(lat, exterior_derivative(lat, a));
    CHECK(dda.max_abs() < 1e-9);
  }
}

TEST_CASE("constant standard structure is torsion-free and flat") {
  const Lattice lat = make_lattice(8);
  const auto phi = constant_form(lat, standard_phi<double>());
  const auto m = metric_field(lat, phi);
  for (std::size_t p = 0; p < lat.points(); p += 7) {
    CHECK((m.at(p).g - kronecker<double>()).max_abs() < 1e-14);
    CHECK(m.vol[p] == doctest::Approx(1));
  }
  CHECK(exterior_derivative(lat, phi).max_abs() < 1e-14);
  CHECK(laplacian_phi(lat, phi).max_abs() < 1e-12);
  const auto smp = lattice_sample(lat, phi);
  CHECK(smp.max_rm < 1e-12);
  CHECK(std::abs(smp.max_scalar) < 1e-12);
  CHECK(smp.max_t2 < 1e-12);
  CHECK(smp.volume == doctest::Approx(1));
}

TEST_CASE("perturbed structures are closed and parallel kernels match serial ones") {
  const Lattice lat = make_lattice(16);
  const auto phi = perturbed_standard(lat, test_modes(0.05));
  CHECK(exterior_derivative(lat, phi).max_abs() < 1e-12);
  const auto mf = metric_field(lat, phi, LatticeKernel::Parallel);
  const auto ms = metric_field(lat, phi, LatticeKernel::Serial);
  double dg = 0;
  for (std::size_t i = 0; i < mf.g.size(); ++i) dg = std::max(dg, std::abs(mf.g[i] - ms.g[i]));
  CHECK(dg < 1e-13);
  CHECK(max_diff(exterior_derivative(lat, phi, LatticeKernel::Parallel),
                 exterior_derivative(lat, phi, LatticeKernel::Serial)) < 1e-11);
  std::mt19937_64 rng(4);
  for (int k : {2, 3, 5}) {
    const auto a = random_form(k, lat, rng);
    CHECK(max_diff(hodge_star(a, mf, LatticeKernel::Parallel), hodge_star(a, mf, LatticeKernel::Serial)) <
          1e-12);
  }
  const auto lf = laplacian_phi(lat, phi, LatticeKernel::Parallel);
  const auto ls = laplacian_phi(lat, phi, LatticeKernel::Serial);
  CHECK(max_diff(lf, ls) < 1e-9 * (1 + lf.max_abs()));
}

TEST_CASE("codifferential is the discrete adjoint of d") {
  const Lattice lat = make_lattice(16);
  const auto phi = perturbed_standard(lat, test_modes(0.05));
  const auto m = metric_field(lat, phi);
  std::mt19937_64 rng(9);
  for (int k : {1, 2, 3}) {
    const auto a = random_form(k, lat, rng);
    const auto b = random_form(k + 1, lat, rng);
    const double lhs = l2_inner(lat, exterior_derivative(lat, a), b, m);
    const double rhs = l2_inner(lat, a, codifferential(lat, b, m), m);
    CHECK(std::abs(lhs - rhs) < 1e-11 * (1 + std::abs(lhs)));
  }
}

TEST_CASE("conformal curvature oracle converges at fourth order") {
  const double e16 = conformal_scalar_error(16);
  const double e32 = conformal_scalar_error(32);
  CHECK(e32 < 0.05);
  CHECK(std::log2(e16 / e32) >= 3.5);
}

TEST_CASE("closed structures on the lattice satisfy R = -2|T|^2 to discretization error") {
  double dev[2], asym[2];
  for (int r = 0; r < 2; ++r) {
    const Lattice lat = make_lattice(16 << r);
    const auto smp = lattice_sample(lat, perturbed_standard(lat, test_modes(0.05)));
    dev[r] = 0;
    for (std::size_t p = 0; p < lat.points(); ++p)
      dev[r] = std::max(dev[r], std::abs(smp.curv.scalar[p] + 2 * smp.t2[p]));
    asym[r] = 0;
    for (std::size_t p = 0; p < lat.points(); ++p)
      asym[r] = std::max(asym[r], (smp.t[p] + smp.t[p].permuted(std::array<int, 2>{1, 0})).max_abs());
    CHECK(smp.max_scalar <= 1e-3);
  }
  // Antisymmetry of T also only holds up to discretization error.
  CHECK(std::log2(dev[0] / dev[1]) > 3);
  CHECK(std::log2(asym[0] / asym[1]) > 3);
}
