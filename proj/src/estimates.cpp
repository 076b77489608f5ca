#include "g2flow/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace g2 {

void EstimateConfig::validate() const {
  if (p < 5) throw std::invalid_argument("estimates: exponent p must be at least 5");
  if (!(rho > 0)) throw std::invalid_argument("estimates: rho must be positive");
  if (!(k > 0)) throw std::invalid_argument("estimates: K must be positive");
  if (!(c >= 0)) throw std::invalid_argument("estimates: c must be nonnegative");
}

bool EstimateQuantities::finite() const {
  for (double v : {a1, a2, a3, a4, b1, b2, u})
    if (!std::isfinite(v)) return false;
  return true;
}

EstimateQuantities accumulate_estimates(const std::vector<EstimatePoint>& pts,
                                        const EstimateConfig& cfg) {
  cfg.validate();
  const double p = cfg.p, k = cfg.k, c = cfg.c;
  EstimateQuantities q;
  double ric_term = 0, scalar_term = 0;
  for (const auto& x : pts) {
    q.ric_max = std::max(q.ric_max, x.ric);
    if (x.eta <= 0) continue;
    const double rm_p1 = std::pow(x.rm, p - 1);
    const double w = std::pow(x.eta, 2 * p) * x.dv;
    q.a1 += std::pow(x.rm, p) * w;
    q.a2 += rm_p1 * w;
    q.a3 += rm_p1 * x.grad_eta2 * std::pow(x.eta, 2 * p - 1) * x.dv;
    q.a4 += rm_p1 * x.grad_eta2 * std::pow(x.eta, 2 * p - 2) * x.dv;
    q.b1 += x.grad_ric2 * rm_p1 * w;
    q.b2 += x.grad_rm2 * std::pow(x.rm, p - 3) * w;
    ric_term += rm_p1 * x.ric * x.ric * w;
    scalar_term += -x.scalar * rm_p1 * w;
  }
  q.b1 /= k;
  q.u = q.a1 + c * k * q.a2 + c / k * ric_term + c * scalar_term;
  return q;
}

std::vector<double> distance_field(const Lattice& lat, const MetricField& m,
                                   const std::vector<double>& x0) {
  const int na = lat.active();
  if (static_cast<int>(x0.size()) != na)
    throw std::invalid_argument("estimates: x0 needs one coordinate per active dim");
  const std::size_t np = lat.points();
  bool flat = true;
  const Tensor<double> id = kronecker<double>();
  for (std::size_t p = 0; p < np && flat; ++p)
    for (int i = 0; i < 49; ++i)
      if (std::abs(m.g[p * 49 + i] - id[i]) > 1e-12) {
        flat = false;
        break;
      }
  std::vector<double> dist(np, std::numeric_limits<double>::infinity());
  if (flat) {
    for (std::size_t p = 0; p < np; ++p) {
      double d2 = 0;
      for (int a = 0; a < na; ++a) {
        const double per = lat.period(a);
        double dx = std::fmod(std::abs(lat.coordinate(p, a) - x0[a]), per);
        dx = std::min(dx, per - dx);
        d2 += dx * dx;
      }
      dist[p] = std::sqrt(d2);
    }
    return dist;
  }
  // Source: nearest grid point to x0.
  std::size_t src = 0;
  {
    std::size_t p = 0;
    for (int a = 0; a < na; ++a) {
      const int n = lat.spec().sizes[a];
      int i = static_cast<int>(std::lround(x0[a] / lat.spec().spacings[a]));
      i = ((i % n) + n) % n;
      p = lat.shift(p, a, i);
    }
    src = p;
  }
  // Neighbour offsets {−1,0,1}^n without the origin.
  std::vector<std::vector<int>> offs;
  std::vector<int> cur(na, -1);
  for (;;) {
    if (std::any_of(cur.begin(), cur.end(), [](int v) { return v != 0; })) offs.push_back(cur);
    int a = na - 1;
    while (a >= 0 && cur[a] == 1) cur[a--] = -1;
    if (a < 0) break;
    ++cur[a];
  }
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[src] = 0;
  pq.push({0, src});
  while (!pq.empty()) {
    const auto [d, p] = pq.top();
    pq.pop();
    if (d > dist[p]) continue;
    for (const auto& off : offs) {
      std::size_t q = p;
      for (int a = 0; a < na; ++a)
        if (off[a] != 0) q = lat.shift(q, a, off[a]);
      double len2 = 0;
      for (int a = 0; a < na; ++a)
        for (int b = 0; b < na; ++b) {
          const int ia = lat.axis(a), ib = lat.axis(b);
          const double gab = 0.5 * (m.g[p * 49 + ia * kDim + ib] + m.g[q * 49 + ia * kDim + ib]);
          len2 += gab * off[a] * lat.spec().spacings[a] * off[b] * lat.spec().spacings[b];
        }
      const double nd = d + std::sqrt(len2);
      if (nd < dist[q]) {
        dist[q] = nd;
        pq.push({nd, q});
      }
    }
  }
  return dist;
}

std::vector<double> cutoff_field(const std::vector<double>& dist, const EstimateConfig& cfg) {
  cfg.validate();
  const double r = cfg.rho / std::sqrt(cfg.k);
  std::vector<double> eta(dist.size());
  for (std::size_t p = 0; p < dist.size(); ++p) eta[p] = std::max(0.0, (r - dist[p]) / r);
  return eta;
}

EstimateQuantities estimate_quantities(const Lattice& lat, const LatticeForm& phi,
                                       const std::vector<double>& eta, const EstimateConfig& cfg) {
  cfg.validate();
  const std::size_t np = lat.points();
  if (eta.size() != np) throw std::invalid_argument("estimates: cutoff field size mismatch");
  const MetricField m = metric_field(lat, phi);
  const CurvatureField curv = curvature_field(lat, m);
  std::vector<Tensor<double>> ric(np), rm(np);
  for (std::size_t p = 0; p < np; ++p) {
    ric[p] = curv.ric_at(p);
    rm[p] = curv.rm_at(p);
  }
  std::vector<EstimatePoint> pts(np);
#pragma omp parallel for schedule(static)
  for (long p = 0; p < static_cast<long>(np); ++p) {
    const Metric<double> mp = m.at(p);
    EstimatePoint& x = pts[p];
    x.rm = curv.rm_norm[p];
    x.ric = std::sqrt(std::max(0.0, norm2(ric[p], mp)));
    x.scalar = curv.scalar[p];
    x.dv = m.vol[p] * lat.cell_volume();
    x.eta = eta[p];
    if (x.eta <= 0) continue;
    x.grad_ric2 = norm2(covariant_derivative_at(lat, ric, curv, p), mp);
    x.grad_rm2 = norm2(covariant_derivative_at(lat, rm, curv, p), mp);
    // Centered differences of the Lipschitz cutoff.
    double de[kDim] = {};
    for (int a = 0; a < lat.active(); ++a)
      de[lat.axis(a)] = (eta[lat.shift(p, a, 1)] - eta[lat.shift(p, a, -1)]) /
                        (2 * lat.spec().spacings[a]);
    double g2 = 0;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) g2 += mp.g_inv(i, j) * de[i] * de[j];
    x.grad_eta2 = g2;
  }
  return accumulate_estimates(pts, cfg);
}

EstimateQuantities estimate_quantities(const Lattice& lat, const LatticeForm& phi,
                                       const EstimateConfig& cfg) {
  const MetricField m = metric_field(lat, phi);
  return estimate_quantities(lat, phi, cutoff_field(distance_field(lat, m, cfg.x0), cfg), cfg);
}

EstimateQuantities estimate_quantities(const LieAlgebra<double>& alg, const Tensor<double>& phi,
                                       const EstimateConfig& cfg) {
  const auto j = lie_g2_jet(alg, phi);
  const auto& m = j.s.metric;
  EstimatePoint x;
  x.rm = std::sqrt(std::max(0.0, norm2(j.curv.rm, m)));
  x.ric = std::sqrt(std::max(0.0, norm2(j.curv.ric, m)));
  x.scalar = j.curv.scalar;
  x.grad_ric2 = norm2(j.nabla(j.curv.ric), m);
  x.grad_rm2 = norm2(j.nabla(j.curv.rm), m);
  x.dv = j.s.vol_density;
  return accumulate_estimates({x}, cfg);
}

namespace {

template <class Eval>
EstimateReport build_report(const std::vector<double>& times, const EstimateConfig& cfg,
                            Eval&& eval) {
  EstimateReport r;
  r.t = times;
  for (std::size_t n = 0; n < times.size(); ++n) r.q.push_back(eval(n));
  r.valid_samples = r.q.size();
  for (std::size_t n = 0; n < r.q.size(); ++n)
    if (r.q[n].ric_max > cfg.k) {
      r.valid_samples = n;
      r.ricci_bound_held = false;
      break;
    }
  for (std::size_t n = 0; n < r.q.size(); ++n) {
    if (n < r.valid_samples && !r.q[n].finite()) r.finite = false;
    if (r.q[n].a3 > r.q[n].a4 * (1 + 1e-12) + 1e-300) r.a3_le_a4 = false;
  }
  r.c_hat = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t n = 1; n + 1 < r.valid_samples; ++n) {
    const double denom = cfg.k * (r.q[n].u + r.q[n].a4);
    if (!(denom > 0)) continue;
    const double du = (r.q[n + 1].u - r.q[n - 1].u) / (r.t[n + 1] - r.t[n - 1]);
    const double ratio = du / denom;
    if (!r.c_hat_defined || ratio > r.c_hat) r.c_hat = ratio;
    r.c_hat_defined = true;
  }
  return r;
}

}  // namespace

EstimateReport estimate_report(const Lattice& lat, const Trajectory<LatticeForm>& traj,
                               const EstimateConfig& cfg) {
  cfg.validate();
  if (traj.empty()) throw InsufficientSamples("estimate report needs samples");
  const MetricField g0 = metric_field(lat, traj.front().phi);
  const std::vector<double> eta = cutoff_field(distance_field(lat, g0, cfg.x0), cfg);
  std::vector<double> times;
  for (const auto& s : traj) times.push_back(s.t);
  return build_report(times, cfg,
                      [&](std::size_t n) { return estimate_quantities(lat, traj[n].phi, eta, cfg); });
}

EstimateReport estimate_report(const LieAlgebra<double>& alg,
                               const Trajectory<Tensor<double>>& traj, const EstimateConfig& cfg) {
  cfg.validate();
  if (traj.empty()) throw InsufficientSamples("estimate report needs samples");
  std::vector<double> times;
  for (const auto& s : traj) times.push_back(s.t);
  return build_report(times, cfg,
                      [&](std::size_t n) { return estimate_quantities(alg, traj[n].phi, cfg); });
}

}  // namespace g2
