#include "g2flow/lattice.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "g2flow/linalg.hpp"
#include "g2flow/metric.hpp"
#include "g2flow/torsion.hpp"

namespace g2 {

namespace {

constexpr int kBinom[8] = {1, 7, 21, 35, 35, 21, 7, 1};

// det of the n×n submatrix a[rows, cols] of a row-major 7×7 matrix.
double small_det(const double* a, const int* rows, const int* cols, int n) {
  auto e = [&](int r, int c) { return a[rows[r] * kDim + cols[c]]; };
  switch (n) {
    case 0: return 1.0;
    case 1: return e(0, 0);
    case 2: return e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0);
    case 3:
      return e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) -
             e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)) +
             e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
    default: break;
  }
  double m[kDim * kDim];
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m[r * n + c] = e(r, c);
  double det = 1;
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(m[r * n + c]) > std::abs(m[p * n + c])) p = r;
    if (m[p * n + c] == 0) return 0;
    if (p != c) {
      for (int j = 0; j < n; ++j) std::swap(m[p * n + j], m[c * n + j]);
      det = -det;
    }
    det *= m[c * n + c];
    for (int r = c + 1; r < n; ++r) {
      const double f = m[r * n + c] / m[c * n + c];
      for (int j = c + 1; j < n; ++j) m[r * n + j] -= f * m[c * n + j];
    }
  }
  return det;
}

// Per-degree tables for the packed Hodge star: for every output J the packed
// position of I = J^c and sgn(I, J).
struct StarTable {
  std::vector<int> in_rank;
  std::vector<int> sign;
};

const StarTable& star_table(int k) {
  static const auto tables = [] {
    std::vector<StarTable> out(kDim + 1);
    for (int d = 0; d <= kDim; ++d) {
      for (const auto& j : combinations(kDim - d)) {
        const IndexSet i = complement(j, kDim - d);
        std::array<int, kDim> joined{};
        for (int s = 0; s < d; ++s) joined[s] = i[s];
        for (int s = 0; s < kDim - d; ++s) joined[d + s] = j[s];
        out[d].in_rank.push_back(combination_rank(i.data(), d));
        out[d].sign.push_back(permutation_sign(joined.data(), kDim));
      }
    }
    return out;
  }();
  return tables[k];
}

// For (k+1)-set I: terms (−1)^x ∂_{I[x]} a_{I\x}.
struct DTerm {
  int out, in, axis, sign;
};

const std::vector<DTerm>& d_table(int k) {
  static const auto tables = [] {
    std::vector<std::vector<DTerm>> out(kDim);
    for (int d = 0; d < kDim; ++d) {
      const auto& sets = combinations(d + 1);
      for (std::size_t r = 0; r < sets.size(); ++r)
        for (int x = 0; x <= d; ++x) {
          std::array<int, kDim> rest{};
          int n = 0;
          for (int s = 0; s <= d; ++s)
            if (s != x) rest[n++] = sets[r][s];
          out[d].push_back({static_cast<int>(r), combination_rank(rest.data(), d), sets[r][x],
                            x % 2 == 0 ? 1 : -1});
        }
    }
    return out;
  }();
  return tables[k];
}

// φ_{i,pair} lookup for the packed 3-form metric kernel.
struct PhiTable {
  int rank[kDim][21];
  int sign[kDim][21];
};

const PhiTable& phi_table() {
  static const PhiTable t = [] {
    PhiTable out{};
    const auto& pairs = combinations(2);
    for (int i = 0; i < kDim; ++i)
      for (int a = 0; a < 21; ++a) {
        int idx[3] = {i, pairs[a][0], pairs[a][1]};
        const int s = permutation_sign(idx, 3);
        out.sign[i][a] = s;
        std::sort(idx, idx + 3);
        out.rank[i][a] = s == 0 ? 0 : combination_rank(idx, 3);
      }
    return out;
  }();
  return t;
}

struct BlockEntry {
  int a, b, rest, sign;
};

const std::vector<BlockEntry>& block_table() {
  static const auto t = [] {
    std::vector<BlockEntry> out;
    for (const auto& blk : detail::epsilon_blocks())
      out.push_back({blk.a, blk.b, combination_rank(blk.rest.data(), 3), blk.sign});
    return out;
  }();
  return t;
}

// Returns false when φ is not positive at this point.
bool metric_point(const double* phi, double* g, double* g_inv, double& vol) {
  const auto& pt = phi_table();
  double p[kDim][21];
  for (int i = 0; i < kDim; ++i)
    for (int a = 0; a < 21; ++a) p[i][a] = pt.sign[i][a] * phi[pt.rank[i][a]];
  double w[21][21] = {};
  for (const auto& e : block_table()) w[e.a][e.b] += e.sign * phi[e.rest];
  double pw[kDim][21] = {};
  for (int i = 0; i < kDim; ++i)
    for (int a = 0; a < 21; ++a) {
      if (p[i][a] == 0) continue;
      for (int b = 0; b < 21; ++b) pw[i][b] += p[i][a] * w[a][b];
    }
  double b[kDim * kDim];
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j <= i; ++j) {
      double acc = 0;
      for (int a = 0; a < 21; ++a) acc += pw[i][a] * p[j][a];
      b[i * kDim + j] = b[j * kDim + i] = acc / 6.0;
    }
  // Cholesky of B doubles as the positivity test and gives det and inverse.
  double l[kDim * kDim] = {};
  double logdet = 0;
  for (int j = 0; j < kDim; ++j) {
    double d = b[j * kDim + j];
    for (int s = 0; s < j; ++s) d -= l[j * kDim + s] * l[j * kDim + s];
    if (!(d > 0)) return false;
    l[j * kDim + j] = std::sqrt(d);
    logdet += std::log(d);
    for (int i = j + 1; i < kDim; ++i) {
      double v = b[i * kDim + j];
      for (int s = 0; s < j; ++s) v -= l[i * kDim + s] * l[j * kDim + s];
      l[i * kDim + j] = v / l[j * kDim + j];
    }
  }
  // B⁻¹ = L⁻ᵀ L⁻¹
  double li[kDim * kDim] = {};
  for (int c = 0; c < kDim; ++c) {
    li[c * kDim + c] = 1.0 / l[c * kDim + c];
    for (int r = c + 1; r < kDim; ++r) {
      double acc = 0;
      for (int s = c; s < r; ++s) acc -= l[r * kDim + s] * li[s * kDim + c];
      li[r * kDim + c] = acc / l[r * kDim + r];
    }
  }
  const double scale = std::exp(-logdet / 9.0);  // det(B)^{-1/9}
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      double acc = 0;
      for (int s = std::max(i, j); s < kDim; ++s) acc += li[s * kDim + i] * li[s * kDim + j];
      g[i * kDim + j] = b[i * kDim + j] * scale;
      g_inv[i * kDim + j] = acc / scale;
    }
  vol = std::exp(logdet / 9.0);  // √det g = det(B)^{1/9}
  return true;
}

// Packed Hodge star of a k-form at one point.
void star_point(int k, const double* a, const double* g, const double* g_inv, double vol,
                double* out) {
  const auto& cs = combinations(k);
  const std::size_t n = cs.size();
  double up[35];
  if (k <= 3) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (a[j] != 0) acc += small_det(g_inv, cs[i].data(), cs[j].data(), k) * a[j];
      up[i] = acc;
    }
  } else {
    // det(g⁻¹[I,K]) = (−1)^{ΣI+ΣK} det(g[K^c, I^c]) / det g
    const double inv_det = 1.0 / (vol * vol);
    std::vector<IndexSet> comp(n);
    std::vector<int> parity(n);
    for (std::size_t i = 0; i < n; ++i) {
      comp[i] = complement(cs[i], k);
      int s = 0;
      for (int q = 0; q < k; ++q) s += cs[i][q];
      parity[i] = s % 2;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (a[j] == 0) continue;
        const double m = small_det(g, comp[j].data(), comp[i].data(), kDim - k);
        acc += ((parity[i] + parity[j]) % 2 ? -m : m) * a[j];
      }
      up[i] = acc * inv_det;
    }
  }
  const auto& st = star_table(k);
  for (std::size_t j = 0; j < st.in_rank.size(); ++j)
    out[j] = vol * st.sign[j] * up[st.in_rank[j]];
}

struct PositivityFlag {
  std::atomic<long> bad{-1};
  void set(std::size_t p) {
    long expected = -1;
    bad.compare_exchange_strong(expected, static_cast<long>(p));
  }
  void check() const {
    const long p = bad.load();
    if (p >= 0)
      throw NotPositive("3-form is not positive at grid point " + std::to_string(p));
  }
};

}  // namespace

void LatticeSpec::validate() const {
  const std::size_t n = active_dims.size();
  if (n == 0 || n > static_cast<std::size_t>(kDim))
    throw std::invalid_argument("lattice: need between 1 and 7 active dims");
  if (sizes.size() != n || spacings.size() != n)
    throw std::invalid_argument("lattice: sizes and spacings must match active_dims");
  std::vector<bool> seen(kDim, false);
  for (int d : active_dims) {
    if (d < 0 || d >= kDim) throw std::invalid_argument("lattice: active dim out of range");
    if (seen[d]) throw std::invalid_argument("lattice: repeated active dim");
    seen[d] = true;
  }
  for (int s : sizes)
    if (s < 5) throw std::invalid_argument("lattice: each size must be at least 5");
  for (double h : spacings)
    if (!(h > 0)) throw std::invalid_argument("lattice: spacings must be positive");
  if (stencil_order != 2 && stencil_order != 4)
    throw std::invalid_argument("lattice: stencil_order must be 2 or 4");
}

Lattice::Lattice(LatticeSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const int n = active();
  strides_.assign(n, 1);
  for (int a = n - 1; a >= 0; --a) {
    strides_[a] = points_;
    points_ *= static_cast<std::size_t>(spec_.sizes[a]);
    cell_volume_ *= spec_.spacings[a];
  }
  if (spec_.stencil_order == 2)
    taps_ = {{-1, -0.5}, {1, 0.5}};
  else
    taps_ = {{-2, 1.0 / 12}, {-1, -8.0 / 12}, {1, 8.0 / 12}, {2, -1.0 / 12}};
}

int Lattice::index(std::size_t p, int a) const {
  return static_cast<int>((p / strides_[a]) % static_cast<std::size_t>(spec_.sizes[a]));
}

std::size_t Lattice::shift(std::size_t p, int a, int s) const {
  const int n = spec_.sizes[a];
  const int i = index(p, a);
  const int j = ((i + s) % n + n) % n;
  return p + (static_cast<std::size_t>(j) - static_cast<std::size_t>(i)) * strides_[a];
}

double Lattice::coordinate(std::size_t p, int a) const { return index(p, a) * spec_.spacings[a]; }

double Lattice::period(int a) const { return spec_.sizes[a] * spec_.spacings[a]; }

void Lattice::derivative(const double* in, double* out, int ncomp, int a) const {
  const double inv_h = 1.0 / spec_.spacings[a];
  const long np = static_cast<long>(points_);
#pragma omp parallel for schedule(static)
  for (long p = 0; p < np; ++p) {
    double* o = out + p * ncomp;
    for (int c = 0; c < ncomp; ++c) o[c] = 0;
    for (const auto& tap : taps_) {
      const double* src = in + shift(static_cast<std::size_t>(p), a, tap.offset) * ncomp;
      const double w = tap.weight * inv_h;
      for (int c = 0; c < ncomp; ++c) o[c] += w * src[c];
    }
  }
}

double Lattice::derivative_at(const double* in, int ncomp, int comp, std::size_t p,
                              int a) const {
  double acc = 0;
  for (const auto& tap : taps_) acc += tap.weight * in[shift(p, a, tap.offset) * ncomp + comp];
  return acc / spec_.spacings[a];
}

LatticeForm::LatticeForm(int degree, std::size_t points) : k(degree) {
  if (degree < 0 || degree > kDim) throw RankError("lattice form degree out of range");
  data.assign(points * kBinom[degree], 0.0);
}

int LatticeForm::ncomp() const { return kBinom[k]; }

Tensor<double> LatticeForm::tensor_at(std::size_t p) const {
  const double* src = at(p);
  return form_from_packed(k, std::vector<double>(src, src + ncomp()));
}

LatticeForm& LatticeForm::axpy(double a, const LatticeForm& o) {
  if (o.k != k || o.data.size() != data.size()) throw RankError("lattice form shape mismatch");
  for (std::size_t i = 0; i < data.size(); ++i) data[i] += a * o.data[i];
  return *this;
}

double LatticeForm::max_abs() const {
  double m = 0;
  for (double v : data) m = std::max(m, std::abs(v));
  return m;
}

LatticeForm constant_form(const Lattice& lat, const Tensor<double>& form) {
  LatticeForm out(form.rank(), lat.points());
  const auto packed = packed_components(form);
  for (std::size_t p = 0; p < lat.points(); ++p)
    std::copy(packed.begin(), packed.end(), out.at(p));
  return out;
}

LatticeForm perturbed_standard(const Lattice& lat, const std::vector<PerturbationMode>& modes) {
  LatticeForm beta(2, lat.points());
  for (const auto& m : modes) {
    if (m.i == m.j || m.i < 0 || m.j < 0 || m.i >= kDim || m.j >= kDim)
      throw std::invalid_argument("perturbation: bad 2-form index pair");
    if (static_cast<int>(m.wavevector.size()) != lat.active())
      throw std::invalid_argument("perturbation: wavevector length must equal active dims");
    int idx[2] = {std::min(m.i, m.j), std::max(m.i, m.j)};
    const double sgn = m.i < m.j ? 1.0 : -1.0;
    const int r = combination_rank(idx, 2);
    for (std::size_t p = 0; p < lat.points(); ++p) {
      double arg = m.phase;
      for (int a = 0; a < lat.active(); ++a)
        arg += 2 * std::numbers::pi * m.wavevector[a] * lat.coordinate(p, a) / lat.period(a);
      beta.at(p)[r] += sgn * m.amplitude * std::cos(arg) / (2 * std::numbers::pi);
    }
  }
  LatticeForm phi = constant_form(lat, standard_phi<double>());
  phi.axpy(1.0, exterior_derivative(lat, beta));
  return phi;
}

Metric<double> MetricField::at(std::size_t p) const {
  Metric<double> m;
  m.g = Tensor<double>::symmetric2();
  m.g_inv = Tensor<double>::symmetric2();
  std::copy_n(g.begin() + p * 49, 49, m.g.data().begin());
  std::copy_n(g_inv.begin() + p * 49, 49, m.g_inv.data().begin());
  m.det = vol[p] * vol[p];
  return m;
}

MetricField metric_field(const Lattice& lat, const LatticeForm& phi, LatticeKernel kernel) {
  if (phi.k != 3) throw RankError("metric_field needs a 3-form");
  const std::size_t np = lat.points();
  MetricField m;
  m.g.assign(np * 49, 0);
  m.g_inv.assign(np * 49, 0);
  m.vol.assign(np, 0);
  if (kernel == LatticeKernel::Serial) {
    for (std::size_t p = 0; p < np; ++p) {
      const Metric<double> mp = metric_from_phi(phi.tensor_at(p));
      std::copy(mp.g.data().begin(), mp.g.data().end(), m.g.begin() + p * 49);
      std::copy(mp.g_inv.data().begin(), mp.g_inv.data().end(), m.g_inv.begin() + p * 49);
      m.vol[p] = sqrt_det(mp);
    }
    return m;
  }
  PositivityFlag flag;
#pragma omp parallel for schedule(static)
  for (long p = 0; p < static_cast<long>(np); ++p)
    if (!metric_point(phi.at(p), &m.g[p * 49], &m.g_inv[p * 49], m.vol[p])) flag.set(p);
  flag.check();
  return m;
}

LatticeForm exterior_derivative(const Lattice& lat, const LatticeForm& a, LatticeKernel kernel) {
  if (a.k >= kDim) throw RankError("exterior derivative of a top form");
  const std::size_t np = lat.points();
  LatticeForm out(a.k + 1, np);
  if (kernel == LatticeKernel::Serial) {
    // d a = Σ_axes e^axis ∧ ∂_axis a, one point at a time.
    const int nc = a.ncomp();
    for (std::size_t p = 0; p < np; ++p) {
      Tensor<double> acc = Tensor<double>::form(a.k + 1);
      for (int ax = 0; ax < lat.active(); ++ax) {
        std::vector<double> da(nc);
        for (int c = 0; c < nc; ++c) da[c] = lat.derivative_at(a.data.data(), nc, c, p, ax);
        Tensor<double> e = Tensor<double>::form(1);
        e(lat.axis(ax)) = 1.0;
        acc += wedge(e, form_from_packed(a.k, da));
      }
      const auto packed = packed_components(acc);
      std::copy(packed.begin(), packed.end(), out.at(p));
    }
    return out;
  }
  const int nc = a.ncomp();
  const int no = out.ncomp();
  std::vector<int> axis_slot(kDim, -1);
  for (int ax = 0; ax < lat.active(); ++ax) axis_slot[lat.axis(ax)] = ax;
  std::vector<std::vector<double>> da(lat.active(), std::vector<double>(a.data.size()));
  for (int ax = 0; ax < lat.active(); ++ax) lat.derivative(a.data.data(), da[ax].data(), nc, ax);
  const auto& table = d_table(a.k);
#pragma omp parallel for schedule(static)
  for (long p = 0; p < static_cast<long>(np); ++p) {
    double* o = out.data.data() + p * no;
    for (const auto& t : table) {
      const int slot = axis_slot[t.axis];
      if (slot < 0) continue;
      o[t.out] += t.sign * da[slot][p * nc + t.in];
    }
  }
  return out;
}

LatticeForm hodge_star(const LatticeForm& a, const MetricField& m, LatticeKernel kernel) {
  const std::size_t np = a.points();
  LatticeForm out(kDim - a.k, np);
  if (kernel == LatticeKernel::Serial) {
    for (std::size_t p = 0; p < np; ++p) {
      const auto packed = packed_components(hodge_star(a.tensor_at(p), m.at(p)));
      std::copy(packed.begin(), packed.end(), out.at(p));
    }
    return out;
  }
#pragma omp parallel for schedule(static)
  for (long p = 0; p < static_cast<long>(np); ++p)
    star_point(a.k, a.at(p), &m.g[p * 49], &m.g_inv[p * 49], m.vol[p], out.at(p));
  return out;
}

LatticeForm codifferential(const Lattice& lat, const LatticeForm& a, const MetricField& m,
                           LatticeKernel kernel) {
  if (a.k == 0) return LatticeForm(0, a.points());
  LatticeForm out = hodge_star(exterior_derivative(lat, hodge_star(a, m, kernel), kernel), m,
                               kernel);
  if (a.k % 2 == 1)
    for (double& v : out.data) v = -v;
  return out;
}

LatticeForm laplacian_phi(const Lattice& lat, const LatticeForm& phi, LatticeKernel kernel) {
  const MetricField m = metric_field(lat, phi, kernel);
  const LatticeForm psi = hodge_star(phi, m, kernel);
  const LatticeForm star_dpsi = hodge_star(exterior_derivative(lat, psi, kernel), m, kernel);
  LatticeForm out = exterior_derivative(lat, star_dpsi, kernel);
  for (double& v : out.data) v = -v;
  return out;
}

double l2_inner(const Lattice& lat, const LatticeForm& a, const LatticeForm& b,
                const MetricField& m) {
  if (a.k != b.k) throw RankError("l2_inner degree mismatch");
  double acc = 0;
  for (std::size_t p = 0; p < lat.points(); ++p) {
    const Metric<double> mp = m.at(p);
    acc += inner_form(a.tensor_at(p), b.tensor_at(p), mp) * m.vol[p];
  }
  return acc * lat.cell_volume();
}

Tensor<double> CurvatureField::gamma_at(std::size_t p) const {
  Tensor<double> t(3);
  std::copy_n(gamma.begin() + p * 343, 343, t.data().begin());
  return t;
}

Tensor<double> CurvatureField::rm_at(std::size_t p) const {
  Tensor<double> t(4);
  std::copy_n(rm.begin() + p * 2401, 2401, t.data().begin());
  return t;
}

Tensor<double> CurvatureField::ric_at(std::size_t p) const {
  Tensor<double> t = Tensor<double>::symmetric2();
  std::copy_n(ric.begin() + p * 49, 49, t.data().begin());
  return t;
}

CurvatureField curvature_field(const Lattice& lat, const MetricField& m) {
  const std::size_t np = lat.points();
  const int na = lat.active();
  std::vector<int> axis_slot(kDim, -1);
  for (int ax = 0; ax < na; ++ax) axis_slot[lat.axis(ax)] = ax;

  std::vector<std::vector<double>> dg(na, std::vector<double>(np * 49));
  for (int ax = 0; ax < na; ++ax) lat.derivative(m.g.data(), dg[ax].data(), 49, ax);

  CurvatureField c;
  c.gamma.assign(np * 343, 0);
  c.rm.assign(np * 2401, 0);
  c.ric.assign(np * 49, 0);
  c.scalar.assign(np, 0);
  c.rm_norm.assign(np, 0);

  // Γ^m_ij = ½ g^ml (∂_i g_jl + ∂_j g_il − ∂_l g_ij)
#pragma omp parallel for schedule(static)
  for (long p = 0; p < static_cast<long>(np); ++p) {
    auto dgv = [&](int d, int i, int j) {
      const int s = axis_slot[d];
      return s < 0 ? 0.0 : dg[s][p * 49 + i * kDim + j];
    };
    double low[kDim][kDim][kDim];
    for (int l = 0; l < kDim; ++l)
      for (int i = 0; i < kDim; ++i)
        for (int j = 0; j < kDim; ++j)
          low[l][i][j] = 0.5 * (dgv(i, j, l) + dgv(j, i, l) - dgv(l, i, j));
    const double* gi = &m.g_inv[p * 49];
    double* gam = &c.gamma[p * 343];
    for (int mm = 0; mm < kDim; ++mm)
      for (int i = 0; i < kDim; ++i)
        for (int j = 0; j < kDim; ++j) {
          double acc = 0;
          for (int l = 0; l < kDim; ++l) acc += gi[mm * kDim + l] * low[l][i][j];
          gam[mm * 49 + i * kDim + j] = acc;
        }
  }

  std::vector<std::vector<double>> dgam(na, std::vector<double>(np * 343));
  for (int ax = 0; ax < na; ++ax) lat.derivative(c.gamma.data(), dgam[ax].data(), 343, ax);

  // R^m_ijk = ∂_i Γ^m_jk − ∂_j Γ^m_ik + Γ^n_jk Γ^m_in − Γ^n_ik Γ^m_jn, then R_ijkl = R^m_ijk g_ml
#pragma omp parallel for schedule(static)
  for (long p = 0; p < static_cast<long>(np); ++p) {
    const double* gam = &c.gamma[p * 343];
    const double* g = &m.g[p * 49];
    const double* gi = &m.g_inv[p * 49];
    auto G = [&](int a, int b, int d) { return gam[a * 49 + b * kDim + d]; };
    auto dG = [&](int d, int a, int b, int e) {
      const int s = axis_slot[d];
      return s < 0 ? 0.0 : dgam[s][p * 343 + a * 49 + b * kDim + e];
    };
    std::vector<double> up(2401);
    for (int mm = 0; mm < kDim; ++mm)
      for (int i = 0; i < kDim; ++i)
        for (int j = 0; j < kDim; ++j)
          for (int k = 0; k < kDim; ++k) {
            double acc = dG(i, mm, j, k) - dG(j, mm, i, k);
            for (int n = 0; n < kDim; ++n) acc += G(n, j, k) * G(mm, i, n) - G(n, i, k) * G(mm, j, n);
            up[((mm * kDim + i) * kDim + j) * kDim + k] = acc;
          }
    double* rm = &c.rm[p * 2401];
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j)
        for (int k = 0; k < kDim; ++k)
          for (int l = 0; l < kDim; ++l) {
            double acc = 0;
            for (int mm = 0; mm < kDim; ++mm)
              acc += up[((mm * kDim + i) * kDim + j) * kDim + k] * g[mm * kDim + l];
            rm[((i * kDim + j) * kDim + k) * kDim + l] = acc;
          }
    double* ric = &c.ric[p * 49];
    double sc = 0;
    for (int j = 0; j < kDim; ++j)
      for (int k = 0; k < kDim; ++k) {
        double acc = 0;
        for (int i = 0; i < kDim; ++i)
          for (int l = 0; l < kDim; ++l)
            acc += rm[((i * kDim + j) * kDim + k) * kDim + l] * gi[i * kDim + l];
        ric[j * kDim + k] = acc;
      }
    for (int j = 0; j < kDim; ++j)
      for (int k = 0; k < kDim; ++k) sc += ric[j * kDim + k] * gi[j * kDim + k];
    c.scalar[p] = sc;
    // ||Rm||² by raising one slot at a time
    std::vector<double> a(rm, rm + 2401), b(2401);
    for (int slot = 0; slot < 4; ++slot) {
      const std::size_t stride = kPow7[3 - slot];
      for (std::size_t flat = 0; flat < 2401; ++flat) {
        const int idx = static_cast<int>((flat / stride) % kDim);
        const std::size_t base = flat - idx * stride;
        double acc = 0;
        for (int q = 0; q < kDim; ++q) acc += gi[idx * kDim + q] * a[base + q * stride];
        b[flat] = acc;
      }
      std::swap(a, b);
    }
    double n2 = 0;
    for (std::size_t flat = 0; flat < 2401; ++flat) n2 += rm[flat] * a[flat];
    c.rm_norm[p] = std::sqrt(std::max(n2, 0.0));
  }
  return c;
}

Tensor<double> covariant_derivative_at(const Lattice& lat, const std::vector<Tensor<double>>& f,
                                       const CurvatureField& curv, std::size_t p) {
  const Tensor<double>& x = f[p];
  Tensor<double> out = covariant_derivative(x, LieConnection<double>{curv.gamma_at(p)});
  const std::size_t n = x.size();
  for (int ax = 0; ax < lat.active(); ++ax) {
    const int i = lat.axis(ax);
    const double h = lat.spec().spacings[ax];
    for (const auto& tap : lat.stencil()) {
      const Tensor<double>& src = f[lat.shift(p, ax, tap.offset)];
      const double w = tap.weight / h;
      for (std::size_t r = 0; r < n; ++r) out[i * n + r] += w * src[r];
    }
  }
  return out;
}

double lattice_volume(const Lattice& lat, const MetricField& m) {
  double acc = 0;
  for (double v : m.vol) acc += v;
  return acc * lat.cell_volume();
}

LatticeSample lattice_sample(const Lattice& lat, const LatticeForm& phi) {
  LatticeSample s;
  s.metric = metric_field(lat, phi);
  s.curv = curvature_field(lat, s.metric);
  s.closedness = exterior_derivative(lat, phi).max_abs();
  const std::size_t np = lat.points();

  std::vector<Tensor<double>> phi_t(np);
  for (std::size_t p = 0; p < np; ++p) phi_t[p] = phi.tensor_at(p);
  s.t.resize(np);
  s.t2.resize(np);
  std::vector<double> min_ev(np);
#pragma omp parallel for schedule(static)
  for (long p = 0; p < static_cast<long>(np); ++p) {
    const Metric<double> mp = s.metric.at(p);
    const G2Structure<double> st{phi_t[p], mp, hodge_star(phi_t[p], mp), s.metric.vol[p]};
    const Tensor<double> nabla_phi = covariant_derivative_at(lat, phi_t, s.curv, p);
    s.t[p] = full_torsion(nabla_phi, st);
    s.t2[p] = 0.5 * norm2(s.t[p], mp);
    const auto ev = symmetric_eigenvalues(to_matrix(mp.g));
    min_ev[p] = *std::min_element(ev.begin(), ev.end());
  }
  s.min_eigenvalue = *std::min_element(min_ev.begin(), min_ev.end());
  s.max_scalar = *std::max_element(s.curv.scalar.begin(), s.curv.scalar.end());
  s.max_t2 = *std::max_element(s.t2.begin(), s.t2.end());
  s.max_rm = *std::max_element(s.curv.rm_norm.begin(), s.curv.rm_norm.end());
  s.volume = lattice_volume(lat, s.metric);
  return s;
}

StateHealth LatticeFlowBackend::health(const State& phi) const {
  const MetricField m = metric_field(lat_, phi, kernel_);
  StateHealth h;
  h.min_metric_eigenvalue = 1e300;
  for (std::size_t p = 0; p < lat_.points(); ++p) {
    const auto ev = symmetric_eigenvalues(to_matrix(m.at(p).g));
    h.min_metric_eigenvalue = std::min(h.min_metric_eigenvalue, *std::min_element(ev.begin(), ev.end()));
  }
  h.closedness = exterior_derivative(lat_, phi, kernel_).max_abs();
  const CurvatureField c = curvature_field(lat_, m);
  h.rm_norm = *std::max_element(c.rm_norm.begin(), c.rm_norm.end());
  return h;
}

}  // namespace g2
