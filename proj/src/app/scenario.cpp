#include "g2flow/app/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "g2flow/g2algebra.hpp"
#include "g2flow/linalg.hpp"
#include "g2flow/torsion.hpp"

namespace g2 {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ScenarioError("scenario field '" + path + "': " + msg);
}

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  if (!j.contains(key)) fail(path.empty() ? key : path + "." + key, "missing");
  return j.at(key);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

double get_double(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Rational get_rational(const json& j, const std::string& path) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "not finite");
    return Rational(v);
  }
  if (j.is_string()) {
    Rational r;
    if (r.set_str(j.get<std::string>(), 10) != 0) fail(path, "expected a rational like \"p/q\"");
    if (r.get_den() == 0) fail(path, "zero denominator");
    r.canonicalize();
    return r;
  }
  fail(path, "expected a number or a rational string");
}

ordered_json emit_rational(const Rational& r) {
  if (r.get_den() == 1 && r.get_num().fits_slong_p()) return r.get_num().get_si();
  return r.get_str();
}

int get_index(const json& j, const std::string& path) {
  const int v = get_int(j, path);
  if (v < 1 || v > kDim) fail(path, "index must be between 1 and 7");
  return v - 1;
}

template <class F>
void for_each_item(const json& j, const std::string& path, F&& f) {
  if (!j.is_array()) fail(path, "expected an array");
  for (std::size_t i = 0; i < j.size(); ++i) f(j[i], index_path(path, i));
}

void parse_backend(const json& j, Scenario& s) {
  const std::string path = "backend";
  const std::string type = get_string(require(j, "type", path), join(path, "type"));
  if (type == "lie") {
    s.backend = Scenario::Backend::Lie;
    std::set<std::array<int, 3>> seen;
    if (j.contains("structure_constants"))
      for_each_item(j.at("structure_constants"), join(path, "structure_constants"),
                    [&](const json& e, const std::string& p) {
                      if (!e.is_array() || e.size() != 4) fail(p, "expected [i, j, k, value]");
                      const int a = get_index(e[0], p + "[0]");
                      const int b = get_index(e[1], p + "[1]");
                      const int c = get_index(e[2], p + "[2]");
                      if (a >= b) fail(p, "need i < j (antisymmetry is implied)");
                      if (!seen.insert({a, b, c}).second) fail(p, "duplicate entry");
                      s.brackets.push_back({a, b, c, get_rational(e[3], p + "[3]")});
                    });
  } else if (type == "lattice") {
    s.backend = Scenario::Backend::Lattice;
    LatticeSpec spec;
    spec.active_dims.clear();
    spec.sizes.clear();
    spec.spacings.clear();
    for_each_item(require(j, "active_dims", path), join(path, "active_dims"),
                  [&](const json& e, const std::string& p) { spec.active_dims.push_back(get_index(e, p)); });
    for_each_item(require(j, "sizes", path), join(path, "sizes"),
                  [&](const json& e, const std::string& p) { spec.sizes.push_back(get_int(e, p)); });
    for_each_item(require(j, "spacings", path), join(path, "spacings"),
                  [&](const json& e, const std::string& p) { spec.spacings.push_back(get_double(e, p)); });
    if (j.contains("stencil_order"))
      spec.stencil_order = get_int(j.at("stencil_order"), join(path, "stencil_order"));
    try {
      spec.validate();
    } catch (const std::invalid_argument& e) {
      fail(path, e.what());
    }
    s.lattice = spec;
  } else {
    fail(join(path, "type"), "expected \"lie\" or \"lattice\"");
  }
}

void parse_initial(const json& j, Scenario& s) {
  const std::string path = "initial";
  const std::string type = get_string(require(j, "type", path), join(path, "type"));
  if (type == "standard") {
    s.initial = Scenario::Initial::Standard;
  } else if (type == "perturbation") {
    s.initial = Scenario::Initial::Perturbation;
    for_each_item(require(j, "modes", path), join(path, "modes"),
                  [&](const json& e, const std::string& p) {
                    PerturbationMode m;
                    const json& comp = require(e, "component", p);
                    if (!comp.is_array() || comp.size() != 2)
                      fail(join(p, "component"), "expected [i, j]");
                    m.i = get_index(comp[0], join(p, "component") + "[0]");
                    m.j = get_index(comp[1], join(p, "component") + "[1]");
                    if (m.i == m.j) fail(join(p, "component"), "indices must differ");
                    m.amplitude = get_double(require(e, "amplitude", p), join(p, "amplitude"));
                    for_each_item(require(e, "wavevector", p), join(p, "wavevector"),
                                  [&](const json& w, const std::string& wp) {
                                    m.wavevector.push_back(get_int(w, wp));
                                  });
                    if (e.contains("phase")) m.phase = get_double(e.at("phase"), join(p, "phase"));
                    s.modes.push_back(m);
                  });
  } else if (type == "coefficients") {
    s.initial = Scenario::Initial::Coefficients;
    std::set<std::array<int, 3>> seen;
    for_each_item(require(j, "terms", path), join(path, "terms"),
                  [&](const json& e, const std::string& p) {
                    if (!e.is_array() || e.size() != 4) fail(p, "expected [i, j, k, value]");
                    CoefficientTerm t;
                    for (int q = 0; q < 3; ++q)
                      t.idx[q] = get_index(e[q], p + "[" + std::to_string(q) + "]");
                    if (permutation_sign(t.idx.data(), 3) == 0) fail(p, "repeated index");
                    auto sorted = t.idx;
                    std::sort(sorted.begin(), sorted.end());
                    if (!seen.insert(sorted).second) fail(p, "duplicate component");
                    t.value = get_rational(e[3], p + "[3]");
                    s.coefficients.push_back(t);
                  });
  } else {
    fail(join(path, "type"), "expected \"standard\", \"perturbation\" or \"coefficients\"");
  }
}

void parse_flow(const json& j, Scenario& s) {
  const std::string path = "flow";
  if (!j.is_object()) fail(path, "expected an object");
  FlowConfig& f = s.flow;
  if (j.contains("dt")) f.dt = get_double(j.at("dt"), join(path, "dt"));
  if (j.contains("t_end")) f.t_end = get_double(j.at("t_end"), join(path, "t_end"));
  if (j.contains("method")) {
    const std::string m = get_string(j.at("method"), join(path, "method"));
    if (m == "rk4") f.method = Method::Rk4;
    else if (m == "euler") f.method = Method::Euler;
    else fail(join(path, "method"), "expected \"rk4\" or \"euler\"");
  }
  if (j.contains("sample_every")) f.sample_every = get_int(j.at("sample_every"), join(path, "sample_every"));
  if (j.contains("closedness_tol"))
    f.closedness_tol = get_double(j.at("closedness_tol"), join(path, "closedness_tol"));
  if (j.contains("rm_ceiling")) f.rm_ceiling = get_double(j.at("rm_ceiling"), join(path, "rm_ceiling"));
  try {
    f.validate();
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

void parse_diagnostics(const json& j, Scenario& s) {
  const std::string path = "diagnostics";
  if (!j.is_object()) fail(path, "expected an object");
  if (j.contains("residual_tolerance"))
    s.residual_tolerance = get_double(j.at("residual_tolerance"), join(path, "residual_tolerance"));
  if (j.contains("order_threshold"))
    s.order_threshold = get_double(j.at("order_threshold"), join(path, "order_threshold"));
  if (!j.contains("estimates")) return;
  const std::string ep = join(path, "estimates");
  const json& e = j.at("estimates");
  if (!e.is_object()) fail(ep, "expected an object");
  s.has_estimates = true;
  EstimateConfig& c = s.estimates;
  c.x0.clear();
  if (e.contains("x0"))
    for_each_item(e.at("x0"), join(ep, "x0"),
                  [&](const json& v, const std::string& p) { c.x0.push_back(get_double(v, p)); });
  c.rho = get_double(require(e, "rho", ep), join(ep, "rho"));
  c.k = get_double(require(e, "K", ep), join(ep, "K"));
  if (e.contains("p")) c.p = get_int(e.at("p"), join(ep, "p"));
  if (e.contains("c")) c.c = get_double(e.at("c"), join(ep, "c"));
  try {
    c.validate();
  } catch (const std::invalid_argument& ex) {
    fail(ep, ex.what());
  }
}

}  // namespace

bool Scenario::operator==(const Scenario& o) const {
  auto same_brackets = [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].i != b[i].i || a[i].j != b[i].j || a[i].k != b[i].k || a[i].value != b[i].value)
        return false;
    return true;
  };
  return name == o.name && backend == o.backend && same_brackets(brackets, o.brackets) &&
         lattice == o.lattice && initial == o.initial && modes == o.modes &&
         coefficients == o.coefficients && frame_change == o.frame_change && flow == o.flow &&
         has_estimates == o.has_estimates && estimates == o.estimates &&
         residual_tolerance == o.residual_tolerance && order_threshold == o.order_threshold &&
         csv == o.csv && diagnostics == o.diagnostics;
}

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw ScenarioError("scenario: top level must be an object");
  Scenario s;
  if (j.contains("name")) s.name = get_string(j.at("name"), "name");
  parse_backend(require(j, "backend", ""), s);
  if (j.contains("initial")) parse_initial(j.at("initial"), s);
  if (j.contains("frame_change")) {
    const json& f = j.at("frame_change");
    if (!f.is_array() || f.size() != kDim) fail("frame_change", "expected a 7x7 matrix");
    for (std::size_t r = 0; r < kDim; ++r) {
      const std::string p = index_path("frame_change", r);
      if (!f[r].is_array() || f[r].size() != kDim) fail(p, "expected a row of 7 entries");
      std::vector<Rational> row;
      for (std::size_t c = 0; c < kDim; ++c) row.push_back(get_rational(f[r][c], index_path(p, c)));
      s.frame_change.push_back(row);
    }
  }
  if (j.contains("flow")) parse_flow(j.at("flow"), s);
  if (j.contains("diagnostics")) parse_diagnostics(j.at("diagnostics"), s);
  if (j.contains("output")) {
    const json& o = j.at("output");
    if (!o.is_object()) fail("output", "expected an object");
    if (o.contains("csv")) s.csv = get_string(o.at("csv"), "output.csv");
    if (o.contains("diagnostics")) s.diagnostics = get_string(o.at("diagnostics"), "output.diagnostics");
  }
  if (s.backend == Scenario::Backend::Lie && s.initial == Scenario::Initial::Perturbation)
    fail("initial.type", "perturbation initial data needs the lattice backend");
  if (s.backend == Scenario::Backend::Lattice && !s.frame_change.empty())
    fail("frame_change", "only supported on the lie backend");
  if (s.backend == Scenario::Backend::Lattice)
    for (std::size_t i = 0; i < s.modes.size(); ++i)
      if (static_cast<int>(s.modes[i].wavevector.size()) != static_cast<int>(s.lattice.active_dims.size()))
        fail(index_path("initial.modes", i) + ".wavevector", "length must equal the number of active dims");
  if (s.has_estimates && s.backend == Scenario::Backend::Lattice &&
      s.estimates.x0.size() != s.lattice.active_dims.size())
    fail("diagnostics.estimates.x0", "needs one coordinate per active dim");
  // Jacobi, positivity and closedness are checked at load.
  if (s.backend == Scenario::Backend::Lie) (void)build_lie(s);
  else (void)build_lattice_phi(s, build_lattice(s));
  return s;
}

Scenario parse_scenario_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("scenario: malformed JSON: ") + e.what());
  }
  return parse_scenario(j);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("scenario: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str());
}

ordered_json emit_scenario(const Scenario& s) {
  ordered_json j;
  j["name"] = s.name;
  ordered_json b;
  if (s.backend == Scenario::Backend::Lie) {
    b["type"] = "lie";
    b["structure_constants"] = ordered_json::array();
    for (const auto& t : s.brackets)
      b["structure_constants"].push_back({t.i + 1, t.j + 1, t.k + 1, emit_rational(t.value)});
  } else {
    b["type"] = "lattice";
    ordered_json dims = ordered_json::array();
    for (int d : s.lattice.active_dims) dims.push_back(d + 1);
    b["active_dims"] = dims;
    b["sizes"] = s.lattice.sizes;
    b["spacings"] = s.lattice.spacings;
    b["stencil_order"] = s.lattice.stencil_order;
  }
  j["backend"] = b;
  ordered_json init;
  switch (s.initial) {
    case Scenario::Initial::Standard: init["type"] = "standard"; break;
    case Scenario::Initial::Perturbation: {
      init["type"] = "perturbation";
      init["modes"] = ordered_json::array();
      for (const auto& m : s.modes) {
        ordered_json e;
        e["component"] = {m.i + 1, m.j + 1};
        e["amplitude"] = m.amplitude;
        e["wavevector"] = m.wavevector;
        e["phase"] = m.phase;
        init["modes"].push_back(e);
      }
      break;
    }
    case Scenario::Initial::Coefficients: {
      init["type"] = "coefficients";
      init["terms"] = ordered_json::array();
      for (const auto& t : s.coefficients)
        init["terms"].push_back({t.idx[0] + 1, t.idx[1] + 1, t.idx[2] + 1, emit_rational(t.value)});
      break;
    }
  }
  j["initial"] = init;
  if (!s.frame_change.empty()) {
    ordered_json f = ordered_json::array();
    for (const auto& row : s.frame_change) {
      ordered_json r = ordered_json::array();
      for (const auto& v : row) r.push_back(emit_rational(v));
      f.push_back(r);
    }
    j["frame_change"] = f;
  }
  ordered_json fl;
  fl["dt"] = s.flow.dt;
  fl["t_end"] = s.flow.t_end;
  fl["method"] = s.flow.method == Method::Rk4 ? "rk4" : "euler";
  fl["sample_every"] = s.flow.sample_every;
  fl["closedness_tol"] = s.flow.closedness_tol;
  fl["rm_ceiling"] = s.flow.rm_ceiling;
  j["flow"] = fl;
  ordered_json d;
  d["residual_tolerance"] = s.residual_tolerance;
  d["order_threshold"] = s.order_threshold;
  if (s.has_estimates) {
    ordered_json e;
    e["x0"] = s.estimates.x0;
    e["rho"] = s.estimates.rho;
    e["K"] = s.estimates.k;
    e["p"] = s.estimates.p;
    e["c"] = s.estimates.c;
    d["estimates"] = e;
  }
  j["diagnostics"] = d;
  j["output"] = {{"csv", s.csv}, {"diagnostics", s.diagnostics}};
  return j;
}

Tensor<Rational> initial_phi_exact(const Scenario& s) {
  if (s.initial == Scenario::Initial::Coefficients) {
    std::vector<std::pair<std::vector<int>, Rational>> terms;
    for (const auto& t : s.coefficients)
      terms.push_back({{t.idx[0], t.idx[1], t.idx[2]}, t.value});
    return form_from_terms<Rational>(3, terms);
  }
  return standard_phi<Rational>();
}

LieSetup build_lie(const Scenario& s) {
  if (s.backend != Scenario::Backend::Lie) throw ScenarioError("scenario: not a lie backend");
  LieAlgebra<Rational> alg = LieAlgebra<Rational>::abelian();
  try {
    alg = LieAlgebra<Rational>::from_brackets(s.brackets);
  } catch (const JacobiViolation& e) {
    throw ScenarioError(std::string("scenario field 'backend.structure_constants': ") + e.what());
  }
  Tensor<Rational> phi = initial_phi_exact(s);
  if (!s.frame_change.empty()) {
    Tensor<Rational> a(2);
    for (int r = 0; r < kDim; ++r)
      for (int c = 0; c < kDim; ++c) a(r, c) = s.frame_change[r][c];
    if (sgn(determinant(to_matrix(a))) <= 0)
      throw ScenarioError("scenario field 'frame_change': determinant must be positive");
    alg = alg.change_frame(a);
    phi = pullback(phi, a);
  }
  // Positivity, then closedness.
  try {
    (void)metric_from_phi(phi.cast<double>());
  } catch (const NotPositive& e) {
    throw ScenarioError(std::string("scenario: initial 3-form rejected: ") + e.what());
  }
  const Tensor<Rational> dphi = alg.exterior_derivative(phi);
  if (!is_closed(dphi.cast<double>(), phi.cast<double>()))
    throw ScenarioError("scenario: initial 3-form is not closed for these structure constants");
  return {std::move(alg), std::move(phi)};
}

Lattice build_lattice(const Scenario& s) {
  if (s.backend != Scenario::Backend::Lattice) throw ScenarioError("scenario: not a lattice backend");
  return Lattice(s.lattice);
}

LatticeForm build_lattice_phi(const Scenario& s, const Lattice& lat) {
  LatticeForm phi;
  switch (s.initial) {
    case Scenario::Initial::Perturbation: phi = perturbed_standard(lat, s.modes); break;
    default: phi = constant_form(lat, initial_phi_exact(s).cast<double>()); break;
  }
  try {
    (void)metric_field(lat, phi);
  } catch (const NotPositive& e) {
    throw ScenarioError(std::string("scenario: initial 3-form rejected: ") + e.what());
  }
  return phi;
}

}  // namespace g2
