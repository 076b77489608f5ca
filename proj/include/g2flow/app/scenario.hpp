#pragma once

// Scenario files: one JSON document describing backend, initial structure,
// flow settings, diagnostics settings and output names. Indices in the file
// are 1-based; everything in memory is 0-based.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "g2flow/estimates.hpp"
#include "g2flow/lattice.hpp"
#include "g2flow/lie.hpp"

namespace g2 {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CoefficientTerm {
  std::array<int, 3> idx;
  Rational value;
  bool operator==(const CoefficientTerm&) const = default;
};

struct Scenario {
  enum class Backend { Lie, Lattice };
  enum class Initial { Standard, Perturbation, Coefficients };

  std::string name = "scenario";
  Backend backend = Backend::Lie;
  std::vector<BracketTerm<Rational>> brackets;
  LatticeSpec lattice;
  Initial initial = Initial::Standard;
  std::vector<PerturbationMode> modes;
  std::vector<CoefficientTerm> coefficients;
  std::vector<std::vector<Rational>> frame_change;  // empty when absent
  FlowConfig flow;
  bool has_estimates = false;
  EstimateConfig estimates;
  double residual_tolerance = 1e-6;
  double order_threshold = 1.9;
  std::string csv = "results.csv";
  std::string diagnostics = "diagnostics.json";

  bool operator==(const Scenario&) const;
};

Scenario parse_scenario(const nlohmann::json& j);
Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::ordered_json emit_scenario(const Scenario& s);

// Runtime objects. Lie: algebra and φ after the optional frame change, with
// Jacobi and closedness validated.
struct LieSetup {
  LieAlgebra<Rational> alg;
  Tensor<Rational> phi;
};
LieSetup build_lie(const Scenario& s);
Lattice build_lattice(const Scenario& s);
LatticeForm build_lattice_phi(const Scenario& s, const Lattice& lat);

// Initial φ as an exact form before any frame change.
Tensor<Rational> initial_phi_exact(const Scenario& s);

}  // namespace g2
