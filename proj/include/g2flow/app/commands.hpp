#pragma once

// The check, flow and diagnose commands. Each returns a process exit code.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "g2flow/app/scenario.hpp"

namespace g2 {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitBlowup = 3,
  kExitClosednessDrift = 4,
};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  int dt_halve = 0;
  std::optional<std::uint64_t> seed;
  std::ostream* out = nullptr;  // summary lines; std::cout when null
  std::ostream* err = nullptr;  // errors; std::cerr when null
};

int cmd_check(const Scenario& s, const RunOptions& opt);
int cmd_flow(const Scenario& s, const RunOptions& opt);
int cmd_diagnose(const Scenario& s, const RunOptions& opt);

// Loads the scenario and dispatches; maps every failure class to its exit code.
int run_command(const std::string& command, const std::filesystem::path& scenario,
                const RunOptions& opt);

// One CSV row per sample, printed with 17 significant digits.
struct SampleRow {
  double t = 0, scalar = 0, t2 = 0, vol = 0, rm = 0, closedness = 0, min_eig = 0;
};
SampleRow lie_sample_row(const LieAlgebra<double>& alg, const Tensor<double>& phi, double t);
SampleRow lattice_sample_row(const Lattice& lat, const LatticeForm& phi, double t);
std::string csv_header();
std::string csv_row(const SampleRow& r);

}  // namespace g2
