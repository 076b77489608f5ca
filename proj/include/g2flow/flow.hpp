#pragma once

// Fixed-step integration of ∂t φ = Δφ φ, generic over a backend that supplies
// the velocity and health monitors for its state type.

#include <cmath>
#include <concepts>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "g2flow/errors.hpp"

namespace g2 {

enum class Method { Rk4, Euler };

struct FlowConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  Method method = Method::Rk4;
  int sample_every = 1;
  double closedness_tol = 1e-8;
  double rm_ceiling = 1e6;

  long steps() const { return std::lround(t_end / dt); }
  bool operator==(const FlowConfig&) const = default;
  void validate() const {
    if (!(dt > 0)) throw std::invalid_argument("flow: dt must be positive");
    if (!(t_end > 0)) throw std::invalid_argument("flow: t_end must be positive");
    if (sample_every < 1) throw std::invalid_argument("flow: sample_every must be >= 1");
  }
};

struct StateHealth {
  double min_metric_eigenvalue = 0;
  double closedness = 0;  // max |dφ|
  double rm_norm = 0;     // max ||Rm||
};

template <class State>
struct FlowState {
  double t = 0;
  State phi;
};

template <class State>
using Trajectory = std::vector<FlowState<State>>;

struct FlowError : std::runtime_error {
  FlowError(const std::string& what, double t) : std::runtime_error(what), t(t) {}
  double t;  // time of the last good state
};

struct FlowBlowupError : FlowError {
  using FlowError::FlowError;
};

struct ClosednessDriftError : FlowError {
  using FlowError::FlowError;
};

template <class State>
struct FlowBlowup : FlowBlowupError {
  FlowBlowup(const std::string& what, FlowState<State> last)
      : FlowBlowupError(what, last.t), last_good(std::move(last)) {}
  FlowState<State> last_good;
};

template <class State>
struct ClosednessDrift : ClosednessDriftError {
  ClosednessDrift(const std::string& what, FlowState<State> last)
      : ClosednessDriftError(what, last.t), last_good(std::move(last)) {}
  FlowState<State> last_good;
};

template <class B>
concept FlowBackend = requires(const B& b, const typename B::State& s,
                               typename B::State& x, double a) {
  { b.velocity(s) } -> std::same_as<typename B::State>;
  { b.health(s) } -> std::same_as<StateHealth>;
  { b.axpy(x, a, s) };
};

template <FlowBackend B>
class FlowIntegrator {
 public:
  using State = typename B::State;

  FlowIntegrator(const B& backend, FlowConfig cfg) : b_(backend), cfg_(cfg) {
    cfg_.validate();
  }

  const FlowConfig& config() const { return cfg_; }

  // One step; throws FlowBlowup / ClosednessDrift with the input as last good state.
  FlowState<State> step(const FlowState<State>& in) const {
    FlowState<State> out{in.t + cfg_.dt, in.phi};
    try {
      advance(out.phi, in.phi);
    } catch (const NotPositive& e) {
      throw FlowBlowup<State>(std::string("metric lost positivity: ") + e.what(), in);
    }
    StateHealth h;
    try {
      h = b_.health(out.phi);
    } catch (const NotPositive& e) {
      throw FlowBlowup<State>(std::string("metric lost positivity: ") + e.what(), in);
    }
    if (!(h.min_metric_eigenvalue > 0))
      throw FlowBlowup<State>("metric lost positivity", in);
    if (!(h.rm_norm <= cfg_.rm_ceiling))
      throw FlowBlowup<State>("curvature exceeded ceiling", in);
    if (!(h.closedness <= cfg_.closedness_tol))
      throw ClosednessDrift<State>("closedness drift " + std::to_string(h.closedness), in);
    return out;
  }

  // Samples at t = 0 and every sample_every steps (always including the end).
  Trajectory<State> run(FlowState<State> state,
                        const std::function<void(const FlowState<State>&)>& on_sample = {}) const {
    Trajectory<State> traj;
    const long n = cfg_.steps();
    auto record = [&](const FlowState<State>& s) {
      traj.push_back(s);
      if (on_sample) on_sample(s);
    };
    record(state);
    for (long k = 1; k <= n; ++k) {
      state = step(state);
      state.t = static_cast<double>(k) * cfg_.dt;
      if (k % cfg_.sample_every == 0 || k == n) record(state);
    }
    return traj;
  }

 private:
  void advance(State& out, const State& phi) const {
    const double dt = cfg_.dt;
    if (cfg_.method == Method::Euler) {
      b_.axpy(out, dt, b_.velocity(phi));
      return;
    }
    const State k1 = b_.velocity(phi);
    State tmp = phi;
    b_.axpy(tmp, 0.5 * dt, k1);
    const State k2 = b_.velocity(tmp);
    tmp = phi;
    b_.axpy(tmp, 0.5 * dt, k2);
    const State k3 = b_.velocity(tmp);
    tmp = phi;
    b_.axpy(tmp, dt, k3);
    const State k4 = b_.velocity(tmp);
    b_.axpy(out, dt / 6, k1);
    b_.axpy(out, dt / 3, k2);
    b_.axpy(out, dt / 3, k3);
    b_.axpy(out, dt / 6, k4);
  }

  const B& b_;
  FlowConfig cfg_;
};

}  // namespace g2
