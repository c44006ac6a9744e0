#pragma once

// Kähler-Ricci flow for Calabi-symmetric metrics. The potential obeys
// du/dt = G + c with G the flow potential (log of the volume form up to a
// pluriharmonic term) and c a constant gauge. The state is kept in momentum
// form: u'' = L(t) psi(x, t) on x in [0, 1], with the momentum interval
// [a(t), b(t)] moving at the rates fixed by the classes. psi satisfies
//
//   L psi_t = psi psi_xx - psi_x^2 + (w + a' + L' x) psi_x - L' psi - k L^2 psi^2 / tau^2,
//
// with (w, k) = (n, n - 1) for the k = 1 bundle and (1, 0) for products. The
// position rho_mid and value u_mid of the potential at x = 1/2 are carried along
// so that u can be reconstructed.

#include "krf/calabi.hpp"
#include "krf/classes.hpp"
#include "krf/config.hpp"

#include <functional>
#include <string>
#include <vector>

namespace krf::flow {

/// Model data for one experiment, derived from validated classes.
struct Setup {
  calabi::AnsatzModel model;
  calabi::LogisticPotential omega0;  // initial fiber potential (momentum interval [a0, b0])
  Rational T_exact;
  double T = 0.0;
  double a_rate = 0.0;  // da/dt = -c1 pairing
  double b_rate = 0.0;
  double mu0 = 1.0;       // product base eigenvalue at t = 0
  double mu_rate = 0.0;   // d mu / dt
  double sigma_base = 0.0;  // base eigenvalue of pi^* w_Sigma in the ansatz frame
  double gauge = 0.0;

  double a(double t) const { return omega0.a + a_rate * t; }
  double b(double t) const { return omega0.b + b_rate * t; }
  double length(double t) const;
  double mu(double t) const { return mu0 + mu_rate * t; }
  /// w and k in the momentum equation.
  double radial_weight() const;
  double coupling() const;

  /// Checks the class data against the ansatz (basis size, first Chern class,
  /// collapsing condition) and converts to floating point.
  static Setup from_config(const config::ExperimentConfig& cfg);
};

struct StepControl {
  double dt_max = 1e-2;
  double safety = 0.9;
  double tolerance = 1e-12;
  double eps_stop = 1e-4;
  double kappa = 0.05;
  double dt_floor = 1e-15;
  std::size_t N = 512;

  static StepControl from_config(const config::SolverSettings& s);
};

struct FlowState {
  double t = 0.0;
  calabi::MomentumProfile profile;  // a, b, base_eigenvalue are the class-predicted values at t
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double last_dt = 0.0;
};

/// Logistic initial metric on the grid of `ctrl`.
FlowState initial_state(const Setup& setup, std::size_t N);

/// Time derivatives of (psi interior, rho_mid, u_mid) at a state.
struct Derivative {
  std::vector<double> psi;  // size N + 1, ends zero
  double rho_mid = 0.0;
  double u_mid = 0.0;
};
Derivative rhs(const Setup& setup, const FlowState& state);

/// Flow potential G at every node (ends NaN); du/dt = G + gauge.
std::vector<double> flow_potential(const Setup& setup, const FlowState& state,
                                   const calabi::MomentumGeometry& geo);

enum class Termination { ReachedStop, AlreadyPastStop, StepUnderflow, PositivityFailure, StoppedByHook };
std::string to_string(Termination t);

struct StepResult {
  bool accepted = false;
  bool positivity_violation = false;
  double error = 0.0;  // normalized error estimate (<= 1 accepted)
  double dt_next = 0.0;
};

/// One attempted step of size dt (embedded Bogacki-Shampine 3(2) pair). On
/// acceptance `state` is advanced; on rejection it is left untouched.
StepResult step(const Setup& setup, FlowState& state, double dt, const StepControl& ctrl);

/// Called on accepted states; return false to stop the run.
using MonitorHook = std::function<bool(const FlowState&)>;

struct RunSummary {
  Termination termination = Termination::ReachedStop;
  FlowState final_state;
  std::size_t hook_calls = 0;
  std::string message;
};

/// Integrates from `state` to T - eps_stop, calling `hook` on the initial state,
/// after every `cadence` accepted steps, and on the final state.
RunSummary run(const Setup& setup, FlowState state, const StepControl& ctrl, std::size_t cadence,
               const MonitorHook& hook);

}  // namespace krf::flow
