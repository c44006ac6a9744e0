#include "krf/flow.hpp"

#include "krf/error.hpp"
#include "krf/stencil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace krf::flow {

namespace {

struct Operators {
  stencil::UniformDerivative d1, d2;
};

const Operators& operators(std::size_t N) {
  thread_local std::map<std::size_t, Operators> cache;
  auto it = cache.find(N);
  if (it == cache.end()) {
    const double h = 1.0 / static_cast<double>(N);
    it = cache.emplace(N, Operators{stencil::UniformDerivative(N + 1, h, 1, 4),
                                    stencil::UniformDerivative(N + 1, h, 2, 4)}).first;
  }
  return it->second;
}

std::string class_mismatch(const std::string& what, const classes::KahlerClass& got,
                           const classes::KahlerClass& want) {
  return what + " is " + got.str() + " but the ansatz requires " + want.str();
}

}  // namespace

double Setup::length(double t) const { return (a_rate - b_rate) * (T - t); }

double Setup::radial_weight() const {
  return model.kind == calabi::AnsatzKind::ProjectiveBundleK1 ? model.n : 1.0;
}

double Setup::coupling() const {
  return model.kind == calabi::AnsatzKind::ProjectiveBundleK1 ? model.n - 1.0 : 0.0;
}

Setup Setup::from_config(const config::ExperimentConfig& cfg) {
  const auto& cd = cfg.classes;
  if (cd.basis.size() != 2) throw ConfigError("ansatz experiments need exactly two generators");
  if (cd.basis.fiber_dim != 1) throw ConfigError("ansatz experiments need fiber dimension r = 1");
  const auto report = classes::validate(cd);
  if (!report.omega0_in_cone) throw InvalidInput("initial class " + cd.omega0.str() + " is outside the cone");
  if (!report.T.finite()) throw InvalidInput("the class trajectory never leaves the cone (T = infinity)");
  if (!report.residual.is_zero())
    throw InvalidInput("collapsing condition fails: [w0] - T c1 - [sigma] = " + report.residual.str());

  const int n = cfg.n;
  const auto& w0 = cd.omega0.coeffs;
  const auto& c1 = cd.c1.coeffs;
  const auto& sg = cd.sigma.coeffs;
  Setup s;
  s.T_exact = *report.T.time;
  s.T = to_double(s.T_exact);
  s.gauge = cfg.solver.gauge;
  if (cfg.kind == calabi::AnsatzKind::ProjectiveBundleK1) {
    const classes::KahlerClass want({Rational(n - 1), Rational(n + 1)});
    if (!(cd.c1 == want)) throw ConfigError(class_mismatch("c1", cd.c1, want));
    if (sg[0] != sg[1]) throw ConfigError("sigma must restrict trivially to the fiber: expected (s, s)");
    s.model = calabi::AnsatzModel::projective_bundle_k1(n);
    s.omega0 = calabi::LogisticPotential{to_double(w0[0]), to_double(w0[1]), 0.0};
    s.a_rate = -to_double(c1[0]);
    s.b_rate = -to_double(c1[1]);
    s.sigma_base = to_double(sg[0]);
  } else {
    if (c1[1] != 2) throw ConfigError("c1 must pair to 2 with the CP^1 fiber");
    if (c1[0] != 0 && c1[0] != n) throw ConfigError("product base must be flat (c1 coefficient 0) or CP^{n-1} (n)");
    if (sg[1] != 0) throw ConfigError("sigma must be pulled back from the base: expected (s, 0)");
    s.model = calabi::AnsatzModel::product(n, to_double(c1[0]));
    s.omega0 = calabi::LogisticPotential{0.0, to_double(w0[1]), 0.0};
    s.a_rate = 0.0;
    s.b_rate = -to_double(c1[1]);
    s.mu0 = to_double(w0[0]);
    s.mu_rate = -to_double(c1[0]);
    s.sigma_base = to_double(sg[0]);
  }
  return s;
}

StepControl StepControl::from_config(const config::SolverSettings& s) {
  StepControl c;
  c.dt_max = s.dt_max;
  c.safety = s.safety;
  c.tolerance = s.tolerance;
  c.eps_stop = s.eps_stop;
  c.kappa = s.kappa;
  c.dt_floor = s.dt_floor;
  c.N = s.N;
  return c;
}

FlowState initial_state(const Setup& setup, std::size_t N) {
  FlowState st;
  st.profile = calabi::MomentumProfile::logistic(setup.omega0, N, setup.mu0);
  return st;
}

Derivative rhs(const Setup& setup, const FlowState& state) {
  const auto& p = state.profile;
  const std::size_t N = p.intervals();
  const auto& ops = operators(N);
  const double t = state.t;
  const double L = setup.length(t), a = setup.a(t);
  const double Ldot = setup.b_rate - setup.a_rate, adot = setup.a_rate;
  const double w = setup.radial_weight(), k = setup.coupling();

  Derivative d;
  d.psi.assign(N + 1, 0.0);
  for (std::size_t j = 1; j < N; ++j) {
    const double x = p.x(j), psi = p.psi[j];
    const double px = ops.d1.at(p.psi, j), pxx = ops.d2.at(p.psi, j);
    double f = psi * pxx - px * px + (w + adot + Ldot * x) * px - Ldot * psi;
    if (k != 0.0) {
      const double tau = a + L * x;
      f -= k * (L * psi / tau) * (L * psi / tau);
    }
    d.psi[j] = f / L;
  }
  const std::size_t mid = N / 2;
  const double psi_m = p.psi[mid], px_m = ops.d1.at(p.psi, mid);
  const double tau_m = a + 0.5 * L;
  d.rho_mid = (-px_m + w + adot + 0.5 * Ldot) / (L * psi_m) - k / tau_m;
  double G = std::log(L * psi_m) + k * std::log(tau_m) - w * p.rho_mid;
  if (setup.model.kind == calabi::AnsatzKind::Product) G += (setup.model.n - 1) * std::log(setup.mu(t));
  d.u_mid = G + setup.gauge + tau_m * d.rho_mid;
  return d;
}

std::vector<double> flow_potential(const Setup& setup, const FlowState& state,
                                   const calabi::MomentumGeometry& geo) {
  const auto& p = state.profile;
  const std::size_t N = p.intervals();
  const double w = setup.radial_weight(), k = setup.coupling();
  std::vector<double> G(N + 1, std::numeric_limits<double>::quiet_NaN());
  const double base = setup.model.kind == calabi::AnsatzKind::Product
                          ? (setup.model.n - 1) * std::log(setup.mu(state.t))
                          : 0.0;
  for (std::size_t j = 1; j < N; ++j)
    G[j] = std::log(p.length() * p.psi[j]) + k * std::log(p.tau(j)) - w * geo.rho[j] + base;
  return G;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::ReachedStop: return "reached_stop";
    case Termination::AlreadyPastStop: return "already_past_stop";
    case Termination::StepUnderflow: return "singularity_reached";
    case Termination::PositivityFailure: return "positivity_failure";
    case Termination::StoppedByHook: return "stopped_by_hook";
  }
  return "unknown";
}

namespace {

// y + sum_i c_i k_i, evaluated at time t_new. Returns false on positivity failure.
bool combine(const Setup& setup, const FlowState& base, double t_new, double dt,
             std::initializer_list<std::pair<double, const Derivative*>> terms, FlowState& out) {
  const std::size_t N = base.profile.intervals();
  out.t = t_new;
  out.profile.a = setup.a(t_new);
  out.profile.b = setup.b(t_new);
  out.profile.base_eigenvalue = setup.mu(t_new);
  out.profile.psi.resize(N + 1);
  out.profile.psi.front() = 0.0;
  out.profile.psi.back() = 0.0;
  bool ok = true;
  for (std::size_t j = 1; j < N; ++j) {
    double v = base.profile.psi[j];
    for (const auto& [c, k] : terms) v += dt * c * k->psi[j];
    out.profile.psi[j] = v;
    ok = ok && v > 0;
  }
  double r = base.profile.rho_mid, u = base.profile.u_mid;
  for (const auto& [c, k] : terms) {
    r += dt * c * k->rho_mid;
    u += dt * c * k->u_mid;
  }
  out.profile.rho_mid = r;
  out.profile.u_mid = u;
  const double tau_left = out.profile.a;
  if (setup.model.kind == calabi::AnsatzKind::ProjectiveBundleK1 && !(tau_left > 0)) ok = false;
  return ok && std::isfinite(r) && std::isfinite(u);
}

}  // namespace

StepResult step(const Setup& setup, FlowState& state, double dt, const StepControl& ctrl) {
  StepResult res;
  if (dt < 0) throw InvalidInput("negative time step");
  const double t = state.t;
  const Derivative k1 = rhs(setup, state);
  FlowState s2 = state, s3 = state, s4 = state, lower = state;
  if (!combine(setup, state, t + 0.5 * dt, dt, {{0.5, &k1}}, s2)) {
    res.positivity_violation = true;
    res.dt_next = 0.5 * dt;
    return res;
  }
  const Derivative k2 = rhs(setup, s2);
  if (!combine(setup, state, t + 0.75 * dt, dt, {{0.75, &k2}}, s3)) {
    res.positivity_violation = true;
    res.dt_next = 0.5 * dt;
    return res;
  }
  const Derivative k3 = rhs(setup, s3);
  if (!combine(setup, state, t + dt, dt, {{2.0 / 9, &k1}, {1.0 / 3, &k2}, {4.0 / 9, &k3}}, s4)) {
    res.positivity_violation = true;
    res.dt_next = 0.5 * dt;
    return res;
  }
  const Derivative k4 = rhs(setup, s4);
  combine(setup, state, t + dt, dt, {{7.0 / 24, &k1}, {0.25, &k2}, {1.0 / 3, &k3}, {0.125, &k4}}, lower);

  // u_mid is a passive quadrature of the other components and is left out of
  // the error norm, so the accepted steps do not depend on the gauge.
  double err = std::abs(s4.profile.rho_mid - lower.profile.rho_mid);
  for (std::size_t j = 1; j < state.profile.intervals(); ++j)
    err = std::max(err, std::abs(s4.profile.psi[j] - lower.profile.psi[j]));
  res.error = err / ctrl.tolerance;
  const double factor =
      res.error > 0 ? std::clamp(ctrl.safety * std::cbrt(1.0 / res.error), 0.2, 5.0) : 5.0;
  res.dt_next = dt * factor;
  if (res.error <= 1.0) {
    res.accepted = true;
    s4.accepted = state.accepted + 1;
    s4.rejected = state.rejected;
    s4.last_dt = dt;
    state = std::move(s4);
  } else {
    ++state.rejected;
  }
  return res;
}

RunSummary run(const Setup& setup, FlowState state, const StepControl& ctrl, std::size_t cadence,
               const MonitorHook& hook) {
  RunSummary out;
  const double t_stop = setup.T - ctrl.eps_stop;
  if (cadence == 0) throw InvalidInput("monitor cadence must be positive");
  if (state.t >= t_stop) {
    out.termination = Termination::AlreadyPastStop;
    out.final_state = std::move(state);
    return out;
  }
  auto call = [&](const FlowState& s) {
    ++out.hook_calls;
    return !hook || hook(s);
  };
  if (!call(state)) {
    out.termination = Termination::StoppedByHook;
    out.final_state = std::move(state);
    return out;
  }
  double dt = std::min({ctrl.dt_max, ctrl.kappa * (setup.T - state.t), 1e-6});
  std::size_t since_hook = 0;
  bool last_was_positivity = false;
  while (true) {
    const double remaining = t_stop - state.t;
    const bool final_step = dt >= remaining;
    dt = std::min({dt, ctrl.dt_max, ctrl.kappa * (setup.T - state.t), remaining});
    if (dt < ctrl.dt_floor) {
      out.termination = last_was_positivity ? Termination::PositivityFailure : Termination::StepUnderflow;
      out.message = "time step fell below the floor at t = " + std::to_string(state.t);
      break;
    }
    const auto res = step(setup, state, dt, ctrl);
    last_was_positivity = res.positivity_violation;
    if (res.accepted) {
      if (final_step || state.t >= t_stop) state.t = t_stop;
      ++since_hook;
      if (state.t >= t_stop) {
        call(state);
        out.termination = Termination::ReachedStop;
        break;
      }
      if (since_hook == cadence) {
        since_hook = 0;
        if (!call(state)) {
          out.termination = Termination::StoppedByHook;
          break;
        }
      }
    }
    dt = res.dt_next;
  }
  out.final_state = std::move(state);
  return out;
}

}  // namespace krf::flow
