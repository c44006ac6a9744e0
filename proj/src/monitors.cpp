#include "krf/monitors.hpp"

#include "krf/error.hpp"
#include "krf/stencil.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

namespace krf::monitors {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double softplus(double y) { return y > 0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y)); }

// Quartic extrapolation of the end values from the four nearest interior nodes.
void extrapolate_ends(std::vector<double>& f) {
  const std::size_t N = f.size() - 1;
  f[0] = 4 * f[1] - 6 * f[2] + 4 * f[3] - f[4];
  f[N] = 4 * f[N - 1] - 6 * f[N - 2] + 4 * f[N - 3] - f[N - 4];
}

// Integral over [0, 1] of nodal values on x_j = j/N.
double corrected_trapezoid(std::span<const double> f) {
  const std::size_t N = f.size() - 1;
  const double h = 1.0 / static_cast<double>(N);
  const stencil::UniformDerivative d1(N + 1, h, 1, 4);
  double sum = 0.5 * (f[0] + f[N]);
  for (std::size_t j = 1; j < N; ++j) sum += f[j];
  return h * sum - h * h / 12 * (d1.at(f, N) - d1.at(f, 0));
}

double corrected_midpoint(std::span<const double> f) {
  const std::size_t N = f.size() - 1;
  const double h = 1.0 / static_cast<double>(N);
  const stencil::UniformDerivative d1(N + 1, h, 1, 4);
  double sum = 0.0;
  for (std::size_t j = 0; j < N; ++j) {
    if (j == 0)
      sum += (5 * f[0] + 15 * f[1] - 5 * f[2] + f[3]) / 16;
    else if (j + 1 == N)
      sum += (5 * f[N] + 15 * f[N - 1] - 5 * f[N - 2] + f[N - 3]) / 16;
    else
      sum += (-f[j - 1] + 9 * f[j] + 9 * f[j + 1] - f[j + 2]) / 16;
  }
  return h * sum + h * h / 24 * (d1.at(f, N) - d1.at(f, 0));
}

calabi::FrameEigenvalues initial_eigenvalues(const flow::Setup& setup, const std::vector<double>& rho) {
  calabi::FrameEigenvalues e;
  const std::size_t n = rho.size();
  e.base.assign(n, setup.mu0);
  e.fiber.assign(n, 0.0);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    if (setup.model.kind == calabi::AnsatzKind::ProjectiveBundleK1) e.base[j] = setup.omega0.du(rho[j]);
    e.fiber[j] = setup.omega0.d2u(rho[j]);
  }
  return e;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

Range interior_range(const std::vector<double>& v) {
  Range r;
  for (std::size_t j = 1; j + 1 < v.size(); ++j) r.add(v[j]);
  return r;
}

}  // namespace

double default_A(const flow::Setup& setup, std::size_t N) {
  const auto st = flow::initial_state(setup, N);
  const auto geo = calabi::analyze(st.profile);
  const auto rm = calabi::riemann_norm(setup.model, st.profile, geo);
  const double C = interior_range(rm.values).hi;
  return 2 * setup.T * (C + 2);
}

FiberAverage fiber_average(std::span<const double> values, std::span<const double> weight) {
  if (values.size() != weight.size()) throw InvalidInput("fiber average: values and weight differ in length");
  if (values.size() < 9) throw InvalidInput("fiber average needs at least 8 intervals");
  std::vector<double> product(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) product[j] = values[j] * weight[j];
  FiberAverage out;
  out.trapezoid = corrected_trapezoid(product) / corrected_trapezoid(weight);
  out.midpoint = corrected_midpoint(product) / corrected_midpoint(weight);
  return out;
}

Equivalence metric_equivalence(const calabi::FrameEigenvalues& omega, const calabi::FrameEigenvalues& reference,
                               std::size_t first, std::size_t last) {
  Range r;
  for (std::size_t j = first; j <= last; ++j) {
    r.add(omega.base[j] / reference.base[j]);
    r.add(omega.fiber[j] / reference.fiber[j]);
  }
  return {r.lo, r.hi};
}

double ricci_bound_margin(const calabi::RicciEigenvalues& ric, const calabi::FrameEigenvalues& omega0, double B,
                          std::size_t first, std::size_t last) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t j = first; j <= last; ++j)
    m = std::max({m, ric.base[j] - B * omega0.base[j], ric.fiber[j] - B * omega0.fiber[j]});
  return m;
}

Snapshot evaluate(const flow::Setup& setup, const flow::FlowState& state, const BConfig& cfg, bool with_riemann) {
  const auto& p = state.profile;
  const std::size_t N = p.intervals();
  const double t = state.t, s = setup.T - t;
  if (!(s > 0)) throw InvalidInput("monitors need t < T");
  const auto geo = calabi::analyze(p);
  const auto& pot = setup.omega0;
  const double L0 = pot.b - pot.a, c = pot.center;

  Snapshot out;
  out.t = t;
  out.rho = geo.rho;
  out.diameter = calabi::fiber_diameter(p);

  // phi = (u - a rho) - (s/T)(u0 - a0 rho) on the left half, with b on the right;
  // the reference potential moves its endpoints with the same rates as u.
  out.phi.resize(N + 1);
  for (std::size_t j = 0; j <= N; ++j) {
    const double y = geo.rho[j] - c;
    if (j <= N / 2)
      out.phi[j] = geo.u_minus_a[j] - (s / setup.T) * (j == 0 ? 0.0 : L0 * softplus(y));
    else
      out.phi[j] = geo.u_minus_b[j] - (s / setup.T) * ((j == N ? 0.0 : L0 * softplus(-y)) - L0 * c);
  }

  // w_{0,z} = u0'' d rho = u0''(rho(x)) / psi(x) dx.
  std::vector<double> weight(N + 1);
  for (std::size_t j = 1; j < N; ++j) weight[j] = pot.d2u(geo.rho[j]) / p.psi[j];
  extrapolate_ends(weight);
  const auto avg = fiber_average(out.phi, weight);
  out.Phi = avg.trapezoid;
  out.Phi_midpoint = avg.midpoint;
  out.npot.resize(N + 1);
  for (std::size_t j = 0; j <= N; ++j) out.npot[j] = (out.phi[j] - out.Phi) / s;

  const calabi::VolumeDatum datum{setup.model, pot, setup.sigma_base, setup.T};
  const auto lv = calabi::log_volume_form(setup.model, p, geo);
  const auto G = flow::flow_potential(setup, state, geo);
  out.log_volume_ratio.assign(N + 1, kNaN);
  out.phi_rate.assign(N + 1, kNaN);
  for (std::size_t j = 1; j < N; ++j) {
    const double rho = geo.rho[j];
    out.log_volume_ratio[j] = lv[j] - datum.log_omega(rho) - std::log(s);
    const double ref_rate = setup.model.kind == calabi::AnsatzKind::ProjectiveBundleK1
                                ? (setup.sigma_base * rho - pot.u(rho)) / setup.T
                                : -pot.u(rho) / setup.T;
    out.phi_rate[j] = G[j] + setup.gauge - ref_rate;
  }

  const auto omega = calabi::metric_eigenvalues(setup.model, p);
  const auto omega0 = initial_eigenvalues(setup, geo.rho);
  calabi::FrameEigenvalues sigma;
  sigma.base.assign(N + 1, setup.sigma_base);
  const auto tr0 = calabi::traces(setup.model, omega, omega0);
  const auto trs = calabi::traces(setup.model, omega, sigma);
  out.trace0_scaled.assign(N + 1, kNaN);
  out.trace_sigma.assign(N + 1, kNaN);
  out.Q.assign(N + 1, kNaN);
  double qmax = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < N; ++j) {
    out.trace0_scaled[j] = s * tr0.omega_of_other[j];
    out.trace_sigma[j] = trs.omega_of_other[j];
    out.Q[j] = std::log(out.trace0_scaled[j]) - cfg.A * out.npot[j];
    if (out.Q[j] > qmax) {
      qmax = out.Q[j];
      out.Q_argmax = j;
    }
  }

  out.R = calabi::scalar_curvature(setup.model, p, geo);
  out.R.front() = out.R.back() = kNaN;
  if (with_riemann) {
    out.Rm = calabi::riemann_norm(setup.model, p, geo).values;
    out.Rm.front() = out.Rm.back() = kNaN;
  }
  const auto ric = calabi::ricci_eigenvalues(setup.model, p, geo);
  out.ricci_margin = ricci_bound_margin(ric, omega0, cfg.B, 1, N - 1);
  out.equivalence = metric_equivalence(omega, calabi::reference_metric(t, setup.T, omega0, sigma), 1, N - 1);
  const auto drift = calabi::measured_endpoint_drift(setup.model, p, geo);
  out.drift_left = drift.left;
  out.drift_right = drift.right;
  return out;
}

MonitorRecord summarize(const Snapshot& s) {
  MonitorRecord r;
  r.t = s.t;
  r.diam_fiber = s.diameter;
  const auto vr = interior_range(s.log_volume_ratio);
  r.vr_sup = std::exp(vr.hi);
  r.vr_inf = std::exp(vr.lo);
  const auto np = interior_range(s.npot);
  r.npot_sup = std::max(std::abs(np.lo), std::abs(np.hi));
  r.npot_inf = np.lo;
  const auto t0 = interior_range(s.trace0_scaled);
  r.trace0_scaled_sup = t0.hi;
  r.trace0_scaled_inf = t0.lo;
  const auto ts = interior_range(s.trace_sigma);
  r.trace_sigma_sup = ts.hi;
  r.trace_sigma_inf = ts.lo;
  const auto q = interior_range(s.Q);
  r.Q_sup = q.hi;
  r.Q_inf = q.lo;
  r.R_sup = interior_range(s.R).hi;
  r.Rm_sup = s.Rm.empty() ? kNaN : interior_range(s.Rm).hi;
  r.ricci_margin = s.ricci_margin;
  r.hypothesis_ok = s.ricci_margin <= 0;
  r.c_low = s.equivalence.c_low;
  r.c_high = s.equivalence.c_high;
  r.Q_argmax = s.Q_argmax;
  r.drift_left = s.drift_left;
  r.drift_right = s.drift_right;
  r.Phi = s.Phi;
  return r;
}

Monitor::Monitor(flow::Setup setup, BConfig cfg) : setup_(std::move(setup)), cfg_(cfg) {
  if (!(cfg_.B > 0) || !(cfg_.A > 0)) throw InvalidInput("monitor constants A and B must be positive");
}

const MonitorRecord& Monitor::observe(const flow::FlowState& state) {
  if (!records_.empty() && !(state.t > records_.back().t))
    throw InvalidInput("monitor records must have strictly increasing t");
  auto rec = summarize(evaluate(setup_, state, cfg_));
  if (!rec.hypothesis_ok && !first_violation_) first_violation_ = rec.t;
  if (first_violation_) rec.hypothesis_ok = false;
  records_.push_back(rec);
  return records_.back();
}

const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> cols{"t",      "diam_fiber", "vr_sup",    "vr_inf",
                                             "npot_sup", "trace0_scaled_sup", "trace_sigma_sup", "Q_sup",
                                             "R_sup",  "Rm_sup",     "ricci_margin", "hypothesis_ok"};
  return cols;
}

const std::vector<std::string>& diagnostic_columns() {
  static const std::vector<std::string> cols{"t",          "c_low",       "c_high",  "npot_inf",
                                             "trace0_scaled_inf", "trace_sigma_inf", "Q_inf", "Q_argmax",
                                             "drift_left", "drift_right", "Phi"};
  return cols;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

void write_header(std::ostream& out, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

}  // namespace

void write_trajectory_csv(std::ostream& out, std::span<const MonitorRecord> records) {
  write_header(out, trajectory_columns());
  for (const auto& r : records) {
    for (double v : {r.t, r.diam_fiber, r.vr_sup, r.vr_inf, r.npot_sup, r.trace0_scaled_sup, r.trace_sigma_sup,
                     r.Q_sup, r.R_sup, r.Rm_sup, r.ricci_margin})
      out << format_double(v) << ',';
    out << (r.hypothesis_ok ? 1 : 0) << '\n';
  }
}

void write_diagnostics_csv(std::ostream& out, std::span<const MonitorRecord> records) {
  write_header(out, diagnostic_columns());
  for (const auto& r : records) {
    out << format_double(r.t) << ',' << format_double(r.c_low) << ',' << format_double(r.c_high) << ','
        << format_double(r.npot_inf) << ',' << format_double(r.trace0_scaled_inf) << ','
        << format_double(r.trace_sigma_inf) << ',' << format_double(r.Q_inf) << ',' << r.Q_argmax << ','
        << format_double(r.drift_left) << ',' << format_double(r.drift_right) << ',' << format_double(r.Phi)
        << '\n';
  }
}

}  // namespace krf::monitors
