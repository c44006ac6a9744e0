#pragma once

// Per-snapshot diagnostics: every quantity the collapse argument bounds,
// evaluated on the momentum grid. The potential is split as
// u_t = u_hat_t + phi_t with the reference potential
// u_hat_t = ((T - t) u_0 + t sigma_b rho) / T, and the fixed volume form
// satisfies i dd^c log Omega = (pi^* w_Sigma - w_0) / T.

#include "krf/calabi.hpp"
#include "krf/flow.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace krf::monitors {

/// B bounds Ric(w_t) <= B w_0; A is the barrier constant in Q.
struct BConfig {
  double B = 10.0;
  double A = 1.0;
};

/// A with C - A/(2T) = -2, C the sup of |Rm(w_0)| on the grid.
double default_A(const flow::Setup& setup, std::size_t N);

/// Fiber average of `values` against `weight` on x_j = j/N, by two
/// endpoint-corrected quadratures (both fourth order).
struct FiberAverage {
  double trapezoid = 0.0;
  double midpoint = 0.0;
};
FiberAverage fiber_average(std::span<const double> values, std::span<const double> weight);

/// Eigenvalue-wise constants with c_low h <= w <= c_high h over the given nodes.
struct Equivalence {
  double c_low = 0.0;
  double c_high = 0.0;
};
Equivalence metric_equivalence(const calabi::FrameEigenvalues& omega, const calabi::FrameEigenvalues& reference,
                               std::size_t first, std::size_t last);

/// max over nodes in [first, last] and frame directions of (Ric - B w_0).
double ricci_bound_margin(const calabi::RicciEigenvalues& ric, const calabi::FrameEigenvalues& omega0, double B,
                          std::size_t first, std::size_t last);

/// All per-node fields of one snapshot. Arrays have N + 1 entries; the end
/// entries of curvature-type fields are NaN.
struct Snapshot {
  double t = 0.0;
  double diameter = 0.0;
  std::vector<double> rho;
  std::vector<double> phi;          // u_t - u_hat_t
  double Phi = 0.0;                 // fiber average of phi against w_{0,z}
  double Phi_midpoint = 0.0;
  std::vector<double> npot;         // (phi - Phi) / (T - t)
  std::vector<double> log_volume_ratio;
  std::vector<double> phi_rate;     // d phi / dt = log volume ratio + log(T - t) + gauge
  std::vector<double> trace0_scaled;  // (T - t) Tr_{w_t} w_0
  std::vector<double> trace_sigma;    // Tr_{w_t} pi^* w_Sigma
  std::vector<double> Q;
  std::size_t Q_argmax = 0;
  std::vector<double> R;
  std::vector<double> Rm;
  double ricci_margin = 0.0;
  Equivalence equivalence;
  double drift_left = 0.0;
  double drift_right = 0.0;
};

/// Curvature norms are the expensive part; `with_riemann = false` leaves Rm empty.
Snapshot evaluate(const flow::Setup& setup, const flow::FlowState& state, const BConfig& cfg,
                  bool with_riemann = true);

/// One row of the trajectory.
struct MonitorRecord {
  double t = 0.0;
  double diam_fiber = 0.0;
  double vr_sup = 0.0, vr_inf = 0.0;
  double npot_sup = 0.0, npot_inf = 0.0;  // of |npot| and npot
  double trace0_scaled_sup = 0.0, trace0_scaled_inf = 0.0;
  double trace_sigma_sup = 0.0, trace_sigma_inf = 0.0;
  double Q_sup = 0.0, Q_inf = 0.0;
  double R_sup = 0.0;
  double Rm_sup = 0.0;
  double ricci_margin = 0.0;
  bool hypothesis_ok = true;
  // diagnostics
  double c_low = 0.0, c_high = 0.0;
  std::size_t Q_argmax = 0;
  double drift_left = 0.0, drift_right = 0.0;
  double Phi = 0.0;
};

MonitorRecord summarize(const Snapshot& s);

/// Accumulates records along a run and latches the Ricci hypothesis flag.
class Monitor {
 public:
  Monitor(flow::Setup setup, BConfig cfg);

  const MonitorRecord& observe(const flow::FlowState& state);
  const std::vector<MonitorRecord>& records() const { return records_; }
  std::optional<double> first_violation() const { return first_violation_; }
  const BConfig& config() const { return cfg_; }

 private:
  flow::Setup setup_;
  BConfig cfg_;
  std::vector<MonitorRecord> records_;
  std::optional<double> first_violation_;
};

/// Column names of the trajectory CSV, in order.
const std::vector<std::string>& trajectory_columns();
const std::vector<std::string>& diagnostic_columns();

void write_trajectory_csv(std::ostream& out, std::span<const MonitorRecord> records);
void write_diagnostics_csv(std::ostream& out, std::span<const MonitorRecord> records);

/// Shortest round-trip decimal form, independent of locale.
std::string format_double(double v);

}  // namespace krf::monitors
