#pragma once

// Cohomogeneity-one geometry. A U(n)-invariant Kähler metric is written as
// w = i dd^c u(rho), rho = log |z|^2, so that in the frame (pi^* w_FS, i drho ^ drhobar)
// it has eigenvalues u'(rho) (base directions) and u''(rho) (fiber direction).
//
// Two representations are supported:
//  * Profile: samples of u on a rho-grid (the exchange and dump format);
//  * MomentumProfile: u'' as a function of the momentum tau = u' on [a, b],
//    which stays well conditioned when the fiber collapses.
//
// Conventions: Ric(w_FS) = (m+1) w_FS on CP^m; scalar curvature is the trace of
// the Ricci form against w (the Riemannian scalar curvature is twice this).

#include "krf/kahler_curvature.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace krf::calabi {

enum class AnsatzKind { Product, ProjectiveBundleK1 };

std::string to_string(AnsatzKind kind);
AnsatzKind parse_ansatz_kind(const std::string& text);

struct AnsatzModel {
  AnsatzKind kind = AnsatzKind::ProjectiveBundleK1;
  int n = 2;
  /// Ricci eigenvalue of the base factor against its reference form: n for
  /// CP^{n-1}, 0 for a flat base (Product only).
  double base_einstein = 0.0;

  static AnsatzModel product(int n, double base_einstein);
  static AnsatzModel projective_bundle_k1(int n);

  int base_dim() const { return n - 1; }
};

/// Closed-form FS-type potential u = a rho + (b - a) log(1 + e^(rho - c)); its
/// momentum profile is exactly the logistic one, u'' = (u' - a)(b - u')/(b - a).
struct LogisticPotential {
  double a = 0.0;
  double b = 1.0;
  double center = 0.0;

  double u(double rho) const;
  double du(double rho) const;
  double d2u(double rho) const;
  /// k-th derivative in rho, k = 0..5.
  double derivative(double rho, int k) const;
};

struct Profile {
  std::vector<double> rho;
  std::vector<double> u;
  std::vector<double> up;   // u'
  std::vector<double> upp;  // u''
  double a = 0.0;           // lim u' at the left end
  double b = 1.0;           // lim u' at the right end
  double base_eigenvalue = 1.0;  // Product only: base metric eigenvalue

  std::size_t size() const { return rho.size(); }
  bool uniform(double rel_tol = 1e-9) const;
  double spacing() const { return rho[1] - rho[0]; }

  /// Samples u on a uniform grid and derives u', u'' with sixth-order differences.
  static Profile from_potential(std::vector<double> rho, std::vector<double> u, double a, double b,
                                double base_eigenvalue = 1.0);
  /// A profile whose u' and u'' are known independently of u (dumps, momentum resampling,
  /// closed forms). Curvature evaluators differentiate only u''.
  static Profile from_samples(std::vector<double> rho, std::vector<double> u, std::vector<double> up,
                              std::vector<double> upp, double a, double b, double base_eigenvalue = 1.0);
  static Profile uniform_grid(double rho_min, double rho_max, std::size_t points);

  /// Throws GeometryError at the first node with u' <= 0 or u'' <= 0, or if 0 <= a < b fails.
  void check_positivity(const AnsatzModel& model) const;
};

/// Metric eigenvalues in the ansatz frame; `fiber` may be all zeros for forms
/// with no fiber part (e.g. pi^* w_Sigma).
struct FrameEigenvalues {
  std::vector<double> base;
  std::vector<double> fiber;
};

std::vector<double> log_volume_form(const AnsatzModel& model, const Profile& profile);

struct RicciEigenvalues {
  std::vector<double> base;
  std::vector<double> fiber;
  double estimated_error = 0.0;  // max gap between 4th- and 2nd-order assemblies
  bool accuracy_warning = false;
};

RicciEigenvalues ricci_eigenvalues(const AnsatzModel& model, const Profile& profile);
std::vector<double> scalar_curvature(const AnsatzModel& model, const Profile& profile);

struct RiemannNorm {
  std::vector<double> values;
  std::vector<double> condition;
  double max_condition = 1.0;
};

RiemannNorm riemann_norm(const AnsatzModel& model, const Profile& profile);

double fiber_diameter(const AnsatzModel& model, const Profile& profile);

struct Traces {
  std::vector<double> omega_of_other;  // Tr_w(other)
  std::vector<double> other_of_omega;  // Tr_other(w)
};

Traces traces(const AnsatzModel& model, const FrameEigenvalues& omega, const FrameEigenvalues& other);
FrameEigenvalues metric_eigenvalues(const AnsatzModel& model, const Profile& profile);

/// Eigenvalues of (1/T)((T-t) w0 + t pi^* w_Sigma) given those of w0 and of pi^* w_Sigma.
FrameEigenvalues reference_metric(double t, double T, const FrameEigenvalues& omega0,
                                  const FrameEigenvalues& sigma);

/// The fixed volume form with i dd^c log Omega = (pi^* w_Sigma - w0)/T, for an
/// initial metric of logistic type. Densities use the same frame as log_volume_form.
struct VolumeDatum {
  AnsatzModel model;
  LogisticPotential omega0;
  double sigma_base = 0.0;  // base eigenvalue of pi^* w_Sigma (k = 1 model)
  double T = 1.0;

  double log_omega(double rho) const;
};

/// Jet of u at one point: derivatives 1..5 in rho.
struct RadialJet {
  double rho = 0.0;
  double d[6] = {0, 0, 0, 0, 0, 0};  // d[k] = u^{(k)}(rho), d[0] unused
};

/// Curvature of the metric whose potential has the given jet, evaluated at the
/// point z0 = (e^{rho/2}, 0, ...) by the generic finite-difference evaluator.
/// Product models add the closed-form base contribution.
curvature::CurvaturePoint jet_curvature(const AnsatzModel& model, const RadialJet& jet,
                                        double base_eigenvalue);

// ---------------------------------------------------------------------------
// Momentum representation.

/// u'' = (b - a) psi(x) on the normalized momentum coordinate x = (tau - a)/(b - a),
/// sampled at x_j = j/N. A smooth metric has psi(0) = psi(1) = 0, psi'(0) = 1, psi'(1) = -1.
struct MomentumProfile {
  double a = 0.0;
  double b = 1.0;
  std::vector<double> psi;
  double rho_mid = 0.0;  // rho at x = 1/2
  double u_mid = 0.0;    // u at x = 1/2
  double base_eigenvalue = 1.0;

  std::size_t intervals() const { return psi.size() - 1; }
  double length() const { return b - a; }
  double x(std::size_t j) const { return static_cast<double>(j) / static_cast<double>(intervals()); }
  double tau(std::size_t j) const { return a + length() * x(j); }

  /// The momentum profile of a LogisticPotential: psi = x(1 - x).
  static MomentumProfile logistic(const LogisticPotential& pot, std::size_t intervals,
                                  double base_eigenvalue = 1.0);
};

/// Quantities derived once per snapshot and shared by all momentum evaluators.
struct MomentumGeometry {
  std::vector<double> psi_x, psi_xx, psi_xxx;
  std::vector<double> rho;  // rho at every node; -inf / +inf at the ends
  std::vector<double> u;    // u at interior nodes (ends: NaN)
  /// u - a rho, accurate on x <= 1/2 (regular at x = 0).
  std::vector<double> u_minus_a;
  /// u - b rho, accurate on x >= 1/2 (regular at x = 1).
  std::vector<double> u_minus_b;
  double slope_left = 0.0;   // psi'(0)
  double slope_right = 0.0;  // psi'(1)
};

MomentumGeometry analyze(const MomentumProfile& profile);

std::vector<double> log_volume_form(const AnsatzModel& model, const MomentumProfile& profile,
                                    const MomentumGeometry& geo);
RicciEigenvalues ricci_eigenvalues(const AnsatzModel& model, const MomentumProfile& profile,
                                   const MomentumGeometry& geo);
std::vector<double> scalar_curvature(const AnsatzModel& model, const MomentumProfile& profile,
                                     const MomentumGeometry& geo);
/// Interior nodes only; end entries are 0 and excluded from `max_condition`.
RiemannNorm riemann_norm(const AnsatzModel& model, const MomentumProfile& profile,
                         const MomentumGeometry& geo);
double fiber_diameter(const MomentumProfile& profile);
FrameEigenvalues metric_eigenvalues(const AnsatzModel& model, const MomentumProfile& profile);

/// Drift of the boundary momenta implied by the profile itself, lim u'_t at
/// the two ends (compare with -c1 pairings from the cohomology side).
struct EndpointDrift {
  double left = 0.0;
  double right = 0.0;
};
EndpointDrift measured_endpoint_drift(const AnsatzModel& model, const MomentumProfile& profile,
                                      const MomentumGeometry& geo);

/// Samples a momentum profile on a uniform rho-grid on [-R + rho_mid, R + rho_mid]
/// (cubic interpolation between momentum nodes).
Profile to_rho_profile(const MomentumProfile& profile, const MomentumGeometry& geo, double R,
                       std::size_t points);

/// Text dump: header lines starting with '#', then `rho u uprime uprime2` per node.
std::string dump_profile(const Profile& profile, const std::string& header);

}  // namespace krf::calabi
