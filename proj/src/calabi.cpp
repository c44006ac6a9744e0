#include "krf/calabi.hpp"

#include "krf/error.hpp"
#include "krf/stencil.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

namespace krf::calabi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sigmoid(double y) {
  if (y >= 0) return 1.0 / (1.0 + std::exp(-y));
  const double e = std::exp(y);
  return e / (1.0 + e);
}

// sigma(y)(1 - sigma(y)) without cancellation in the tails.
double sigmoid_prime(double y) {
  const double e = std::exp(-std::abs(y));
  return e / ((1.0 + e) * (1.0 + e));
}

double softplus(double y) { return y > 0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y)); }

}  // namespace

std::string to_string(AnsatzKind kind) {
  return kind == AnsatzKind::Product ? "product" : "projective_bundle_k1";
}

AnsatzKind parse_ansatz_kind(const std::string& text) {
  if (text == "product") return AnsatzKind::Product;
  if (text == "projective_bundle_k1") return AnsatzKind::ProjectiveBundleK1;
  throw ConfigError("unknown model kind '" + text + "' (expected product or projective_bundle_k1)");
}

AnsatzModel AnsatzModel::product(int n, double base_einstein) {
  if (n < 2) throw ConfigError("ansatz model needs n >= 2");
  if (base_einstein != 0.0 && base_einstein != static_cast<double>(n)) {
    throw ConfigError("product base must be flat (Einstein constant 0) or CP^{n-1} (constant n)");
  }
  return AnsatzModel{AnsatzKind::Product, n, base_einstein};
}

AnsatzModel AnsatzModel::projective_bundle_k1(int n) {
  if (n < 2) throw ConfigError("ansatz model needs n >= 2");
  return AnsatzModel{AnsatzKind::ProjectiveBundleK1, n, static_cast<double>(n)};
}

double LogisticPotential::u(double rho) const { return a * rho + (b - a) * softplus(rho - center); }
double LogisticPotential::du(double rho) const { return a + (b - a) * sigmoid(rho - center); }
double LogisticPotential::d2u(double rho) const { return (b - a) * sigmoid_prime(rho - center); }

double LogisticPotential::derivative(double rho, int k) const {
  const double y = rho - center;
  const double s = sigmoid(y);
  const double sp = sigmoid_prime(y);
  const double L = b - a;
  switch (k) {
    case 0: return u(rho);
    case 1: return du(rho);
    case 2: return L * sp;
    case 3: return L * sp * (1 - 2 * s);
    case 4: return L * sp * (1 - 6 * s + 6 * s * s);
    case 5: return L * sp * (1 - 2 * s) * (1 - 12 * s + 12 * s * s);
    default: throw InvalidInput("logistic potential derivatives are available up to order 5");
  }
}

// ---------------------------------------------------------------------------
// rho-grid profiles

bool Profile::uniform(double rel_tol) const {
  if (rho.size() < 2) return false;
  const double h = spacing();
  for (std::size_t i = 1; i < rho.size(); ++i)
    if (std::abs((rho[i] - rho[i - 1]) - h) > rel_tol * std::abs(h) + 1e-14) return false;
  return h > 0;
}

Profile Profile::uniform_grid(double rho_min, double rho_max, std::size_t points) {
  if (points < 9 || !(rho_max > rho_min)) throw InvalidInput("degenerate rho grid");
  Profile p;
  p.rho.resize(points);
  const double h = (rho_max - rho_min) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) p.rho[i] = rho_min + h * static_cast<double>(i);
  return p;
}

Profile Profile::from_potential(std::vector<double> rho, std::vector<double> u, double a, double b,
                                double base_eigenvalue) {
  Profile p;
  p.rho = std::move(rho);
  p.u = std::move(u);
  p.a = a;
  p.b = b;
  p.base_eigenvalue = base_eigenvalue;
  if (p.rho.size() != p.u.size()) throw InvalidInput("rho and u arrays differ in length");
  if (!p.uniform()) throw InvalidInput("profile potential must be sampled on a uniform rho grid");
  const double h = p.spacing();
  p.up = stencil::UniformDerivative(p.size(), h, 1, 6).apply(p.u);
  p.upp = stencil::UniformDerivative(p.size(), h, 2, 6).apply(p.u);
  return p;
}

Profile Profile::from_samples(std::vector<double> rho, std::vector<double> u, std::vector<double> up,
                              std::vector<double> upp, double a, double b, double base_eigenvalue) {
  Profile p;
  p.rho = std::move(rho);
  p.u = std::move(u);
  p.up = std::move(up);
  p.upp = std::move(upp);
  p.a = a;
  p.b = b;
  p.base_eigenvalue = base_eigenvalue;
  const std::size_t n = p.rho.size();
  if (p.u.size() != n || p.up.size() != n || p.upp.size() != n)
    throw InvalidInput("profile arrays differ in length");
  if (!p.uniform()) throw InvalidInput("profile must be sampled on a uniform rho grid");
  return p;
}

void Profile::check_positivity(const AnsatzModel& model) const {
  const bool product = model.kind == AnsatzKind::Product;
  if (!(b > a) || a < 0) throw GeometryError("boundary momenta must satisfy 0 <= a < b", -1);
  for (std::size_t i = 0; i < size(); ++i) {
    if (!(up[i] > 0) && !product)
      throw GeometryError("u' <= 0 at node " + std::to_string(i), static_cast<std::ptrdiff_t>(i));
    if (!(upp[i] > 0))
      throw GeometryError("u'' <= 0 at node " + std::to_string(i), static_cast<std::ptrdiff_t>(i));
  }
  if (product && !(base_eigenvalue > 0)) throw GeometryError("base eigenvalue must be positive", -1);
}

std::vector<double> log_volume_form(const AnsatzModel& model, const Profile& profile) {
  profile.check_positivity(model);
  std::vector<double> G(profile.size());
  const double n = model.n;
  for (std::size_t i = 0; i < G.size(); ++i) {
    if (model.kind == AnsatzKind::ProjectiveBundleK1)
      G[i] = std::log(profile.upp[i]) + (n - 1) * std::log(profile.up[i]) - n * profile.rho[i];
    else
      G[i] = (n - 1) * std::log(profile.base_eigenvalue) + std::log(profile.upp[i]);
  }
  return G;
}

namespace {

struct RicciParts {
  std::vector<double> base, fiber;
};

RicciParts ricci_from_jets(const AnsatzModel& model, const Profile& p, int accuracy) {
  const double h = p.spacing();
  const auto u3 = stencil::UniformDerivative(p.size(), h, 1, accuracy).apply_extended(p.upp);
  const auto u4 = stencil::UniformDerivative(p.size(), h, 2, accuracy).apply_extended(p.upp);
  const double n = model.n;
  RicciParts out;
  out.base.resize(p.size());
  out.fiber.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double u1 = p.up[i], u2 = p.upp[i];
    const double r3 = u3[i] / u2;
    const double fiber_log2 = u4[i] / u2 - r3 * r3;  // (log u'')''
    if (model.kind == AnsatzKind::ProjectiveBundleK1) {
      const double dG = r3 + (n - 1) * u2 / u1 - n;
      const double d2G = fiber_log2 + (n - 1) * (u3[i] / u1 - (u2 / u1) * (u2 / u1));
      out.base[i] = -dG;
      out.fiber[i] = -d2G;
    } else {
      out.base[i] = model.base_einstein;
      out.fiber[i] = -fiber_log2;
    }
  }
  return out;
}

}  // namespace

RicciEigenvalues ricci_eigenvalues(const AnsatzModel& model, const Profile& profile) {
  profile.check_positivity(model);
  if (!profile.uniform()) throw InvalidInput("curvature evaluation needs a uniform rho grid");
  auto fine = ricci_from_jets(model, profile, 6);
  auto coarse = ricci_from_jets(model, profile, 4);
  RicciEigenvalues out;
  double scale = 1.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    out.estimated_error = std::max({out.estimated_error, std::abs(fine.base[i] - coarse.base[i]),
                                    std::abs(fine.fiber[i] - coarse.fiber[i])});
    scale = std::max({scale, std::abs(fine.base[i]), std::abs(fine.fiber[i])});
  }
  out.accuracy_warning = out.estimated_error > 1e-3 * scale;
  out.base = std::move(fine.base);
  out.fiber = std::move(fine.fiber);
  return out;
}

std::vector<double> scalar_curvature(const AnsatzModel& model, const Profile& profile) {
  const auto ric = ricci_eigenvalues(model, profile);
  const auto eig = metric_eigenvalues(model, profile);
  std::vector<double> R(profile.size());
  for (std::size_t i = 0; i < R.size(); ++i)
    R[i] = (model.n - 1) * ric.base[i] / eig.base[i] + ric.fiber[i] / eig.fiber[i];
  return R;
}

curvature::CurvaturePoint jet_curvature(const AnsatzModel& model, const RadialJet& jet,
                                        double base_eigenvalue) {
  using curvature::CMatrix;
  using curvature::CVector;
  using curvature::Real;
  const Real rho0 = jet.rho;
  Real d[6] = {};
  for (int k = 1; k <= 5; ++k) d[k] = jet.d[k];
  // u' and u'' as Taylor polynomials in (log|z|^2 - rho0), u'' the exact derivative of u'.
  auto momentum = [d, rho0](Real s, Real& p, Real& q) {
    const Real x = std::log(s) - rho0;
    p = d[1] + x * (d[2] + x * (d[3] / 2 + x * (d[4] / 6 + x * d[5] / 24)));
    q = d[2] + x * (d[3] + x * (d[4] / 2 + x * d[5] / 6));
  };
  const Real radius = std::exp(rho0 / 2);
  const Real step = Real(5e-3) * radius;

  if (model.kind == AnsatzKind::ProjectiveBundleK1) {
    const int n = model.n;
    curvature::MetricField field = [n, momentum](const CVector& z) {
      const Real s = z.squaredNorm();
      Real p, q;
      momentum(s, p, q);
      CMatrix g = CMatrix::Identity(n, n) * (p / s);
      g += ((q - p) / (s * s)) * (z.conjugate() * z.transpose());
      return g;
    };
    CVector z0 = CVector::Zero(n);
    z0(0) = radius;
    return curvature::evaluate(field, z0, step);
  }

  curvature::MetricField field = [momentum](const CVector& z) {
    const Real s = z.squaredNorm();
    Real p, q;
    momentum(s, p, q);
    CMatrix g(1, 1);
    g(0, 0) = q / s;
    return g;
  };
  CVector z0 = CVector::Zero(1);
  z0(0) = radius;
  auto point = curvature::evaluate(field, z0, step);
  const int m = model.base_dim();
  if (model.base_einstein != 0.0) {
    const double base2 = 2.0 * m * (m + 1) / (base_eigenvalue * base_eigenvalue);
    point.norm = std::sqrt(point.norm * point.norm + base2);
    point.scalar += m * model.base_einstein / base_eigenvalue;
  }
  const double fiber = jet.d[2];
  point.condition = std::max(fiber, base_eigenvalue) / std::min(fiber, base_eigenvalue);
  return point;
}

RiemannNorm riemann_norm(const AnsatzModel& model, const Profile& profile) {
  profile.check_positivity(model);
  if (!profile.uniform()) throw InvalidInput("curvature evaluation needs a uniform rho grid");
  const double h = profile.spacing();
  std::vector<std::vector<double>> jets(6);
  jets[1] = profile.up;
  jets[2] = profile.upp;
  for (int k = 3; k <= 5; ++k)
    jets[k] = stencil::UniformDerivative(profile.size(), h, k - 2, 6).apply_extended(profile.upp);
  RiemannNorm out;
  out.values.resize(profile.size());
  out.condition.resize(profile.size());
  for (std::size_t i = 0; i < profile.size(); ++i) {
    RadialJet jet;
    jet.rho = profile.rho[i];
    for (int k = 1; k <= 5; ++k) jet.d[k] = jets[k][i];
    const auto pt = jet_curvature(model, jet, profile.base_eigenvalue);
    out.values[i] = pt.norm;
    out.condition[i] = pt.condition;
    out.max_condition = std::max(out.max_condition, pt.condition);
  }
  return out;
}

double fiber_diameter(const AnsatzModel& model, const Profile& profile) {
  profile.check_positivity(model);
  if (!profile.uniform()) throw InvalidInput("fiber diameter needs a uniform rho grid");
  std::vector<double> root(profile.size());
  for (std::size_t i = 0; i < root.size(); ++i) root[i] = std::sqrt(profile.upp[i]);
  const double interior = stencil::simpson(root, profile.spacing());
  const double a = profile.a, b = profile.b;
  const double left = profile.up.front(), right = profile.up.back();
  if (!(left > a) || !(right < b) || !(left < right)) {
    throw GeometryError("momentum at the grid ends leaves (a, b); tails are not integrable",
                        left > a ? static_cast<std::ptrdiff_t>(profile.size() - 1) : 0);
  }
  // Logistic tails matched to u' at the end nodes.
  const double amp = 2.0 * std::sqrt(b - a);
  const double tail_left = amp * std::atan(std::sqrt((left - a) / (b - left)));
  const double tail_right = amp * std::atan(std::sqrt((b - right) / (right - a)));
  return interior + tail_left + tail_right;
}

FrameEigenvalues metric_eigenvalues(const AnsatzModel& model, const Profile& profile) {
  FrameEigenvalues e;
  e.fiber = profile.upp;
  if (model.kind == AnsatzKind::ProjectiveBundleK1)
    e.base = profile.up;
  else
    e.base.assign(profile.size(), profile.base_eigenvalue);
  return e;
}

Traces traces(const AnsatzModel& model, const FrameEigenvalues& omega, const FrameEigenvalues& other) {
  const std::size_t n_nodes = omega.base.size();
  if (other.base.size() != n_nodes || omega.fiber.size() != n_nodes)
    throw InvalidInput("trace arguments have different lengths");
  const double m = model.n - 1;
  Traces t;
  t.omega_of_other.resize(n_nodes);
  t.other_of_omega.resize(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const double of = other.fiber.empty() ? 0.0 : other.fiber[i];
    t.omega_of_other[i] = m * other.base[i] / omega.base[i] + of / omega.fiber[i];
    const double fiber_term = of > 0 ? omega.fiber[i] / of : std::numeric_limits<double>::infinity();
    t.other_of_omega[i] = m * omega.base[i] / other.base[i] + fiber_term;
  }
  return t;
}

FrameEigenvalues reference_metric(double t, double T, const FrameEigenvalues& omega0,
                                  const FrameEigenvalues& sigma) {
  FrameEigenvalues out;
  const double w0 = (T - t) / T, ws = t / T;
  out.base.resize(omega0.base.size());
  out.fiber.resize(omega0.fiber.size());
  for (std::size_t i = 0; i < out.base.size(); ++i) out.base[i] = w0 * omega0.base[i] + ws * sigma.base[i];
  for (std::size_t i = 0; i < out.fiber.size(); ++i) {
    const double sf = sigma.fiber.empty() ? 0.0 : sigma.fiber[i];
    out.fiber[i] = w0 * omega0.fiber[i] + ws * sf;
  }
  return out;
}

double VolumeDatum::log_omega(double rho) const {
  if (model.kind == AnsatzKind::ProjectiveBundleK1) return (sigma_base * rho - omega0.u(rho)) / T;
  // Fiber density against i drho ^ drhobar; the affine term makes Omega smooth at both poles.
  return rho - omega0.u(rho) / T;
}

// ---------------------------------------------------------------------------
// Momentum representation

MomentumProfile MomentumProfile::logistic(const LogisticPotential& pot, std::size_t intervals,
                                          double base_eigenvalue) {
  if (intervals < 16 || intervals % 2 != 0) throw InvalidInput("momentum grid needs an even N >= 16");
  MomentumProfile p;
  p.a = pot.a;
  p.b = pot.b;
  p.psi.resize(intervals + 1);
  for (std::size_t j = 0; j <= intervals; ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(intervals);
    p.psi[j] = x * (1 - x);
  }
  p.psi.front() = 0.0;
  p.psi.back() = 0.0;
  p.rho_mid = pot.center;
  p.u_mid = pot.u(pot.center);
  p.base_eigenvalue = base_eigenvalue;
  return p;
}

namespace {

// Integral of f over each interval [x_i, x_{i+1}] from the local cubic.
std::vector<double> interval_integrals(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  std::vector<double> out(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (i == 0)
      out[i] = h / 24 * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]);
    else if (i + 2 == n)
      out[i] = h / 24 * (9 * f[n - 1] + 19 * f[n - 2] - 5 * f[n - 3] + f[n - 4]);
    else
      out[i] = h / 24 * (-f[i - 1] + 13 * f[i] + 13 * f[i + 1] - f[i + 2]);
  }
  return out;
}

// Cumulative integral from node `origin`, signed.
std::vector<double> cumulative_from(std::span<const double> f, double h, std::size_t origin) {
  const auto pieces = interval_integrals(f, h);
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t j = origin + 1; j < f.size(); ++j) out[j] = out[j - 1] + pieces[j - 1];
  for (std::size_t j = origin; j-- > 0;) out[j] = out[j + 1] - pieces[j];
  return out;
}

// Cubic Lagrange interpolation of nodal values on x_j = j/N.
double interpolate(std::span<const double> f, double x) {
  const std::size_t N = f.size() - 1;
  const double pos = x * static_cast<double>(N);
  std::ptrdiff_t i0 = static_cast<std::ptrdiff_t>(std::floor(pos)) - 1;
  i0 = std::clamp<std::ptrdiff_t>(i0, 0, static_cast<std::ptrdiff_t>(N) - 3);
  double value = 0.0;
  for (int k = 0; k < 4; ++k) {
    double w = 1.0;
    for (int m = 0; m < 4; ++m)
      if (m != k) w *= (pos - static_cast<double>(i0 + m)) / static_cast<double>(k - m);
    value += w * f[i0 + k];
  }
  return value;
}

// psi / (x (1 - x)), with its limits at the ends.
std::vector<double> normalized_shape(const MomentumProfile& p, const MomentumGeometry& geo) {
  const std::size_t N = p.intervals();
  std::vector<double> g(N + 1);
  for (std::size_t j = 1; j < N; ++j) {
    const double x = p.x(j);
    g[j] = p.psi[j] / (x * (1 - x));
  }
  g[0] = geo.slope_left;
  g[N] = -geo.slope_right;
  return g;
}

int radial_weight(const AnsatzModel& model) {
  return model.kind == AnsatzKind::ProjectiveBundleK1 ? model.n : 1;
}

}  // namespace

MomentumGeometry analyze(const MomentumProfile& p) {
  const std::size_t N = p.intervals();
  if (N < 16 || N % 2 != 0) throw InvalidInput("momentum grid needs an even N >= 16");
  const double h = 1.0 / static_cast<double>(N);
  for (std::size_t j = 1; j < N; ++j) {
    if (!(p.psi[j] > 0))
      throw GeometryError("u'' <= 0 at momentum node " + std::to_string(j), static_cast<std::ptrdiff_t>(j));
  }
  MomentumGeometry geo;
  geo.psi_x = stencil::UniformDerivative(N + 1, h, 1, 4).apply(p.psi);
  geo.psi_xx = stencil::UniformDerivative(N + 1, h, 2, 4).apply(p.psi);
  geo.psi_xxx = stencil::UniformDerivative(N + 1, h, 3, 4).apply(p.psi);
  geo.slope_left = geo.psi_x.front();
  geo.slope_right = geo.psi_x.back();

  const std::size_t mid = N / 2;
  const double L = p.length();

  // rho = rho_mid + logit(x) + int_{1/2}^x (1/psi - 1/(x(1-x))).
  std::vector<double> regular(N + 1);
  for (std::size_t j = 1; j < N; ++j) {
    const double x = p.x(j);
    regular[j] = 1.0 / p.psi[j] - 1.0 / (x * (1 - x));
  }
  regular[0] = 4 * regular[1] - 6 * regular[2] + 4 * regular[3] - regular[4];
  regular[N] = 4 * regular[N - 1] - 6 * regular[N - 2] + 4 * regular[N - 3] - regular[N - 4];
  const auto rho_regular = cumulative_from(regular, h, mid);
  geo.rho.resize(N + 1);
  for (std::size_t j = 1; j < N; ++j) {
    const double x = p.x(j);
    geo.rho[j] = p.rho_mid + std::log(x / (1 - x)) + rho_regular[j];
  }
  geo.rho[0] = -std::numeric_limits<double>::infinity();
  geo.rho[N] = std::numeric_limits<double>::infinity();

  // u - a rho = const + int L x / psi (regular on the left half); mirrored on the right.
  std::vector<double> f_left(N + 1), f_right(N + 1);
  for (std::size_t j = 1; j < N; ++j) {
    const double x = p.x(j);
    f_left[j] = L * x / p.psi[j];
    f_right[j] = -L * (1 - x) / p.psi[j];
  }
  f_left[0] = L / geo.slope_left;
  f_left[N] = f_left[N - 1];  // never reached by the left-half stencils
  f_right[N] = L / geo.slope_right;
  f_right[0] = f_right[1];
  const auto int_left = cumulative_from(f_left, h, mid);
  const auto int_right = cumulative_from(f_right, h, mid);
  geo.u_minus_a.resize(N + 1);
  geo.u_minus_b.resize(N + 1);
  geo.u.assign(N + 1, kNaN);
  for (std::size_t j = 0; j <= N; ++j) {
    geo.u_minus_a[j] = p.u_mid - p.a * p.rho_mid + int_left[j];
    geo.u_minus_b[j] = p.u_mid - p.b * p.rho_mid + int_right[j];
    if (j == 0 || j == N) continue;
    geo.u[j] = j <= mid ? geo.u_minus_a[j] + p.a * geo.rho[j] : geo.u_minus_b[j] + p.b * geo.rho[j];
  }
  return geo;
}

std::vector<double> log_volume_form(const AnsatzModel& model, const MomentumProfile& p,
                                    const MomentumGeometry& geo) {
  const std::size_t N = p.intervals();
  std::vector<double> G(N + 1, kNaN);
  const double n = model.n;
  for (std::size_t j = 1; j < N; ++j) {
    const double phi = p.length() * p.psi[j];
    if (model.kind == AnsatzKind::ProjectiveBundleK1)
      G[j] = std::log(phi) + (n - 1) * std::log(p.tau(j)) - n * geo.rho[j];
    else
      G[j] = (n - 1) * std::log(p.base_eigenvalue) + std::log(phi);
  }
  return G;
}

RicciEigenvalues ricci_eigenvalues(const AnsatzModel& model, const MomentumProfile& p,
                                   const MomentumGeometry& geo) {
  const std::size_t N = p.intervals();
  const double n = model.n, L = p.length();
  RicciEigenvalues out;
  out.base.resize(N + 1);
  out.fiber.resize(N + 1);
  for (std::size_t j = 0; j <= N; ++j) {
    const double psi = p.psi[j], px = geo.psi_x[j], pxx = geo.psi_xx[j];
    if (model.kind == AnsatzKind::ProjectiveBundleK1) {
      const double tau = p.tau(j);
      out.base[j] = n - px - (n - 1) * L * psi / tau;
      out.fiber[j] = -psi * pxx - (n - 1) * L * psi * (px / tau - L * psi / (tau * tau));
    } else {
      out.base[j] = model.base_einstein;
      out.fiber[j] = -psi * pxx;
    }
  }
  return out;
}

std::vector<double> scalar_curvature(const AnsatzModel& model, const MomentumProfile& p,
                                     const MomentumGeometry& geo) {
  const std::size_t N = p.intervals();
  const double n = model.n, L = p.length();
  std::vector<double> R(N + 1);
  for (std::size_t j = 0; j <= N; ++j) {
    const double psi = p.psi[j], px = geo.psi_x[j], pxx = geo.psi_xx[j];
    if (model.kind == AnsatzKind::ProjectiveBundleK1) {
      const double tau = p.tau(j);
      const double base = n - px - (n - 1) * L * psi / tau;
      const double fiber_ratio = -pxx / L - (n - 1) * (px / tau - L * psi / (tau * tau));
      R[j] = (n - 1) * base / tau + fiber_ratio;
    } else {
      R[j] = (n - 1) * model.base_einstein / p.base_eigenvalue - pxx / L;
    }
  }
  return R;
}

RiemannNorm riemann_norm(const AnsatzModel& model, const MomentumProfile& p, const MomentumGeometry& geo) {
  const std::size_t N = p.intervals();
  const double L = p.length();
  RiemannNorm out;
  out.values.assign(N + 1, 0.0);
  out.condition.assign(N + 1, 1.0);
  for (std::size_t j = 1; j < N; ++j) {
    const double psi = p.psi[j], px = geo.psi_x[j], pxx = geo.psi_xx[j], pxxx = geo.psi_xxx[j];
    RadialJet jet;
    jet.rho = geo.rho[j];
    jet.d[1] = p.tau(j);
    jet.d[2] = L * psi;
    jet.d[3] = L * psi * px;
    jet.d[4] = L * psi * (px * px + psi * pxx);
    jet.d[5] = L * psi * (px * px * px + 4 * psi * px * pxx + psi * psi * pxxx);
    const auto pt = jet_curvature(model, jet, p.base_eigenvalue);
    out.values[j] = pt.norm;
    out.condition[j] = pt.condition;
    out.max_condition = std::max(out.max_condition, pt.condition);
  }
  return out;
}

double fiber_diameter(const MomentumProfile& p) {
  // diam = int dtau / sqrt(u'') = sqrt(L) int_0^1 dx / sqrt(psi); with
  // x = (1 - cos theta)/2 the integrand becomes 1/sqrt(g), g = psi/(x(1-x)).
  const std::size_t N = p.intervals();
  MomentumGeometry ends;
  const double h = 1.0 / static_cast<double>(N);
  stencil::UniformDerivative d1(N + 1, h, 1, 4);
  ends.slope_left = d1.at(p.psi, 0);
  ends.slope_right = d1.at(p.psi, N);
  const auto g = normalized_shape(p, ends);
  const std::size_t M = 2 * N;
  std::vector<double> integrand(M + 1);
  for (std::size_t k = 0; k <= M; ++k) {
    const double theta = std::numbers::pi * static_cast<double>(k) / static_cast<double>(M);
    const double x = 0.5 * (1 - std::cos(theta));
    const double gx = interpolate(g, x);
    if (!(gx > 0)) throw GeometryError("fiber profile is not positive", static_cast<std::ptrdiff_t>(x * N));
    integrand[k] = 1.0 / std::sqrt(gx);
  }
  return std::sqrt(p.length()) * stencil::simpson(integrand, std::numbers::pi / static_cast<double>(M));
}

FrameEigenvalues metric_eigenvalues(const AnsatzModel& model, const MomentumProfile& p) {
  const std::size_t N = p.intervals();
  FrameEigenvalues e;
  e.base.resize(N + 1);
  e.fiber.resize(N + 1);
  for (std::size_t j = 0; j <= N; ++j) {
    e.base[j] = model.kind == AnsatzKind::ProjectiveBundleK1 ? p.tau(j) : p.base_eigenvalue;
    e.fiber[j] = p.length() * p.psi[j];
  }
  return e;
}

EndpointDrift measured_endpoint_drift(const AnsatzModel& model, const MomentumProfile&,
                                      const MomentumGeometry& geo) {
  // lim G' at the ends of the flow potential G = log u'' + (n-1) log u' - n rho
  // (k = 1) or log u'' - rho (product fiber), which equals psi'(end) - weight.
  const double w = radial_weight(model);
  return EndpointDrift{geo.slope_left - w, geo.slope_right - w};
}

Profile to_rho_profile(const MomentumProfile& p, const MomentumGeometry& geo, double R, std::size_t points) {
  const std::size_t N = p.intervals();
  const double L = p.length();
  const auto g = normalized_shape(p, geo);
  // Regular part of rho, r(x) = rho - rho_mid - logit(x).
  std::vector<double> reg(N + 1);
  for (std::size_t j = 1; j < N; ++j) {
    const double x = p.x(j);
    reg[j] = geo.rho[j] - p.rho_mid - std::log(x / (1 - x));
  }
  reg[0] = 4 * reg[1] - 6 * reg[2] + 4 * reg[3] - reg[4];
  reg[N] = 4 * reg[N - 1] - 6 * reg[N - 2] + 4 * reg[N - 3] - reg[N - 4];

  Profile out = Profile::uniform_grid(p.rho_mid - R, p.rho_mid + R, points);
  out.a = p.a;
  out.b = p.b;
  out.base_eigenvalue = p.base_eigenvalue;
  out.u.resize(points);
  out.up.resize(points);
  out.upp.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double target = out.rho[i] - p.rho_mid;
    // Solve y + r(sigmoid(y)) = target for the logit y; the left side is increasing.
    double lo = target - 50, hi = target + 50;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1 + std::abs(target)); ++it) {
      const double y = 0.5 * (lo + hi);
      const double val = y + interpolate(reg, sigmoid(y));
      (val < target ? lo : hi) = y;
    }
    const double y = 0.5 * (lo + hi);
    const double x = sigmoid(y);
    const double sp = sigmoid_prime(y);  // x (1 - x) without cancellation
    out.up[i] = p.a + L * x;
    out.upp[i] = L * sp * interpolate(g, x);
    out.u[i] = x <= 0.5 ? interpolate(geo.u_minus_a, x) + p.a * out.rho[i]
                        : interpolate(geo.u_minus_b, x) + p.b * out.rho[i];
  }
  return out;
}

std::string dump_profile(const Profile& profile, const std::string& header) {
  std::string out;
  std::size_t start = 0;
  while (start <= header.size()) {
    auto end = header.find('\n', start);
    if (end == std::string::npos) end = header.size();
    if (end > start) out += "# " + header.substr(start, end - start) + "\n";
    start = end + 1;
  }
  out += "# rho u uprime uprime2\n";
  char buf[64];
  auto put = [&](double v, char sep) {
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
    out.push_back(sep);
  };
  for (std::size_t i = 0; i < profile.size(); ++i) {
    put(profile.rho[i], ' ');
    put(profile.u[i], ' ');
    put(profile.up[i], ' ');
    put(profile.upp[i], '\n');
  }
  return out;
}

}  // namespace krf::calabi
