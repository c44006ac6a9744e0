#include "krf/classes.hpp"

#include "krf/error.hpp"

#include <algorithm>
#include <functional>

namespace krf::classes {

namespace {

void require_same_basis(const KahlerClass& a, const KahlerClass& b, const char* what) {
  if (a.size() != b.size()) {
    throw ConfigError(std::string("basis mismatch in ") + what + ": " + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()) + " coefficients");
  }
}

Rational binomial(int n, int k) {
  Rational c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

Rational rational_pow(const Rational& x, int k) {
  Rational p = 1;
  for (int i = 0; i < k; ++i) p *= x;
  return p;
}

}  // namespace

GeneratorBasis::GeneratorBasis(std::vector<std::string> l, int n, int r)
    : labels(std::move(l)), dim_complex(n), fiber_dim(r) {
  if (labels.empty()) throw ConfigError("generator basis is empty");
  if (!(0 < r && r < n)) {
    throw ConfigError("fiber dimension must satisfy 0 < r < n (got n=" + std::to_string(n) +
                      ", r=" + std::to_string(r) + ")");
  }
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j)
      if (labels[i] == labels[j]) throw ConfigError("duplicate generator label '" + labels[i] + "'");
}

std::size_t GeneratorBasis::index_of(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw ConfigError("unknown generator '" + label + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

bool KahlerClass::is_zero() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](const Rational& q) { return q == 0; });
}

std::string KahlerClass::str() const {
  std::string s = "(";
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (i) s += ", ";
    s += to_string(coeffs[i]);
  }
  return s + ")";
}

KahlerClass operator+(const KahlerClass& a, const KahlerClass& b) {
  require_same_basis(a, b, "class sum");
  KahlerClass out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.coeffs[i] += b.coeffs[i];
  return out;
}

KahlerClass operator-(const KahlerClass& a, const KahlerClass& b) {
  require_same_basis(a, b, "class difference");
  KahlerClass out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.coeffs[i] -= b.coeffs[i];
  return out;
}

KahlerClass operator*(const Rational& s, const KahlerClass& a) {
  KahlerClass out = a;
  for (auto& c : out.coeffs) c *= s;
  return out;
}

void IntersectionTable::set(std::vector<std::size_t> monomial, const Rational& value) {
  if (static_cast<int>(monomial.size()) != degree_) {
    throw ConfigError("intersection entry of degree " + std::to_string(monomial.size()) +
                      ", expected " + std::to_string(degree_));
  }
  std::sort(monomial.begin(), monomial.end());
  auto [it, inserted] = table_.emplace(monomial, value);
  if (!inserted && it->second != value) throw ConfigError("conflicting intersection entries");
}

std::optional<Rational> IntersectionTable::get(std::vector<std::size_t> monomial) const {
  std::sort(monomial.begin(), monomial.end());
  auto it = table_.find(monomial);
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

Rational IntersectionTable::pairing(const std::vector<const KahlerClass*>& factors) const {
  if (static_cast<int>(factors.size()) != degree_) {
    throw ConfigError("top product needs exactly " + std::to_string(degree_) + " factors");
  }
  const std::size_t dim = factors.front()->size();
  for (const auto* f : factors) require_same_basis(*factors.front(), *f, "intersection pairing");

  Rational total = 0;
  std::vector<std::size_t> idx(factors.size(), 0);
  std::function<void(std::size_t, Rational)> expand = [&](std::size_t slot, Rational weight) {
    if (weight == 0) return;
    if (slot == factors.size()) {
      auto entry = get(idx);
      if (!entry) throw ConfigError("intersection table is missing a required monomial");
      total += weight * *entry;
      return;
    }
    for (std::size_t g = 0; g < dim; ++g) {
      idx[slot] = g;
      expand(slot + 1, weight * factors[slot]->coeffs[g]);
    }
  };
  expand(0, Rational(1));
  return total;
}

Rational IntersectionTable::mixed_power(const KahlerClass& a, int k, const KahlerClass& b) const {
  std::vector<const KahlerClass*> factors;
  for (int i = 0; i < k; ++i) factors.push_back(&a);
  for (int i = k; i < degree_; ++i) factors.push_back(&b);
  return pairing(factors);
}

Rational PositivityCone::evaluate(std::size_t i, const KahlerClass& c) const {
  const auto& f = functionals.at(i);
  if (f.size() != c.size()) throw ConfigError("cone functional length does not match the basis");
  Rational v = 0;
  for (std::size_t g = 0; g < f.size(); ++g) v += f[g] * c.coeffs[g];
  return v;
}

bool PositivityCone::contains(const KahlerClass& c) const {
  for (std::size_t i = 0; i < functionals.size(); ++i)
    if (evaluate(i, c) <= 0) return false;
  return true;
}

KahlerClass class_at(const KahlerClass& omega0, const KahlerClass& c1, const Rational& t) {
  require_same_basis(omega0, c1, "class_at");
  return omega0 - t * c1;
}

SingularTime singular_time(const KahlerClass& omega0, const KahlerClass& c1,
                           const PositivityCone& cone) {
  require_same_basis(omega0, c1, "singular_time");
  if (cone.functionals.empty()) throw ConfigError("positivity cone has no functionals");
  SingularTime result;
  for (std::size_t i = 0; i < cone.functionals.size(); ++i) {
    Rational start = cone.evaluate(i, omega0);
    if (start <= 0) {
      throw InvalidInput("initial class " + omega0.str() + " violates cone functional " +
                         std::to_string(i));
    }
    Rational rate = cone.evaluate(i, c1);
    if (rate <= 0) continue;  // this functional never decreases
    Rational exit = start / rate;
    if (!result.time || exit < *result.time) {
      result.time = exit;
      result.functional = i;
    }
  }
  return result;
}

KahlerClass collapsing_condition_residual(const KahlerClass& omega0, const KahlerClass& c1,
                                          const Rational& T, const KahlerClass& target) {
  require_same_basis(omega0, target, "collapsing residual");
  return class_at(omega0, c1, T) - target;
}

Rational ReferenceVolumePolynomial::evaluate(const Rational& t) const {
  Rational s = T - t;
  Rational v = 0;
  for (const auto& term : terms)
    v += term.coefficient * rational_pow(s, term.power_T_minus_t) * rational_pow(t, term.power_t);
  return v;
}

int ReferenceVolumePolynomial::lowest_nonzero_power() const {
  for (const auto& term : terms)
    if (term.coefficient != 0) return term.power_T_minus_t;
  return n + 1;
}

ReferenceVolumePolynomial reference_volume_polynomial(const KahlerClass& omega0,
                                                      const KahlerClass& sigma_pullback,
                                                      const IntersectionTable& table,
                                                      const Rational& T) {
  require_same_basis(omega0, sigma_pullback, "reference volume");
  if (T <= 0) throw InvalidInput("reference volume needs a finite positive T");
  ReferenceVolumePolynomial poly;
  const int n = table.degree();
  poly.n = n;
  poly.T = T;
  const Rational inv_Tn = Rational(1) / rational_pow(T, n);
  for (int k = 0; k <= n; ++k) {
    ReferenceVolumePolynomial::Term term;
    term.power_T_minus_t = k;
    term.power_t = n - k;
    term.coefficient = inv_Tn * binomial(n, k) * table.mixed_power(omega0, k, sigma_pullback);
    poly.terms.push_back(term);
  }
  // t = T - s: expand t^(n-k) binomially in s.
  poly.coefficients_in_s.assign(n + 1, Rational(0));
  for (const auto& term : poly.terms) {
    const int m = term.power_t;
    for (int j = 0; j <= m; ++j) {
      Rational c = binomial(m, j) * rational_pow(T, m - j) * ((j % 2) ? -1 : 1);
      poly.coefficients_in_s[term.power_T_minus_t + j] += term.coefficient * c;
    }
  }
  poly.degenerate = table.mixed_power(omega0, n, sigma_pullback) == 0;
  return poly;
}

ValidationReport validate(const ClassData& data) {
  ValidationReport report;
  report.omega0_in_cone = data.cone.contains(data.omega0);
  if (!report.omega0_in_cone) {
    report.residual = data.omega0;
    return report;
  }
  report.T = singular_time(data.omega0, data.c1, data.cone);
  if (report.T.finite())
    report.residual = collapsing_condition_residual(data.omega0, data.c1, *report.T.time, data.sigma);
  else
    report.residual = data.omega0;
  return report;
}

}  // namespace krf::classes
