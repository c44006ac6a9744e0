#pragma once

// Exact cohomology bookkeeping for the flow: class trajectories [w0] - t c1,
// the singular time at which the trajectory leaves the Kähler cone, the
// collapsing-condition residual, and the top-power expansion of the
// reference class. Everything here is exact rational arithmetic.

#include "krf/rational.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace krf::classes {

struct GeneratorBasis {
  std::vector<std::string> labels;
  int dim_complex = 0;  // n
  int fiber_dim = 0;    // r

  GeneratorBasis() = default;
  GeneratorBasis(std::vector<std::string> labels, int n, int r);

  std::size_t size() const { return labels.size(); }
  /// Index of a generator label; throws ConfigError when unknown.
  std::size_t index_of(const std::string& label) const;
};

struct KahlerClass {
  std::vector<Rational> coeffs;

  KahlerClass() = default;
  explicit KahlerClass(std::vector<Rational> c) : coeffs(std::move(c)) {}

  std::size_t size() const { return coeffs.size(); }
  bool is_zero() const;
  std::string str() const;  // "(p/q, ...)"

  friend bool operator==(const KahlerClass&, const KahlerClass&) = default;
};

KahlerClass operator+(const KahlerClass& a, const KahlerClass& b);
KahlerClass operator-(const KahlerClass& a, const KahlerClass& b);
KahlerClass operator*(const Rational& s, const KahlerClass& a);

/// Top intersection numbers of degree-n monomials in the generators. Keys are
/// stored as sorted generator-index tuples, so lookup is symmetric in the factors.
class IntersectionTable {
 public:
  IntersectionTable() = default;
  explicit IntersectionTable(int degree) : degree_(degree) {}

  int degree() const { return degree_; }
  void set(std::vector<std::size_t> monomial, const Rational& value);
  std::optional<Rational> get(std::vector<std::size_t> monomial) const;
  std::size_t entries() const { return table_.size(); }

  /// Multilinear top product [c_1]·[c_2]···[c_n]; `factors.size()` must equal the degree.
  Rational pairing(const std::vector<const KahlerClass*>& factors) const;
  /// [a]^k · [b]^(n-k).
  Rational mixed_power(const KahlerClass& a, int k, const KahlerClass& b) const;

 private:
  int degree_ = 0;
  std::map<std::vector<std::size_t>, Rational> table_;
};

/// A class is in the cone when every linear functional is strictly positive on it.
struct PositivityCone {
  std::vector<std::vector<Rational>> functionals;
  std::vector<std::string> names;

  Rational evaluate(std::size_t i, const KahlerClass& c) const;
  bool contains(const KahlerClass& c) const;
};

/// Exit time of the class trajectory from the cone; nullopt time means +infinity.
struct SingularTime {
  std::optional<Rational> time;
  std::size_t functional = 0;  // index of the first functional to vanish

  bool finite() const { return time.has_value(); }
};

KahlerClass class_at(const KahlerClass& omega0, const KahlerClass& c1, const Rational& t);

SingularTime singular_time(const KahlerClass& omega0, const KahlerClass& c1,
                           const PositivityCone& cone);

KahlerClass collapsing_condition_residual(const KahlerClass& omega0, const KahlerClass& c1,
                                          const Rational& T, const KahlerClass& target);

/// Top power of the reference class (1/T)((T-t)[w0] + t[sigma]), expanded
/// exactly. Term k carries (T-t)^k t^(n-k) with coefficient
/// T^-n C(n,k) [w0]^k [sigma]^(n-k).
struct ReferenceVolumePolynomial {
  struct Term {
    int power_T_minus_t = 0;
    int power_t = 0;
    Rational coefficient;
  };

  int n = 0;
  Rational T;
  std::vector<Term> terms;                 // indexed by k = 0..n
  std::vector<Rational> coefficients_in_s;  // fully expanded in s = T - t
  bool degenerate = false;                 // [w0]^n == 0: no Kähler metric in the class

  Rational evaluate(const Rational& t) const;
  /// Smallest power of (T - t) that appears with a nonzero grouped coefficient; n+1 if none.
  int lowest_nonzero_power() const;
};

ReferenceVolumePolynomial reference_volume_polynomial(const KahlerClass& omega0,
                                                      const KahlerClass& sigma_pullback,
                                                      const IntersectionTable& table,
                                                      const Rational& T);

/// Everything the cohomology side of an experiment needs, as read from a model file.
struct ClassData {
  GeneratorBasis basis;
  KahlerClass omega0;
  KahlerClass c1;
  KahlerClass sigma;  // [pi^* w_Sigma]
  IntersectionTable table;
  PositivityCone cone;
};

struct ValidationReport {
  SingularTime T;
  KahlerClass residual;
  bool omega0_in_cone = false;
  bool ok() const { return omega0_in_cone && T.finite() && residual.is_zero(); }
};

ValidationReport validate(const ClassData& data);

}  // namespace krf::classes
