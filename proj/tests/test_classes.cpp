#include "krf/classes.hpp"
#include "krf/config.hpp"
#include "krf/error.hpp"

#include <doctest.h>

#include <filesystem>

using namespace krf;
using namespace krf::classes;

namespace {

Rational q(const char* s) { return parse_rational(s); }

KahlerClass cls(std::initializer_list<const char*> xs) {
  std::vector<Rational> v;
  for (auto x : xs) v.push_back(q(x));
  return KahlerClass(v);
}

PositivityCone coordinate_cone(std::size_t dim) {
  PositivityCone cone;
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<Rational> f(dim, Rational(0));
    f[i] = 1;
    cone.functionals.push_back(f);
    cone.names.push_back("coord" + std::to_string(i));
  }
  return cone;
}

// Intersection form of CP^1 x CP^1 in the basis (base, fiber).
IntersectionTable p1xp1() {
  IntersectionTable t(2);
  t.set({0, 0}, 0);
  t.set({0, 1}, 1);
  t.set({1, 1}, 0);
  return t;
}

// Adjunction for a smooth rational curve C on a surface: c1 . C = 2 + C^2.
Rational c1_on_rational_curve(const Rational& self_intersection) { return 2 + self_intersection; }

// Product-type table on a variety of dimension n with an r-dimensional fiber:
// only base^(n-r) fiber^r is nonzero.
IntersectionTable fibration_table(int n, int r) {
  IntersectionTable t(n);
  for (int k = 0; k <= n; ++k) {
    std::vector<std::size_t> mono;
    for (int i = 0; i < k; ++i) mono.push_back(0);
    for (int i = k; i < n; ++i) mono.push_back(1);
    t.set(mono, k == n - r ? Rational(1) : Rational(0));
  }
  return t;
}

std::filesystem::path config_path(const char* name) {
  return std::filesystem::path(KRF_SOURCE_DIR) / "configs" / name;
}

}  // namespace

TEST_CASE("rational parsing and printing") {
  CHECK(parse_rational("3/6") == Rational(1) / 2);
  CHECK(parse_rational("-2") == -2);
  CHECK(parse_rational("1.25") == Rational(5) / 4);
  CHECK(to_string(Rational(-6) / 4) == "-3/2");
  CHECK(to_string(Rational(4)) == "4");
  CHECK_THROWS_AS(parse_rational("1/0"), ConfigError);
  CHECK_THROWS_AS(parse_rational("x"), ConfigError);
}

TEST_CASE("generator basis invariants") {
  CHECK_NOTHROW(GeneratorBasis({"a", "b"}, 2, 1));
  CHECK_THROWS_AS(GeneratorBasis({"a", "b"}, 2, 2), ConfigError);
  CHECK_THROWS_AS(GeneratorBasis({"a", "a"}, 2, 1), ConfigError);
  CHECK_THROWS_AS(GeneratorBasis({}, 2, 1), ConfigError);
  GeneratorBasis b({"base", "fiber"}, 2, 1);
  CHECK(b.index_of("fiber") == 1);
  CHECK_THROWS_AS(b.index_of("nope"), ConfigError);
}

TEST_CASE("class trajectory") {
  const auto w0 = cls({"3", "2"}), c1 = cls({"2", "2"});
  CHECK(class_at(w0, c1, q("1/2")) == cls({"2", "1"}));
  CHECK(class_at(w0, c1, 0) == w0);
  CHECK_THROWS_AS(class_at(w0, cls({"1", "2", "3"}), 1), ConfigError);

  SUBCASE("linearity in t") {
    for (const char* s : {"0", "1/3", "-2/7", "5/2"})
      for (const char* t : {"0", "1/5", "3/4"})
        CHECK(class_at(w0, c1, q(s) + q(t)) == class_at(class_at(w0, c1, q(s)), c1, q(t)));
  }
}

TEST_CASE("F1 rates from adjunction") {
  // E^2 = -1 and H^2 = +1 on the blow-up of CP^2 at a point.
  const Rational alpha = c1_on_rational_curve(-1);
  const Rational beta = c1_on_rational_curve(1);
  CHECK(alpha == 1);
  CHECK(beta == 3);
  // The fiber F = H - E has F^2 = 0 and shrinks at c1.F = 2 = beta - alpha.
  CHECK(c1_on_rational_curve(0) == beta - alpha);

  const auto cfg = config::load_experiment(config_path("f1.cfg"));
  const auto& d = cfg.classes;
  CHECK(d.c1 == KahlerClass({alpha, beta}));
  CHECK(class_at(d.omega0, d.c1, q("1/4")) == KahlerClass({2 - alpha / 4, 3 - beta / 4}));

  const auto T = singular_time(d.omega0, d.c1, d.cone);
  REQUIRE(T.finite());
  CHECK(*T.time == Rational(3 - 2) / (beta - alpha));
  CHECK(d.cone.names[T.functional] == "cone#2");

  // residual vanishes iff a0 - T alpha = b0 - T beta = base coefficient of the target
  const auto res = collapsing_condition_residual(d.omega0, d.c1, *T.time, d.sigma);
  CHECK(res.is_zero());
  CHECK(d.sigma.coeffs[0] == 2 - *T.time * alpha);
  CHECK(d.sigma.coeffs[1] == 3 - *T.time * beta);
  CHECK_FALSE(collapsing_condition_residual(d.omega0, d.c1, *T.time, cls({"3/2", "2"})).is_zero());
}

TEST_CASE("singular time") {
  const auto cone = coordinate_cone(2);
  const auto T = singular_time(cls({"3", "2"}), cls({"2", "2"}), cone);
  REQUIRE(T.finite());
  CHECK(*T.time == 1);
  CHECK(T.functional == 1);
  CHECK_FALSE(singular_time(cls({"3", "2"}), cls({"0", "-1"}), cone).finite());
  CHECK_THROWS_AS(singular_time(cls({"0", "2"}), cls({"1", "1"}), cone), InvalidInput);

  SUBCASE("boundary point") {
    const auto w0 = cls({"3", "2"}), c1 = cls({"2", "2"});
    const Rational t = *T.time;
    const Rational eps = Rational(1) / 1000000;
    CHECK(cone.contains(class_at(w0, c1, t - eps)));
    bool some_zero = false;
    for (std::size_t i = 0; i < 2; ++i) some_zero |= cone.evaluate(i, class_at(w0, c1, t)) == 0;
    CHECK(some_zero);
  }
}

TEST_CASE("collapsing residual on CP1 x CP1") {
  const auto w0 = cls({"3", "2"}), c1 = cls({"2", "2"});
  CHECK(collapsing_condition_residual(w0, c1, 1, cls({"1", "0"})).is_zero());
  CHECK(collapsing_condition_residual(w0, c1, 1, cls({"1", "1"})) == cls({"0", "-1"}));
}

TEST_CASE("intersection pairing") {
  const auto t = p1xp1();
  const auto w0 = cls({"3", "2"}), s = cls({"1", "0"});
  CHECK(t.mixed_power(w0, 2, s) == 12);
  CHECK(t.mixed_power(w0, 1, s) == 2);
  CHECK(t.mixed_power(w0, 0, s) == 0);
  CHECK(t.get({1, 0}) == t.get({0, 1}));
  IntersectionTable partial(2);
  partial.set({0, 1}, 1);
  CHECK_THROWS_AS(partial.mixed_power(w0, 2, s), ConfigError);
  CHECK_NOTHROW(partial.mixed_power(cls({"1", "0"}), 1, cls({"0", "1"})));
  CHECK_THROWS_AS(partial.set({1, 0}, 2), ConfigError);
}

TEST_CASE("reference volume polynomial on CP1 x CP1") {
  const auto w0 = cls({"3", "2"}), s = cls({"1", "0"});
  const auto poly = reference_volume_polynomial(w0, s, p1xp1(), 1);
  CHECK_FALSE(poly.degenerate);
  CHECK(poly.lowest_nonzero_power() == 1);
  // brute force: ((T - t) w0 + t s)^2 / T^2
  for (const char* ts : {"0", "1/4", "1/2", "9/10", "999/1000"}) {
    const Rational t = q(ts);
    const auto h = (1 - t) * w0 + t * s;
    CHECK(poly.evaluate(t) == p1xp1().mixed_power(h, 2, h));
    // linear coefficient in (T - t) as a function of t: 2 [w0].[s] t
    CHECK((poly.terms[1].coefficient * t > 0 || t == 0));
  }
  CHECK(poly.terms[0].coefficient == 0);
  CHECK(poly.terms[1].coefficient > 0);
  CHECK(poly.coefficients_in_s[0] == 0);
  CHECK(poly.evaluate(1) == 0);
}

TEST_CASE("reference volume polynomial vanishing pattern") {
  const int n = 4;
  for (int r = 1; r <= 3; ++r) {
    CAPTURE(r);
    const auto table = fibration_table(n, r);
    const auto w0 = cls({"5/3", "2/7"}), s = cls({"1", "0"});
    const Rational T = q("3/2");
    const auto poly = reference_volume_polynomial(w0, s, table, T);
    for (int k = 0; k < r; ++k) {
      CHECK(poly.terms[k].coefficient == 0);
      CHECK(poly.coefficients_in_s[k] == 0);
    }
    CHECK(poly.lowest_nonzero_power() == r);
    // closed form of the (T - t)^r coefficient at t = T
    Rational binom = 1;
    for (int i = 0; i < r; ++i) binom = binom * (n - i) / (i + 1);
    Rational Tn = 1, Tnr = 1;
    for (int i = 0; i < n; ++i) Tn *= T;
    for (int i = 0; i < n - r; ++i) Tnr *= T;
    const Rational closed = binom * Tnr * table.mixed_power(w0, r, s) / Tn;
    CHECK(poly.terms[r].coefficient * Tnr == closed);
    CHECK(closed != 0);
    // value at any t matches direct expansion of the interpolated class
    const Rational t = q("2/5");
    const auto h = (Rational(1) / T) * ((T - t) * w0 + t * s);
    CHECK(poly.evaluate(t) == table.mixed_power(h, n, h));
  }
}

TEST_CASE("degenerate reference class") {
  const auto s = cls({"1", "0"});
  const auto poly = reference_volume_polynomial(s, s, p1xp1(), 1);
  CHECK(poly.degenerate);
  for (const auto& c : poly.coefficients_in_s) CHECK(c == 0);
  CHECK(poly.lowest_nonzero_power() == 3);
}

TEST_CASE("shipped configs validate exactly") {
  for (const char* name : {"f1.cfg", "product_flat.cfg", "product_cp1.cfg"}) {
    CAPTURE(name);
    const auto cfg = config::load_experiment(config_path(name));
    const auto report = validate(cfg.classes);
    CHECK(report.ok());
    CHECK(report.residual.is_zero());
  }
  const auto bad = config::load_experiment(config_path("product_cp1_bad.cfg"));
  const auto report = validate(bad.classes);
  CHECK_FALSE(report.ok());
  CHECK(*report.T.time == Rational(1) / 2);
  CHECK(report.residual == cls({"1", "0"}));
}

TEST_CASE("exact evaluation is repeatable") {
  const auto cfg = config::load_experiment(config_path("f1.cfg"));
  const auto a = reference_volume_polynomial(cfg.classes.omega0, cfg.classes.sigma, cfg.classes.table, q("1/2"));
  const auto b = reference_volume_polynomial(cfg.classes.omega0, cfg.classes.sigma, cfg.classes.table, q("1/2"));
  for (std::size_t k = 0; k < a.coefficients_in_s.size(); ++k)
    CHECK(to_string(a.coefficients_in_s[k]) == to_string(b.coefficients_in_s[k]));
}

TEST_CASE("config parse errors carry line numbers") {
  const std::string text = "[model]\nkind = product\nn = 2\n[classes]\ngenerators = a b\nomega0 = 1 x\n";
  try {
    config::parse_experiment(text, "mem");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("mem:6") != std::string::npos);
  }
  CHECK_THROWS_AS(config::parse_experiment("[model]\nkind product\n", "mem"), ConfigError);
  CHECK_THROWS_AS(config::parse_experiment("[nonsense]\nx = 1\n", "mem"), ConfigError);
}
