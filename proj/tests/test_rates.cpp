#include "krf/error.hpp"
#include "krf/monitors.hpp"
#include "krf/rates.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace krf;
using namespace krf::rates;

namespace {

constexpr double kT = 0.5;

// Times geometric in T - t, from T - 0.5 down to T - 1e-4.
std::vector<double> times(std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = kT - 0.5 * std::pow(2e-4, static_cast<double>(i) / static_cast<double>(n - 1));
  return t;
}

std::vector<double> series(const std::vector<double>& t, double c, double p, double lower = 0.0) {
  std::vector<double> v;
  for (double x : t) v.push_back(c * std::pow(kT - x, p) + lower * (kT - x));
  return v;
}

std::string synthetic_csv(double diam_exponent, std::size_t n = 120, double violation_from = 1.0) {
  const auto t = times(n);
  std::vector<monitors::MonitorRecord> recs;
  for (double x : t) {
    const double s = kT - x;
    monitors::MonitorRecord r;
    r.t = x;
    r.diam_fiber = 4.44 * std::pow(s, diam_exponent);
    r.vr_sup = 4.0 + 2 * s;
    r.vr_inf = 2.0;
    r.npot_sup = 0.3 * (1 - s / 0.5) + 0.05;
    r.trace0_scaled_sup = 1.0;
    r.trace_sigma_sup = 1.0;
    r.Q_sup = 0.2 * (1 - s / 0.5);
    r.R_sup = 1.0 / s;
    r.Rm_sup = 1.0 / s + 2.0;
    r.ricci_margin = x < violation_from ? -1.0 : 1.0;
    r.hypothesis_ok = x < violation_from;
    recs.push_back(r);
  }
  std::ostringstream os;
  monitors::write_trajectory_csv(os, recs);
  return os.str();
}

config::RatesSettings settings() {
  config::RatesSettings s;
  s.expectations = {{"diam_fiber", 0.5, 0.01, false}, {"R_sup", -1.0, 0.01, false}, {"Rm_sup", -2.0, 0.1, true}};
  s.bounded = {"vr_sup", "npot_sup", "Q_sup"};
  return s;
}

Report report_for(const std::string& csv, const config::RatesSettings& s = settings()) {
  std::istringstream is(csv);
  const auto table = read_csv(is, "synthetic.csv", monitors::trajectory_columns());
  return build_report(table, nullptr, s, kT);
}

}  // namespace

TEST_CASE("exact power laws") {
  const auto t = times(50);
  const Window w{0.0, t.back()};
  const auto d = fit_power_law(t, series(t, 2.0, 0.5), kT, w);
  CHECK(std::abs(d.exponent - 0.5) < 1e-10);
  CHECK(d.residual_rms < 1e-12);
  CHECK(d.n_points == 50);
  CHECK(std::exp(d.intercept) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(std::abs(fit_power_law(t, series(t, 1.0, -1.0), kT, w).exponent + 1.0) < 1e-10);
  CHECK(std::abs(fit_power_law(t, std::vector<double>(50, 3.7), kT, w).exponent) < 1e-10);
}

TEST_CASE("scaling changes only the intercept") {
  const auto t = times(40);
  auto v = series(t, 1.0, -1.0, 5.0);
  const Window w{0.0, t.back()};
  const auto a = fit_power_law(t, v, kT, w);
  for (auto& x : v) x *= 7.5;
  const auto b = fit_power_law(t, v, kT, w);
  CHECK(b.exponent == doctest::Approx(a.exponent).epsilon(1e-13));
  CHECK(b.intercept - a.intercept == doctest::Approx(std::log(7.5)).epsilon(1e-12));
}

TEST_CASE("subsampling an exact power law leaves the exponent unchanged") {
  const auto t = times(64);
  const auto v = series(t, 0.3, 0.5);
  std::vector<double> ts, vs;
  for (std::size_t i = 0; i < t.size(); i += 2) {
    ts.push_back(t[i]);
    vs.push_back(v[i]);
  }
  const Window w{0.0, t.back()};
  CHECK(std::abs(fit_power_law(ts, vs, kT, w).exponent - fit_power_law(t, v, kT, w).exponent) < 1e-12);
}

TEST_CASE("drift decreases as windows approach T") {
  const auto t = times(400);
  const auto windows = approaching_windows(kT, t.back(), 1.0, 0.5, 5);
  REQUIRE(windows.size() == 5);
  CHECK(windows.back().t_hi == t.back());
  for (std::size_t k = 1; k < windows.size(); ++k) CHECK(windows[k].t_lo > windows[k - 1].t_lo);

  const auto exact = windowed_stability(t, series(t, 1.0, 0.5), kT, windows);
  for (double d : exact.drift) CHECK(d < 1e-10);

  const auto perturbed = windowed_stability(t, series(t, 1.0, 0.5, 0.8), kT, windows);
  REQUIRE(perturbed.drift.size() == 4);
  for (std::size_t k = 1; k < perturbed.drift.size(); ++k) CHECK(perturbed.drift[k] < perturbed.drift[k - 1]);
  CHECK(std::abs(perturbed.fits.back().exponent - 0.5) < std::abs(perturbed.fits.front().exponent - 0.5));
}

TEST_CASE("fit errors") {
  const auto t = times(30);
  auto v = series(t, 1.0, 0.5);
  v[27] = 0.0;
  v[29] = -1.0;
  try {
    fit_power_law(t, v, kT, {0.0, t.back()});
    FAIL("expected a fit error");
  } catch (const FitError& e) {
    CHECK(std::string(e.what()).find("sample 27") != std::string::npos);
  }
  CHECK_THROWS_AS(fit_power_law(t, series(t, 1.0, 0.5), kT, {t[24], t.back()}), FitError);
  CHECK_NOTHROW(fit_power_law(t, series(t, 1.0, 0.5), kT, {t[22], t.back()}));
  CHECK_THROWS_AS(fit_power_law(t, series(t, 1.0, 0.5), kT, {0.0, kT}), InvalidInput);
}

TEST_CASE("default window is the last decade") {
  const auto w = last_decades(1.0, 1.0 - 1e-3, 1.0);
  CHECK(w.t_lo == doctest::Approx(0.99));
  CHECK(w.t_hi == 1.0 - 1e-3);
}

TEST_CASE("csv schema errors name the column") {
  std::istringstream wrong("t,diam,vr_sup\n0,1,2\n");
  try {
    read_csv(wrong, "x.csv", monitors::trajectory_columns());
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()) == "x.csv: column 2 is 'diam', expected 'diam_fiber'");
  }
  std::istringstream shortrow("a,b\n1\n");
  CHECK_THROWS_AS(read_csv(shortrow, "y.csv"), SchemaError);
  std::istringstream text("a,b\n1,zz\n");
  CHECK_THROWS_WITH_AS(read_csv(text, "z.csv"), "z.csv:2: column 'b' holds non-numeric value 'zz'", SchemaError);
  std::istringstream ok("a,b\n1,nan\n2,3\n");
  const auto t = read_csv(ok, "ok.csv");
  CHECK(t.rows.size() == 2);
  CHECK(std::isnan(t.rows[0][1]));
  CHECK_THROWS_AS(t.index("c"), SchemaError);
}

TEST_CASE("report passes the square-root rate and fails the cube-root rate") {
  const auto good = report_for(synthetic_csv(0.5));
  CHECK(good.pass);
  REQUIRE(good.rates.size() == 3);
  CHECK(good.rates[0].pass);
  CHECK(std::abs(good.rates[0].fit->exponent - 0.5) < 1e-10);
  CHECK(good.rates[1].pass);
  CHECK(good.rates[2].pass);  // one-sided: about -1 >= -2.1

  const auto bad = report_for(synthetic_csv(1.0 / 3));
  CHECK_FALSE(bad.pass);
  CHECK_FALSE(bad.rates[0].pass);
  CHECK(bad.rates[0].fit->exponent == doctest::Approx(1.0 / 3));

  std::ostringstream os;
  write_report(os, bad);
  CHECK(os.str().find("rate diam_fiber") != std::string::npos);
  CHECK(os.str().find("overall FAIL") != std::string::npos);
}

TEST_CASE("boundedness windows") {
  const auto rep = report_for(synthetic_csv(0.5));
  REQUIRE(rep.bounded.size() == 3);
  for (const auto& b : rep.bounded) {
    CAPTURE(b.quantity);
    CHECK(b.pass);
  }
  // Q is a logarithm: the window is additive.
  CHECK(rep.bounded[2].limit == doctest::Approx(rep.bounded[2].early_max + std::log(10.0)));
  CHECK(rep.bounded[0].limit == doctest::Approx(10 * rep.bounded[0].early_max));

  // A series that keeps growing fails.
  auto s = settings();
  s.bounded = {"R_sup"};
  const auto grow = report_for(synthetic_csv(0.5), s);
  CHECK_FALSE(grow.bounded[0].pass);

  s.bounded = {"equivalence"};
  const auto missing = report_for(synthetic_csv(0.5), s);
  CHECK_FALSE(missing.bounded[0].pass);
  CHECK_FALSE(missing.bounded[0].error.empty());
}

TEST_CASE("early decile is measured in log(T - t)") {
  const auto t = times(101);
  CHECK(early_count(t, kT) == 11);
  const std::vector<double> one{0.1};
  CHECK(early_count(one, kT) == 1);
}

TEST_CASE("hypothesis-violated records are excluded from fits") {
  const auto rep = report_for(synthetic_csv(0.5, 200, 0.49));
  REQUIRE(rep.first_violation.has_value());
  CHECK(*rep.first_violation >= 0.49);
  CHECK(rep.fitted_records < rep.records);
  CHECK(rep.rates_violated.size() == rep.rates.size());
  REQUIRE(rep.rates[0].fit.has_value());
  CHECK(rep.rates[0].fit->window.t_hi < 0.49);
  std::ostringstream os;
  write_report(os, rep);
  CHECK(os.str().find("ricci_hypothesis=violated_from_t=") != std::string::npos);
  CHECK(os.str().find("rate_all_records") != std::string::npos);
}
