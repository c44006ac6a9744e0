// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.
//
//   acceptance [OUTPUT_DIR]

#include "krf/calabi.hpp"
#include "krf/classes.hpp"
#include "krf/config.hpp"
#include "krf/experiment.hpp"
#include "krf/flow.hpp"
#include "krf/rates.hpp"
#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

using namespace krf;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << ']';
    }
  }
};

void print(int id, const std::string& title, const Verdict& v) {
  std::printf("AC%d %s  %s:%s\n", id, v.pass ? "PASS" : "FAIL", title.c_str(), v.detail.str().c_str());
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

config::ExperimentConfig shipped(const std::string& name) {
  return config::load_experiment(fs::path(KRF_SOURCE_DIR) / "configs" / name);
}

rates::Table table(const fs::path& p, const std::vector<std::string>& columns) {
  std::ifstream in(p);
  return rates::read_csv(in, p.string(), columns);
}

// Trajectory rows with the Ricci hypothesis intact.
struct Series {
  std::vector<double> t, diam, R, Rm;
};

Series fit_series(const rates::Table& traj) {
  Series s;
  const auto ok = traj.index("hypothesis_ok"), t = traj.index("t"), d = traj.index("diam_fiber"),
             R = traj.index("R_sup"), Rm = traj.index("Rm_sup");
  for (const auto& row : traj.rows) {
    if (row[ok] != 1.0) continue;
    s.t.push_back(row[t]);
    s.diam.push_back(row[d]);
    s.R.push_back(row[R]);
    s.Rm.push_back(row[Rm]);
  }
  return s;
}

rates::RateFit last_decade_fit(const Series& s, const std::vector<double>& v, double T) {
  return rates::fit_power_law(s.t, v, T, rates::last_decades(T, s.t.back(), 1.0));
}

std::string fmt(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

// Profile from closed-form u, u', u''.
using Fn = std::function<double(double)>;
calabi::Profile exact(const Fn& u, const Fn& du, const Fn& d2u, double lo, double hi, std::size_t points,
                      double a, double b, double base = 1.0) {
  auto grid = calabi::Profile::uniform_grid(lo, hi, points);
  std::vector<double> v0(points), v1(points), v2(points);
  for (std::size_t i = 0; i < points; ++i) {
    v0[i] = u(grid.rho[i]);
    v1[i] = du(grid.rho[i]);
    v2[i] = d2u(grid.rho[i]);
  }
  return calabi::Profile::from_samples(grid.rho, v0, v1, v2, a, b, base);
}

calabi::Profile exact(const oracle::RandomProfile& prof, double lo, double hi, std::size_t points, double c = 1.0) {
  return exact([&](double r) { return c * prof(r); }, [&](double r) { return c * prof.d1(r); },
               [&](double r) { return c * prof.d2(r); }, lo, hi, points, c * prof.a(), c * prof.b(), c);
}

// Rounds to 50 significant bits, so that multiplying by 5/2 (or any c with
// at most three significant bits) is exact.
double short_mantissa(double x) {
  int e = 0;
  const double m = std::frexp(x, &e);
  return std::ldexp(std::round(std::ldexp(m, 50)), e - 50);
}

// The profile of `prof` and its exact multiple by c.
std::pair<calabi::Profile, calabi::Profile> homothetic_pair(const oracle::RandomProfile& prof, double lo, double hi,
                                                           std::size_t points, double c) {
  const auto f0 = [&](double r) { return short_mantissa(prof(r)); };
  const auto f1 = [&](double r) { return short_mantissa(prof.d1(r)); };
  const auto f2 = [&](double r) { return short_mantissa(prof.d2(r)); };
  const double a = short_mantissa(prof.a()), b = short_mantissa(prof.b());
  return {exact(f0, f1, f2, lo, hi, points, a, b, 1.0),
          exact([&](double r) { return c * f0(r); }, [&](double r) { return c * f1(r); },
                [&](double r) { return c * f2(r); }, lo, hi, points, c * a, c * b, c)};
}

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Only base^(n-r) fiber^r is nonzero.
classes::IntersectionTable fibration_table(int n, int r) {
  classes::IntersectionTable t(n);
  for (int k = 0; k <= n; ++k) {
    std::vector<std::size_t> mono;
    for (int i = 0; i < k; ++i) mono.push_back(0);
    for (int i = k; i < n; ++i) mono.push_back(1);
    t.set(mono, k == n - r ? Rational(1) : Rational(0));
  }
  return t;
}

bool same_files(const fs::path& a, const fs::path& b) {
  for (const char* f : {"trajectory.csv", "diagnostics.csv", "profile_initial.txt", "profile_final.txt"}) {
    if (!fs::exists(a / f) || slurp(a / f) != slurp(b / f)) return false;
  }
  return true;
}

std::string synthetic_trajectory(double exponent, double T) {
  std::ostringstream csv;
  const auto& cols = monitors::trajectory_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) csv << cols[c] << (c + 1 < cols.size() ? ',' : '\n');
  for (int i = 0; i <= 80; ++i) {
    const double s = T * std::pow(10.0, -4.0 * i / 80.0);
    csv << monitors::format_double(T - s) << ',' << monitors::format_double(1.7 * std::pow(s, exponent))
        << ",2,2,0,1,1,0," << monitors::format_double(1 / s) << ',' << monitors::format_double(1 / s) << ",-1,1\n";
  }
  return csv.str();
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "krf_acceptance";
  fs::remove_all(out);
  fs::create_directories(out);
  bool all_pass = true;

  // ---------------------------------------------------------------- AC1
  auto product = shipped("product_flat.cfg");
  product.solver.N = 256;
  product.solver.eps_stop = 1e-3;
  const auto product_setup = flow::Setup::from_config(product);
  const auto product_run = experiment::run(product, {out / "product", std::nullopt});
  {
    Verdict v;
    const double T = product_setup.T;
    const double lambda0 = to_double(product.classes.omega0.coeffs[1]);
    const auto traj = table(out / "product" / "trajectory.csv", monitors::trajectory_columns());
    const auto s = fit_series(traj);
    double err_diam = 0, err_R = 0;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      const double lambda = lambda0 - 2 * s.t[i];
      const double from_diam = std::pow(s.diam[i] / std::numbers::pi, 2);  // diam = pi sqrt(lambda)
      const double from_R = 2 / s.R[i];                                   // R = 2 / lambda on a flat base
      err_diam = std::max(err_diam, std::abs(from_diam - lambda) / lambda);
      err_R = std::max(err_R, std::abs(from_R - lambda) / lambda);
    }
    const auto fd = last_decade_fit(s, s.diam, T);
    const auto fR = last_decade_fit(s, s.R, T);
    v.detail << " t_end=" << fmt(s.t.back()) << " lambda rel err (diameter)=" << fmt(err_diam, 3)
             << " (curvature)=" << fmt(err_R, 3) << " diam exponent=" << fmt(fd.exponent)
             << " R exponent=" << fmt(fR.exponent) << " runtime=" << fmt(product_run.wall_seconds, 3) << "s";
    v.require(product_run.completed(), "run completed");
    v.require(std::abs(s.t.back() - (T - 1e-3)) < 1e-12, "reached T - 1e-3");
    v.require(err_diam <= 1e-3 && err_R <= 1e-3, "lambda(t) = lambda0 - 2t to 1e-3");
    v.require(std::abs(fd.exponent - 0.5) <= 0.01, "diameter exponent 0.5 +- 0.01");
    v.require(std::abs(fR.exponent + 1.0) <= 0.01, "R exponent -1 +- 0.01");
    v.require(product_run.wall_seconds <= 30.0, "runtime <= 30 s");
    print(1, "product oracle", v);
    all_pass = all_pass && v.pass;
  }

  // ---------------------------------------------------------------- AC2
  auto f1 = shipped("f1.cfg");
  f1.solver.N = 512;
  f1.solver.eps_stop = 1e-4;
  const auto f1_setup = flow::Setup::from_config(f1);
  const auto f1_run = experiment::run(f1, {out / "f1", std::nullopt});
  const auto f1_traj = table(out / "f1" / "trajectory.csv", monitors::trajectory_columns());
  const auto f1_diag = table(out / "f1" / "diagnostics.csv", monitors::diagnostic_columns());
  {
    Verdict v;
    const double T = f1_setup.T;
    const auto s = fit_series(f1_traj);
    const auto fd = last_decade_fit(s, s.diam, T);
    const auto fR = last_decade_fit(s, s.R, T);
    const auto fRm = last_decade_fit(s, s.Rm, T);
    v.detail << " records=" << f1_traj.rows.size() << " fitted=" << s.t.size() << " window=[" << fmt(fd.window.t_lo)
             << ", " << fmt(fd.window.t_hi) << "] diam exponent=" << fmt(fd.exponent)
             << " R exponent=" << fmt(fR.exponent) << " Rm exponent=" << fmt(fRm.exponent)
             << " runtime=" << fmt(f1_run.wall_seconds, 3) << "s";
    v.require(f1_run.completed(), "run completed");
    v.require(std::abs(s.t.back() - (T - 1e-4)) < 1e-12, "reached T - 1e-4");
    v.require(fd.exponent >= 0.45 && fd.exponent <= 0.55, "diameter exponent in [0.45, 0.55]");
    v.require(fR.exponent >= -1.1 && fR.exponent <= -0.9, "R exponent in [-1.1, -0.9]");
    v.require(fRm.exponent >= -2.1, "Rm exponent >= -2.1");
    v.require(f1_run.wall_seconds <= 300.0, "runtime <= 5 min");
    print(2, "F1 collapse rates", v);
    all_pass = all_pass && v.pass;
  }

  // ---------------------------------------------------------------- AC3
  {
    Verdict v;
    config::RatesSettings settings;
    settings.bounded_factor = 10.0;
    settings.bounded = {"vr_sup", "npot_sup", "Q_sup", "equivalence"};
    const auto rep = rates::build_report(f1_traj, &f1_diag, settings, f1_setup.T);
    const auto t = f1_traj.column("t");
    v.detail << " first decile=" << rates::early_count(t, f1_setup.T) << " of " << t.size() << " records";
    for (const auto& b : rep.bounded) {
      v.detail << ' ' << b.quantity << ": max=" << fmt(b.run_max) << " early=" << fmt(b.early_max)
               << " limit=" << fmt(b.limit);
      v.require(b.pass, b.quantity + " bounded");
    }
    v.require(rep.bounded.size() == 5, "five boundedness verdicts");
    print(3, "lemma shadows bounded", v);
    all_pass = all_pass && v.pass;
  }

  // ---------------------------------------------------------------- AC4
  {
    Verdict v;
    const auto model = calabi::AnsatzModel::projective_bundle_k1(2);
    std::mt19937_64 rng(20261018);
    double worst = 0;
    std::size_t samples = 0;
    bool warned = false;
    for (int trial = 0; trial < 10; ++trial) {
      const auto prof = oracle::RandomProfile::draw(rng);
      const auto p = exact(prof, -3, 3, 512);
      const auto G = calabi::log_volume_form(model, p);
      const auto ric = calabi::ricci_eigenvalues(model, p);
      warned = warned || ric.accuracy_warning;
      for (std::size_t i = 3; i < p.size(); i += 8) {
        const auto ref = oracle::evaluate(prof, p.rho[i]);
        const auto rel = [](double x, double r) { return std::abs(x - r) / std::max(1.0, std::abs(r)); };
        worst = std::max({worst, rel(G[i], ref.G), rel(ric.base[i], ref.nu_base), rel(ric.fiber[i], ref.nu_fiber)});
        ++samples;
      }
    }
    double flat_R = 0, flat_Rm = 0;
    for (int n : {2, 3}) {
      const auto m = calabi::AnsatzModel::projective_bundle_k1(n);
      const Fn e = [](double r) { return std::exp(r); };
      const auto p = exact(e, e, e, -3, 3, 512, 0.0, 1e300);
      flat_R = std::max(flat_R, max_abs(calabi::scalar_curvature(m, p)));
      flat_Rm = std::max(flat_Rm, max_abs(calabi::riemann_norm(m, p).values));
    }
    double homothety = 0;
    const auto prof = oracle::RandomProfile::draw(rng);
    const double c = 2.5;
    for (const auto& m : {calabi::AnsatzModel::projective_bundle_k1(2), calabi::AnsatzModel::product(2, 0.0)}) {
      const auto [p, q] = homothetic_pair(prof, -4, 4, 512, c);
      const auto Rp = calabi::scalar_curvature(m, p), Rq = calabi::scalar_curvature(m, q);
      const auto Mp = calabi::riemann_norm(m, p).values, Mq = calabi::riemann_norm(m, q).values;
      for (std::size_t i = 0; i < p.size(); ++i) {
        homothety = std::max(homothety, std::abs(c * Rq[i] - Rp[i]) / std::max(1.0, std::abs(Rp[i])));
        homothety = std::max(homothety, std::abs(c * Mq[i] - Mp[i]) / std::max(1.0, Mp[i]));
      }
      const double dp = calabi::fiber_diameter(m, p), dq = calabi::fiber_diameter(m, q);
      homothety = std::max(homothety, std::abs(dq - std::sqrt(c) * dp) / dp);
    }
    v.detail << " oracle rel err=" << fmt(worst, 3) << " over " << samples << " samples, flat |R|=" << fmt(flat_R, 3)
             << " |Rm|=" << fmt(flat_Rm, 3) << " homothety defect=" << fmt(homothety, 3);
    v.require(worst <= 1e-6, "oracle agreement 1e-6");
    v.require(!warned, "no accuracy warnings");
    v.require(flat_R <= 1e-8 && flat_Rm <= 1e-8, "flat curvature 1e-8");
    v.require(homothety <= 1e-10, "homothety 1e-10");
    print(4, "curvature oracle", v);
    all_pass = all_pass && v.pass;
  }

  // ---------------------------------------------------------------- AC5
  {
    Verdict v;
    for (const char* name : {"f1.cfg", "product_flat.cfg", "product_cp1.cfg"}) {
      const auto report = classes::validate(shipped(name).classes);
      v.detail << ' ' << name << " residual=" << report.residual.str();
      v.require(report.ok() && report.residual.is_zero(), std::string(name) + " residual exactly zero");
    }
    const int n = 4;
    const classes::KahlerClass w0({Rational(5, 3), Rational(2, 7)}), sigma({Rational(1), Rational(0)});
    for (int r = 1; r <= 3; ++r) {
      const auto poly = classes::reference_volume_polynomial(w0, sigma, fibration_table(n, r), Rational(3, 2));
      bool vanish = true;
      for (int k = 0; k < r; ++k) vanish = vanish && poly.terms[k].coefficient == 0;
      v.detail << " r=" << r << " lowest power=" << poly.lowest_nonzero_power();
      v.require(vanish && poly.lowest_nonzero_power() == r, "vanishing below r = " + std::to_string(r));
    }
    const double a_rate = -to_double(f1.classes.c1.coeffs[0]);
    const double b_rate = -to_double(f1.classes.c1.coeffs[1]);
    double slope = 0;
    const auto dl = f1_diag.column("drift_left"), dr = f1_diag.column("drift_right");
    for (std::size_t i = 0; i < dl.size(); ++i)
      slope = std::max({slope, std::abs(dl[i] - a_rate), std::abs(dr[i] - b_rate)});
    v.detail << " endpoint slopes (" << fmt(a_rate) << ", " << fmt(b_rate) << ") max defect=" << fmt(slope, 3);
    v.require(slope <= 1e-3, "endpoint slopes within 1e-3");
    print(5, "cohomology exactness", v);
    all_pass = all_pass && v.pass;
  }

  // ---------------------------------------------------------------- AC6
  {
    Verdict v;
    for (const auto* r : {&product_run, &f1_run}) {
      v.detail << " positivity " << r->positivity_checks << " states, " << r->positivity_failures << " failures;";
      v.require(r->positivity_failures == 0 && r->positivity_checks == r->accepted + 1, "every accepted state positive");
    }
    const auto rerun = experiment::run(product, {out / "product_rerun", std::nullopt});
    const bool identical = rerun.accepted == product_run.accepted && same_files(out / "product", out / "product_rerun");
    v.detail << " rerun bit-identical=" << (identical ? "yes" : "no");
    v.require(identical, "bit-identical rerun");

    auto cfg = product;
    cfg.rates.expectations = {{"diam_fiber", 0.5, 0.01, false}};
    cfg.rates.bounded.clear();
    bool separated = true;
    for (const double p : {0.5, 1.0 / 3.0}) {
      const auto dir = out / (p == 0.5 ? "synthetic_half" : "synthetic_third");
      fs::create_directories(dir);
      std::ofstream(dir / "trajectory.csv", std::ios::binary) << synthetic_trajectory(p, product_setup.T);
      const auto rep = experiment::report(cfg, dir);
      v.detail << " synthetic exponent " << fmt(p, 4) << " -> " << (rep.pass ? "PASS" : "FAIL");
      separated = separated && rep.pass == (p == 0.5);
    }
    v.require(separated, "1/3 rate reported FAIL, 1/2 rate PASS");
    print(6, "positivity and determinism", v);
    all_pass = all_pass && v.pass;
  }

  std::printf("acceptance %s\n", all_pass ? "PASS" : "FAIL");
  return all_pass ? 0 : 1;
}
