#include "krf/experiment.hpp"

#include "krf/error.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace krf::experiment {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string profile_dump(const flow::Setup& setup, const flow::FlowState& st, const config::ExperimentConfig& cfg,
                         const std::string& label) {
  const auto geo = calabi::analyze(st.profile);
  const auto prof = calabi::to_rho_profile(st.profile, geo, cfg.solver.R, cfg.solver.dump_points);
  std::ostringstream h;
  h.imbue(std::locale::classic());
  h << std::setprecision(17);
  h << label << '\n'
    << "model = " << calabi::to_string(setup.model.kind) << " n = " << setup.model.n << '\n'
    << "t = " << st.t << " T = " << setup.T << '\n'
    << "a = " << st.profile.a << " b = " << st.profile.b << " base_eigenvalue = " << st.profile.base_eigenvalue
    << '\n'
    << "momentum_intervals = " << st.profile.intervals() << " rho_mid = " << st.profile.rho_mid;
  return calabi::dump_profile(prof, h.str());
}

}  // namespace

std::string version() {
  std::ostringstream os;
  os << "krf " << kVersion << "; compiler " << __VERSION__ << "; eigen " << EIGEN_WORLD_VERSION << '.'
     << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << "; boost " << BOOST_LIB_VERSION;
  return os.str();
}

Validation validate(const config::ExperimentConfig& cfg) {
  Validation v;
  const auto& cd = cfg.classes;
  v.report = classes::validate(cd);
  std::ostringstream os;
  os << "config: " << cfg.origin << " (hash " << config::content_hash(cfg.source_text) << ")\n";
  os << "model: " << calabi::to_string(cfg.kind) << ", n = " << cd.basis.dim_complex
     << ", fiber dimension r = " << cd.basis.fiber_dim << '\n';
  os << "generators:";
  for (const auto& g : cd.basis.labels) os << ' ' << g;
  os << '\n';
  os << "omega0 = " << cd.omega0.str() << "\nc1     = " << cd.c1.str() << "\nsigma  = " << cd.sigma.str() << '\n';
  os << "omega0 in cone: " << (v.report.omega0_in_cone ? "yes" : "no") << '\n';
  for (std::size_t i = 0; i < cd.cone.functionals.size(); ++i)
    os << "  " << cd.cone.names[i] << ": " << to_string(cd.cone.evaluate(i, cd.omega0)) << " > 0\n";
  if (v.report.T.finite()) {
    const Rational T = *v.report.T.time;
    os << "T = " << to_string(T) << " (" << std::setprecision(17) << to_double(T) << "), cone exit through "
       << cd.cone.names[v.report.T.functional] << '\n';
    os << "class trajectory [omega_t] = [omega0] - t c1:\n";
    for (const Rational& s : {Rational(0), Rational(1, 4), Rational(1, 2), Rational(3, 4), Rational(1)}) {
      const Rational t = s * T;
      os << "  t = " << to_string(t) << ": " << classes::class_at(cd.omega0, cd.c1, t).str() << '\n';
    }
    os << "collapsing residual [omega0] - T c1 - [sigma] = " << v.report.residual.str() << '\n';
    if (v.report.residual.is_zero()) {
      const auto poly = classes::reference_volume_polynomial(cd.omega0, cd.sigma, cd.table, T);
      os << "reference volume: lowest power of (T - t) = " << poly.lowest_nonzero_power() << " (r = "
         << cd.basis.fiber_dim << ")\n";
    }
  } else {
    os << "T = infinity (the class never leaves the cone)\n";
  }
  v.ok = v.report.ok();
  os << "status: " << (v.ok ? "OK" : "INVALID") << '\n';
  v.text = os.str();
  return v;
}

fs::path resolve_out_dir(const config::ExperimentConfig& cfg, const RunOptions& opts) {
  return opts.out_dir ? *opts.out_dir : fs::path(cfg.output_dir);
}

RunResult run(const config::ExperimentConfig& cfg, const RunOptions& opts) {
  const auto v = validate(cfg);
  if (!v.ok) throw InvalidInput("configuration failed validation; no run was started\n" + v.text);
  const auto setup = flow::Setup::from_config(cfg);
  const auto ctrl = flow::StepControl::from_config(cfg.solver);
  const std::size_t cadence = opts.cadence.value_or(cfg.monitor.cadence);
  if (cadence == 0) throw InvalidInput("monitor cadence must be positive");

  RunResult res;
  res.out_dir = resolve_out_dir(cfg, opts);
  res.A = cfg.monitor.A.value_or(monitors::default_A(setup, ctrl.N));
  monitors::Monitor monitor(setup, monitors::BConfig{cfg.monitor.B, res.A});
  const double t_stop = setup.T - ctrl.eps_stop;

  const auto start = std::chrono::steady_clock::now();
  const auto initial = flow::initial_state(setup, ctrl.N);
  flow::FlowState last = initial;
  std::string abort_reason;
  const auto summary = flow::run(setup, initial, ctrl, 1, [&](const flow::FlowState& st) {
    ++res.positivity_checks;
    const auto& p = st.profile;
    bool positive = p.a >= 0;
    for (std::size_t j = 1; j < p.intervals(); ++j) positive = positive && p.psi[j] > 0 && p.tau(j) > 0;
    if (!positive) {
      ++res.positivity_failures;
      abort_reason = "nonpositive metric at t = " + std::to_string(st.t);
      return false;
    }
    last = st;
    if (st.accepted % cadence == 0 || st.t >= t_stop) {
      try {
        monitor.observe(st);
      } catch (const GeometryError& e) {
        abort_reason = std::string("monitor evaluation failed: ") + e.what();
        return false;
      }
    }
    return true;
  });
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  res.termination = summary.termination;
  res.message = abort_reason.empty() ? summary.message : abort_reason;
  res.records = monitor.records();
  res.first_violation = monitor.first_violation();
  res.accepted = summary.final_state.accepted;
  res.rejected = summary.final_state.rejected;

  fs::create_directories(res.out_dir);
  {
    std::ostringstream a, b;
    monitors::write_trajectory_csv(a, res.records);
    monitors::write_diagnostics_csv(b, res.records);
    write_file(res.out_dir / "trajectory.csv", a.str());
    write_file(res.out_dir / "diagnostics.csv", b.str());
  }
  write_file(res.out_dir / "profile_initial.txt", profile_dump(setup, initial, cfg, "initial profile"));
  write_file(res.out_dir / "profile_final.txt", profile_dump(setup, last, cfg, "final profile"));

  std::ostringstream m;
  m.imbue(std::locale::classic());
  m << std::setprecision(17);
  m << "version = " << version() << '\n'
    << "config = " << cfg.origin << '\n'
    << "config_hash = " << config::content_hash(cfg.source_text) << '\n'
    << "termination = " << flow::to_string(res.termination) << '\n';
  if (!res.message.empty()) m << "message = " << res.message << '\n';
  m << "T = " << setup.T << '\n'
    << "t_final = " << last.t << '\n'
    << "accepted_steps = " << res.accepted << '\n'
    << "rejected_steps = " << res.rejected << '\n'
    << "positivity_checks = " << res.positivity_checks << '\n'
    << "positivity_failures = " << res.positivity_failures << '\n'
    << "records = " << res.records.size() << '\n'
    << "cadence = " << cadence << '\n'
    << "B = " << cfg.monitor.B << '\n'
    << "A = " << res.A << (cfg.monitor.A ? " (config)" : " (default)") << '\n'
    << "ricci_hypothesis_first_violation = ";
  if (res.first_violation)
    m << *res.first_violation << '\n';
  else
    m << "none\n";
  m << "wall_seconds = " << res.wall_seconds << '\n'
    << "\n[config]\n"
    << cfg.source_text;
  write_file(res.out_dir / "manifest.txt", m.str());
  return res;
}

rates::Report report_file(const config::ExperimentConfig& cfg, const fs::path& trajectory_csv) {
  const auto v = validate(cfg);
  if (!v.report.T.finite()) throw InvalidInput("report needs a finite singular time");
  const double T = to_double(*v.report.T.time);
  std::ifstream in(trajectory_csv);
  if (!in) throw IoError("cannot read " + trajectory_csv.string());
  const auto traj = rates::read_csv(in, trajectory_csv.string(), monitors::trajectory_columns());
  std::optional<rates::Table> diag;
  const auto diag_path = trajectory_csv.parent_path() / "diagnostics.csv";
  if (fs::exists(diag_path)) {
    std::ifstream din(diag_path);
    diag = rates::read_csv(din, diag_path.string(), monitors::diagnostic_columns());
  }
  return rates::build_report(traj, diag ? &*diag : nullptr, cfg.rates, T);
}

rates::Report report(const config::ExperimentConfig& cfg, const fs::path& out_dir) {
  auto rep = report_file(cfg, out_dir / "trajectory.csv");
  std::ostringstream os;
  rates::write_report(os, rep);
  write_file(out_dir / "report.txt", os.str());
  return rep;
}

}  // namespace krf::experiment
