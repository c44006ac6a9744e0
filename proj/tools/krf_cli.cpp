// krf: batch driver for Kähler-Ricci flow experiments.
//
//   krf validate --config F        class checks (exact arithmetic)
//   krf run      --config F [--out D] [--cadence K]
//   krf report   --config F [--out D | --trajectory CSV]
//   krf all      --config F [--out D] [--cadence K]
//
// Exit status: 0 success, 2 validation failure, 3 solver abort, 4 report FAIL,
// 1 any other error (usage, i/o, CSV schema).

#include "krf/krf.h"

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <optional>
#include <string>

namespace {

enum Exit { kOk = 0, kError = 1, kInvalid = 2, kAbort = 3, kReportFail = 4 };

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::string> trajectory;
  std::size_t cadence = 0;
  bool quiet = false;
};

using Handle = std::unique_ptr<krf_experiment, decltype(&krf_experiment_free)>;

int report_error(const char* what, krf_status status) {
  std::fprintf(stderr, "krf: %s: %s: %s\n", what, krf_status_name(status), krf_last_error());
  return status == KRF_E_CONFIG || status == KRF_E_INVALID_INPUT ? kInvalid : kError;
}

const char* termination_name(krf_termination t) {
  switch (t) {
    case KRF_TERM_REACHED_STOP: return "reached_stop";
    case KRF_TERM_ALREADY_PAST_STOP: return "already_past_stop";
    case KRF_TERM_STEP_UNDERFLOW: return "step_underflow";
    case KRF_TERM_POSITIVITY_FAILURE: return "positivity_failure";
    case KRF_TERM_STOPPED_BY_MONITOR: return "stopped_by_monitor";
  }
  return "unknown";
}

int do_validate(krf_experiment* exp, const Options& o) {
  int ok = 0;
  if (const auto s = krf_validate(exp, &ok); s != KRF_OK) return report_error("validate", s);
  if (!o.quiet || !ok) std::fputs(krf_validation_text(exp), ok ? stdout : stderr);
  return ok ? kOk : kInvalid;
}

int do_run(krf_experiment* exp, const Options& o) {
  krf_run_info info{};
  const char* out = o.out ? o.out->c_str() : nullptr;
  if (const auto s = krf_run(exp, out, o.cadence, &info); s != KRF_OK) return report_error("run", s);
  const char* dir = out ? out : krf_experiment_output_dir(exp);
  if (!o.quiet || !info.completed) {
    std::FILE* f = info.completed ? stdout : stderr;
    std::fprintf(f, "termination: %s\n", termination_name(info.termination));
    if (const char* msg = krf_run_message(exp); msg && *msg) std::fprintf(f, "message: %s\n", msg);
    std::fprintf(f, "steps: %zu accepted, %zu rejected\n", info.accepted_steps, info.rejected_steps);
    std::fprintf(f, "positivity: %zu states checked, %zu failures\n", info.positivity_checks,
                 info.positivity_failures);
    std::fprintf(f, "records: %zu (A = %.6g)\n", info.records, info.A);
    if (info.has_violation)
      std::fprintf(f, "ricci hypothesis: violated from t = %.17g\n", info.first_violation);
    else
      std::fprintf(f, "ricci hypothesis: ok\n");
    std::fprintf(f, "wall time: %.3f s\n", info.wall_seconds);
    std::fprintf(f, "artifacts: %s\n", dir);
  }
  return info.completed ? kOk : kAbort;
}

int do_report(krf_experiment* exp, const Options& o) {
  int pass = 0;
  krf_status s;
  if (o.trajectory)
    s = krf_report_file(exp, o.trajectory->c_str(), &pass);
  else
    s = krf_report(exp, o.out ? o.out->c_str() : nullptr, &pass);
  if (s != KRF_OK) {
    std::fprintf(stderr, "krf: report: %s: %s\n", krf_status_name(s), krf_last_error());
    return kError;
  }
  if (!o.quiet || !pass) std::fputs(krf_report_text(exp), stdout);
  return pass ? kOk : kReportFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kähler-Ricci flow with fiber collapse: validate, run and report experiments"};
  app.set_version_flag("--version", std::string(krf_version()));
  app.require_subcommand(1);

  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "experiment configuration file")->required()->check(CLI::ExistingFile);
    sub->add_flag("--quiet", o.quiet, "print only failures");
  };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.out, "output directory (overrides the config)"); };
  auto add_cadence = [&](CLI::App* sub) {
    sub->add_option("--cadence", o.cadence, "accepted steps between monitor records")->check(CLI::PositiveNumber);
  };

  auto* validate = app.add_subcommand("validate", "check the class data and print T, trajectory and residual");
  add_common(validate);
  auto* classes = app.add_subcommand("classes", "same as validate");
  add_common(classes);
  auto* run = app.add_subcommand("run", "run the flow and write trajectory, profiles and manifest");
  add_common(run);
  add_out(run);
  add_cadence(run);
  auto* report = app.add_subcommand("report", "fit rates and boundedness verdicts from a trajectory");
  add_common(report);
  auto* out_opt = report->add_option("--out", o.out, "run directory holding trajectory.csv");
  report->add_option("--trajectory", o.trajectory, "explicit trajectory CSV")
      ->check(CLI::ExistingFile)
      ->excludes(out_opt);
  auto* all = app.add_subcommand("all", "validate, run and report");
  add_common(all);
  add_out(all);
  add_cadence(all);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  krf_experiment* raw = nullptr;
  if (const auto s = krf_experiment_load(o.config.c_str(), &raw); s != KRF_OK) return report_error("config", s);
  Handle exp(raw, krf_experiment_free);

  if (validate->parsed() || classes->parsed()) return do_validate(exp.get(), o);
  if (report->parsed()) return do_report(exp.get(), o);
  if (run->parsed()) {
    if (const int v = do_validate(exp.get(), Options{o.config, {}, {}, 0, true}); v != kOk) return v;
    return do_run(exp.get(), o);
  }
  if (const int v = do_validate(exp.get(), o); v != kOk) return v;
  if (const int r = do_run(exp.get(), o); r != kOk) return r;
  return do_report(exp.get(), o);
}
